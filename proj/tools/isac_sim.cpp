// SPDX-License-Identifier: Apache-2.0
//
// isac-sim: one-shot allocation, threshold and budget sweeps, detection
// Monte Carlo and chart rendering.
//
// Exit codes: 0 ok, 2 configuration/usage error, 3 infeasible one-shot
// solve, 4 I/O error.

#include "isac/isac.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitIo = 4;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<std::string> solver;
    std::string out;
    int threads = 1;
};

void add_common(CLI::App* cmd, Common& c, bool needs_out)
{
    cmd->add_option("--config", c.config, "JSON run configuration")->required();
    cmd->add_option("--seed", c.seed, "Master seed (overrides the config)");
    cmd->add_option("--trials", c.trials, "Monte Carlo trials (overrides the config)")->check(CLI::PositiveNumber);
    cmd->add_option("--solver", c.solver, "sca | closed-form | sc | cc");
    auto* out = cmd->add_option("--out", c.out, "Output path");
    if (needs_out)
        out->required();
    cmd->add_option("--threads", c.threads, "Worker threads for trials")->check(CLI::PositiveNumber);
}

isac::RunConfig resolve(const Common& c)
{
    isac::RunConfig cfg = isac::load_config(c.config);
    if (c.seed)
        cfg.seed = *c.seed;
    if (c.trials)
        cfg.trials = *c.trials;
    if (c.solver)
        cfg.solver = isac::parse_solver(*c.solver);
    cfg.validate();
    return cfg;
}

void print_record(const isac::TrialRecord& rec)
{
    std::printf("solver        %s\n", std::string(isac::to_string(rec.solver)).c_str());
    std::printf("gamma_db      %.4f\n", rec.gamma_db);
    std::printf("pt_dbm        %.4f\n", rec.pt_dbm);
    std::printf("status        %s\n", std::string(isac::to_string(rec.status)).c_str());
    for (std::size_t k = 0; k < rec.allocation.size(); ++k)
        std::printf("p%-12zu %.9g mW\n", k, rec.allocation[k]);
    std::printf("rate          %.6f bit/s/Hz\n", rec.rate);
    std::printf("pd            %.6f\n", rec.pd);
    std::printf("scnr_est_db   %.4f\n", rec.scnr_est_db);
    std::printf("scnr_true_db  %.4f\n", rec.scnr_true_db);
    std::printf("iterations    %d\n", rec.solver_iters);
}

int run_allocate(const Common& c, std::optional<double> gamma_db)
{
    const isac::RunConfig cfg = resolve(c);
    const double g_db = gamma_db.value_or(cfg.gamma_grid_db.empty() ? 0.0 : cfg.gamma_grid_db.front());
    const isac::ChannelRealization r = isac::trial_realization(cfg, 0);
    isac::Rng rng = isac::make_stream(cfg.seed, 0, isac::Stream::estimation);
    const isac::EstimationResult est = isac::estimate_paths(cfg.scenario, r, rng);
    isac::TrialRecord rec = isac::run_pipeline(cfg, r, est, isac::db_to_linear(g_db));
    rec.gamma_db = g_db;

    std::printf("gamma_t_db    %.4f\n",
                isac::linear_to_db(isac::max_threshold(est.gamma[0], cfg.scenario.power_budget)));
    print_record(rec);
    if (!c.out.empty())
        isac::write_csv({rec}, cfg.scenario.paths(), c.out);
    return rec.status == isac::Status::ok ? 0 : kExitInfeasible;
}

int run_sweep(const Common& c, const std::string& summary, bool power)
{
    const isac::RunConfig cfg = resolve(c);
    if (power && cfg.power_grid_dbm.empty())
        std::fprintf(stderr, "power_grid_dbm is empty; writing header only\n");
    const auto records = power ? isac::sweep_power(cfg, c.threads) : isac::sweep_gamma(cfg, c.threads);
    isac::write_csv(records, cfg.scenario.paths(), c.out);
    if (!summary.empty())
        isac::write_summary_csv(isac::summarize(records), summary);
    std::fprintf(stderr, "wrote %zu records to %s\n", records.size(), c.out.c_str());
    return 0;
}

int run_detect(const Common& c, std::optional<double> gamma_db, std::optional<double> eta_ratio)
{
    const isac::RunConfig cfg = resolve(c);
    const isac::Scenario& sc = cfg.scenario;
    double eta0 = 1.0, eta1 = 1.0;
    if (eta_ratio) {
        if (!(*eta_ratio > 0.0 && *eta_ratio <= 1.0))
            throw isac::ConfigError("--eta-ratio must lie in (0, 1]");
        eta1 = 1.0 / *eta_ratio;
    } else {
        // Deployed beamformer and allocation for trial 0 at the requested threshold.
        const double g_db = gamma_db.value_or(cfg.gamma_grid_db.empty() ? 0.0 : cfg.gamma_grid_db.front());
        const isac::ChannelRealization r = isac::trial_realization(cfg, 0);
        isac::Rng rng = isac::make_stream(cfg.seed, 0, isac::Stream::estimation);
        const isac::EstimationResult est = isac::estimate_paths(sc, r, rng);
        const isac::SteeringMatrix steering = isac::receive_steering(sc.angles, sc.n_rx);
        const std::vector<double> x = isac::comm_gains(sc, r);
        isac::PowerAllocation p;
        try {
            p = isac::allocate(cfg.solver, sc, est.gamma, x, steering, isac::db_to_linear(g_db), cfg.sca);
        } catch (const isac::InfeasibleError& e) {
            std::fprintf(stderr, "infeasible: %s\n", e.what());
            return kExitInfeasible;
        }
        const isac::ComplexVec w =
            isac::mvdr_weights(isac::clutter_covariance(p.p, est.gamma, steering), steering.col(0));
        const isac::EtaPair eta = isac::eta_pair(p.p, w, steering, sc.beta_var, sc.noise_radar);
        eta0 = eta.eta0;
        eta1 = eta.eta1;
    }

    isac::Rng rng = isac::make_stream(cfg.seed, 0, isac::Stream::detection);
    const auto trials = static_cast<std::uint64_t>(cfg.trials);
    const isac::DetectionSimulation sim = isac::simulate_detection(eta0, eta1, sc.pfa, trials, rng);
    const isac::DetectionStats stats = isac::detection_stats(eta0, eta1, sc.pfa);
    auto band = [&](double prob) { return 3.0 * std::sqrt(prob * (1.0 - prob) / static_cast<double>(trials)); };

    std::printf("eta0          %.9g\n", eta0);
    std::printf("eta1          %.9g\n", eta1);
    std::printf("threshold     %.9g\n", stats.threshold);
    std::printf("trials        %llu\n", static_cast<unsigned long long>(trials));
    std::printf("pfa           analytic %.6f  empirical %.6f  (3 sigma %.6f)\n", sc.pfa, sim.empirical_pfa,
                band(sc.pfa));
    std::printf("pd            analytic %.6f  empirical %.6f  (3 sigma %.6f)\n", stats.pd, sim.empirical_pd,
                band(stats.pd));
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Power allocation across LoS/NLoS paths for monostatic sensing and communication"};
    app.require_subcommand(1);

    Common c;
    std::optional<double> gamma_db;
    std::optional<double> eta_ratio;
    std::string summary;

    auto* alloc = app.add_subcommand("allocate", "One-shot solve for trial 0 of the configured scenario");
    add_common(alloc, c, false);
    alloc->add_option("--gamma-db", gamma_db, "SCNR threshold in dB (default: first grid value)");

    auto* sweep = app.add_subcommand("sweep", "SCNR threshold sweep to CSV");
    add_common(sweep, c, true);
    sweep->add_option("--summary", summary, "Also write per-threshold means to this CSV");

    auto* psweep = app.add_subcommand("power-sweep", "Power budget sweep to CSV");
    add_common(psweep, c, true);
    psweep->add_option("--summary", summary, "Also write per-(budget, threshold) means to this CSV");

    auto* detect = app.add_subcommand("detect", "Monte Carlo check of the detector statistics");
    add_common(detect, c, false);
    detect->add_option("--gamma-db", gamma_db, "SCNR threshold used to pick the allocation");
    detect->add_option("--eta-ratio", eta_ratio, "Use eta0/eta1 directly instead of a scenario draw");

    std::string csv_in;
    std::string x_col;
    std::vector<std::string> y_cols;
    std::string svg_out;
    auto* render = app.add_subcommand("render", "CSV to SVG line chart");
    render->add_option("--csv", csv_in, "Input CSV")->required();
    render->add_option("--x", x_col, "x column")->required();
    render->add_option("--y", y_cols, "y column(s)")->required();
    render->add_option("--out", svg_out, "Output SVG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (alloc->parsed())
            return run_allocate(c, gamma_db);
        if (sweep->parsed())
            return run_sweep(c, summary, false);
        if (psweep->parsed())
            return run_sweep(c, summary, true);
        if (detect->parsed())
            return run_detect(c, gamma_db, eta_ratio);
        if (render->parsed()) {
            isac::render_svg(csv_in, x_col, y_cols, svg_out);
            return 0;
        }
    } catch (const isac::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const isac::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const isac::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
