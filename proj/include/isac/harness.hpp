// SPDX-License-Identifier: Apache-2.0
//
// Two-epoch pipeline and Monte Carlo sweeps.
//
// Epoch 1 probes every path with P_T/K and forms MMSE estimates of the
// reflection coefficients. Epoch 2 allocates power from the estimated gains
// and scores the allocation: rate from the true path gains, detection
// probability from the prior variance, SCNR both estimated and true.

#ifndef ISAC_HARNESS_HPP
#define ISAC_HARNESS_HPP

#include "isac/allocate.hpp"
#include "isac/channel.hpp"
#include "isac/error.hpp"
#include "isac/random.hpp"
#include "isac/sensing.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace isac {

enum class Solver { sca, closed_form, sc, cc };

inline std::string_view to_string(Solver s)
{
    switch (s) {
    case Solver::sca: return "sca";
    case Solver::closed_form: return "closed-form";
    case Solver::sc: return "sc";
    case Solver::cc: return "cc";
    }
    return "?";
}

inline Solver parse_solver(std::string_view name)
{
    if (name == "sca")
        return Solver::sca;
    if (name == "closed-form" || name == "closed_form")
        return Solver::closed_form;
    if (name == "sc")
        return Solver::sc;
    if (name == "cc")
        return Solver::cc;
    throw ConfigError("unknown solver '" + std::string(name) + "' (expected sca, closed-form, sc or cc)");
}

struct RunConfig {
    Scenario scenario;
    std::vector<double> gamma_grid_db;
    std::vector<double> power_grid_dbm;
    int trials = 100;
    std::uint64_t seed = 1;
    Solver solver = Solver::sca;
    ScaOptions sca{};

    double power_budget_dbm() const { return linear_to_db(scenario.power_budget); }

    void validate() const
    {
        scenario.validate();
        if (trials < 1)
            throw ConfigError("trials must be at least 1");
        if (solver == Solver::closed_form && scenario.k_paths > 2)
            throw ConfigError("closed-form solver needs k_paths <= 2");
        for (double g : gamma_grid_db)
            if (!std::isfinite(g))
                throw ConfigError("gamma_grid_db entries must be finite");
        for (double p : power_grid_dbm)
            if (!std::isfinite(p))
                throw ConfigError("power_grid_dbm entries must be finite");
    }
};

enum class Status { ok, infeasible };

inline std::string_view to_string(Status s) { return s == Status::ok ? "ok" : "infeasible"; }

struct TrialRecord {
    int trial = 0;
    double gamma_db = 0.0;
    double pt_dbm = 0.0;
    Solver solver = Solver::sca;
    Status status = Status::ok;
    PowerAllocation allocation; // NaN-filled when infeasible
    double rate = 0.0;          // bits/s/Hz
    double pd = 0.0;
    double scnr_est_db = 0.0;
    double scnr_true_db = 0.0;
    int solver_iters = 0;
};

/// Epoch 1: probe with the uniform split, observe, and form MMSE estimates.
inline EstimationResult estimate_paths(const Scenario& sc, const ChannelRealization& r, Rng& rng)
{
    const double p_uniform = sc.power_budget / sc.k_paths;
    const Eigen::MatrixXcd symbols = probe_symbols(sc.paths(), sc.snapshots, rng);
    const Eigen::MatrixXcd h = build_estimation_model(sc, symbols, p_uniform);
    const ComplexVec y = synthesize_observation(h, r.beta, sc.noise_radar, rng);
    return mmse_estimate(y, h, sc.beta_var, sc.noise_radar);
}

/// Allocation chosen by `solver`; throws InfeasibleError above P_T gamma0.
inline PowerAllocation allocate(Solver solver, const Scenario& sc, std::span<const double> gamma,
                                std::span<const double> x, const SteeringMatrix& steering, double gamma_threshold,
                                const ScaOptions& opt, int* iterations = nullptr)
{
    if (iterations)
        *iterations = 0;
    if (gamma_threshold > max_threshold(gamma[0], sc.power_budget))
        throw InfeasibleError("SCNR threshold exceeds P_T * gamma0");
    if (sc.k_paths == 1)
        return sc_allocation(sc.power_budget, 1);

    switch (solver) {
    case Solver::sc:
        return sc_allocation(sc.power_budget, sc.paths());
    case Solver::cc:
        return cc_allocation(x, sc.power_budget);
    case Solver::closed_form: {
        if (sc.k_paths != 2)
            throw ConfigError("closed-form solver needs k_paths <= 2");
        const double overlap = std::norm(steering.col(0).dot(steering.col(1)));
        return solve_single_nlos(gamma[0], gamma[1], overlap, x[0], x[1], sc.power_budget, gamma_threshold);
    }
    case Solver::sca: {
        ScaState st = sca_allocate(gamma, x, steering, sc.power_budget, gamma_threshold, opt);
        if (iterations)
            *iterations = st.iteration;
        return std::move(st.iterate);
    }
    }
    throw ConfigError("unknown solver");
}

/// Epoch 2 for one SCNR threshold (linear), given the epoch-1 estimates.
inline TrialRecord run_pipeline(const RunConfig& cfg, const ChannelRealization& r, const EstimationResult& est,
                                double gamma_threshold, int trial = 0)
{
    const Scenario& sc = cfg.scenario;
    const SteeringMatrix steering = receive_steering(sc.angles, sc.n_rx);
    const std::vector<double> x = comm_gains(sc, r);

    TrialRecord rec;
    rec.trial = trial;
    rec.gamma_db = linear_to_db(gamma_threshold);
    rec.pt_dbm = linear_to_db(sc.power_budget);
    rec.solver = cfg.solver;

    try {
        rec.allocation = allocate(cfg.solver, sc, est.gamma, x, steering, gamma_threshold, cfg.sca, &rec.solver_iters);
    } catch (const InfeasibleError&) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        rec.status = Status::infeasible;
        rec.allocation = PowerAllocation{std::vector<double>(sc.paths(), nan)};
        rec.rate = rec.pd = rec.scnr_est_db = rec.scnr_true_db = nan;
        return rec;
    }

    const std::vector<double>& p = rec.allocation.p;
    rec.rate = rate(snr_from_gains(rec.allocation, x, sc.noise_comm));

    const ComplexVec w = mvdr_weights(clutter_covariance(p, est.gamma, steering), steering.col(0));
    const EtaPair eta = eta_pair(p, w, steering, sc.beta_var, sc.noise_radar);
    rec.pd = prob_detection(eta.eta0, eta.eta1, sc.pfa);

    std::vector<double> true_power(sc.paths());
    for (std::size_t k = 0; k < sc.paths(); ++k)
        true_power[k] = std::norm(r.beta[k]);
    rec.scnr_est_db = linear_to_db(max_scnr(p, est.gamma, steering));
    rec.scnr_true_db = linear_to_db(scnr_with_weights(w, p, true_power, steering, sc.noise_radar));
    return rec;
}

/// Runs both epochs with the caller's random stream.
inline TrialRecord run_pipeline(const RunConfig& cfg, const ChannelRealization& r, double gamma_threshold, Rng& rng,
                                int trial = 0)
{
    const EstimationResult est = estimate_paths(cfg.scenario, r, rng);
    return run_pipeline(cfg, r, est, gamma_threshold, trial);
}

namespace detail {

/// Calls body(trial) for every trial on up to `workers` threads.
template <typename Body>
void for_each_trial(int trials, int workers, Body&& body)
{
    const int n = std::max(1, std::min(workers, trials));
    if (n == 1) {
        for (int t = 0; t < trials; ++t)
            body(t);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int i = 0; i < n; ++i) {
        pool.emplace_back([&] {
            for (int t = next++; t < trials; t = next++) {
                try {
                    body(t);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
}

inline std::vector<TrialRecord> sweep_thresholds(const RunConfig& cfg, const Scenario& sc, const ChannelRealization& r,
                                                 int trial)
{
    Rng est_rng = make_stream(cfg.seed, static_cast<std::uint64_t>(trial), Stream::estimation);
    const EstimationResult est = estimate_paths(sc, r, est_rng);
    RunConfig local = cfg;
    local.scenario = sc;
    std::vector<TrialRecord> out;
    out.reserve(cfg.gamma_grid_db.size());
    for (double g_db : cfg.gamma_grid_db) {
        TrialRecord rec = run_pipeline(local, r, est, db_to_linear(g_db), trial);
        rec.gamma_db = g_db;
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace detail

/// Channel draw for one trial; identical for every solver, threshold and budget.
inline ChannelRealization trial_realization(const RunConfig& cfg, int trial)
{
    Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(trial), Stream::channel);
    return sample_realization(cfg.scenario, rng);
}

/// One record per (trial, threshold), trial-major. Thresholds above a trial's
/// P_T gamma0 are kept with status infeasible.
inline std::vector<TrialRecord> sweep_gamma(const RunConfig& cfg, int workers = 1)
{
    const std::size_t per_trial = cfg.gamma_grid_db.size();
    std::vector<TrialRecord> out(static_cast<std::size_t>(cfg.trials) * per_trial);
    detail::for_each_trial(cfg.trials, workers, [&](int t) {
        const ChannelRealization r = trial_realization(cfg, t);
        std::vector<TrialRecord> recs = detail::sweep_thresholds(cfg, cfg.scenario, r, t);
        std::move(recs.begin(), recs.end(), out.begin() + static_cast<std::ptrdiff_t>(t * per_trial));
    });
    return out;
}

/// One record per (trial, budget, threshold). Each trial reuses its channel
/// draw and probing noise across budgets.
inline std::vector<TrialRecord> sweep_power(const RunConfig& cfg, int workers = 1)
{
    const std::size_t per_budget = cfg.gamma_grid_db.size();
    const std::size_t per_trial = per_budget * cfg.power_grid_dbm.size();
    std::vector<TrialRecord> out(static_cast<std::size_t>(cfg.trials) * per_trial);
    if (per_trial == 0)
        return {};
    detail::for_each_trial(cfg.trials, workers, [&](int t) {
        const ChannelRealization r = trial_realization(cfg, t);
        std::size_t slot = static_cast<std::size_t>(t) * per_trial;
        for (double pt_dbm : cfg.power_grid_dbm) {
            Scenario sc = cfg.scenario;
            sc.power_budget = db_to_linear(pt_dbm);
            for (TrialRecord& rec : detail::sweep_thresholds(cfg, sc, r, t)) {
                rec.pt_dbm = pt_dbm;
                out[slot++] = std::move(rec);
            }
        }
    });
    return out;
}

/// Per-(budget, threshold) means over the ok records, in first-seen order.
struct SummaryRow {
    double pt_dbm = 0.0;
    double gamma_db = 0.0;
    int ok = 0;
    int infeasible = 0;
    double rate = 0.0;
    double pd = 0.0;
    double scnr_est_db = 0.0;
    std::vector<double> power;
};

inline std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records)
{
    std::vector<SummaryRow> rows;
    std::map<std::pair<double, double>, std::size_t> index;
    for (const TrialRecord& rec : records) {
        const auto key = std::make_pair(rec.pt_dbm, rec.gamma_db);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, rows.size()).first;
            SummaryRow row;
            row.pt_dbm = rec.pt_dbm;
            row.gamma_db = rec.gamma_db;
            row.power.assign(rec.allocation.size(), 0.0);
            rows.push_back(std::move(row));
        }
        SummaryRow& row = rows[it->second];
        if (rec.status != Status::ok) {
            ++row.infeasible;
            continue;
        }
        ++row.ok;
        row.rate += rec.rate;
        row.pd += rec.pd;
        row.scnr_est_db += rec.scnr_est_db;
        for (std::size_t k = 0; k < row.power.size() && k < rec.allocation.size(); ++k)
            row.power[k] += rec.allocation[k];
    }
    for (SummaryRow& row : rows) {
        if (row.ok == 0) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row.rate = row.pd = row.scnr_est_db = nan;
            for (double& v : row.power)
                v = nan;
            continue;
        }
        row.rate /= row.ok;
        row.pd /= row.ok;
        row.scnr_est_db /= row.ok;
        for (double& v : row.power)
            v /= row.ok;
    }
    return rows;
}

} // namespace isac

#endif // ISAC_HARNESS_HPP
