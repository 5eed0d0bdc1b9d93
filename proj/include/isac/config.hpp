// SPDX-License-Identifier: Apache-2.0
//
// JSON run configuration. Keys:
//
//   n_tx, n_rx, k_paths, angles_deg, rician_factor, beta_prior_var,
//   noise_radar_dbm, noise_comm_dbm, power_budget_dbm, snapshots, pfa,
//   gamma_grid_db, power_grid_dbm, trials, seed, solver
//
// The first eight scenario keys plus power_budget_dbm and gamma_grid_db are
// required. snapshots (32), pfa (0.01), power_grid_dbm ([]), trials (100),
// seed (1) and solver ("sca") default when absent. angles_deg may list more
// angles than k_paths; the first k_paths are used, LoS first.

#ifndef ISAC_CONFIG_HPP
#define ISAC_CONFIG_HPP

#include "isac/error.hpp"
#include "isac/harness.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace isac {

namespace detail {

template <typename T>
T required(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key))
        throw ConfigError(std::string("missing required key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("key '") + key + "' has the wrong type");
    }
}

template <typename T>
T optional(const nlohmann::json& j, const char* key, T fallback)
{
    if (!j.contains(key))
        return fallback;
    return required<T>(j, key);
}

} // namespace detail

inline RunConfig parse_config(const nlohmann::json& j)
{
    using detail::optional;
    using detail::required;
    if (!j.is_object())
        throw ConfigError("configuration must be a JSON object");

    static const std::set<std::string> known = {
        "n_tx",           "n_rx",           "k_paths",          "angles_deg", "rician_factor", "beta_prior_var",
        "noise_radar_dbm", "noise_comm_dbm", "power_budget_dbm", "snapshots",  "pfa",           "gamma_grid_db",
        "power_grid_dbm", "trials",         "seed",             "solver"};
    for (const auto& item : j.items())
        if (!known.contains(item.key()))
            throw ConfigError("unknown key '" + item.key() + "'");

    RunConfig cfg;
    Scenario& sc = cfg.scenario;
    sc.n_tx = required<int>(j, "n_tx");
    sc.n_rx = required<int>(j, "n_rx");
    sc.k_paths = required<int>(j, "k_paths");
    const auto angles_deg = required<std::vector<double>>(j, "angles_deg");
    if (sc.k_paths < 1)
        throw ConfigError("k_paths must be at least 1");
    if (angles_deg.size() < static_cast<std::size_t>(sc.k_paths))
        throw ConfigError("k_paths = " + std::to_string(sc.k_paths) + " but only " +
                          std::to_string(angles_deg.size()) + " angles listed");
    sc.angles.clear();
    for (int k = 0; k < sc.k_paths; ++k)
        sc.angles.push_back(deg_to_rad(angles_deg[static_cast<std::size_t>(k)]));
    sc.rician = required<double>(j, "rician_factor");
    sc.beta_var = required<double>(j, "beta_prior_var");
    sc.noise_radar = db_to_linear(required<double>(j, "noise_radar_dbm"));
    sc.noise_comm = db_to_linear(required<double>(j, "noise_comm_dbm"));
    sc.power_budget = db_to_linear(required<double>(j, "power_budget_dbm"));
    sc.snapshots = optional<int>(j, "snapshots", 32);
    sc.pfa = optional<double>(j, "pfa", 1e-2);

    cfg.gamma_grid_db = required<std::vector<double>>(j, "gamma_grid_db");
    cfg.power_grid_dbm = optional<std::vector<double>>(j, "power_grid_dbm", {});
    cfg.trials = optional<int>(j, "trials", 100);
    cfg.seed = optional<std::uint64_t>(j, "seed", 1);
    cfg.solver = parse_solver(optional<std::string>(j, "solver", "sca"));
    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError(path, "cannot open configuration file");
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    try {
        return parse_config(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

} // namespace isac

#endif // ISAC_CONFIG_HPP
