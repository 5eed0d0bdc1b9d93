// SPDX-License-Identifier: Apache-2.0
//
// Scenario definition, random path coefficients and the communication side of
// the link: per-path gains, SNR and achievable rate.

#ifndef ISAC_CHANNEL_HPP
#define ISAC_CHANNEL_HPP

#include "isac/core.hpp"
#include "isac/error.hpp"
#include "isac/random.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace isac {

/// Static problem definition. Angles are radians with the LoS path first;
/// every power and variance is linear (mW).
struct Scenario {
    int n_tx = 16;
    int n_rx = 16;
    int k_paths = 5;
    std::vector<double> angles;
    double rician = 1.0;
    double beta_var = 1.0;
    double noise_radar = 1.0;
    double noise_comm = 1.0;
    double power_budget = 100.0;
    int snapshots = 32;
    double pfa = 1e-2;

    std::size_t paths() const { return static_cast<std::size_t>(k_paths); }

    void validate() const
    {
        auto fail = [](const std::string& msg) { throw ConfigError(msg); };
        if (n_tx < 1 || n_rx < 1)
            fail("n_tx and n_rx must be positive");
        if (k_paths < 1)
            fail("k_paths must be at least 1");
        if (angles.size() != paths())
            fail("expected " + std::to_string(k_paths) + " angles, got " + std::to_string(angles.size()));
        for (std::size_t i = 0; i < angles.size(); ++i) {
            if (!std::isfinite(angles[i]) || std::abs(angles[i]) > kPi / 2 + 1e-12)
                fail("angle " + std::to_string(i) + " outside [-90, 90] degrees");
            for (std::size_t j = 0; j < i; ++j)
                if (angles[i] == angles[j])
                    fail("duplicate path angle at index " + std::to_string(i));
        }
        auto positive = [&](double v, const char* name) {
            if (!std::isfinite(v) || v <= 0.0)
                fail(std::string(name) + " must be finite and positive");
        };
        if (!std::isfinite(rician) || rician < 0.0)
            fail("rician_factor must be finite and nonnegative");
        positive(beta_var, "beta_prior_var");
        positive(noise_radar, "noise_radar");
        positive(noise_comm, "noise_comm");
        positive(power_budget, "power_budget");
        if (snapshots < 1)
            fail("snapshots must be positive");
        if (!(pfa > 0.0 && pfa < 1.0))
            fail("pfa must lie in (0, 1)");
    }
};

/// One draw of target/clutter reflection coefficients (K) and NLoS path gains (K-1).
struct ChannelRealization {
    std::vector<Complex> beta;
    std::vector<Complex> alpha;
};

/// Per-path transmit power (linear), LoS first.
struct PowerAllocation {
    std::vector<double> p;

    std::size_t size() const { return p.size(); }
    double operator[](std::size_t k) const { return p[k]; }
    double& operator[](std::size_t k) { return p[k]; }
    double total() const
    {
        double s = 0.0;
        for (double v : p)
            s += v;
        return s;
    }
    /// Nonnegative entries summing to the budget within 1e-9 relative.
    bool is_valid(double budget) const
    {
        for (double v : p)
            if (!(v >= 0.0) || !std::isfinite(v))
                return false;
        return std::abs(total() - budget) <= 1e-9 * budget;
    }
};

inline ChannelRealization sample_realization(const Scenario& sc, Rng& rng)
{
    ChannelRealization r;
    r.beta.reserve(sc.paths());
    for (std::size_t k = 0; k < sc.paths(); ++k)
        r.beta.push_back(complex_normal(rng, sc.beta_var));
    r.alpha.reserve(sc.paths() - 1);
    for (std::size_t k = 1; k < sc.paths(); ++k)
        r.alpha.push_back(complex_normal(rng, 1.0));
    return r;
}

/// Path amplitudes x_k seen by the user after phase compensation.
inline std::vector<double> comm_gains(const Scenario& sc, const ChannelRealization& r)
{
    const double nt = sc.n_tx;
    std::vector<double> x(sc.paths(), 0.0);
    x[0] = std::sqrt(nt * sc.rician / (1.0 + sc.rician));
    if (sc.k_paths > 1) {
        const double nlos = std::sqrt(nt / ((sc.k_paths - 1) * (1.0 + sc.rician)));
        for (std::size_t k = 1; k < sc.paths(); ++k)
            x[k] = nlos * std::abs(r.alpha[k - 1]);
    }
    return x;
}

/// MISO channel with the path powers folded in, LoS + scattered components.
inline ComplexVec assemble_channel(const Scenario& sc, const ChannelRealization& r, const PowerAllocation& p)
{
    if (p.size() != sc.paths())
        throw std::invalid_argument("assemble_channel: allocation length mismatch");
    const double nt = sc.n_tx;
    const double w_los = std::sqrt(sc.rician / (1.0 + sc.rician));
    const double w_nlos = std::sqrt(1.0 / (1.0 + sc.rician));

    ComplexVec h = w_los * std::sqrt(p[0]) * std::sqrt(nt) * steering_tx(sc.angles[0], sc.n_tx);
    if (sc.k_paths > 1) {
        const double spread = std::sqrt(nt / (sc.k_paths - 1));
        for (std::size_t k = 1; k < sc.paths(); ++k)
            h += w_nlos * std::sqrt(p[k]) * spread * r.alpha[k - 1] * steering_tx(sc.angles[k], sc.n_tx);
    }
    return h;
}

/// Precoder column phases that make every path add coherently at the user:
/// the negative argument of each path's uncompensated contribution to h^H F s.
inline std::vector<double> compensation_phases(const ChannelRealization& r, std::span<const Complex> symbols)
{
    std::vector<double> g(symbols.size(), 0.0);
    if (!symbols.empty())
        g[0] = std::arg(symbols[0]);
    for (std::size_t k = 1; k < symbols.size(); ++k)
        g[k] = std::arg(std::conj(r.alpha[k - 1]) * symbols[k]);
    return g;
}

/// sum_k sqrt(p_k) x_k
inline double coherent_amplitude(std::span<const double> p, std::span<const double> x)
{
    if (p.size() != x.size())
        throw std::invalid_argument("coherent_amplitude: length mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
        s += std::sqrt(p[k]) * x[k];
    return s;
}

inline double snr_from_gains(const PowerAllocation& p, std::span<const double> x, double noise_comm)
{
    const double a = coherent_amplitude(p.p, x);
    return a * a / noise_comm;
}

/// Achievable rate in bits/s/Hz.
inline double rate(double snr) { return std::log2(1.0 + snr); }

} // namespace isac

#endif // ISAC_CHANNEL_HPP
