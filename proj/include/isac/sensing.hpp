// SPDX-License-Identifier: Apache-2.0
//
// Radar side: MVDR receive beamforming, SCNR, Bayesian (MMSE) estimation of the
// path reflection coefficients and the Neyman-Pearson detector.
//
// Most routines accept either the path angles plus the array size, or a
// precomputed steering matrix whose column k is b(theta_k). The latter avoids
// rebuilding steering vectors inside optimizer loops.

#ifndef ISAC_SENSING_HPP
#define ISAC_SENSING_HPP

#include "isac/channel.hpp"
#include "isac/core.hpp"
#include "isac/random.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace isac {

using SteeringMatrix = Eigen::MatrixXcd;

/// Column k is b(theta_k).
inline SteeringMatrix receive_steering(std::span<const double> angles, int n_rx)
{
    SteeringMatrix b(n_rx, static_cast<Eigen::Index>(angles.size()));
    for (std::size_t k = 0; k < angles.size(); ++k)
        b.col(static_cast<Eigen::Index>(k)) = steering_rx(angles[k], n_rx);
    return b;
}

struct EstimationResult {
    std::vector<Complex> beta_hat;
    std::vector<double> gamma;     // |beta_hat_k|^2 / noise_radar
    HermitianMatrix posterior_cov; // K x K
};

struct DetectionStats {
    double eta0 = 0.0;
    double eta1 = 0.0;
    double threshold = 0.0;
    double pd = 0.0;
};

struct EtaPair {
    double eta0 = 0.0;
    double eta1 = 0.0;
};

// ---------------------------------------------------------------------------
// Beamforming and SCNR

/// Estimated clutter covariance sum_{k>=1} p_k gamma_k b_k b_k^H.
inline HermitianMatrix clutter_covariance(std::span<const double> p, std::span<const double> gamma,
                                          const SteeringMatrix& steering)
{
    const Eigen::Index n = steering.rows();
    HermitianMatrix sigma = HermitianMatrix::Zero(n, n);
    for (std::size_t k = 1; k < p.size(); ++k) {
        const double load = p[k] * gamma[k];
        if (load != 0.0)
            sigma.noalias() += load * steering.col(k) * steering.col(k).adjoint();
    }
    return sigma;
}

inline HermitianMatrix clutter_covariance(std::span<const double> p, std::span<const double> gamma,
                                          std::span<const double> angles, int n_rx)
{
    if (p.size() != gamma.size() || p.size() != angles.size())
        throw std::invalid_argument("clutter_covariance: length mismatch");
    return clutter_covariance(p, gamma, receive_steering(angles, n_rx));
}

/// w* = [sigma + I]^{-1} b0 / (b0^H [sigma + I]^{-1} b0). sigma must be PSD.
inline ComplexVec mvdr_weights(const HermitianMatrix& sigma, const ComplexVec& b0)
{
    const Eigen::Index n = sigma.rows();
    Eigen::LLT<HermitianMatrix> llt(sigma + HermitianMatrix::Identity(n, n));
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("mvdr_weights: clutter covariance is not positive semidefinite");
    const ComplexVec v = llt.solve(b0);
    return v / b0.dot(v);
}

/// Output SCNR of receive filter w given per-path coefficient powers |beta_k|^2.
inline double scnr_with_weights(const ComplexVec& w, std::span<const double> p,
                                std::span<const double> coeff_power, const SteeringMatrix& steering,
                                double noise_radar)
{
    double clutter = 0.0;
    for (std::size_t k = 1; k < p.size(); ++k)
        clutter += p[k] * coeff_power[k] * std::norm(w.dot(steering.col(k)));
    const double signal = p[0] * coeff_power[0] * std::norm(w.dot(steering.col(0)));
    return signal / (clutter + w.squaredNorm() * noise_radar);
}

inline double scnr_with_weights(const ComplexVec& w, std::span<const double> p, std::span<const Complex> beta,
                                std::span<const double> angles, double noise_radar)
{
    if (p.size() != beta.size() || p.size() != angles.size())
        throw std::invalid_argument("scnr_with_weights: length mismatch");
    std::vector<double> power(beta.size());
    for (std::size_t k = 0; k < beta.size(); ++k)
        power[k] = std::norm(beta[k]);
    return scnr_with_weights(w, p, power, receive_steering(angles, static_cast<int>(w.size())), noise_radar);
}

/// b0^H [sigma + I]^{-1} b0 with sigma built from p_c and gamma.
inline double mvdr_gain(std::span<const double> p, std::span<const double> gamma, const SteeringMatrix& steering)
{
    const Eigen::Index n = steering.rows();
    const HermitianMatrix loaded = clutter_covariance(p, gamma, steering) + HermitianMatrix::Identity(n, n);
    Eigen::LLT<HermitianMatrix> llt(loaded);
    const ComplexVec b0 = steering.col(0);
    return b0.dot(llt.solve(b0)).real();
}

/// Maximum (MVDR) SCNR, p0 gamma0 b0^H [sigma + I]^{-1} b0.
inline double max_scnr(std::span<const double> p, std::span<const double> gamma, const SteeringMatrix& steering)
{
    if (p.empty())
        return 0.0;
    const double head = p[0] * gamma[0];
    if (head == 0.0)
        return 0.0;
    return head * mvdr_gain(p, gamma, steering);
}

inline double max_scnr(std::span<const double> p, std::span<const double> gamma, std::span<const double> angles,
                       int n_rx)
{
    if (p.size() != gamma.size() || p.size() != angles.size())
        throw std::invalid_argument("max_scnr: length mismatch");
    return max_scnr(p, gamma, receive_steering(angles, n_rx));
}

// ---------------------------------------------------------------------------
// Estimation epoch

/// K x N matrix of unit-modulus probe symbols with iid uniform phases.
inline Eigen::MatrixXcd probe_symbols(std::size_t k_paths, int snapshots, Rng& rng)
{
    Eigen::MatrixXcd s(static_cast<Eigen::Index>(k_paths), snapshots);
    for (int n = 0; n < snapshots; ++n)
        for (Eigen::Index k = 0; k < s.rows(); ++k)
            s(k, n) = unit_phase(rng);
    return s;
}

/// Stacked observation matrix: block n (rows n*N_R ...) has column k equal to
/// sqrt(p) s_k[n] b(theta_k).
inline Eigen::MatrixXcd build_estimation_model(const Scenario& sc, const Eigen::MatrixXcd& symbols, double p_uniform)
{
    if (symbols.rows() != sc.k_paths)
        throw std::invalid_argument("build_estimation_model: symbol rows must equal k_paths");
    const SteeringMatrix b = receive_steering(sc.angles, sc.n_rx);
    const Eigen::Index n_rx = sc.n_rx;
    const Eigen::Index n_snap = symbols.cols();
    const double amp = std::sqrt(p_uniform);
    Eigen::MatrixXcd h(n_snap * n_rx, sc.k_paths);
    for (Eigen::Index n = 0; n < n_snap; ++n)
        for (Eigen::Index k = 0; k < sc.k_paths; ++k)
            h.block(n * n_rx, k, n_rx, 1) = amp * symbols(k, n) * b.col(k);
    return h;
}

/// y = H beta + z, z ~ CN(0, noise_radar I).
inline ComplexVec synthesize_observation(const Eigen::MatrixXcd& h, std::span<const Complex> beta, double noise_radar,
                                         Rng& rng)
{
    const Eigen::Map<const ComplexVec> b(beta.data(), static_cast<Eigen::Index>(beta.size()));
    ComplexVec y = h * b;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        y(i) += complex_normal(rng, noise_radar);
    return y;
}

inline EstimationResult mmse_estimate(const ComplexVec& y, const Eigen::MatrixXcd& h, double beta_var,
                                      double noise_radar)
{
    const Eigen::Index k = h.cols();
    const HermitianMatrix gram = h.adjoint() * h;
    const HermitianMatrix eye = HermitianMatrix::Identity(k, k);

    Eigen::LLT<HermitianMatrix> normal((noise_radar / beta_var) * eye + gram);
    const ComplexVec est = normal.solve(h.adjoint() * y);

    Eigen::LLT<HermitianMatrix> precision(eye / beta_var + gram / noise_radar);
    HermitianMatrix cov = precision.solve(eye);

    EstimationResult out;
    out.beta_hat.assign(est.data(), est.data() + k);
    out.gamma.resize(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i)
        out.gamma[i] = std::norm(est(i)) / noise_radar;
    out.posterior_cov = 0.5 * (cov + cov.adjoint());
    return out;
}

// ---------------------------------------------------------------------------
// Detection

/// Matched-filter output variances under H0 (clutter + noise) and H1 (adds the target).
inline EtaPair eta_pair(std::span<const double> p, const ComplexVec& w, const SteeringMatrix& steering,
                        double beta_var, double noise_radar)
{
    double clutter = 0.0;
    for (std::size_t k = 1; k < p.size(); ++k)
        clutter += p[k] * std::norm(w.dot(steering.col(k)));
    const double noise = w.squaredNorm() * noise_radar;
    EtaPair e;
    e.eta0 = clutter * beta_var + noise;
    e.eta1 = e.eta0 + p[0] * std::norm(w.dot(steering.col(0))) * beta_var;
    return e;
}

inline EtaPair eta_pair(std::span<const double> p, const ComplexVec& w, std::span<const double> angles,
                        double beta_var, double noise_radar)
{
    return eta_pair(p, w, receive_steering(angles, static_cast<int>(w.size())), beta_var, noise_radar);
}

/// delta = (eta0/2) F^{-1}_{chi2_2}(1 - pfa); the chi-square(2) quantile is -2 ln(pfa).
inline double detection_threshold(double eta0, double pfa) { return -eta0 * std::log(pfa); }

/// P_D = 1 - F_{chi2_2}((eta0/eta1) F^{-1}_{chi2_2}(1 - pfa)) = pfa^(eta0/eta1).
inline double prob_detection(double eta0, double eta1, double pfa) { return std::pow(pfa, eta0 / eta1); }

inline DetectionStats detection_stats(double eta0, double eta1, double pfa)
{
    return {eta0, eta1, detection_threshold(eta0, pfa), prob_detection(eta0, eta1, pfa)};
}

struct DetectionSimulation {
    std::uint64_t trials = 0;
    std::uint64_t false_alarms = 0;
    std::uint64_t detections = 0;
    double empirical_pfa = 0.0;
    double empirical_pd = 0.0;
};

/// Draws |y|^2 with y ~ CN(0, eta0) and y ~ CN(0, eta1) and counts threshold crossings.
inline DetectionSimulation simulate_detection(double eta0, double eta1, double pfa, std::uint64_t trials, Rng& rng)
{
    if (trials == 0)
        throw std::invalid_argument("simulate_detection: trials must be positive");
    const double delta = detection_threshold(eta0, pfa);
    DetectionSimulation out;
    out.trials = trials;
    for (std::uint64_t t = 0; t < trials; ++t) {
        if (std::norm(complex_normal(rng, eta0)) > delta)
            ++out.false_alarms;
        if (std::norm(complex_normal(rng, eta1)) > delta)
            ++out.detections;
    }
    out.empirical_pfa = static_cast<double>(out.false_alarms) / static_cast<double>(trials);
    out.empirical_pd = static_cast<double>(out.detections) / static_cast<double>(trials);
    return out;
}

} // namespace isac

#endif // ISAC_SENSING_HPP
