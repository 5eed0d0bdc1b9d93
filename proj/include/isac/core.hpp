// SPDX-License-Identifier: Apache-2.0
//
// Complex vector / Hermitian matrix helpers for half-wavelength ULAs.

#ifndef ISAC_CORE_HPP
#define ISAC_CORE_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace isac {

using Complex = std::complex<double>;
using ComplexVec = Eigen::VectorXcd;
using HermitianMatrix = Eigen::MatrixXcd;
using RealVec = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// dBm (or dB) to linear mW (or ratio).
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

namespace detail {

inline ComplexVec ula_response(double theta, int n)
{
    if (n < 1)
        throw std::invalid_argument("array size must be positive");
    const double phase = -kPi * std::sin(theta);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    ComplexVec v(n);
    for (int m = 0; m < n; ++m)
        v(m) = scale * std::polar(1.0, phase * m);
    return v;
}

} // namespace detail

/// Transmit steering vector a(theta); unit norm, entry m = e^{-j pi m sin theta} / sqrt(n_tx).
inline ComplexVec steering_tx(double theta, int n_tx) { return detail::ula_response(theta, n_tx); }

/// Receive steering vector b(theta), same geometry as the transmit array.
inline ComplexVec steering_rx(double theta, int n_rx) { return detail::ula_response(theta, n_rx); }

/// |b(t0)^H b(t1)|^2 for two receive steering vectors.
inline double steering_overlap(double theta0, double theta1, int n_rx)
{
    return std::norm(steering_rx(theta0, n_rx).dot(steering_rx(theta1, n_rx)));
}

inline bool is_hermitian(const HermitianMatrix& m, double tol = 1e-12)
{
    if (m.rows() != m.cols())
        return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

/// Returns [sigma + I]^{-1} for a positive semidefinite sigma.
///
/// PSD-ness is checked with a pivoted LDL^T of sigma itself; a negative pivot
/// beyond round-off is rejected. The inverse is then taken through a Cholesky
/// factorization of sigma + I and symmetrized.
inline HermitianMatrix regularized_inverse(const HermitianMatrix& sigma)
{
    if (sigma.rows() != sigma.cols() || sigma.rows() == 0)
        throw std::invalid_argument("regularized_inverse: matrix must be square and non-empty");
    if (!sigma.allFinite())
        throw std::invalid_argument("regularized_inverse: non-finite entries");
    if (!is_hermitian(sigma, 1e-10))
        throw std::invalid_argument("regularized_inverse: matrix is not Hermitian");

    const Eigen::Index n = sigma.rows();
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    // Cholesky of a slightly shifted copy succeeds iff the smallest
    // eigenvalue is above -1e-10 * scale (up to round-off).
    const Eigen::LLT<HermitianMatrix> shifted(sigma + 1e-10 * scale * HermitianMatrix::Identity(sigma.rows(), sigma.rows()));
    if (shifted.info() != Eigen::Success)
        throw std::invalid_argument("regularized_inverse: matrix is not positive semidefinite");

    const HermitianMatrix loaded = sigma + HermitianMatrix::Identity(n, n);
    Eigen::LLT<HermitianMatrix> llt(loaded);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("regularized_inverse: factorization failed");
    HermitianMatrix inv = llt.solve(HermitianMatrix::Identity(n, n));
    return 0.5 * (inv + inv.adjoint());
}

/// [load * b b^H + I]^{-1} = I - load/(load+1) b b^H for a unit-norm b.
inline HermitianMatrix woodbury_rank1_inverse(double load, const ComplexVec& b)
{
    if (load < 0.0)
        throw std::invalid_argument("woodbury_rank1_inverse: load must be nonnegative");
    const Eigen::Index n = b.size();
    HermitianMatrix out = HermitianMatrix::Identity(n, n);
    if (load == 0.0)
        return out;
    const double shrink = std::isinf(load) ? 1.0 : load / (load + 1.0);
    out.noalias() -= shrink * (b * b.adjoint());
    return out;
}

} // namespace isac

#endif // ISAC_CORE_HPP
