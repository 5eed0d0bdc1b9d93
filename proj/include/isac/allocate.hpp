// SPDX-License-Identifier: Apache-2.0
//
// Power allocation across the LoS and NLoS paths.
//
// Every solver maximizes sum_k sqrt(p_k) x_k (equivalently the rate) over
// {sum p = P_T, p >= 0} subject to the estimated SCNR reaching a threshold.
// Two exact routes exist for one NLoS path (closed form, brute force in the
// tests); the general case runs successive convex approximation where each
// convex subproblem is solved by a small log-barrier Newton method.

#ifndef ISAC_ALLOCATE_HPP
#define ISAC_ALLOCATE_HPP

#include "isac/channel.hpp"
#include "isac/error.hpp"
#include "isac/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace isac {

// ---------------------------------------------------------------------------
// Baselines

/// Sensing-centric: all power on the LoS path.
inline PowerAllocation sc_allocation(double power_budget, std::size_t k_paths)
{
    PowerAllocation p{std::vector<double>(k_paths, 0.0)};
    p[0] = power_budget;
    return p;
}

/// Communication-centric: p_k proportional to x_k^2 (Cauchy-Schwarz equality).
inline PowerAllocation cc_allocation(std::span<const double> x, double power_budget)
{
    double norm2 = 0.0;
    for (double v : x)
        norm2 += v * v;
    if (!(norm2 > 0.0))
        throw std::invalid_argument("cc_allocation: all path gains are zero");
    PowerAllocation p{std::vector<double>(x.size(), 0.0)};
    for (std::size_t k = 0; k < x.size(); ++k)
        p[k] = power_budget * x[k] * x[k] / norm2;
    return p;
}

/// Largest reachable SCNR threshold, attained by the sensing-centric split.
inline double max_threshold(double gamma0, double power_budget) { return power_budget * gamma0; }

// ---------------------------------------------------------------------------
// Single NLoS path

/// h(p1) = a p1^2 + b_lin p1 + c <= 0  <=>  SCNR(P_T - p1, p1) >= threshold.
struct QuadCoeffs {
    double a = 0.0;
    double b_lin = 0.0;
    double c = 0.0;
    double overlap = 0.0; // |b0^H b1|^2
};

inline QuadCoeffs quad_coeffs(double gamma0, double gamma1, double overlap, double power_budget,
                              double gamma_threshold)
{
    QuadCoeffs q;
    q.overlap = overlap;
    q.a = (1.0 - overlap) * gamma0 * gamma1;
    q.b_lin = gamma_threshold * gamma1 + gamma0 + power_budget * (overlap - 1.0) * gamma0 * gamma1;
    q.c = gamma_threshold - power_budget * gamma0;
    return q;
}

/// Largest p1 in [0, P_T] with h(p1) <= 0.
inline double feasible_upper(const QuadCoeffs& q, double power_budget)
{
    if (q.c > 0.0)
        throw InfeasibleError("SCNR threshold exceeds the maximum reachable value");
    double root = 0.0;
    if (q.b_lin > 0.0) {
        // Stable form of (-B + sqrt(B^2 - 4AC)) / 2A; also covers A = 0.
        const double disc = q.b_lin * q.b_lin - 4.0 * q.a * q.c;
        root = -2.0 * q.c / (q.b_lin + std::sqrt(std::max(disc, 0.0)));
    } else if (q.a > 0.0) {
        const double disc = q.b_lin * q.b_lin - 4.0 * q.a * q.c;
        root = (-q.b_lin + std::sqrt(std::max(disc, 0.0))) / (2.0 * q.a);
    } else {
        // h is nonincreasing and h(0) = c <= 0: no upper limit from the SCNR.
        root = power_budget;
    }
    return std::clamp(root, 0.0, power_budget);
}

/// Unconstrained maximizer of sqrt(P_T - p1) x0 + sqrt(p1) x1.
inline double cc_extreme(double x0, double x1, double power_budget)
{
    const double norm2 = x0 * x0 + x1 * x1;
    if (!(norm2 > 0.0))
        throw std::invalid_argument("cc_extreme: x0 and x1 are both zero");
    return power_budget * x1 * x1 / norm2;
}

inline PowerAllocation solve_single_nlos(double gamma0, double gamma1, double overlap, double x0, double x1,
                                         double power_budget, double gamma_threshold)
{
    const QuadCoeffs q = quad_coeffs(gamma0, gamma1, overlap, power_budget, gamma_threshold);
    const double upper = feasible_upper(q, power_budget);
    auto f = [&](double p1) { return std::sqrt(power_budget - p1) * x0 + std::sqrt(p1) * x1; };

    // f is concave on [0, P_T], so the best point of [0, upper] is min(P_A, P_B);
    // zero stays a candidate and wins ties.
    const double extreme = (x0 * x0 + x1 * x1 > 0.0) ? cc_extreme(x0, x1, power_budget) : 0.0;
    double p1 = std::min(upper, extreme);
    if (!(f(p1) > f(0.0)))
        p1 = 0.0;
    return PowerAllocation{{power_budget - p1, p1}};
}

// ---------------------------------------------------------------------------
// Multiple NLoS paths

/// g(p_c) = b0^H [Sigma_est + I]^{-1} b0 and its gradient in p_c.
struct GradientEval {
    double value = 0.0;
    std::vector<double> gradient;
};

/// `p_c` holds the K-1 NLoS powers, `gamma` all K normalized gains.
inline GradientEval g_value_and_gradient(std::span<const double> p_c, std::span<const double> gamma,
                                         const SteeringMatrix& steering)
{
    const Eigen::Index n = steering.rows();
    HermitianMatrix m = HermitianMatrix::Identity(n, n);
    for (std::size_t k = 0; k < p_c.size(); ++k) {
        const double load = p_c[k] * gamma[k + 1];
        if (load != 0.0)
            m.noalias() += load * steering.col(k + 1) * steering.col(k + 1).adjoint();
    }
    Eigen::LLT<HermitianMatrix> llt(m);
    const ComplexVec b0 = steering.col(0);
    const ComplexVec v = llt.solve(b0);

    GradientEval out;
    out.value = b0.dot(v).real();
    out.gradient.resize(p_c.size());
    // d/dp_k of b0^H M^{-1} b0 = -gamma_k |b_k^H M^{-1} b0|^2
    for (std::size_t k = 0; k < p_c.size(); ++k)
        out.gradient[k] = -gamma[k + 1] * std::norm(steering.col(k + 1).dot(v));
    return out;
}

inline GradientEval g_value_and_gradient(std::span<const double> p_c, std::span<const double> gamma,
                                         std::span<const double> angles, int n_rx)
{
    return g_value_and_gradient(p_c, gamma, receive_steering(angles, n_rx));
}

/// First-order expansion of g around `ref_point` (NLoS powers).
struct Linearization {
    double g_ref = 1.0;
    std::vector<double> gradient;
    std::vector<double> ref_point;

    /// g_lb evaluated at the all-LoS point (p_c = 0).
    double intercept() const
    {
        double s = g_ref;
        for (std::size_t k = 0; k < gradient.size(); ++k)
            s -= gradient[k] * ref_point[k];
        return s;
    }
};

inline Linearization linearize(std::span<const double> p_c, std::span<const double> gamma,
                               const SteeringMatrix& steering)
{
    GradientEval e = g_value_and_gradient(p_c, gamma, steering);
    return {e.value, std::move(e.gradient), std::vector<double>(p_c.begin(), p_c.end())};
}

struct BarrierOptions {
    double barrier_growth = 20.0;
    double gap_tol = 1e-12;      // relative duality-gap target
    double floor_rel = 1e-12;    // internal lower bound on every p_k, times P_T
    double snap_rel = 1e-9;      // NLoS powers below this (times P_T) are returned as 0
    int max_newton = 200;        // per centering step
};

namespace detail {

// Reduced problem in u = p_c with p0 = P_T - 1^T u:
//   maximize  f(u) = x0 sqrt(p0) + sum_k x_k sqrt(u_k)
//   s.t.      s(u) = c0 + d^T u - q / p0 >= 0,   u_k >= lb,   p0 >= lb
// solved along the central path of  t(-f) - log s - sum log(u_k - lb) - log(p0 - lb).
class SubproblemBarrier {
public:
    SubproblemBarrier(const Linearization& lin, std::span<const double> x, double q, double budget,
                      const BarrierOptions& opt)
        : x_(x), d_(lin.gradient), c0_(lin.intercept()), q_(q), budget_(budget),
          lb_(opt.floor_rel * budget), m_(lin.gradient.size()), opt_(opt)
    {
    }

    double slack_at_zero() const { return c0_ - q_ / budget_; }
    double intercept() const { return c0_; }

    bool in_domain(const Eigen::VectorXd& u) const
    {
        for (Eigen::Index k = 0; k < u.size(); ++k)
            if (!(u(k) > lb_))
                return false;
        const double p0 = budget_ - u.sum();
        return p0 > lb_ && slack(u) > 0.0;
    }

    double objective(const Eigen::VectorXd& u) const
    {
        double f = x_[0] * std::sqrt(std::max(budget_ - u.sum(), 0.0));
        for (Eigen::Index k = 0; k < u.size(); ++k)
            f += x_[k + 1] * std::sqrt(std::max(u(k), 0.0));
        return f;
    }

    /// Follows the central path from a strictly feasible u.
    Eigen::VectorXd solve(Eigen::VectorXd u) const
    {
        const double n_constraints = static_cast<double>(m_ + 2);
        double t = 1.0;
        for (int outer = 0; outer < 64; ++outer) {
            center(u, t);
            if (n_constraints / t <= opt_.gap_tol * std::max(1.0, objective(u)))
                break;
            t *= opt_.barrier_growth;
        }
        return u;
    }

private:
    double slack(const Eigen::VectorXd& u) const
    {
        const double p0 = budget_ - u.sum();
        double s = c0_ - q_ / p0;
        for (Eigen::Index k = 0; k < u.size(); ++k)
            s += d_[k] * u(k);
        return s;
    }

    double value(const Eigen::VectorXd& u, double t) const
    {
        const double p0 = budget_ - u.sum();
        double v = -t * objective(u) - std::log(slack(u)) - std::log(p0 - lb_);
        for (Eigen::Index k = 0; k < u.size(); ++k)
            v -= std::log(u(k) - lb_);
        return v;
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& u, double t) const
    {
        const double p0 = budget_ - u.sum();
        const double s = slack(u);
        const double root_p0 = std::sqrt(p0);
        Eigen::VectorXd g(u.size());
        for (Eigen::Index k = 0; k < u.size(); ++k) {
            const double df = x_[k + 1] / (2.0 * std::sqrt(u(k))) - x_[0] / (2.0 * root_p0);
            const double ds = d_[k] - q_ / (p0 * p0);
            g(k) = -t * df - ds / s - 1.0 / (u(k) - lb_) + 1.0 / (p0 - lb_);
        }
        return g;
    }

    Eigen::MatrixXd hessian(const Eigen::VectorXd& u, double t) const
    {
        const Eigen::Index m = u.size();
        const double p0 = budget_ - u.sum();
        const double s = slack(u);
        Eigen::VectorXd ds(m);
        for (Eigen::Index k = 0; k < m; ++k)
            ds(k) = d_[k] - q_ / (p0 * p0);

        const double shared = t * x_[0] / (4.0 * p0 * std::sqrt(p0)) + (2.0 * q_ / (p0 * p0 * p0)) / s
                              + 1.0 / ((p0 - lb_) * (p0 - lb_));
        Eigen::MatrixXd h = Eigen::MatrixXd::Constant(m, m, shared);
        h.noalias() += ds * ds.transpose() / (s * s);
        for (Eigen::Index k = 0; k < m; ++k) {
            const double gap = u(k) - lb_;
            h(k, k) += t * x_[k + 1] / (4.0 * u(k) * std::sqrt(u(k))) + 1.0 / (gap * gap);
        }
        return h;
    }

    void center(Eigen::VectorXd& u, double t) const
    {
        for (int it = 0; it < opt_.max_newton; ++it) {
            const Eigen::VectorXd g = gradient(u, t);
            const Eigen::MatrixXd h = hessian(u, t);
            const Eigen::VectorXd step = -h.ldlt().solve(g);
            const double slope = g.dot(step);
            if (!(slope < 0.0) || -slope / 2.0 <= 1e-13)
                return;

            double alpha = 1.0;
            while (alpha > 1e-16 && !in_domain(u + alpha * step))
                alpha *= 0.5;
            if (alpha <= 1e-16)
                return;

            // Accept on Armijo, or when the directional derivative is still
            // nonpositive (F is convex along the ray, so F did not increase).
            // The second test survives round-off once t * f dwarfs the decrement.
            const double f0 = value(u, t);
            for (;;) {
                const Eigen::VectorXd trial = u + alpha * step;
                if (value(trial, t) <= f0 + 0.25 * alpha * slope || gradient(trial, t).dot(step) <= 0.0)
                    break;
                alpha *= 0.5;
                if (alpha <= 1e-16)
                    return;
            }
            u += alpha * step;
            if (-slope / 2.0 <= 1e-11)
                return;
        }
    }

    std::span<const double> x_;
    std::vector<double> d_;
    double c0_;
    double q_;
    double budget_;
    double lb_;
    std::size_t m_;
    BarrierOptions opt_;
};

inline PowerAllocation finalize(const Eigen::VectorXd& u, double budget, double snap)
{
    PowerAllocation p{std::vector<double>(static_cast<std::size_t>(u.size()) + 1, 0.0)};
    double used = 0.0;
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        const double v = u(k) < snap ? 0.0 : u(k);
        p[static_cast<std::size_t>(k) + 1] = v;
        used += v;
    }
    p[0] = budget - used;
    return p;
}

} // namespace detail

/// Solves the convexified problem
///   max sum sqrt(p_k) x_k  s.t.  g_lb(p_c) - threshold / (gamma0 p0) >= 0, 1^T p = P_T, p >= 0.
/// `warm_start` (full K-vector) is used as the initial point when strictly feasible.
/// Throws InfeasibleError when even the all-LoS point violates the linearized constraint.
inline PowerAllocation solve_subproblem(const Linearization& lin, std::span<const double> x, double gamma0,
                                        double gamma_threshold, double power_budget,
                                        std::optional<std::span<const double>> warm_start = std::nullopt,
                                        const BarrierOptions& opt = {})
{
    const std::size_t m = lin.gradient.size();
    if (x.size() != m + 1 || lin.ref_point.size() != m)
        throw std::invalid_argument("solve_subproblem: dimension mismatch");
    if (gamma_threshold > 0.0 && !(gamma0 > 0.0))
        throw InfeasibleError("target gain is zero; no positive SCNR threshold is reachable");

    const double q = gamma_threshold > 0.0 ? gamma_threshold / gamma0 : 0.0;
    const detail::SubproblemBarrier barrier(lin, x, q, power_budget, opt);
    const PowerAllocation sc = sc_allocation(power_budget, m + 1);
    if (m == 0) {
        if (barrier.slack_at_zero() < -1e-13 * std::max(1.0, std::abs(barrier.intercept())))
            throw InfeasibleError("linearized SCNR constraint infeasible");
        return sc;
    }

    // s(u) is nonincreasing in every u_k, so the all-LoS point maximizes it.
    const double s0 = barrier.slack_at_zero();
    const double tol = 1e-13 * std::max(1.0, std::abs(barrier.intercept()));
    if (s0 < -tol)
        throw InfeasibleError("linearized SCNR constraint infeasible at the all-LoS point");
    if (s0 <= tol)
        return sc;

    const double snap = opt.snap_rel * power_budget;
    const double floor = opt.floor_rel * power_budget;
    std::optional<Eigen::VectorXd> start;
    if (warm_start && warm_start->size() == m + 1) {
        Eigen::VectorXd u(static_cast<Eigen::Index>(m));
        for (std::size_t k = 0; k < m; ++k)
            u(static_cast<Eigen::Index>(k)) = (*warm_start)[k + 1];
        if (barrier.in_domain(u))
            start = u;
    }
    if (!start) {
        // Shrink a uniform split toward the all-LoS point until strictly feasible.
        Eigen::VectorXd dir = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m), power_budget / (m + 1));
        for (double theta = 1.0; theta * power_budget / (m + 1) >= 10.0 * floor; theta *= 0.5) {
            if (barrier.in_domain(theta * dir)) {
                start = theta * dir;
                break;
            }
        }
    }
    if (!start)
        return sc; // the feasible set lies inside the snapping band

    return detail::finalize(barrier.solve(*start), power_budget, snap);
}

struct ScaOptions {
    double epsilon = 1e-5; // stop once the objective gains less than this
    int max_iters = 100;
    BarrierOptions barrier{};
};

struct ScaState {
    PowerAllocation iterate;
    double objective = 0.0;     // sum sqrt(p_k) x_k at `iterate`
    int iteration = 0;          // subproblems solved
    bool converged = false;
    std::vector<double> history; // objective at every feasible iterate, in order
};

/// Successive convex approximation for K >= 2 paths.
///
/// Starts from the uniform split; when the first convexified problem is
/// infeasible there, restarts from the all-LoS point, which is always feasible
/// for thresholds up to P_T gamma0.
inline ScaState sca_allocate(std::span<const double> gamma, std::span<const double> x, const SteeringMatrix& steering,
                             double power_budget, double gamma_threshold, const ScaOptions& opt = {})
{
    const std::size_t k_paths = x.size();
    if (gamma.size() != k_paths || static_cast<std::size_t>(steering.cols()) != k_paths)
        throw std::invalid_argument("sca_allocate: dimension mismatch");
    if (gamma_threshold > max_threshold(gamma[0], power_budget))
        throw InfeasibleError("SCNR threshold exceeds P_T * gamma0");

    ScaState st;
    if (k_paths == 1) {
        st.iterate = sc_allocation(power_budget, 1);
        st.objective = coherent_amplitude(st.iterate.p, x);
        st.history.push_back(st.objective);
        st.converged = true;
        return st;
    }

    auto nlos = [](const PowerAllocation& p) { return std::span<const double>(p.p).subspan(1); };

    PowerAllocation current{std::vector<double>(k_paths, power_budget / static_cast<double>(k_paths))};
    bool feasible = max_scnr(current.p, gamma, steering) >= gamma_threshold;
    bool restarted = false;
    double f_cur = coherent_amplitude(current.p, x);
    if (feasible)
        st.history.push_back(f_cur);

    while (st.iteration < opt.max_iters) {
        const Linearization lin = linearize(nlos(current), gamma, steering);
        PowerAllocation next;
        try {
            next = solve_subproblem(lin, x, gamma[0], gamma_threshold, power_budget,
                                    std::span<const double>(current.p), opt.barrier);
        } catch (const InfeasibleError&) {
            if (feasible || restarted)
                throw;
            current = sc_allocation(power_budget, k_paths);
            f_cur = coherent_amplitude(current.p, x);
            feasible = true;
            restarted = true;
            st.history.push_back(f_cur);
            continue;
        }
        ++st.iteration;
        const double f_next = coherent_amplitude(next.p, x);
        if (feasible && f_next < f_cur) {
            // Round-off or snapping lost ground; keep the better point.
            st.converged = true;
            break;
        }
        const double gain = f_next - f_cur;
        const bool was_feasible = feasible;
        current = std::move(next);
        f_cur = f_next;
        feasible = true;
        st.history.push_back(f_cur);
        if (was_feasible && gain < opt.epsilon) {
            st.converged = true;
            break;
        }
    }
    st.iterate = std::move(current);
    st.objective = f_cur;
    return st;
}

inline ScaState sca_allocate(const Scenario& sc, std::span<const double> gamma, std::span<const double> x,
                             double gamma_threshold, double epsilon = 1e-5, int max_iters = 100)
{
    ScaOptions opt;
    opt.epsilon = epsilon;
    opt.max_iters = max_iters;
    return sca_allocate(gamma, x, receive_steering(sc.angles, sc.n_rx), sc.power_budget, gamma_threshold, opt);
}

} // namespace isac

#endif // ISAC_ALLOCATE_HPP
