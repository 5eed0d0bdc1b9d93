// SPDX-License-Identifier: Apache-2.0

#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <boost/math/distributions/chi_squared.hpp>

using namespace isac;
using Catch::Approx;

namespace {

std::vector<double> default_angles() { return test::default_scenario().angles; }

// Random K=5 gains and split of P_T = 100.
void random_powers(Rng& rng, std::vector<double>& p, std::vector<double>& gamma)
{
    p.resize(5);
    gamma.resize(5);
    double total = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
        p[k] = test::uniform(rng, 0.05, 1.0);
        total += p[k];
        gamma[k] = std::norm(complex_normal(rng));
    }
    for (double& v : p)
        v *= 100.0 / total;
}

} // namespace

TEST_CASE("clutter covariance", "[sensing]")
{
    const std::vector<double> angles = default_angles();
    SECTION("single path is clutter-free")
    {
        const std::vector<double> one = {angles[0]};
        CHECK(clutter_covariance(std::vector<double>{100.0}, std::vector<double>{2.0}, one, 16).norm() == 0.0);
    }
    SECTION("K=2 rank one, trace p1 gamma1")
    {
        const std::vector<double> a2 = {angles[0], angles[1]};
        const HermitianMatrix s =
            clutter_covariance(std::vector<double>{60.0, 40.0}, std::vector<double>{1.0, 0.5}, a2, 16);
        CHECK(s.trace().real() == Approx(20.0));
        const ComplexVec b1 = steering_rx(angles[1], 16);
        CHECK((s - 20.0 * b1 * b1.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("K=5 trace identity")
    {
        const std::vector<double> p = {20, 20, 20, 20, 20};
        const std::vector<double> g = {1.0, 0.3, 0.7, 1.1, 0.2};
        CHECK(clutter_covariance(p, g, angles, 16).trace().real() == Approx(20.0 * (0.3 + 0.7 + 1.1 + 0.2)));
    }
    SECTION("length mismatch")
    {
        CHECK_THROWS_AS(clutter_covariance(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}, angles, 16),
                        std::invalid_argument);
    }
}

TEST_CASE("MVDR weights", "[sensing]")
{
    const ComplexVec b0 = steering_rx(0.0, 16);
    SECTION("no clutter gives the steering vector")
    {
        CHECK((mvdr_weights(HermitianMatrix::Zero(16, 16), b0) - b0).norm() < 1e-14);
    }
    SECTION("clutter orthogonal to the target")
    {
        // sin(theta) = 2/16 puts b1 on a null of b0 for a 16-element array.
        const ComplexVec b1 = steering_rx(std::asin(2.0 / 16.0), 16);
        REQUIRE(std::abs(b0.dot(b1)) < 1e-12);
        CHECK((mvdr_weights(5.0 * b1 * b1.adjoint(), b0) - b0).norm() < 1e-12);
    }
    SECTION("distortionless for random PSD clutter")
    {
        Rng rng(21);
        for (int i = 0; i < 500; ++i) {
            const HermitianMatrix sigma = test::random_psd(16, 1 + i % 6, test::uniform(rng, 0.01, 100.0), rng);
            const ComplexVec w = mvdr_weights(sigma, b0);
            REQUIRE(std::abs(w.dot(b0) - Complex(1.0, 0.0)) < 1e-10);
        }
    }
}

TEST_CASE("SCNR with weights", "[sensing]")
{
    const std::vector<double> angles = default_angles();
    const ComplexVec b0 = steering_rx(angles[0], 16);
    const std::vector<Complex> beta = {Complex(1.5, -0.5), Complex(0.3, 0.4), Complex(-1.0, 0.0), Complex(0.0, 0.2),
                                       Complex(0.7, 0.7)};
    SECTION("all power on LoS with w = b0")
    {
        const std::vector<double> p = {100, 0, 0, 0, 0};
        CHECK(scnr_with_weights(b0, p, beta, angles, 2.0) == Approx(100.0 * 2.5 / 2.0));
    }
    SECTION("zero target coefficient")
    {
        std::vector<Complex> b = beta;
        b[0] = 0.0;
        CHECK(scnr_with_weights(b0, std::vector<double>(5, 20.0), b, angles, 1.0) == 0.0);
    }
    SECTION("MVDR weights reach max_scnr")
    {
        Rng rng(4);
        for (int i = 0; i < 200; ++i) {
            std::vector<double> p, gamma;
            random_powers(rng, p, gamma);
            const double noise = test::uniform(rng, 0.2, 5.0);
            const SteeringMatrix st = receive_steering(angles, 16);
            const ComplexVec w = mvdr_weights(clutter_covariance(p, gamma, st), st.col(0));
            // |beta_k|^2 = gamma_k sigma_R^2
            std::vector<double> power(5);
            for (std::size_t k = 0; k < 5; ++k)
                power[k] = gamma[k] * noise;
            REQUIRE(scnr_with_weights(w, p, power, st, noise) == Approx(max_scnr(p, gamma, st)).epsilon(1e-10));
        }
    }
}

TEST_CASE("max_scnr", "[sensing]")
{
    const std::vector<double> angles = default_angles();
    SECTION("K=1")
    {
        CHECK(max_scnr(std::vector<double>{100.0}, std::vector<double>{0.7}, std::vector<double>{0.0}, 16) ==
              Approx(70.0));
    }
    SECTION("collinear clutter")
    {
        const ComplexVec b = steering_rx(0.2, 16);
        SteeringMatrix st(16, 2);
        st.col(0) = b;
        st.col(1) = b;
        CHECK(max_scnr(std::vector<double>{70.0, 30.0}, std::vector<double>{0.5, 0.8}, st) ==
              Approx(70.0 * 0.5 / (1.0 + 30.0 * 0.8)).epsilon(1e-12));
    }
    SECTION("K=2 algebraic closed form")
    {
        const std::vector<double> a2 = {angles[0], angles[1]};
        const double ov = steering_overlap(a2[0], a2[1], 16);
        Rng rng(6);
        for (int i = 0; i < 100; ++i) {
            const double g0 = test::uniform(rng, 0.01, 3.0), g1 = test::uniform(rng, 0.01, 3.0);
            const double p1 = test::uniform(rng, 0.0, 100.0);
            const double expected = (100.0 - p1) * g0 * (1.0 + p1 * g1 * (1.0 - ov)) / (1.0 + p1 * g1);
            REQUIRE(max_scnr(std::vector<double>{100.0 - p1, p1}, std::vector<double>{g0, g1}, a2, 16) ==
                    Approx(expected).epsilon(1e-10));
        }
    }
    SECTION("bounded by p0 gamma0")
    {
        Rng rng(7);
        for (int i = 0; i < 200; ++i) {
            std::vector<double> p, gamma;
            random_powers(rng, p, gamma);
            const double v = max_scnr(p, gamma, angles, 16);
            REQUIRE(v > 0.0);
            REQUIRE(v <= p[0] * gamma[0] * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("MVDR maximizes SCNR over random weights", "[sensing][property]")
{
    Rng rng(99);
    const std::vector<double> angles = default_angles();
    const SteeringMatrix st = receive_steering(angles, 16);
    for (int cfg = 0; cfg < 200; ++cfg) {
        std::vector<double> p, gamma;
        random_powers(rng, p, gamma);
        const ComplexVec w_star = mvdr_weights(clutter_covariance(p, gamma, st), st.col(0));
        const double best = scnr_with_weights(w_star, p, gamma, st, 1.0);
        for (int i = 0; i < 50; ++i) {
            const ComplexVec w = test::random_unit(16, rng);
            REQUIRE(scnr_with_weights(w, p, gamma, st, 1.0) <= best + 1e-10);
        }
    }
}

TEST_CASE("estimation model", "[sensing]")
{
    Scenario sc = test::default_scenario();
    Rng rng(12);
    SECTION("single snapshot, single path")
    {
        Scenario one = sc;
        one.k_paths = 1;
        one.angles = {sc.angles[0]};
        Eigen::MatrixXcd s(1, 1);
        s(0, 0) = std::polar(1.0, 0.4);
        const Eigen::MatrixXcd h = build_estimation_model(one, s, 25.0);
        REQUIRE(h.rows() == 16);
        CHECK((h.col(0) - 5.0 * s(0, 0) * steering_rx(sc.angles[0], 16)).norm() < 1e-14);
    }
    SECTION("column norms and Gram diagonal")
    {
        const Eigen::MatrixXcd s = probe_symbols(5, 32, rng);
        CHECK((s.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14);
        const Eigen::MatrixXcd h = build_estimation_model(sc, s, 20.0);
        REQUIRE(h.rows() == 32 * 16);
        REQUIRE(h.cols() == 5);
        const Eigen::MatrixXcd gram = h.adjoint() * h;
        for (int k = 0; k < 5; ++k)
            CHECK(gram(k, k).real() == Approx(32 * 20.0).epsilon(1e-12));
    }
    SECTION("symbol rows must match K")
    {
        CHECK_THROWS_AS(build_estimation_model(sc, probe_symbols(3, 8, rng), 20.0), std::invalid_argument);
    }
}

TEST_CASE("MMSE estimate", "[sensing]")
{
    Scenario sc = test::default_scenario();
    Rng rng(13);
    const Eigen::MatrixXcd h = build_estimation_model(sc, probe_symbols(5, 32, rng), 20.0);

    SECTION("zero observation")
    {
        const EstimationResult e = mmse_estimate(ComplexVec::Zero(h.rows()), h, 1.0, 1.0);
        for (const Complex& b : e.beta_hat)
            CHECK(b == Complex(0.0, 0.0));
    }
    SECTION("near-noiseless observation recovers beta")
    {
        const std::vector<Complex> beta = {Complex(0.3, -1.0), Complex(1.2, 0.1), Complex(-0.4, 0.4),
                                           Complex(0.0, 0.9), Complex(-1.1, -0.2)};
        const Eigen::Map<const ComplexVec> bv(beta.data(), 5);
        const EstimationResult e = mmse_estimate(h * bv, h, 1.0, 1e-12);
        for (std::size_t k = 0; k < 5; ++k)
            CHECK(std::abs(e.beta_hat[k] - beta[k]) <= 1e-6);
    }
    SECTION("gains and posterior covariance")
    {
        const ComplexVec y = synthesize_observation(h, std::vector<Complex>(5, Complex(0.5, 0.5)), 2.0, rng);
        const EstimationResult e = mmse_estimate(y, h, 1.0, 2.0);
        for (std::size_t k = 0; k < 5; ++k)
            CHECK(e.gamma[k] == std::norm(e.beta_hat[k]) / 2.0);
        CHECK(is_hermitian(e.posterior_cov, 1e-12));
        const Eigen::SelfAdjointEigenSolver<HermitianMatrix> eig(e.posterior_cov);
        CHECK(eig.eigenvalues().minCoeff() > 0.0);
        const HermitianMatrix direct = (HermitianMatrix::Identity(5, 5) + h.adjoint() * h / 2.0).inverse();
        CHECK((e.posterior_cov - direct).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("MMSE empirical error matches the posterior covariance", "[sensing][slow]")
{
    Scenario sc = test::default_scenario();
    Rng rng(31);
    const Eigen::MatrixXcd h = build_estimation_model(sc, probe_symbols(5, 32, rng), sc.power_budget / 5);
    // Small probe power so the posterior variance is not negligible.
    const Eigen::MatrixXcd h_weak = h * std::sqrt(1e-3);
    const double noise = 1.0;
    std::vector<double> mse(5, 0.0);
    EstimationResult last;
    constexpr int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        std::vector<Complex> beta(5);
        for (auto& b : beta)
            b = complex_normal(rng, sc.beta_var);
        const ComplexVec y = synthesize_observation(h_weak, beta, noise, rng);
        last = mmse_estimate(y, h_weak, sc.beta_var, noise);
        for (std::size_t k = 0; k < 5; ++k)
            mse[k] += std::norm(last.beta_hat[k] - beta[k]);
    }
    for (std::size_t k = 0; k < 5; ++k)
        CHECK(mse[k] / trials == Approx(last.posterior_cov(k, k).real()).epsilon(0.05));
}

TEST_CASE("eta pair", "[sensing]")
{
    const std::vector<double> angles = default_angles();
    const SteeringMatrix st = receive_steering(angles, 16);
    SECTION("no clutter, w = b0")
    {
        const EtaPair e = eta_pair(std::vector<double>{100, 0, 0, 0, 0}, st.col(0), st, 1.5, 2.0);
        CHECK(e.eta0 == Approx(2.0));
        CHECK(e.eta1 == Approx(2.0 + 150.0));
    }
    SECTION("no target power")
    {
        const EtaPair e = eta_pair(std::vector<double>{0, 25, 25, 25, 25}, st.col(0), st, 1.0, 1.0);
        CHECK(e.eta0 == e.eta1);
    }
    SECTION("distortionless weights add exactly p0 sigma^2")
    {
        const std::vector<double> p(5, 20.0);
        const std::vector<double> g = {1.0, 0.5, 0.8, 1.2, 0.3};
        const ComplexVec w = mvdr_weights(clutter_covariance(p, g, st), st.col(0));
        const EtaPair e = eta_pair(p, w, angles, 1.3, 1.0);
        CHECK(e.eta1 - e.eta0 == Approx(20.0 * 1.3).epsilon(1e-10));
    }
}

TEST_CASE("detection threshold and probability", "[sensing]")
{
    CHECK(detection_threshold(3.0, std::exp(-1.0)) == Approx(3.0));
    CHECK(detection_threshold(1.0, 1.0 - 1e-12) < 1e-11);
    CHECK(detection_threshold(2.0, 0.01) == Approx(2.0 * std::log(100.0)));

    boost::math::chi_squared chi2(2.0);
    CHECK(detection_threshold(2.0, 0.01) == Approx(0.5 * 2.0 * boost::math::quantile(chi2, 0.99)).epsilon(1e-12));

    CHECK(prob_detection(1.0, 1.0, 0.01) == Approx(0.01));
    CHECK(prob_detection(1.0, 2.0, 0.01) == Approx(0.1));
    CHECK(prob_detection(1e-9, 1.0, 0.01) > 0.9999);

    const DetectionStats s = detection_stats(1.0, 4.0, 0.05);
    CHECK(s.eta1 >= s.eta0);
    CHECK(s.pd >= 0.05);
}

TEST_CASE("closed-form P_D matches the chi-square CDF", "[sensing][property]")
{
    boost::math::chi_squared chi2(2.0);
    for (int i = 1; i <= 100; ++i) {
        const double ratio = i / 100.0;
        for (int j = 1; j <= 100; ++j) {
            const double pfa = j / 101.0;
            const double oracle = 1.0 - boost::math::cdf(chi2, ratio * boost::math::quantile(chi2, 1.0 - pfa));
            REQUIRE(std::abs(prob_detection(1.0, 1.0 / ratio, pfa) - oracle) <= 1e-10);
        }
    }
    // strictly decreasing in eta0/eta1
    for (double pfa : {1e-3, 0.05, 0.5}) {
        double prev = 2.0;
        for (int i = 1; i <= 1000; ++i) {
            const double pd = prob_detection(i / 1000.0, 1.0, pfa);
            REQUIRE(pd < prev);
            prev = pd;
        }
    }
}

TEST_CASE("detection Monte Carlo", "[sensing]")
{
    Rng rng = make_stream(3, 0, Stream::detection);
    constexpr std::uint64_t n = 100000;
    auto within = [](double emp, double p) { return std::abs(emp - p) <= 3.0 * std::sqrt(p * (1 - p) / n); };

    const DetectionSimulation a = simulate_detection(1.0, 1.0, 0.1, n, rng);
    CHECK(within(a.empirical_pfa, 0.1));
    CHECK(within(a.empirical_pd, 0.1));

    const DetectionSimulation b = simulate_detection(1.0, 2.0, 0.01, n, rng);
    CHECK(within(b.empirical_pd, 0.1));
    CHECK(b.trials == n);

    CHECK_THROWS_AS(simulate_detection(1.0, 2.0, 0.01, 0, rng), std::invalid_argument);
}
