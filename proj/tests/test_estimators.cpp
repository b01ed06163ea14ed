#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "tegrid/estimators.hpp"
#include "tegrid/oracles.hpp"

using namespace tegrid;

namespace {

const GridParams kNominalPu{0.06666666666666667, 1.0610329539459689e-3, 1.0, 100.0 * kPi};

LreSampleFull sample_full(double t) {
    // Synthetic full-rank filtered sample (not balanced; exercises the math only).
    LreSampleFull s;
    s.Psi_f = {{{0.9 + 0.1 * std::sin(t), 0.2, -0.3},
                {0.1, 1.1, 0.4 * std::cos(t)},
                {-0.2, 0.3, 0.8}}};
    s.Z = s.Psi_f * Vec3{62.8, 942.5, 942.5} + Vec3{1e-3, -2e-3, 0.5e-3};
    s.t = t;
    return s;
}

} // namespace

TEST_CASE("parameter maps: forward and inverse are consistent") {
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> ur(0.01, 0.5), ul(0.3e-3, 4e-3), ue(0.5, 1.4);
    for (int k = 0; k < 200; ++k) {
        const GridParams p{ur(rng), ul(rng), ue(rng), 100.0 * kPi};
        const RecoveredParams r = recover_full(theta_from_params(p));
        CHECK(r.R == doctest::Approx(p.R).epsilon(1e-12));
        CHECK(r.L == doctest::Approx(p.L).epsilon(1e-12));
        CHECK(r.E == doctest::Approx(p.E).epsilon(1e-12));
        const RecoveredParams rr =
            recover_reduced(theta_reduced_from_params(p), p.rho(), p.omega);
        CHECK(rr.R == doctest::Approx(p.R).epsilon(1e-12));
        CHECK(rr.L == doctest::Approx(p.L).epsilon(1e-12));
        CHECK(rr.E == doctest::Approx(p.E).epsilon(1e-12));
    }
}

TEST_CASE("recovery refuses non-physical estimates") {
    CHECK_THROWS_AS(recover_full({1.0, 0.0, 2.0}), NonPhysicalEstimate);
    CHECK_THROWS_AS(recover_full({1.0, -3.0, 2.0}), NonPhysicalEstimate);
    CHECK_FALSE(try_recover_full({1.0, 0.0, 2.0}).has_value());
    CHECK(try_recover_full({1.0, 900.0, 900.0}).has_value());
    CHECK_THROWS_AS(recover_reduced({0.0, 1.0}, 5.0, 100.0 * kPi), NonPhysicalEstimate);
    CHECK_FALSE(try_recover_reduced({-1.0, 1.0}, 5.0, 100.0 * kPi).has_value());
}

TEST_CASE("reduced recovery honors the assumed X/R, including R = 0") {
    const ThetaReduced v{942.477796076938, 942.477796076938};
    const double w = 100.0 * kPi;
    const RecoveredParams r5 = recover_reduced(v, 5.0, w);
    CHECK(r5.R == doctest::Approx(w * r5.L / 5.0).epsilon(1e-13));
    const RecoveredParams r0 =
        recover_reduced(v, std::numeric_limits<double>::infinity(), w);
    CHECK(r0.R == 0.0);
    CHECK(r0.L == doctest::Approx(r5.L));
}

TEST_CASE("gain validation") {
    CHECK_THROWS_AS((CompositeGains{-1.0, 0.0, 1.0}.validate()), InvalidParameter);
    CHECK_THROWS_AS((CompositeGains{0.0, -1.0, 1.0}.validate()), InvalidParameter);
    CHECK_THROWS_AS((CompositeGains{0.0, 0.0, 0.0}.validate()), InvalidParameter);
    CHECK_NOTHROW((CompositeGains{0.0, 0.0, 1.0}.validate()));
}

TEST_CASE("learning direction equals the finite-difference cost gradient") {
    const LreSampleFull s = sample_full(0.3);
    const Vec3 theta{60.0, 900.0, 950.0};
    const Vec3 g = lre_gradient(s, theta);
    auto cost = [&](const std::vector<double>& x) {
        const Vec3 th{x[0], x[1], x[2]};
        const Vec3 r = s.Z - s.Psi_f * th;
        return 0.5 * r.dot(r);
    };
    const std::vector<double> fd =
        finite_difference_gradient(cost, {theta[0], theta[1], theta[2]}, 1e-4);
    for (int k = 0; k < 3; ++k)
        CHECK(g[k] == doctest::Approx(-fd[std::size_t(k)]).epsilon(1e-8));
}

TEST_CASE("composite with alpha = gamma_p = 0 reproduces the pure gradient law") {
    CompositeState cs;
    cs.theta_hat = {10.0, 500.0, 700.0};
    cs.i_hat = {0.1, -0.2, 0.1};
    ThetaFull gd = cs.theta_hat;
    const CompositeGains g{0.0, 0.0, 3.0e4};
    const Mat3 psi{};
    const ThreePhase i{0.5, -0.3, -0.2};
    for (int k = 0; k < 2000; ++k) {
        const LreSampleFull s = sample_full(1e-5 * k);
        cs = composite_step(cs, i, psi, s, g, 1e-5);
        gd = gradient_full_step(gd, s, g.gamma_i, 1e-5);
        const Vec3 diff = cs.theta_hat.as_vec() - gd.as_vec();
        REQUIRE(diff.norm() <= 1e-12 * gd.as_vec().norm());
    }
}

TEST_CASE("gradient on a persistently exciting sample converges exponentially") {
    // Constant full-rank regressor: error contracts like exp(-gamma lmin t).
    LreSampleFull s;
    s.Psi_f = Mat3::identity();
    const Vec3 truth{62.8, 942.5, 942.5};
    s.Z = s.Psi_f * truth;
    ThetaFull th{};
    const double gamma = 100.0, h = 1e-4;
    double prev = (th.as_vec() - truth).norm();
    for (int k = 0; k < 500; ++k) th = gradient_full_step(th, s, gamma, h);
    const double err = (th.as_vec() - truth).norm();
    CHECK(err == doctest::Approx(prev * std::exp(-gamma * 500 * h)).epsilon(1e-6));
}

TEST_CASE("reduced gradient converges on a synthetic exciting sample") {
    LreSampleReduced s;
    s.Psi_f_ab = {{{1.0, 0.2}, {-0.3, 0.9}}};
    const Vec2 truth{942.5, 942.5};
    s.Z_ab = s.Psi_f_ab * truth;
    ThetaReduced v{};
    for (int k = 0; k < 20000; ++k) v = gd_reduced_step(v, s, 1000.0, 1e-5);
    CHECK((v.as_vec() - truth).norm() < 1e-6 * truth.norm());
}

TEST_CASE("composite observer channel drives i_hat to the measurement") {
    // No learning on theta (match the truth); alpha pulls i_hat -> i.
    CompositeState cs;
    cs.theta_hat = ThetaFull::from_vec({62.8, 942.5, 942.5});
    cs.i_hat = {1.0, 0.0, -1.0};
    const ThreePhase i{0.0, 0.0, 0.0};
    const Mat3 psi{}; // zero regressor: pure leakage dynamics
    LreSampleFull s;   // zero sample: no learning drive
    const CompositeGains g{1000.0, 0.0, 1e-9};
    for (int k = 0; k < 5000; ++k) cs = composite_step(cs, i, psi, s, g, 1e-5);
    CHECK((cs.i_hat - i).norm() < 1e-12); // exp(-1000 * 0.05) ~ 2e-22
}

TEST_CASE("non-finite estimator inputs are rejected") {
    CompositeState cs;
    cs.theta_hat = {1.0, 2.0, 3.0};
    LreSampleFull s = sample_full(0.0);
    s.Z[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(
        composite_step(cs, ThreePhase{}, Mat3{}, s, CompositeGains{1.0, 1.0, 1.0}, 1e-5),
        NumericFault);
    CHECK_THROWS_AS(gradient_full_step(ThetaFull{}, s, 1.0, 1e-5), NumericFault);
}
