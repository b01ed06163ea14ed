#include "tegrid/estimators.hpp"

#include <cmath>

namespace tegrid {

namespace {

void require_finite(double x, const char* what) {
    if (!std::isfinite(x))
        throw NumericFault(std::string("non-finite value in ") + what);
}

void require_finite(const Vec3& v, const char* what) {
    for (int k = 0; k < 3; ++k) require_finite(v[k], what);
}

void require_finite(const Vec2& v, const char* what) {
    for (int k = 0; k < 2; ++k) require_finite(v[k], what);
}

void require_finite(const Mat3& m, const char* what) {
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) require_finite(m(r, c), what);
}

void require_finite(const Mat2& m, const char* what) {
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) require_finite(m(r, c), what);
}

void require_step(double h) {
    if (!(h > 0.0))
        throw InvalidParameter("estimator step: h must be > 0");
}

/// Joint (observer, estimate) state integrated as one vector.
struct Joint {
    Vec3 ih; // observer current
    Vec3 th; // parameter estimate

    Joint operator+(const Joint& o) const { return {ih + o.ih, th + o.th}; }
    friend Joint operator*(double a, const Joint& j) { return {a * j.ih, a * j.th}; }
};

} // namespace

CompositeState composite_step(const CompositeState& s, const ThreePhase& i, const Mat3& Psi,
                              const LreSampleFull& lre, const CompositeGains& g, double h) {
    require_step(h);
    g.validate();
    require_finite(i.as_vec(), "measured current");
    require_finite(Psi, "regressor");
    require_finite(lre.Z, "filtered derivative Z");
    require_finite(lre.Psi_f, "filtered regressor");

    const Vec3 im = i.as_vec();
    auto f = [&](double, const Joint& x) -> Joint {
        const Vec3 tilde = x.ih - im;
        Joint d;
        d.ih = -g.alpha * tilde + Psi * x.th;
        d.th = -g.gamma_p * Psi.tmul(tilde) + g.gamma_i * lre_gradient(lre, x.th);
        return d;
    };
    const Joint next = rk4(Joint{s.i_hat.as_vec(), s.theta_hat.as_vec()}, s.t, h, f);
    return {ThreePhase::from_vec(next.ih), ThetaFull::from_vec(next.th), s.t + h};
}

ThetaFull gradient_full_step(const ThetaFull& theta_hat, const LreSampleFull& lre, double gamma,
                             double h) {
    require_step(h);
    if (!(gamma > 0.0))
        throw InvalidParameter("gradient_full_step: gamma must be > 0");
    require_finite(lre.Z, "filtered derivative Z");
    require_finite(lre.Psi_f, "filtered regressor");

    auto f = [&](double, const Vec3& th) { return gamma * lre_gradient(lre, th); };
    return ThetaFull::from_vec(rk4(theta_hat.as_vec(), 0.0, h, f));
}

ThetaReduced gd_reduced_step(const ThetaReduced& v_hat, const LreSampleReduced& lre, double gamma,
                             double h) {
    require_step(h);
    if (!(gamma > 0.0))
        throw InvalidParameter("gd_reduced_step: gamma must be > 0");
    require_finite(lre.Z_ab, "filtered derivative Z_ab");
    require_finite(lre.Psi_f_ab, "filtered reduced regressor");

    auto f = [&](double, const Vec2& th) { return gamma * lre_gradient(lre, th); };
    return ThetaReduced::from_vec(rk4(v_hat.as_vec(), 0.0, h, f));
}

RecoveredParams recover_full(const ThetaFull& theta) {
    if (!(theta.th2 > 0.0))
        throw NonPhysicalEstimate("recover_full: 1/L estimate not yet positive");
    const double L = 1.0 / theta.th2;
    return {theta.th1 * L, L, theta.th3 * L};
}

std::optional<RecoveredParams> try_recover_full(const ThetaFull& theta) {
    if (!(theta.th2 > 0.0)) return std::nullopt;
    return recover_full(theta);
}

RecoveredParams recover_reduced(const ThetaReduced& v, double rho, double omega) {
    if (!(v.v1 > 0.0))
        throw NonPhysicalEstimate("recover_reduced: 1/L estimate not yet positive");
    if (!(rho > 0.0))
        throw InvalidParameter("recover_reduced: rho must be > 0");
    const double L = 1.0 / v.v1;
    const double R = std::isinf(rho) ? 0.0 : omega * L / rho;
    return {R, L, v.v2 * L};
}

std::optional<RecoveredParams> try_recover_reduced(const ThetaReduced& v, double rho,
                                                   double omega) {
    if (!(v.v1 > 0.0)) return std::nullopt;
    return recover_reduced(v, rho, omega);
}

ThetaFull theta_from_params(const GridParams& p) {
    p.validate();
    return {p.R / p.L, 1.0 / p.L, p.E / p.L};
}

ThetaReduced theta_reduced_from_params(const GridParams& p) {
    p.validate();
    return {1.0 / p.L, p.E / p.L};
}

} // namespace tegrid
