#include "tegrid/regression.hpp"

#include <cmath>

namespace tegrid {

FilterBank::FilterBank(double lambda, std::size_t channels) : lambda_(lambda) {
    if (!(lambda > 0.0))
        throw InvalidParameter("FilterBank: lambda must be > 0");
    if (channels == 0)
        throw InvalidParameter("FilterBank: need at least one channel");
    x_.assign(channels, 0.0);
}

void FilterBank::check(std::size_t n, double h) const {
    if (n != x_.size())
        throw InvalidParameter("FilterBank: channel count mismatch");
    if (!(h > 0.0))
        throw InvalidParameter("FilterBank: h must be > 0");
}

void FilterBank::step(std::span<const double> u, double h) {
    step(u, u, u, h);
}

void FilterBank::step(std::span<const double> u0, std::span<const double> um,
                      std::span<const double> u1, double h) {
    check(u0.size(), h);
    if (um.size() != x_.size() || u1.size() != x_.size())
        throw InvalidParameter("FilterBank: channel count mismatch");
    const double l = lambda_;
    for (std::size_t k = 0; k < x_.size(); ++k) {
        const double x = x_[k];
        const double k1 = l * (u0[k] - x);
        const double k2 = l * (um[k] - (x + 0.5 * h * k1));
        const double k3 = l * (um[k] - (x + 0.5 * h * k2));
        const double k4 = l * (u1[k] - (x + h * k3));
        x_[k] = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
}

Mat3 regressor_full(const ThreePhase& i, const ThreePhase& v, const ThreePhase& s0) {
    return Mat3::from_columns(-1.0 * i.as_vec(), v.as_vec(), -1.0 * s0.as_vec());
}

LreSampleFull lre_full_step(FilterBank& fb_i, FilterBank& fb_psi, const ThreePhase& i,
                            const Mat3& Psi, double t, double h) {
    const double ui[3] = {i.a, i.b, i.c};
    fb_i.step(std::span<const double>(ui, 3), h);
    fb_psi.step(std::span<const double>(&Psi.m[0][0], 9), h);

    LreSampleFull s;
    const auto xi = fb_i.output();
    const double l = fb_i.lambda();
    s.Z = {l * (i.a - xi[0]), l * (i.b - xi[1]), l * (i.c - xi[2])};
    const auto xp = fb_psi.output();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) s.Psi_f(r, c) = xp[3 * r + c];
    s.t = t + h;
    return s;
}

LreSampleReduced lre_reduced_step(FilterBank& fb, const Vec2& i_ab, const Vec2& v_ab,
                                  const Vec2& s0_ab, double rho, double omega, double t,
                                  double h) {
    if (!(rho > 0.0)) // +infinity (the R = 0 variant) passes
        throw InvalidParameter("lre_reduced_step: rho must be > 0");
    const double wr = std::isinf(rho) ? 0.0 : omega / rho;
    const double u[6] = {i_ab[0], i_ab[1], v_ab[0], -s0_ab[0], v_ab[1], -s0_ab[1]};
    fb.step(std::span<const double>(u, 6), h);

    LreSampleReduced s;
    const auto x = fb.output();
    const double l = fb.lambda();
    s.Z_ab = {l * (i_ab[0] - x[0]) + wr * x[0], l * (i_ab[1] - x[1]) + wr * x[1]};
    s.Psi_f_ab = {{{x[2], x[3]}, {x[4], x[5]}}};
    s.t = t + h;
    return s;
}

double reduced_regressor_det(double V, double phi) {
    if (V < 0.0)
        throw InvalidParameter("reduced_regressor_det: V must be >= 0");
    return 0.5 * std::sqrt(3.0) * V * std::sin(phi);
}

} // namespace tegrid
