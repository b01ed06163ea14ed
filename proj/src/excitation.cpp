#include "tegrid/excitation.hpp"

#include <algorithm>
#include <cmath>

namespace tegrid {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void check_symmetric(double asym, double scale) {
    if (asym > 1e-9 * std::max(scale, 1e-300))
        throw InvalidParameter("min_eig_sym: matrix is not symmetric");
}

/// Both eigenvalues of a symmetric 2x2.
void eig2(const Mat2& g, double& lo, double& hi) {
    check_symmetric(std::fabs(g(0, 1) - g(1, 0)), g.max_abs());
    const double mean = 0.5 * (g(0, 0) + g(1, 1));
    const double half_diff = 0.5 * (g(0, 0) - g(1, 1));
    const double r = std::hypot(half_diff, 0.5 * (g(0, 1) + g(1, 0)));
    lo = mean - r;
    hi = mean + r;
}

/// Extreme eigenvalues of a symmetric 3x3 via the trigonometric solution of
/// the characteristic cubic.
void eig3(const Mat3& g, double& lo, double& hi) {
    const double asym = std::max({std::fabs(g(0, 1) - g(1, 0)), std::fabs(g(0, 2) - g(2, 0)),
                                  std::fabs(g(1, 2) - g(2, 1))});
    check_symmetric(asym, g.max_abs());
    // Work on the symmetrized matrix so rounding asymmetry cannot bias the result.
    const double a01 = 0.5 * (g(0, 1) + g(1, 0));
    const double a02 = 0.5 * (g(0, 2) + g(2, 0));
    const double a12 = 0.5 * (g(1, 2) + g(2, 1));
    const double p1 = a01 * a01 + a02 * a02 + a12 * a12;
    if (p1 == 0.0) { // already diagonal
        lo = std::min({g(0, 0), g(1, 1), g(2, 2)});
        hi = std::max({g(0, 0), g(1, 1), g(2, 2)});
        return;
    }
    const double q = g.trace() / 3.0;
    const double d0 = g(0, 0) - q, d1 = g(1, 1) - q, d2 = g(2, 2) - q;
    const double p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    Mat3 b;
    b(0, 0) = d0 / p;
    b(1, 1) = d1 / p;
    b(2, 2) = d2 / p;
    b(0, 1) = b(1, 0) = a01 / p;
    b(0, 2) = b(2, 0) = a02 / p;
    b(1, 2) = b(2, 1) = a12 / p;
    const double r = std::clamp(0.5 * b.det(), -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    hi = q + 2.0 * p * std::cos(phi);
    lo = q + 2.0 * p * std::cos(phi + 2.0 * kPi / 3.0);
}

} // namespace

double min_eig_sym(const Mat2& g) {
    double lo, hi;
    eig2(g, lo, hi);
    return lo;
}

double max_eig_sym(const Mat2& g) {
    double lo, hi;
    eig2(g, lo, hi);
    return hi;
}

double min_eig_sym(const Mat3& g) {
    double lo, hi;
    eig3(g, lo, hi);
    return lo;
}

double max_eig_sym(const Mat3& g) {
    double lo, hi;
    eig3(g, lo, hi);
    return hi;
}

} // namespace tegrid
