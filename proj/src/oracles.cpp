#include "tegrid/oracles.hpp"

#include <array>
#include <limits>
#include <random>

namespace tegrid {

Phasor steady_state_current(const GridParams& p, const Phasor& v) {
    p.validate();
    const std::complex<double> z{p.R, p.omega * p.L};
    if (std::abs(z) == 0.0)
        throw InvalidParameter("steady_state_current: zero circuit impedance");
    return to_phasor((to_complex(v) - std::complex<double>(p.E, 0.0)) / z);
}

double first_order_step_response(double lambda, double t) {
    if (!(lambda > 0.0))
        throw InvalidParameter("first_order_step_response: lambda must be > 0");
    if (t < 0.0)
        throw InvalidParameter("first_order_step_response: t must be >= 0");
    return 1.0 - std::exp(-lambda * t);
}

namespace {

/// Power iteration for the largest eigenvalue of symmetric B (n = 2 or 3),
/// residual-based stop.  Returns the Rayleigh quotient.
template <std::size_t N, class MatT>
double power_largest(const MatT& b, double scale) {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::array<double, N> v{};
    for (auto& x : v) x = dist(rng);

    const double tol = 1e-10 * std::max(scale, 1e-300);
    double mu = 0.0;
    for (int iter = 0; iter < 10000; ++iter) {
        std::array<double, N> w{};
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c) w[r] += b(r, c) * v[c];
        double nv = 0.0, wv = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            nv += v[k] * v[k];
            wv += w[k] * v[k];
        }
        mu = wv / nv; // Rayleigh quotient (v is kept normalized below)
        double res = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            const double r = w[k] - mu * v[k];
            res += r * r;
        }
        if (std::sqrt(res) <= tol) return mu;
        double nw = 0.0;
        for (double x : w) nw += x * x;
        nw = std::sqrt(nw);
        if (nw == 0.0) return 0.0; // b annihilates v: eigenvalue 0
        for (std::size_t k = 0; k < N; ++k) v[k] = w[k] / nw;
    }
    throw OracleFailure("iterative_min_eig: power iteration did not converge");
}

/// Gershgorin upper bound on the spectrum of a symmetric matrix.
template <std::size_t N, class MatT>
double gershgorin_upper(const MatT& g) {
    double best = std::numeric_limits<double>::lowest();
    for (std::size_t r = 0; r < N; ++r) {
        double s = g(r, r);
        for (std::size_t c = 0; c < N; ++c)
            if (c != r) s += std::fabs(g(r, c));
        best = std::max(best, s);
    }
    return best;
}

template <std::size_t N, class MatT>
double min_eig_impl(const MatT& g) {
    const double scale = g.max_abs();
    if (scale == 0.0) return 0.0;
    const double sigma = gershgorin_upper<N>(g);
    MatT b;
    for (std::size_t r = 0; r < N; ++r)
        for (std::size_t c = 0; c < N; ++c) b(r, c) = (r == c ? sigma : 0.0) - g(r, c);
    return sigma - power_largest<N>(b, scale);
}

} // namespace

double iterative_min_eig(const Mat2& g) { return min_eig_impl<2>(g); }
double iterative_min_eig(const Mat3& g) { return min_eig_impl<3>(g); }

} // namespace tegrid
