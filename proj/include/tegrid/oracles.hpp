#pragma once

// Independent reference computations: phasor steady-state circuit solution,
// analytic filter responses, finite-difference gradients, and an iterative
// eigensolver.  These are deliberately implemented by different methods than
// the production paths so the two can cross-check each other; the phasor
// solution also feeds the end-of-run sanity metric in RunSummary.

#include <cmath>
#include <complex>
#include <vector>

#include "tegrid/errors.hpp"
#include "tegrid/linalg.hpp"
#include "tegrid/plant.hpp"
#include "tegrid/threephase.hpp"

namespace tegrid {

using ComplexPhasor = std::complex<double>;

inline ComplexPhasor to_complex(const Phasor& p) { return std::polar(p.amplitude, p.phase); }
inline Phasor to_phasor(const ComplexPhasor& z) {
    return Phasor::normalized(std::abs(z), std::arg(z));
}

/// Steady-state current I = (V e^{j phi} - E) / (R + j omega L).
Phasor steady_state_current(const GridParams& p, const Phasor& v);

/// Unit step response 1 - e^{-lambda t} of the first-order low-pass.
double first_order_step_response(double lambda, double t);

/// Central finite differences of f at x.
template <class F>
std::vector<double> finite_difference_gradient(F&& f, std::vector<double> x, double eps) {
    if (!(eps > 0.0))
        throw InvalidParameter("finite_difference_gradient: eps must be > 0");
    std::vector<double> g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double saved = x[k];
        x[k] = saved + eps;
        const double hi = f(x);
        x[k] = saved - eps;
        const double lo = f(x);
        x[k] = saved;
        g[k] = (hi - lo) / (2.0 * eps);
    }
    return g;
}

/// Smallest eigenvalue by shifted power iteration on (sigma I - G) with
/// sigma the Gershgorin upper bound of the spectrum; tolerance 1e-10*|G|,
/// at most 1e4 iterations.
double iterative_min_eig(const Mat2& g);
double iterative_min_eig(const Mat3& g);

} // namespace tegrid
