#pragma once

// Measurable linear-regression pairs built from local measurements:
//   full:    Z = lambda*(i - x_i),          Psi_f = lowpass([-i | v | -S0])
//   reduced: Z_ab = lambda*(i_ab - x) + (omega/rho)*x,  Psi_f_ab = lowpass([v_ab | -S0_ab])
// The derivative filter p*F(p) with F(p) = lambda/(p + lambda) is realized on
// the low-pass state, never by differentiating measurements.

#include <limits>
#include <span>
#include <vector>

#include "tegrid/errors.hpp"
#include "tegrid/linalg.hpp"
#include "tegrid/threephase.hpp"

namespace tegrid {

/// Bank of identical first-order low-pass filters x' = lambda*(u - x),
/// one state per scalar channel; states start at zero.
class FilterBank {
  public:
    FilterBank(double lambda, std::size_t channels);

    /// One RK4 step with the input held constant over [t, t+h].
    void step(std::span<const double> u, double h);

    /// One RK4 step with the input sampled at the stage times: u0 at t,
    /// um at t + h/2, u1 at t + h.
    void step(std::span<const double> u0, std::span<const double> um,
              std::span<const double> u1, double h);

    std::span<const double> output() const { return x_; }
    double lambda() const { return lambda_; }
    std::size_t channels() const { return x_.size(); }
    void reset() { x_.assign(x_.size(), 0.0); }

  private:
    void check(std::size_t n, double h) const;
    double lambda_;
    std::vector<double> x_;
};

/// Filtered regression sample of the three-dimensional model.
struct LreSampleFull {
    Vec3 Z{};
    Mat3 Psi_f{};
    double t = 0.0;
};

/// Filtered regression sample of the reduced two-dimensional model.
struct LreSampleReduced {
    Vec2 Z_ab{};
    Mat2 Psi_f_ab{};
    double t = 0.0;
};

/// Regressor with columns (-i, v, -s0); column sums vanish for balanced
/// inputs, which is the structural excitation deficiency of the full model.
Mat3 regressor_full(const ThreePhase& i, const ThreePhase& v, const ThreePhase& s0);

/// Advance the full-model filters one step (inputs held over the step) and
/// emit the sample stamped t + h.  fb_i must have 3 channels, fb_psi 9
/// (row-major entries of the regressor).
LreSampleFull lre_full_step(FilterBank& fb_i, FilterBank& fb_psi, const ThreePhase& i,
                            const Mat3& Psi, double t, double h);

/// Reduced model: phases a and b only.  fb carries 6 channels: the low-pass
/// of i_ab (2) followed by the low-pass of [v_ab | -s0_ab] row-major (4).
/// rho = +infinity selects the R = 0 variant (the omega/rho term vanishes).
LreSampleReduced lre_reduced_step(FilterBank& fb, const Vec2& i_ab, const Vec2& v_ab,
                                  const Vec2& s0_ab, double rho, double omega, double t,
                                  double h);

/// First two phases of a three-phase sample.
inline Vec2 ab_components(const ThreePhase& x) { return {x.a, x.b}; }

/// Asymptotic determinant (sqrt(3)/2)*V*sin(phi) of the reduced regressor
/// written in the raw (unit-sine) basis; vanishes iff no active power flows.
/// With the power-invariant sqrt(2/3) component scaling the directly computed
/// determinant is exactly 2/3 of this value.
double reduced_regressor_det(double V, double phi);

} // namespace tegrid
