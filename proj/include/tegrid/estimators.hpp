#pragma once

// Online estimators over the filtered regression pairs:
//  - observer-based composite identifier (observer channel on the raw
//    regressor plus learning channel on the filtered one),
//  - classical gradient descent on the full model (the alpha = gamma_P = 0
//    special case of the composite law),
//  - gradient descent on the reduced two-parameter model,
//  - recovery maps back to (R, L, E).
// All laws advance with the same RK4 integrator as the plant, holding the
// measured inputs constant over the step.

#include <optional>

#include "tegrid/errors.hpp"
#include "tegrid/plant.hpp"
#include "tegrid/regression.hpp"
#include "tegrid/threephase.hpp"

namespace tegrid {

/// Full parameter vector col(R/L, 1/L, E/L).
struct ThetaFull {
    double th1 = 0.0; // R/L, 1/s
    double th2 = 0.0; // 1/L
    double th3 = 0.0; // E/L

    Vec3 as_vec() const { return {th1, th2, th3}; }
    static ThetaFull from_vec(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

/// Reduced parameter vector col(1/L, E/L) for the known-X/R model.
struct ThetaReduced {
    double v1 = 0.0; // 1/L
    double v2 = 0.0; // E/L

    Vec2 as_vec() const { return {v1, v2}; }
    static ThetaReduced from_vec(const Vec2& v) { return {v[0], v[1]}; }
};

/// Composite-identifier gains; alpha = gamma_p = 0 degenerates to classical
/// gradient descent with gain gamma_i.
struct CompositeGains {
    double alpha = 0.0;   // observer leakage, 1/s, >= 0
    double gamma_p = 0.0; // observer-error learning gain, >= 0
    double gamma_i = 0.0; // filtered-regression learning gain, > 0

    void validate() const {
        if (alpha < 0.0 || gamma_p < 0.0)
            throw InvalidParameter("CompositeGains: alpha and gamma_p must be >= 0");
        if (!(gamma_i > 0.0))
            throw InvalidParameter("CompositeGains: gamma_i must be > 0");
    }
};

/// Joint state (i_hat, theta_hat) of the composite identifier.
struct CompositeState {
    ThreePhase i_hat{};
    ThetaFull theta_hat{};
    double t = 0.0;
};

/// Learning-channel direction Psi_f^T (Z - Psi_f theta): the negative
/// gradient of the instantaneous cost 0.5*|Z - Psi_f theta|^2.
inline Vec3 lre_gradient(const LreSampleFull& s, const Vec3& theta) {
    return s.Psi_f.tmul(s.Z - s.Psi_f * theta);
}

inline Vec2 lre_gradient(const LreSampleReduced& s, const Vec2& theta) {
    return s.Psi_f_ab.tmul(s.Z_ab - s.Psi_f_ab * theta);
}

/// One RK4 step of the composite law
///   i_hat' = -alpha*(i_hat - i) + Psi*theta_hat
///   theta_hat' = -gamma_p * Psi^T (i_hat - i) + gamma_i * Psi_f^T (Z - Psi_f theta_hat)
/// with (i, Psi, lre) held constant over the step.
CompositeState composite_step(const CompositeState& s, const ThreePhase& i, const Mat3& Psi,
                              const LreSampleFull& lre, const CompositeGains& g, double h);

/// One RK4 step of theta' = gamma * Psi_f^T (Z - Psi_f theta), inputs frozen.
ThetaFull gradient_full_step(const ThetaFull& theta_hat, const LreSampleFull& lre, double gamma,
                             double h);

/// One RK4 step of the reduced gradient law.
ThetaReduced gd_reduced_step(const ThetaReduced& v_hat, const LreSampleReduced& lre, double gamma,
                             double h);

/// Physical parameters recovered from an estimate.
struct RecoveredParams {
    double R = 0.0;
    double L = 0.0;
    double E = 0.0;
};

/// Inverse of the full map: L = 1/th2, R = th1/th2, E = th3/th2.
/// Throws while the estimate is not yet physically meaningful (th2 <= 0).
RecoveredParams recover_full(const ThetaFull& theta);
std::optional<RecoveredParams> try_recover_full(const ThetaFull& theta);

/// Inverse of the reduced map with the assumed X/R ratio: L = 1/v1,
/// E = v2/v1, R = omega*L/rho (rho = +infinity gives R = 0).
RecoveredParams recover_reduced(const ThetaReduced& v, double rho, double omega);
std::optional<RecoveredParams> try_recover_reduced(const ThetaReduced& v, double rho,
                                                   double omega);

/// Forward maps from circuit parameters.
ThetaFull theta_from_params(const GridParams& p);
ThetaReduced theta_reduced_from_params(const GridParams& p);

} // namespace tegrid
