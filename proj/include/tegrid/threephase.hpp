#pragma once

// Balanced three-phase signal generation, phasor conversions, and the
// rotating-frame (dq) transform used by the PLL.
//
// Convention: the power-invariant scaling sqrt(2/3) is applied to the unit
// balanced set, so |S_phi(t)| = 1 for all t and amplitudes are peak
// phase quantities.

#include <cmath>

#include "tegrid/errors.hpp"
#include "tegrid/linalg.hpp"

namespace tegrid {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// sqrt(2/3), the power-invariant scaling of the balanced set.
inline const double kBalancedScale = std::sqrt(2.0 / 3.0);

/// Instantaneous three-phase sample; a, b, c share one unit.
struct ThreePhase {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    ThreePhase& operator+=(const ThreePhase& o) {
        a += o.a;
        b += o.b;
        c += o.c;
        return *this;
    }
    friend ThreePhase operator+(ThreePhase x, const ThreePhase& y) { return x += y; }
    friend ThreePhase operator-(const ThreePhase& x, const ThreePhase& y) {
        return {x.a - y.a, x.b - y.b, x.c - y.c};
    }
    friend ThreePhase operator*(double s, const ThreePhase& x) {
        return {s * x.a, s * x.b, s * x.c};
    }

    double sum() const { return a + b + c; }
    double dot(const ThreePhase& o) const { return a * o.a + b * o.b + c * o.c; }
    double norm() const { return std::sqrt(dot(*this)); }

    Vec3 as_vec() const { return {a, b, c}; }
    static ThreePhase from_vec(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

/// Wrap an angle to (-pi, pi]; exact -pi maps to +pi.
inline double wrap_angle(double angle) {
    double w = std::remainder(angle, kTwoPi); // in [-pi, pi]
    if (w <= -kPi) w = kPi;
    return w;
}

/// Peak amplitude and phase of a balanced sinusoidal set.
struct Phasor {
    double amplitude = 0.0; // peak value, >= 0
    double phase = 0.0;     // rad, in (-pi, pi]

    /// Build with amplitude >= 0 and phase wrapped to (-pi, pi].
    static Phasor normalized(double amplitude, double phase) {
        if (amplitude < 0.0) {
            amplitude = -amplitude;
            phase += kPi;
        }
        return {amplitude, wrap_angle(phase)};
    }
};

/// Unit balanced set at absolute electrical angle x:
/// sqrt(2/3)*[sin(x), sin(x-2pi/3), sin(x+2pi/3)].
inline ThreePhase balanced_from_angle(double x) {
    return {kBalancedScale * std::sin(x),
            kBalancedScale * std::sin(x - 2.0 * kPi / 3.0),
            kBalancedScale * std::sin(x + 2.0 * kPi / 3.0)};
}

/// Unit balanced set sqrt(2/3)*[sin(wt+phi), sin(wt+phi-2pi/3), sin(wt+phi+2pi/3)].
inline ThreePhase balanced_set(double omega, double phi, double t) {
    if (!(omega > 0.0))
        throw InvalidParameter("balanced_set: omega must be > 0");
    return balanced_from_angle(omega * t + phi);
}

/// Instantaneous value of a phasor at time t.
inline ThreePhase phasor_to_instantaneous(const Phasor& p, double omega, double t) {
    return p.amplitude * balanced_set(omega, p.phase, t);
}

/// Rotating-frame (dq) components.
struct Dq {
    double d = 0.0;
    double q = 0.0;
};

/// Amplitude-recovering rotating transform: for v = V*S_phi(t) and
/// theta = w*t + phi the result is (d=V, q=0); a phase lead of delta
/// gives q = V*sin(delta).
inline Dq rotating_frame(const ThreePhase& v, double theta) {
    // Power-invariant Clarke projection: alpha = V sin(x), beta = -V cos(x)
    // for v = V*S_phi with x = w*t + phi.
    const double alpha = kBalancedScale * (v.a - 0.5 * (v.b + v.c));
    const double beta = (v.b - v.c) / std::sqrt(2.0);
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    return {alpha * s - beta * c,   // V cos(x - theta)
            alpha * c + beta * s};  // V sin(x - theta)
}

} // namespace tegrid
