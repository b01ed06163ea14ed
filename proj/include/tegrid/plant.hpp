#pragma once

// Thevenin-equivalent circuit dynamics L*di/dt = -R*i + v - e with a
// fixed-step RK4 integrator and a piecewise-constant parameter schedule.

#include <utility>
#include <vector>

#include "tegrid/errors.hpp"
#include "tegrid/threephase.hpp"

namespace tegrid {

/// Series R-L circuit behind an ideal source of amplitude E at frequency omega.
/// Units are either SI (ohm, henry, volt) or per-unit after base scaling;
/// the dynamics are identical.
struct GridParams {
    double R = 0.0;     // series resistance, >= 0 (0 only for the known-X/R reduced path)
    double L = 0.0;     // series inductance, > 0
    double E = 0.0;     // source amplitude (peak phase), > 0
    double omega = 0.0; // angular frequency, rad/s, > 0

    /// X/R ratio omega*L/R; defined only for R > 0.
    double rho() const {
        if (!(R > 0.0))
            throw InvalidParameter("GridParams::rho: R must be > 0");
        return omega * L / R;
    }

    void validate() const {
        if (!(L > 0.0)) throw InvalidParameter("GridParams: L must be > 0");
        if (!(E > 0.0)) throw InvalidParameter("GridParams: E must be > 0");
        if (!(omega > 0.0)) throw InvalidParameter("GridParams: omega must be > 0");
        if (R < 0.0) throw InvalidParameter("GridParams: R must be >= 0");
    }
};

/// Current state of the circuit.
struct PlantState {
    ThreePhase i{};
    double t = 0.0;
};

/// Right-hand side (v - e - R*i)/L of the circuit equation, componentwise.
inline ThreePhase plant_derivative(const ThreePhase& i, const ThreePhase& v,
                                   const ThreePhase& e, const GridParams& p) {
    if (!(p.L > 0.0))
        throw InvalidParameter("plant_derivative: L must be > 0");
    const double inv_l = 1.0 / p.L;
    return {(v.a - e.a - p.R * i.a) * inv_l,
            (v.b - e.b - p.R * i.b) * inv_l,
            (v.c - e.c - p.R * i.c) * inv_l};
}

/// One classical RK4 step of dx/dt = f(t, x) for any type supporting
/// x + x and double * x.
template <class State, class Deriv>
State rk4(const State& x, double t, double h, Deriv&& f) {
    const State k1 = f(t, x);
    const State k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
    const State k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
    const State k4 = f(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// One RK4 step of the circuit. `inputs(t)` must return the pair (v, e)
/// at any stage time in [s.t, s.t + h].
template <class InputSampler>
PlantState rk4_step(const PlantState& s, InputSampler&& inputs, const GridParams& p, double h) {
    if (!(h > 0.0))
        throw InvalidParameter("rk4_step: h must be > 0");
    p.validate();
    const double t0 = s.t;
    auto f = [&](double t, const ThreePhase& i) {
        auto [v, e] = inputs(t);
        return plant_derivative(i, v, e, p);
    };
    return {rk4(s.i, t0, h, f), t0 + h};
}

/// Piecewise-constant grid parameters: the value at time t is the last
/// change at or before t (right-continuous at change points).
class GridParamsSchedule {
  public:
    explicit GridParamsSchedule(GridParams initial) {
        initial.validate();
        steps_.emplace_back(0.0, initial);
    }

    /// Register a parameter change; times must be strictly increasing.
    void add_change(double t, GridParams p) {
        p.validate();
        if (!(t > steps_.back().first))
            throw InvalidParameter("GridParamsSchedule: change times must be strictly increasing");
        steps_.emplace_back(t, p);
    }

    const GridParams& at(double t) const {
        // Last entry with time <= t; the initial entry covers all t < first change.
        for (auto it = steps_.rbegin(); it != steps_.rend(); ++it)
            if (it->first <= t) return it->second;
        return steps_.front().second;
    }

    const std::vector<std::pair<double, GridParams>>& steps() const { return steps_; }

  private:
    std::vector<std::pair<double, GridParams>> steps_;
};

} // namespace tegrid
