#pragma once

// PCC voltage synthesis and the SRF-PLL.
//
// The converter is modeled as an ideal current-phasor tracker: a commanded
// steady-state current determines the PCC voltage target through the circuit
// equation, and controller settling is abstracted as a first-order lag on the
// complex voltage phasor (time constant tau).  The difference between the
// emitted voltage and its target is the exponentially decaying transient that
// the regression stage tolerates by construction.

#include <complex>
#include <vector>

#include "tegrid/errors.hpp"
#include "tegrid/plant.hpp"
#include "tegrid/threephase.hpp"

namespace tegrid {

/// Commanded steady-state converter current (phase measured from the grid
/// source), active from t_start onward.
struct ConverterCommand {
    Phasor i_ref{};
    double t_start = 0.0;
};

/// Ordered converter commands plus the phasor-lag time constant.
struct PccSchedule {
    std::vector<ConverterCommand> commands;
    double tau = 0.02; // s

    void validate() const {
        if (!(tau > 0.0))
            throw InvalidParameter("PccSchedule: tau must be > 0");
        if (commands.empty())
            throw InvalidParameter("PccSchedule: at least one command required");
        for (std::size_t k = 0; k < commands.size(); ++k) {
            if (commands[k].i_ref.amplitude < 0.0)
                throw InvalidParameter("PccSchedule: command amplitude must be >= 0");
            if (k > 0 && !(commands[k].t_start > commands[k - 1].t_start))
                throw InvalidParameter("PccSchedule: commands must be sorted strictly by t_start");
        }
    }
};

/// PCC voltage phasor that holds the commanded current in steady state:
/// V e^{j phi} = E + (R + j omega L) * I e^{j psi}.  The phase must fall in
/// (-pi/2, pi/2) for representable operating points.
Phasor required_pcc_phasor(const Phasor& i_ref, const GridParams& p);

/// PCC voltage as a complex phasor relaxing exponentially toward the target
/// implied by the active command and the current grid parameters.  Retarget
/// points are command starts and grid-parameter changes; the emitted phasor
/// is continuous across them.
class PccVoltageModel {
  public:
    PccVoltageModel(const PccSchedule& sched, const GridParamsSchedule& params, double omega);

    /// Complex phasor at time t (amplitude*e^{j phase} convention).
    std::complex<double> phasor_at(double t) const;

    /// Steady-state target phasor of the segment active at t.
    std::complex<double> target_at(double t) const;

    /// Instantaneous three-phase value at t.
    ThreePhase operator()(double t) const;

    /// Index of the segment active at t (for per-substep freezing).
    std::size_t segment_index(double t) const;
    std::complex<double> phasor_in_segment(std::size_t seg, double t) const;
    std::size_t segment_count() const { return segments_.size(); }
    double segment_start(std::size_t seg) const { return segments_[seg].t0; }

    double tau() const { return tau_; }
    double omega() const { return omega_; }

  private:
    struct Segment {
        double t0;
        std::complex<double> start;  // phasor value at t0 (continuity)
        std::complex<double> target; // steady-state target of this segment
    };
    std::vector<Segment> segments_;
    double tau_;
    double omega_;
};

/// Convenience wrapper building the model and sampling it once.
ThreePhase pcc_voltage(double t, const PccSchedule& sched,
                       const GridParamsSchedule& params, double omega);

/// Synchronous-reference-frame PLL state and gains.
struct PllState {
    double omega_hat = 0.0;  // rad/s
    double theta_hat = 0.0;  // rad, wrapped to (-pi, pi]
    double integrator = 0.0; // rad/s, integral-channel accumulator
    double kappa_p = 200.0;  // 1/(V s)
    double kappa_i = 5000.0; // 1/(V s^2)
    double omega_ff = 100.0 * kPi; // rad/s feedforward (nominal 2*pi*50)
};

/// Build a PLL locked to phase theta0 and frequency omega.
PllState locked_pll(double omega, double theta0, double kappa_p = 200.0,
                    double kappa_i = 5000.0, double omega_ff = 100.0 * kPi);

/// One Euler update: q = rotating_frame(v, theta_hat).q;
/// integrator += kappa_i*q*h; omega_hat = omega_ff + kappa_p*q + integrator;
/// theta_hat += omega_hat*h (wrapped).
PllState pll_step(const ThreePhase& v, const PllState& s, double h);

} // namespace tegrid
