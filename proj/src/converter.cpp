#include "tegrid/converter.hpp"

#include <algorithm>
#include <cmath>

namespace tegrid {

Phasor required_pcc_phasor(const Phasor& i_ref, const GridParams& p) {
    p.validate();
    const std::complex<double> z{p.R, p.omega * p.L};
    const std::complex<double> i = std::polar(i_ref.amplitude, i_ref.phase);
    const std::complex<double> v = p.E + z * i;
    const Phasor out = Phasor::normalized(std::abs(v), std::arg(v));
    if (!(out.phase > -kPi / 2.0 && out.phase < kPi / 2.0))
        throw AssumptionViolation("required_pcc_phasor: PCC phase outside (-pi/2, pi/2)");
    return out;
}

PccVoltageModel::PccVoltageModel(const PccSchedule& sched, const GridParamsSchedule& params,
                                 double omega)
    : tau_(sched.tau), omega_(omega) {
    sched.validate();
    if (!(omega > 0.0))
        throw InvalidParameter("PccVoltageModel: omega must be > 0");

    // Retarget points: command starts plus grid-parameter changes after the
    // first command.
    const double t_first = sched.commands.front().t_start;
    std::vector<double> times;
    for (const auto& c : sched.commands) times.push_back(c.t_start);
    for (const auto& [t, p] : params.steps())
        if (t > t_first) times.push_back(t);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    auto active_command = [&](double t) -> const ConverterCommand& {
        const ConverterCommand* best = &sched.commands.front();
        for (const auto& c : sched.commands)
            if (c.t_start <= t) best = &c;
        return *best;
    };

    for (double t0 : times) {
        const ConverterCommand& cmd = active_command(t0);
        const Phasor target = required_pcc_phasor(cmd.i_ref, params.at(t0));
        const std::complex<double> zt = std::polar(target.amplitude, target.phase);
        std::complex<double> z0 = zt; // first segment starts on target
        if (!segments_.empty()) z0 = phasor_in_segment(segments_.size() - 1, t0);
        segments_.push_back({t0, z0, zt});
    }
}

std::size_t PccVoltageModel::segment_index(double t) const {
    if (t < segments_.front().t0)
        throw ScheduleError("PccVoltageModel: time precedes the first command");
    std::size_t k = segments_.size() - 1;
    while (k > 0 && segments_[k].t0 > t) --k;
    return k;
}

std::complex<double> PccVoltageModel::phasor_in_segment(std::size_t seg, double t) const {
    const Segment& s = segments_[seg];
    return s.target + (s.start - s.target) * std::exp(-(t - s.t0) / tau_);
}

std::complex<double> PccVoltageModel::phasor_at(double t) const {
    return phasor_in_segment(segment_index(t), t);
}

std::complex<double> PccVoltageModel::target_at(double t) const {
    return segments_[segment_index(t)].target;
}

ThreePhase PccVoltageModel::operator()(double t) const {
    const std::complex<double> z = phasor_at(t);
    return phasor_to_instantaneous(Phasor::normalized(std::abs(z), std::arg(z)), omega_, t);
}

ThreePhase pcc_voltage(double t, const PccSchedule& sched, const GridParamsSchedule& params,
                       double omega) {
    return PccVoltageModel(sched, params, omega)(t);
}

PllState locked_pll(double omega, double theta0, double kappa_p, double kappa_i,
                    double omega_ff) {
    PllState s;
    s.kappa_p = kappa_p;
    s.kappa_i = kappa_i;
    s.omega_ff = omega_ff;
    s.theta_hat = wrap_angle(theta0);
    s.integrator = omega - omega_ff; // makes omega_hat = omega at q = 0
    s.omega_hat = omega;
    return s;
}

PllState pll_step(const ThreePhase& v, const PllState& s, double h) {
    if (!(h > 0.0))
        throw InvalidParameter("pll_step: h must be > 0");
    PllState n = s;
    const double q = rotating_frame(v, s.theta_hat).q;
    n.integrator = s.integrator + s.kappa_i * q * h;
    n.omega_hat = s.omega_ff + s.kappa_p * q + n.integrator;
    n.theta_hat = wrap_angle(s.theta_hat + n.omega_hat * h);
    return n;
}

} // namespace tegrid
