#include <algorithm>
#include <cmath>
#include <limits>

#include "tegrid/oracles.hpp"
#include "tegrid/scenario.hpp"

namespace tegrid {

namespace {

// ---------------------------------------------------------------------------
// Joint integration state: plant, both regression filter banks and both
// estimators advance as one vector field under a single RK4 clock, so no
// coupling term lags by a stage.
// ---------------------------------------------------------------------------

struct LoopVec {
    Vec3 i{};     // plant current
    Vec3 xi{};    // low-pass of i (full path)
    Mat3 xpsi{};  // low-pass of the full regressor
    Vec3 ihat{};  // observer current
    Vec3 th{};    // full-model estimate
    Vec2 xir{};   // low-pass of i_ab (reduced path)
    Mat2 xpsir{}; // low-pass of the reduced regressor
    Vec2 vth{};   // reduced-model estimate

    LoopVec operator+(const LoopVec& o) const {
        return {i + o.i,       xi + o.xi,       xpsi + o.xpsi, ihat + o.ihat,
                th + o.th,     xir + o.xir,     xpsir + o.xpsir, vth + o.vth};
    }
    friend LoopVec operator*(double a, const LoopVec& s) {
        return {a * s.i,   a * s.xi,  a * s.xpsi,  a * s.ihat,
                a * s.th,  a * s.xir, a * s.xpsir, a * s.vth};
    }
};

/// Everything that is constant over one substep: the active grid parameters,
/// the active PCC-voltage segment and the S0 phase source.
struct SegmentCtx {
    GridParams p{};            // per-unit
    const PccVoltageModel* vmodel = nullptr;
    std::size_t vseg = 0;
    double omega = 0.0;        // true grid frequency
    // Regressor S0 phase reference: angle(t) = s0_base + s0_rate*(t - t_base).
    double s0_base = 0.0;
    double s0_rate = 0.0;
    double t_base = 0.0;

    ThreePhase v_at(double t) const {
        const std::complex<double> w =
            vmodel->phasor_in_segment(vseg, t) * std::polar(1.0, omega * t);
        return {kBalancedScale * std::imag(w),
                kBalancedScale * std::imag(w * std::polar(1.0, -2.0 * kPi / 3.0)),
                kBalancedScale * std::imag(w * std::polar(1.0, 2.0 * kPi / 3.0))};
    }
    ThreePhase s0_true_at(double t) const { return balanced_from_angle(omega * t); }
    ThreePhase s0_reg_at(double t) const {
        return balanced_from_angle(s0_base + s0_rate * (t - t_base));
    }
};

struct LawSelection {
    EstimatorKind kind;
    CompositeGains gains;
    double gamma_full;
    double gamma_reduced;
    double rho_assumed;
    double lambda;
    bool frozen;
};

LoopVec loop_derivative(double t, const LoopVec& s, const SegmentCtx& c,
                        const LawSelection& law) {
    LoopVec d;
    const ThreePhase v = c.v_at(t);
    const ThreePhase s0_true = c.s0_true_at(t);
    const ThreePhase e = c.p.E * s0_true;
    const ThreePhase i{s.i[0], s.i[1], s.i[2]};
    const ThreePhase di = plant_derivative(i, v, e, c.p);
    d.i = di.as_vec();

    const ThreePhase s0 = c.s0_reg_at(t);
    const Mat3 psi = regressor_full(i, v, s0);
    const double l = law.lambda;

    // Full regression path.
    d.xi = l * (i.as_vec() - s.xi);
    d.xpsi = l * (psi - s.xpsi);
    const Vec3 z = l * (i.as_vec() - s.xi);

    // Reduced regression path.
    const Vec2 i_ab{i.a, i.b};
    const Vec2 v_ab{v.a, v.b};
    const Vec2 s0_ab{s0.a, s0.b};
    const Mat2 psi_ab = Mat2::from_columns(v_ab, {-s0_ab[0], -s0_ab[1]});
    d.xir = l * (i_ab - s.xir);
    d.xpsir = l * (psi_ab - s.xpsir);
    const double wr = std::isinf(law.rho_assumed) ? 0.0 : c.omega / law.rho_assumed;
    const Vec2 z_ab = l * (i_ab - s.xir) + wr * s.xir;

    if (law.frozen) {
        d.ihat = d.i; // observer tracks the plant while adaptation is frozen
        return d;
    }

    switch (law.kind) {
        case EstimatorKind::Composite: {
            const Vec3 tilde = s.ihat - i.as_vec();
            d.ihat = -law.gains.alpha * tilde + psi * s.th;
            d.th = -law.gains.gamma_p * psi.tmul(tilde) +
                   law.gains.gamma_i * s.xpsi.tmul(z - s.xpsi * s.th);
            break;
        }
        case EstimatorKind::GradientFull:
            d.th = law.gamma_full * s.xpsi.tmul(z - s.xpsi * s.th);
            break;
        case EstimatorKind::Reduced:
            d.vth = law.gamma_reduced * s.xpsir.tmul(z_ab - s.xpsir * s.vth);
            break;
    }
    return d;
}

void require_finite_state(const LoopVec& s, double t) {
    auto bad = [t](const char* what) {
        throw NumericFault(std::string("non-finite ") + what + " at t = " + std::to_string(t));
    };
    for (int k = 0; k < 3; ++k) {
        if (!std::isfinite(s.i[k])) bad("plant current");
        if (!std::isfinite(s.th[k])) bad("parameter estimate");
        if (!std::isfinite(s.ihat[k])) bad("observer current");
        if (!std::isfinite(s.xi[k])) bad("filter state");
    }
    for (int k = 0; k < 2; ++k)
        if (!std::isfinite(s.vth[k])) bad("reduced estimate");
}

} // namespace

// ---------------------------------------------------------------------------
// Summary statistics.
// ---------------------------------------------------------------------------

namespace {

double rel_err(double est, double truth) {
    const double denom = std::fabs(truth) > 1e-12 ? std::fabs(truth) : 1.0;
    return std::fabs(est - truth) / denom;
}

ParamSettle settle_of(const std::vector<const TimeSeriesRow*>& rows,
                      double (RecoveredParams::*field), double t_begin) {
    ParamSettle out;
    if (rows.empty()) return out;
    constexpr double kBand = 0.02;

    // Relative errors; recovery gaps count as "not within the band".
    std::vector<double> err(rows.size(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k]->recovered)
            err[k] = rel_err((*rows[k]->recovered).*field, rows[k]->truth.*field);
        if (std::isfinite(err[k]))
            out.peak_rel_excursion = std::max(out.peak_rel_excursion, err[k]);
    }
    out.final_rel_error = err.back();

    // First index after which the error stays inside the band.
    std::size_t first_ok = rows.size();
    for (std::size_t k = rows.size(); k-- > 0;) {
        if (err[k] < kBand)
            first_ok = k;
        else
            break;
    }
    if (first_ok < rows.size()) {
        out.settled = true;
        out.settle_time = rows[first_ok]->t - t_begin;
    }
    return out;
}

} // namespace

RunSummary summarize(const TimeSeries& ts, const std::vector<double>& event_times) {
    if (ts.rows.empty())
        throw InvalidParameter("summarize: empty time series");

    RunSummary s;
    std::vector<double> bounds{ts.rows.front().t};
    for (double t : event_times)
        if (t > bounds.back()) bounds.push_back(t);
    bounds.push_back(std::numeric_limits<double>::infinity());

    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
        std::vector<const TimeSeriesRow*> rows;
        for (const auto& r : ts.rows)
            if (r.t >= bounds[b] && r.t < bounds[b + 1]) rows.push_back(&r);
        if (rows.empty()) continue;
        SegmentSummary seg;
        seg.t_begin = bounds[b];
        seg.t_end = rows.back()->t;
        seg.R = settle_of(rows, &RecoveredParams::R, bounds[b]);
        seg.L = settle_of(rows, &RecoveredParams::L, bounds[b]);
        seg.E = settle_of(rows, &RecoveredParams::E, bounds[b]);
        s.segments.push_back(seg);
    }

    const TimeSeriesRow& last = ts.rows.back();
    if (last.recovered) {
        s.final_rel_err_R = rel_err(last.recovered->R, last.truth.R);
        s.final_rel_err_L = rel_err(last.recovered->L, last.truth.L);
        s.final_rel_err_E = rel_err(last.recovered->E, last.truth.E);
    } else {
        s.final_rel_err_R = s.final_rel_err_L = s.final_rel_err_E =
            std::numeric_limits<double>::infinity();
    }
    s.lambda_min_first = ts.rows.front().lambda_min_cum;
    s.lambda_min_last = last.lambda_min_cum;
    return s;
}

// ---------------------------------------------------------------------------
// The run loop.
// ---------------------------------------------------------------------------

RunResult run(const SimConfig& config, const StepProbe& probe) {
    config.validate();
    const Bases& bases = config.bases;
    const double omega = bases.omega();
    const double vb = bases.v_base();
    const double ib = bases.i_base();
    const double zb = bases.z_base();

    // --- Truth schedules in SI and per-unit -------------------------------
    auto to_pu = [&](const GridParams& g) {
        return GridParams{g.R / zb, g.L / zb, g.E / vb, g.omega};
    };

    struct Knobs {
        double scr, xr, e_scale = 1.0;
    } knobs{config.scr, config.xr_ratio, 1.0};

    GridParams p_si = scr_to_params(knobs.scr, knobs.xr, bases.v_ll, bases.s_rated, omega);
    GridParamsSchedule sched_si(p_si);
    GridParamsSchedule sched_pu(to_pu(p_si));

    PccSchedule pcc;
    pcc.tau = config.tau;
    pcc.commands.push_back({Phasor::normalized(config.i_ref_pu, config.i_ref_phase), 0.0});

    std::vector<double> event_times;
    {
        // Walk the (time-sorted) events, folding simultaneous changes into one
        // schedule entry per distinct time.
        std::size_t k = 0;
        while (k < config.events.size()) {
            const double t = config.events[k].time;
            bool grid_changed = false;
            while (k < config.events.size() && config.events[k].time == t) {
                std::visit(
                    [&](const auto& ch) {
                        using T = std::decay_t<decltype(ch)>;
                        if constexpr (std::is_same_v<T, SetScr>) {
                            knobs.scr = ch.scr;
                            p_si = scr_to_params(knobs.scr, knobs.xr, bases.v_ll, bases.s_rated,
                                                 omega);
                            p_si.E *= knobs.e_scale;
                            grid_changed = true;
                        } else if constexpr (std::is_same_v<T, SetXrRatio>) {
                            knobs.xr = ch.xr_ratio;
                            p_si = scr_to_params(knobs.scr, knobs.xr, bases.v_ll, bases.s_rated,
                                                 omega);
                            p_si.E *= knobs.e_scale;
                            grid_changed = true;
                        } else if constexpr (std::is_same_v<T, ScaleE>) {
                            knobs.e_scale *= ch.factor;
                            p_si.E *= ch.factor;
                            grid_changed = true;
                        } else if constexpr (std::is_same_v<T, SetParams>) {
                            p_si = ch.params;
                            p_si.omega = omega;
                            grid_changed = true;
                        } else if constexpr (std::is_same_v<T, SetCommand>) {
                            ConverterCommand cmd = ch.command;
                            cmd.t_start = t;
                            pcc.commands.push_back(cmd);
                        }
                    },
                    config.events[k].change);
                ++k;
            }
            if (grid_changed) {
                sched_si.add_change(t, p_si);
                sched_pu.add_change(t, to_pu(p_si));
            }
            event_times.push_back(t);
        }
    }

    const PccVoltageModel vmodel(pcc, sched_pu, omega);

    // --- Initial conditions: converter already in steady state ------------
    const GridParams pu0 = sched_pu.at(0.0);
    const Phasor v0 = to_phasor(vmodel.phasor_at(0.0));
    const Phasor i_ph0 = steady_state_current(pu0, v0);

    const LawSelection law_template{config.estimator,
                                    config.gains,
                                    config.gamma_full,
                                    config.gamma_reduced,
                                    config.rho_assumed,
                                    config.lambda,
                                    /*frozen=*/false};

    LoopVec s{};
    s.i = phasor_to_instantaneous(i_ph0, omega, 0.0).as_vec();
    s.ihat = s.i;

    Vec3 th_init{};
    Vec2 vth_init{};
    if (config.theta_init_value) {
        th_init = *config.theta_init_value;
        vth_init = {th_init[1], th_init[2]};
    } else if (config.theta_init == ThetaInit::Nominal) {
        th_init = theta_from_params(pu0).as_vec();
        vth_init = theta_reduced_from_params(pu0).as_vec();
    }
    s.th = th_init;
    s.vth = vth_init;

    PllState pll = locked_pll(omega, v0.phase, config.pll_kappa_p, config.pll_kappa_i,
                              config.pll_omega_ff.value_or(omega));

    // Boundedness scales (steady values the ceiling multiplies).
    const double th_scale = std::max(theta_from_params(pu0).as_vec().norm(), 1e-3);
    const double vth_scale = std::max(theta_reduced_from_params(pu0).as_vec().norm(), 1e-3);
    const double i_scale = std::max(i_ph0.amplitude, 1e-3);

    // --- Diagnostics -------------------------------------------------------
    GramAccumulator3 gram_full(Mat3{}, 0.0); // filters start at zero
    GramAccumulator2 gram_red(Mat2{}, 0.0);
    PsiWindow3 window_full(static_cast<std::size_t>(config.window_decimation),
                           std::max(2.0 * config.window_span, 0.2));
    PsiWindow2 window_red(static_cast<std::size_t>(config.window_decimation),
                          std::max(2.0 * config.window_span, 0.2));
    window_full.push(0.0, Mat3{});
    window_red.push(0.0, Mat2{});

    TimeSeries ts;
    double peak_i_hat = 0.0, peak_theta = 0.0;
    bool bounded = true;

    // S0 phase accumulator for the PLL-driven mode.
    double s0_acc = 0.0;

    const long nsteps = std::lround(config.duration / config.h);
    const double h = config.h;

    // --- Row emission -------------------------------------------------------
    auto make_ctx = [&](double t, double pll_omega) {
        SegmentCtx c;
        c.p = sched_pu.at(t);
        c.vmodel = &vmodel;
        c.vseg = vmodel.segment_index(t);
        c.omega = omega;
        if (config.pll_drives_s0) {
            c.s0_base = s0_acc;
            c.s0_rate = pll_omega;
            c.t_base = t;
        } else {
            c.s0_base = 0.0;
            c.s0_rate = omega;
            c.t_base = 0.0;
        }
        return c;
    };

    auto lre_full_of = [&](const LoopVec& x, const double lambda) {
        LreSampleFull out;
        out.Z = lambda * (x.i - x.xi);
        out.Psi_f = x.xpsi;
        return out;
    };
    auto lre_red_of = [&](const LoopVec& x, const double lambda) {
        LreSampleReduced out;
        const double wr =
            std::isinf(config.rho_assumed) ? 0.0 : omega / config.rho_assumed;
        out.Z_ab = lambda * (Vec2{x.i[0], x.i[1]} - x.xir) + wr * x.xir;
        out.Psi_f_ab = x.xpsir;
        return out;
    };

    auto emit_row = [&](double t, const SegmentCtx& ctx) {
        TimeSeriesRow row;
        row.t = t;
        const ThreePhase i{s.i[0], s.i[1], s.i[2]};
        row.i = ib * i;
        row.v = vb * ctx.v_at(t);
        row.e = vb * (ctx.p.E * ctx.s0_true_at(t));

        const GridParams truth_si = sched_si.at(t);
        row.truth = {truth_si.R, truth_si.L, truth_si.E};
        row.omega_pll = pll.omega_hat;

        const LreSampleFull lre = lre_full_of(s, config.lambda);
        const LreSampleReduced lre_red = lre_red_of(s, config.lambda);

        if (config.estimator == EstimatorKind::Reduced) {
            const ThetaReduced vth{s.vth[0], s.vth[1]};
            const double wr =
                std::isinf(config.rho_assumed) ? 0.0 : omega / config.rho_assumed;
            row.theta_hat = {wr, s.vth[0] / zb, s.vth[1] * vb / zb};
            if (auto rec = try_recover_reduced(vth, config.rho_assumed, omega))
                row.recovered = RecoveredParams{rec->R * zb, rec->L * zb, rec->E * vb};
            const Vec2 r = lre_red.Z_ab - lre_red.Psi_f_ab * s.vth;
            row.residual_norm = r.norm() / std::max(lre_red.Z_ab.norm(), 1e-12);
            row.lambda_min_cum = min_eig_sym(gram_red.gram());
        } else {
            row.theta_hat = {s.th[0], s.th[1] / zb, s.th[2] * vb / zb};
            if (auto rec = try_recover_full(ThetaFull::from_vec(s.th)))
                row.recovered = RecoveredParams{rec->R * zb, rec->L * zb, rec->E * vb};
            const Vec3 r = lre.Z - lre.Psi_f * s.th;
            row.residual_norm = r.norm() / std::max(lre.Z.norm(), 1e-12);
            row.lambda_min_cum = min_eig_sym(gram_full.gram());
            if (config.estimator == EstimatorKind::Composite)
                row.i_obs_err = (s.ihat - s.i).norm();
        }
        ts.rows.push_back(row);
    };

    auto fire_probe = [&](double t, const SegmentCtx& ctx) {
        if (!probe) return;
        ProbeFrame f;
        f.t = t;
        f.h = h;
        f.truth_pu = ctx.p;
        f.i = {s.i[0], s.i[1], s.i[2]};
        f.v = ctx.v_at(t);
        f.e = ctx.p.E * ctx.s0_true_at(t);
        f.psi = regressor_full(f.i, f.v, ctx.s0_reg_at(t));
        f.lre = lre_full_of(s, config.lambda);
        f.lre.t = t;
        f.lre_red = lre_red_of(s, config.lambda);
        f.lre_red.t = t;
        f.theta_hat = s.th;
        f.vtheta_hat = s.vth;
        f.i_hat = {s.ihat[0], s.ihat[1], s.ihat[2]};
        f.omega_pll = pll.omega_hat;
        f.gram_full = &gram_full.gram();
        f.gram_red = &gram_red.gram();
        f.window_full = &window_full;
        f.window_red = &window_red;
        probe(f);
    };

    {
        const SegmentCtx ctx0 = make_ctx(0.0, pll.omega_hat);
        emit_row(0.0, ctx0);
        fire_probe(0.0, ctx0);
    }

    // --- Main loop ----------------------------------------------------------
    for (long k = 0; k < nsteps; ++k) {
        const double t0 = k * h;
        const double t1 = (k + 1) * h;

        // Sample v for the PLL at the step start, under the pre-step context.
        const SegmentCtx ctx_pre = make_ctx(t0, pll.omega_hat);
        const ThreePhase v_pll = ctx_pre.v_at(t0);

        // Substep boundaries: events strictly inside (t0, t1).
        double a = t0;
        for (double tev : event_times) {
            if (tev > a && tev < t1) {
                const SegmentCtx ctx = make_ctx(a, pll.omega_hat);
                LawSelection law = law_template;
                law.frozen = a < config.estimator_start;
                s = rk4(s, a, tev - a,
                        [&](double t, const LoopVec& x) { return loop_derivative(t, x, ctx, law); });
                a = tev;
            }
        }
        {
            const SegmentCtx ctx = make_ctx(a, pll.omega_hat);
            LawSelection law = law_template;
            law.frozen = a < config.estimator_start;
            s = rk4(s, a, t1 - a,
                    [&](double t, const LoopVec& x) { return loop_derivative(t, x, ctx, law); });
        }

        // While frozen, pin the estimator states so adaptation starts cleanly.
        if (t1 <= config.estimator_start) {
            s.th = th_init;
            s.vth = vth_init;
            s.ihat = s.i;
        }

        // PLL and the S0 phase accumulator advance on step boundaries.
        if (config.pll_drives_s0) s0_acc += pll.omega_hat * h;
        pll = pll_step(v_pll, pll, h);

        // Diagnostics at the new sample.
        gram_full.update(s.xpsi, h);
        gram_red.update(s.xpsir, h);
        window_full.push(t1, s.xpsi);
        window_red.push(t1, s.xpsir);

        require_finite_state(s, t1);
        peak_i_hat = std::max(peak_i_hat, Vec3{s.ihat[0], s.ihat[1], s.ihat[2]}.norm());
        peak_theta = std::max(
            peak_theta, config.estimator == EstimatorKind::Reduced ? s.vth.norm() : s.th.norm());
        const bool over =
            (config.estimator != EstimatorKind::Reduced &&
             (peak_theta > config.bound_ceiling * th_scale ||
              peak_i_hat > config.bound_ceiling * i_scale)) ||
            (config.estimator == EstimatorKind::Reduced &&
             peak_theta > config.bound_ceiling * vth_scale);
        if (over) {
            bounded = false;
            if (config.abort_on_ceiling)
                throw NumericFault("boundedness ceiling exceeded at t = " + std::to_string(t1));
        }

        const SegmentCtx ctx_post = make_ctx(t1, pll.omega_hat);
        if ((k + 1) % config.output_decimation == 0 || k + 1 == nsteps) {
            if (ts.rows.empty() || ts.rows.back().t < t1) emit_row(t1, ctx_post);
        }
        fire_probe(t1, ctx_post);
    }

    // --- Summary ------------------------------------------------------------
    RunSummary summary = summarize(ts, event_times);
    summary.bounded = bounded;
    summary.peak_state_norm = std::max(peak_i_hat, peak_theta);

    // End-of-run deviation from the phasor solution over the last grid period.
    {
        const double t_end = ts.rows.back().t;
        const double period = 2.0 * kPi / omega;
        const GridParams pu_end = sched_pu.at(t_end);
        const Phasor v_target = to_phasor(vmodel.target_at(t_end));
        const Phasor i_exp = steady_state_current(pu_end, v_target);
        double num = 0.0;
        int count = 0;
        for (const auto& row : ts.rows) {
            if (row.t < t_end - period) continue;
            const ThreePhase ip = (1.0 / ib) * row.i;
            const ThreePhase ie = phasor_to_instantaneous(i_exp, omega, row.t);
            num += (ip - ie).dot(ip - ie);
            ++count;
        }
        summary.phasor_check_rel =
            count > 0 ? std::sqrt(num / count) / std::max(i_exp.amplitude, 1e-12) : 0.0;
    }
    return {std::move(ts), summary};
}

} // namespace tegrid
