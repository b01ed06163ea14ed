#pragma once

// Declarative scenario configuration, SCR/X-R parameter mapping, the
// end-to-end run loop (plant -> converter -> regression -> estimators ->
// excitation on one clock), and result summarization / file emission.
//
// Unit convention: configuration speaks SI (kV, MVA, ohm, mH); the run loop
// works in per-unit with bases
//   V_b = V_LL*sqrt(2)/sqrt(3) (peak phase),  I_b = 2*S_b/(3*V_b),
//   Z_b = V_b/I_b = V_LL^2/S_b,
// which keeps regressor entries O(1) so adaptation gains are well scaled.
// Time is not normalized.  CSV output converts back to SI.

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tegrid/converter.hpp"
#include "tegrid/errors.hpp"
#include "tegrid/estimators.hpp"
#include "tegrid/excitation.hpp"
#include "tegrid/plant.hpp"
#include "tegrid/regression.hpp"

namespace tegrid {

/// Base quantities of the per-unit system.
struct Bases {
    double s_rated = 1000e6; // VA
    double v_ll = 400e3;     // volt, RMS line-to-line
    double f = 50.0;         // Hz

    double omega() const { return 2.0 * kPi * f; }
    double v_base() const { return v_ll * std::sqrt(2.0 / 3.0); } // peak phase
    double i_base() const { return 2.0 * s_rated / (3.0 * v_base()); }
    double z_base() const { return v_base() / i_base(); }

    void validate() const {
        if (!(s_rated > 0.0 && v_ll > 0.0 && f > 0.0))
            throw ConfigError("bases: s_rated, v_ll and f must be > 0");
    }
};

/// Map grid strength (SCR, X/R) to circuit parameters:
/// X = V_LL^2/(scr*S_rated), L = X/omega, R = X/xr_ratio,
/// E = V_LL*sqrt(2)/sqrt(3).
GridParams scr_to_params(double scr, double xr_ratio, double v_ll, double s_rated, double omega);

/// Timed perturbations.
struct SetScr { double scr; };
struct SetXrRatio { double xr_ratio; };
struct ScaleE { double factor; };
struct SetParams { GridParams params; };       // SI
struct SetCommand { ConverterCommand command; }; // amplitude in pu of I_b

using EventChange = std::variant<SetScr, SetXrRatio, ScaleE, SetParams, SetCommand>;

struct ScenarioEvent {
    double time = 0.0;
    EventChange change;
};

enum class EstimatorKind { Composite, GradientFull, Reduced };
enum class ThetaInit { Nominal, Zero };

/// Full description of one simulation run.
struct SimConfig {
    Bases bases{};

    // Initial grid strength.
    double scr = 3.0;
    double xr_ratio = 5.0;

    // Converter operating point and transient model.
    double i_ref_pu = 1.0;      // commanded current amplitude, pu of I_b
    double i_ref_phase = 0.0;   // rad, relative to the source
    double tau = 0.02;          // s, phasor-lag time constant

    // Clock.
    double duration = 1.0;      // s
    double h = 1e-5;            // s
    int output_decimation = 100;

    // Regression filter.
    double lambda = 1000.0;     // 1/s

    // Estimator selection and gains (per-unit).
    EstimatorKind estimator = EstimatorKind::Composite;
    CompositeGains gains{3.0e3, 1.0e9, 3.0e4};
    double gamma_full = 3.0e4;    // classical gradient on the full model
    double gamma_reduced = 1000.0;
    double rho_assumed = 5.0;     // X/R assumed by the reduced path
    ThetaInit theta_init = ThetaInit::Nominal;
    std::optional<Vec3> theta_init_value; // pu override of the initial estimate
    double estimator_start = 0.0; // s; adaptation frozen before this time
    double bound_ceiling = 1e3;   // multiple of the steady scale
    bool abort_on_ceiling = false;

    // PLL (always simulated; optionally drives the S0 phase reference).
    double pll_kappa_p = 200.0;
    double pll_kappa_i = 5000.0;
    std::optional<double> pll_omega_ff; // rad/s, default 2*pi*f
    bool pll_drives_s0 = false;

    // Windowed excitation diagnostic.
    double window_span = 0.1;   // s
    int window_decimation = 10;

    unsigned seed = 0;          // randomized property tests only
    std::vector<ScenarioEvent> events;

    void validate() const;
};

/// One output row; physical units are SI.  Estimate-recovery gaps (estimate
/// not yet physical) are nullopt and emitted as empty CSV cells.
struct TimeSeriesRow {
    double t = 0.0;
    ThreePhase i{}, v{}, e{};        // ampere / volt
    Vec3 theta_hat{};                // (R/L [1/s], 1/L [1/H], E/L [V/H])
    std::optional<RecoveredParams> recovered; // ohm / henry / volt
    RecoveredParams truth{};         // ohm / henry / volt
    double residual_norm = 0.0;      // |Z - Psi_f theta_hat| / max(|Z|, eps)
    std::optional<double> i_obs_err; // |i_hat - i| in pu (observer paths only)
    double lambda_min_cum = 0.0;     // cumulative Gram, pu^2 s
    double omega_pll = 0.0;          // rad/s
};

struct TimeSeries {
    std::vector<TimeSeriesRow> rows;
};

/// Per-parameter settling metrics for one inter-event segment.
struct ParamSettle {
    bool settled = false;
    double settle_time = 0.0;        // s after segment start; valid if settled
    double peak_rel_excursion = 0.0; // max |est - truth| / |truth|
    double final_rel_error = 0.0;    // at segment end
};

struct SegmentSummary {
    double t_begin = 0.0;
    double t_end = 0.0;
    ParamSettle R, L, E;
};

struct RunSummary {
    std::vector<SegmentSummary> segments;
    double final_rel_err_R = 0.0, final_rel_err_L = 0.0, final_rel_err_E = 0.0;
    double lambda_min_first = 0.0, lambda_min_last = 0.0;
    bool bounded = true;
    double peak_state_norm = 0.0;    // max over t of max(|i_hat|, |theta_hat|) in pu
    double phasor_check_rel = 0.0;   // end-of-run deviation from the phasor solution
};

/// Everything the per-step probe can observe (per-unit quantities).
struct ProbeFrame {
    double t = 0.0;
    double h = 0.0;
    GridParams truth_pu{};       // parameters of the active segment
    ThreePhase i{}, v{}, e{};    // instantaneous, pu
    Mat3 psi{};                  // raw regressor
    LreSampleFull lre{};         // filtered full pair
    LreSampleReduced lre_red{};  // filtered reduced pair
    Vec3 theta_hat{};            // full-model estimate (composite/gradient)
    Vec2 vtheta_hat{};           // reduced-model estimate
    ThreePhase i_hat{};          // observer state
    double omega_pll = 0.0;
    const Mat3* gram_full = nullptr; // cumulative Gram matrices
    const Mat2* gram_red = nullptr;
    const PsiWindow3* window_full = nullptr;
    const PsiWindow2* window_red = nullptr;
};

/// Called after every integrator step (and once at t = 0).
using StepProbe = std::function<void(const ProbeFrame&)>;

struct RunResult {
    TimeSeries series;
    RunSummary summary;
};

/// Execute one scenario deterministically.
RunResult run(const SimConfig& config, const StepProbe& probe = {});

/// Settling/peak statistics of a recorded series against the truth columns;
/// segment boundaries are the event times.
RunSummary summarize(const TimeSeries& ts, const std::vector<double>& event_times);

// Scenario files: flat key = value text with dotted sections (see README).
SimConfig load_config(const std::string& path);
SimConfig parse_config_text(const std::string& text);
std::string write_config_text(const SimConfig& config);

// Reproduction presets.
SimConfig preset_fig2a(); // composite identifier, SCR 3 -> 1.5 at t = 1 s
SimConfig preset_fig2b(); // composite identifier, 10% source drop at t = 2 s
/// Reduced estimator assuming X/R = 5 while the true SCR drops to 1.5 and the
/// true X/R steps to xr_after (3, 5 or 7) at t = 1 s, then a 10% source drop
/// at t = 2 s.
SimConfig preset_fig3(double xr_after);
SimConfig preset_fig4(); // steady reduced run, excitation growth diagnostics

// CSV / plot emission (column contract in README).
void emit_csv(const TimeSeries& ts, const std::string& path);
TimeSeries parse_csv(const std::string& path);
void emit_plot(const TimeSeries& ts, const std::string& path, const std::string& title);

/// Human-readable run report.
std::string format_summary(const RunSummary& s);

} // namespace tegrid
