#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tegrid/scenario.hpp"

namespace tegrid {

namespace {

const char* kCsvHeader =
    "t,i_a,i_b,i_c,v_a,v_b,v_c,e_a,e_b,e_c,"
    "theta1_hat,theta2_hat,theta3_hat,R_hat,L_hat,E_hat,"
    "R_true,L_true,E_true,residual_norm,i_obs_err,lambda_min_cum,omega_pll";

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace

void emit_csv(const TimeSeries& ts, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw FileError("cannot open for writing: " + path);
    out << kCsvHeader << "\n";
    for (const auto& r : ts.rows) {
        out << num(r.t) << ',' << num(r.i.a) << ',' << num(r.i.b) << ',' << num(r.i.c) << ','
            << num(r.v.a) << ',' << num(r.v.b) << ',' << num(r.v.c) << ',' << num(r.e.a) << ','
            << num(r.e.b) << ',' << num(r.e.c) << ',' << num(r.theta_hat[0]) << ','
            << num(r.theta_hat[1]) << ',' << num(r.theta_hat[2]) << ',';
        if (r.recovered)
            out << num(r.recovered->R) << ',' << num(r.recovered->L) << ','
                << num(r.recovered->E) << ',';
        else
            out << ",,,";
        out << num(r.truth.R) << ',' << num(r.truth.L) << ',' << num(r.truth.E) << ','
            << num(r.residual_norm) << ',';
        if (r.i_obs_err)
            out << num(*r.i_obs_err);
        out << ',' << num(r.lambda_min_cum) << ',' << num(r.omega_pll) << "\n";
    }
    if (!out)
        throw FileError("write failed: " + path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}

double cell_to_double(const std::string& cell, const std::string& path, std::size_t lineno) {
    char* end = nullptr;
    const double x = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0')
        throw FileError(path + ": line " + std::to_string(lineno) + ": bad numeric cell '" +
                        cell + "'");
    return x;
}

} // namespace

TimeSeries parse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FileError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw FileError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw FileError(path + ": unexpected header row");

    TimeSeries ts;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 23)
            throw FileError(path + ": line " + std::to_string(lineno) + ": expected 23 cells, got " +
                            std::to_string(cells.size()));
        auto f = [&](std::size_t k) { return cell_to_double(cells[k], path, lineno); };
        TimeSeriesRow r;
        r.t = f(0);
        r.i = {f(1), f(2), f(3)};
        r.v = {f(4), f(5), f(6)};
        r.e = {f(7), f(8), f(9)};
        r.theta_hat = {f(10), f(11), f(12)};
        const bool has_rec = !cells[13].empty() || !cells[14].empty() || !cells[15].empty();
        if (has_rec) {
            if (cells[13].empty() || cells[14].empty() || cells[15].empty())
                throw FileError(path + ": line " + std::to_string(lineno) +
                                ": partially empty recovered-parameter cells");
            r.recovered = RecoveredParams{f(13), f(14), f(15)};
        }
        r.truth = {f(16), f(17), f(18)};
        r.residual_norm = f(19);
        if (!cells[20].empty()) r.i_obs_err = f(20);
        r.lambda_min_cum = f(21);
        r.omega_pll = f(22);
        ts.rows.push_back(r);
    }
    return ts;
}

// ---------------------------------------------------------------------------
// SVG report: stacked panels of recovered R/L/E against the truth, plus the
// cumulative excitation level.  Self-contained, no plotting dependency.
// ---------------------------------------------------------------------------

namespace {

struct Panel {
    std::string label;
    // Polyline segments (split where the estimate is not recoverable).
    std::vector<std::vector<std::pair<double, double>>> est;
    std::vector<std::pair<double, double>> truth;
};

std::string fmt_tick(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", x);
    return buf;
}

void render_panel(std::ostream& out, const Panel& p, double t0, double t1, double x0, double y0,
                  double w, double hgt) {
    double lo = 0.0, hi = 1.0;
    bool first = true;
    auto take = [&](double v) {
        if (!std::isfinite(v)) return;
        if (first) {
            lo = hi = v;
            first = false;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    };
    for (const auto& seg : p.est)
        for (const auto& [t, v] : seg) take(v);
    for (const auto& [t, v] : p.truth) take(v);
    if (first) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12 * std::max(std::fabs(hi), 1.0)) {
        const double pad = std::max(std::fabs(hi) * 0.1, 1e-6);
        lo -= pad;
        hi += pad;
    } else {
        const double pad = 0.08 * (hi - lo);
        lo -= pad;
        hi += pad;
    }

    auto X = [&](double t) { return x0 + (t - t0) / (t1 - t0) * w; };
    auto Y = [&](double v) { return y0 + hgt - (v - lo) / (hi - lo) * hgt; };

    out << "<rect x='" << x0 << "' y='" << y0 << "' width='" << w << "' height='" << hgt
        << "' fill='none' stroke='#888'/>\n";
    out << "<text x='" << x0 + 6 << "' y='" << y0 + 16 << "' font-size='13' fill='#222'>"
        << p.label << "</text>\n";
    out << "<text x='" << x0 - 4 << "' y='" << Y(lo) << "' font-size='10' fill='#555' "
        << "text-anchor='end'>" << fmt_tick(lo) << "</text>\n";
    out << "<text x='" << x0 - 4 << "' y='" << Y(hi) + 8 << "' font-size='10' fill='#555' "
        << "text-anchor='end'>" << fmt_tick(hi) << "</text>\n";

    auto polyline = [&](const std::vector<std::pair<double, double>>& pts, const char* style) {
        if (pts.size() < 2) return;
        out << "<polyline fill='none' " << style << " points='";
        for (const auto& [t, v] : pts)
            out << X(t) << ',' << Y(v) << ' ';
        out << "'/>\n";
    };
    polyline(p.truth, "stroke='#444' stroke-width='1' stroke-dasharray='5,4'");
    for (const auto& seg : p.est)
        polyline(seg, "stroke='#c33' stroke-width='1.5'");
}

} // namespace

void emit_plot(const TimeSeries& ts, const std::string& path, const std::string& title) {
    if (ts.rows.empty())
        throw InvalidParameter("emit_plot: empty time series");
    std::ofstream out(path);
    if (!out)
        throw FileError("cannot open for writing: " + path);

    const double t0 = ts.rows.front().t;
    const double t1 = std::max(ts.rows.back().t, t0 + 1e-9);

    Panel panels[4];
    panels[0].label = "R [ohm]: estimate (solid) vs true (dashed)";
    panels[1].label = "L [H]: estimate (solid) vs true (dashed)";
    panels[2].label = "E [V]: estimate (solid) vs true (dashed)";
    panels[3].label = "cumulative excitation lambda_min";

    auto est_field = [](const TimeSeriesRow& r, int k) {
        return k == 0 ? r.recovered->R : k == 1 ? r.recovered->L : r.recovered->E;
    };
    auto truth_field = [](const TimeSeriesRow& r, int k) {
        return k == 0 ? r.truth.R : k == 1 ? r.truth.L : r.truth.E;
    };
    for (int k = 0; k < 3; ++k) {
        std::vector<std::pair<double, double>> seg;
        for (const auto& r : ts.rows) {
            panels[k].truth.push_back({r.t, truth_field(r, k)});
            if (r.recovered) {
                seg.push_back({r.t, est_field(r, k)});
            } else if (!seg.empty()) {
                panels[k].est.push_back(std::move(seg));
                seg.clear();
            }
        }
        if (!seg.empty()) panels[k].est.push_back(std::move(seg));
    }
    {
        std::vector<std::pair<double, double>> seg;
        for (const auto& r : ts.rows)
            seg.push_back({r.t, r.lambda_min_cum});
        panels[3].est.push_back(std::move(seg));
    }

    const double width = 900, panel_h = 150, gap = 26, left = 70, right = 20, top = 40;
    const double height = top + 4 * (panel_h + gap) + 20;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' viewBox='0 0 " << width << ' ' << height << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << width / 2 << "' y='24' font-size='16' text-anchor='middle' fill='#000'>"
        << title << "</text>\n";
    for (int k = 0; k < 4; ++k)
        render_panel(out, panels[k], t0, t1, left, top + k * (panel_h + gap), width - left - right,
                     panel_h);
    // Time axis labels under the last panel.
    const double axis_y = top + 4 * (panel_h + gap) + 2;
    out << "<text x='" << left << "' y='" << axis_y << "' font-size='11' fill='#555'>t = "
        << fmt_tick(t0) << " s</text>\n";
    out << "<text x='" << width - right << "' y='" << axis_y
        << "' font-size='11' fill='#555' text-anchor='end'>t = " << fmt_tick(t1) << " s</text>\n";
    out << "</svg>\n";
    if (!out)
        throw FileError("write failed: " + path);
}

std::string format_summary(const RunSummary& s) {
    std::ostringstream out;
    char buf[160];
    auto line = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof(buf), fmt, args...);
        out << buf << "\n";
    };
    line("segments: %zu", s.segments.size());
    for (std::size_t k = 0; k < s.segments.size(); ++k) {
        const auto& seg = s.segments[k];
        line("  segment %zu: t in [%.6g, %.6g] s", k, seg.t_begin, seg.t_end);
        auto pl = [&](const char* name, const ParamSettle& p) {
            if (p.settled)
                line("    %s: settled in %.4g s, peak dev %.3g, final err %.3g", name,
                     p.settle_time, p.peak_rel_excursion, p.final_rel_error);
            else
                line("    %s: not settled (peak dev %.3g, final err %.3g)", name,
                     p.peak_rel_excursion, p.final_rel_error);
        };
        pl("R", seg.R);
        pl("L", seg.L);
        pl("E", seg.E);
    }
    line("final relative error: R %.3g, L %.3g, E %.3g", s.final_rel_err_R, s.final_rel_err_L,
         s.final_rel_err_E);
    line("cumulative excitation lambda_min: %.6g -> %.6g", s.lambda_min_first, s.lambda_min_last);
    line("bounded: %s (peak state norm %.6g pu)", s.bounded ? "yes" : "no", s.peak_state_norm);
    line("end-of-run phasor deviation: %.3g", s.phasor_check_rel);
    return out.str();
}

} // namespace tegrid
