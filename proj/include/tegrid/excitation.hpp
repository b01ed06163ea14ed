#pragma once

// Excitation diagnostics: running Gram integrals of the filtered regressor,
// minimum-eigenvalue extraction for 2x2/3x3 symmetric matrices, and the
// sliding-window persistence-of-excitation test.

#include <cstddef>
#include <deque>

#include "tegrid/errors.hpp"
#include "tegrid/linalg.hpp"

namespace tegrid {

/// Smallest eigenvalue via closed form; the argument must be symmetric to
/// 1e-9 relative (asymmetry throws).
double min_eig_sym(const Mat2& g);
double min_eig_sym(const Mat3& g);
double max_eig_sym(const Mat2& g);
double max_eig_sym(const Mat3& g);

/// Trapezoidal accumulator of G(t) = integral of Psi_f Psi_f^T ds, seeded
/// with the sample at the start time.
template <class MatT>
class GramAccumulator {
  public:
    explicit GramAccumulator(const MatT& psi_f0, double t0 = 0.0)
        : prev_outer_(psi_f0.mmT()), t_(t0) {}

    /// Fold in the sample at t + h.
    void update(const MatT& psi_f, double h) {
        if (!(h > 0.0))
            throw InvalidParameter("GramAccumulator: h must be > 0");
        const MatT cur = psi_f.mmT();
        g_ += (0.5 * h) * (prev_outer_ + cur);
        prev_outer_ = cur;
        t_ += h;
    }

    const MatT& gram() const { return g_; }
    double t() const { return t_; }

  private:
    MatT g_{};
    MatT prev_outer_{};
    double t_;
};

using GramAccumulator2 = GramAccumulator<Mat2>;
using GramAccumulator3 = GramAccumulator<Mat3>;

/// Ring buffer of decimated regressor samples supporting windowed Gram
/// integrals: lambda_min of the integral of Psi_f Psi_f^T over the trailing
/// window of span T.
template <class MatT>
class PsiWindow {
  public:
    /// Keeps every `decimation`-th pushed sample; retains `capacity` seconds.
    PsiWindow(std::size_t decimation = 10, double capacity = 0.6)
        : decimation_(decimation), capacity_(capacity) {
        if (decimation_ == 0)
            throw InvalidParameter("PsiWindow: decimation must be >= 1");
        if (!(capacity_ > 0.0))
            throw InvalidParameter("PsiWindow: capacity must be > 0");
    }

    void push(double t, const MatT& psi_f) {
        if (count_++ % decimation_ != 0) return;
        samples_.push_back({t, psi_f.mmT()});
        while (samples_.size() > 2 && samples_.front().t < t - capacity_)
            samples_.pop_front();
    }

    /// True once the retained history spans at least T seconds.
    bool spans(double T) const {
        return samples_.size() >= 2 && samples_.back().t - samples_.front().t >= T;
    }

    /// lambda_min of the trapezoidal Gram over [t_latest - T, t_latest].
    double lambda_min(double T) const { return eig_of_window(T, /*want_min=*/true); }
    double lambda_max(double T) const { return eig_of_window(T, /*want_min=*/false); }

  private:
    struct Sample {
        double t;
        MatT outer;
    };

    double eig_of_window(double T, bool want_min) const {
        if (!(T > 0.0))
            throw InvalidParameter("PsiWindow: window span must be > 0");
        if (!spans(T))
            throw WindowError("PsiWindow: insufficient history for requested window");
        const double t_end = samples_.back().t;
        const double t_begin = t_end - T;
        MatT g{};
        for (std::size_t k = samples_.size() - 1; k > 0; --k) {
            const Sample& right = samples_[k];
            const Sample& left = samples_[k - 1];
            if (right.t <= t_begin) break;
            // Clip the leading trapezoid at the window edge (piecewise-linear
            // interpolation of the integrand).
            if (left.t >= t_begin) {
                g += (0.5 * (right.t - left.t)) * (left.outer + right.outer);
            } else {
                const double f = (t_begin - left.t) / (right.t - left.t);
                const MatT edge = (1.0 - f) * left.outer + f * right.outer;
                g += (0.5 * (right.t - t_begin)) * (edge + right.outer);
                break;
            }
        }
        return want_min ? min_eig_sym(g) : max_eig_sym(g);
    }

    std::size_t decimation_;
    double capacity_;
    std::size_t count_ = 0;
    std::deque<Sample> samples_;
};

using PsiWindow2 = PsiWindow<Mat2>;
using PsiWindow3 = PsiWindow<Mat3>;

} // namespace tegrid
