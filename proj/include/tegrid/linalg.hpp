#pragma once

// Small fixed-size vector/matrix helpers, sized for the 2x2 and 3x3 systems
// that appear in the regression and excitation code.  Deliberately minimal:
// no dynamic sizes, no decompositions beyond what the estimators need.

#include <array>
#include <cmath>
#include <cstddef>

namespace tegrid {

struct Vec2 {
    double v[2]{};

    double& operator[](std::size_t k) { return v[k]; }
    double operator[](std::size_t k) const { return v[k]; }

    Vec2& operator+=(const Vec2& o) { v[0] += o.v[0]; v[1] += o.v[1]; return *this; }
    friend Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.v[0] - b.v[0], a.v[1] - b.v[1]}; }
    friend Vec2 operator*(double s, const Vec2& a) { return {s * a.v[0], s * a.v[1]}; }

    double dot(const Vec2& o) const { return v[0] * o.v[0] + v[1] * o.v[1]; }
    double norm() const { return std::sqrt(dot(*this)); }
};

struct Vec3 {
    double v[3]{};

    double& operator[](std::size_t k) { return v[k]; }
    double operator[](std::size_t k) const { return v[k]; }

    Vec3& operator+=(const Vec3& o) { v[0] += o.v[0]; v[1] += o.v[1]; v[2] += o.v[2]; return *this; }
    friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) {
        return {a.v[0] - b.v[0], a.v[1] - b.v[1], a.v[2] - b.v[2]};
    }
    friend Vec3 operator*(double s, const Vec3& a) { return {s * a.v[0], s * a.v[1], s * a.v[2]}; }

    double dot(const Vec3& o) const { return v[0] * o.v[0] + v[1] * o.v[1] + v[2] * o.v[2]; }
    double norm() const { return std::sqrt(dot(*this)); }
};

/// Row-major 2x2 matrix.
struct Mat2 {
    double m[2][2]{};

    double& operator()(std::size_t r, std::size_t c) { return m[r][c]; }
    double operator()(std::size_t r, std::size_t c) const { return m[r][c]; }

    static Mat2 identity() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }

    /// Columns as vectors (a | b).
    static Mat2 from_columns(const Vec2& a, const Vec2& b) {
        return {{{a[0], b[0]}, {a[1], b[1]}}};
    }

    /// Symmetric outer product x x^T.
    static Mat2 outer(const Vec2& x) {
        return {{{x[0] * x[0], x[0] * x[1]}, {x[0] * x[1], x[1] * x[1]}}};
    }

    Mat2& operator+=(const Mat2& o) {
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) m[r][c] += o.m[r][c];
        return *this;
    }
    friend Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
    friend Mat2 operator-(const Mat2& a, const Mat2& b) {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][j] - b.m[i][j];
        return r;
    }
    friend Mat2 operator*(double s, const Mat2& a) {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = s * a.m[i][j];
        return r;
    }

    Vec2 operator*(const Vec2& x) const {
        return {m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]};
    }
    /// A^T x without forming the transpose.
    Vec2 tmul(const Vec2& x) const {
        return {m[0][0] * x[0] + m[1][0] * x[1], m[0][1] * x[0] + m[1][1] * x[1]};
    }

    /// A^T A (always symmetric).
    Mat2 gram() const {
        Mat2 g;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                g.m[i][j] = m[0][i] * m[0][j] + m[1][i] * m[1][j];
        return g;
    }

    /// A A^T (always symmetric).
    Mat2 mmT() const {
        Mat2 g;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                g.m[i][j] = m[i][0] * m[j][0] + m[i][1] * m[j][1];
        return g;
    }

    double det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
    double trace() const { return m[0][0] + m[1][1]; }
    double max_abs() const {
        double a = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) a = std::max(a, std::fabs(m[i][j]));
        return a;
    }
};

/// Row-major 3x3 matrix.
struct Mat3 {
    double m[3][3]{};

    double& operator()(std::size_t r, std::size_t c) { return m[r][c]; }
    double operator()(std::size_t r, std::size_t c) const { return m[r][c]; }

    static Mat3 identity() {
        Mat3 r;
        r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
        return r;
    }

    static Mat3 from_columns(const Vec3& a, const Vec3& b, const Vec3& c) {
        Mat3 r;
        for (int i = 0; i < 3; ++i) {
            r.m[i][0] = a[i];
            r.m[i][1] = b[i];
            r.m[i][2] = c[i];
        }
        return r;
    }

    static Mat3 outer(const Vec3& x) {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = x[i] * x[j];
        return r;
    }

    Mat3& operator+=(const Mat3& o) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) m[r][c] += o.m[r][c];
        return *this;
    }
    friend Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
    friend Mat3 operator-(const Mat3& a, const Mat3& b) {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = a.m[i][j] - b.m[i][j];
        return r;
    }
    friend Mat3 operator*(double s, const Mat3& a) {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = s * a.m[i][j];
        return r;
    }

    Vec3 operator*(const Vec3& x) const {
        Vec3 r;
        for (int i = 0; i < 3; ++i) r[i] = m[i][0] * x[0] + m[i][1] * x[1] + m[i][2] * x[2];
        return r;
    }
    Vec3 tmul(const Vec3& x) const {
        Vec3 r;
        for (int j = 0; j < 3; ++j) r[j] = m[0][j] * x[0] + m[1][j] * x[1] + m[2][j] * x[2];
        return r;
    }

    Mat3 gram() const {
        Mat3 g;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                g.m[i][j] = m[0][i] * m[0][j] + m[1][i] * m[1][j] + m[2][i] * m[2][j];
        return g;
    }

    /// A A^T (always symmetric).
    Mat3 mmT() const {
        Mat3 g;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                g.m[i][j] = m[i][0] * m[j][0] + m[i][1] * m[j][1] + m[i][2] * m[j][2];
        return g;
    }

    Vec3 column(std::size_t c) const { return {m[0][c], m[1][c], m[2][c]}; }

    double trace() const { return m[0][0] + m[1][1] + m[2][2]; }
    double det() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }
    double max_abs() const {
        double a = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) a = std::max(a, std::fabs(m[i][j]));
        return a;
    }
};

} // namespace tegrid
