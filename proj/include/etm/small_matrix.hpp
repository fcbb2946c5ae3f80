#pragma once

#include <algorithm>
#include <cmath>

namespace etm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

/// Row-major 2x2 matrix.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    constexpr double det() const { return a11 * a22 - a12 * a21; }
    constexpr double trace() const { return a11 + a22; }
    double norm_inf() const { return std::max(std::abs(a11) + std::abs(a12), std::abs(a21) + std::abs(a22)); }

    friend constexpr Mat2 operator+(const Mat2& a, const Mat2& b) {
        return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
    }
    friend constexpr Mat2 operator-(const Mat2& a, const Mat2& b) {
        return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
    }
    friend constexpr Mat2 operator*(double s, const Mat2& a) { return {s * a.a11, s * a.a12, s * a.a21, s * a.a22}; }
    friend constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
        return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
                a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
    }
    friend constexpr Vec2 operator*(const Mat2& a, Vec2 v) {
        return {a.a11 * v.x + a.a12 * v.y, a.a21 * v.x + a.a22 * v.y};
    }
    friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

/// Eigenvalues of a symmetric 2x2 matrix (a12 is used, a21 ignored), ascending.
inline Vec2 symmetric_eigenvalues(const Mat2& m) {
    const double mean = 0.5 * (m.a11 + m.a22);
    const double half_diff = 0.5 * (m.a11 - m.a22);
    const double radius = std::hypot(half_diff, m.a12);
    return {mean - radius, mean + radius};
}

} // namespace etm
