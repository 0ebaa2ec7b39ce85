// Small dense-vector helpers shared by every module.
//
// Points are plain std::vector<double>; all helpers are free functions.
// Inner products and norms accumulate through a sequential fused
// multiply-add chain (one rounding per term), and the rest of the code
// keeps literal expression shapes, so traces are reproducible bit-for-bit
// across builds and match the reference trajectories bundled with the test
// suite (iteration counts near the stopping tolerance depend on the exact
// rounding sequence). Builds must disable floating-point contraction so no
// other expression silently gains or loses a rounding step.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace waist {

using Point = std::vector<double>;

inline double dot(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s = std::fma(a[j], b[j], s);
    return s;
}

inline double norm(const Point& a) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s = std::fma(a[j], a[j], s);
    return std::sqrt(s);
}

inline double distance(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s = std::fma(d, d, s);
    }
    return std::sqrt(s);
}

inline Point add(const Point& a, const Point& b) {
    Point r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] + b[j];
    return r;
}

inline Point sub(const Point& a, const Point& b) {
    Point r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] - b[j];
    return r;
}

inline Point scaled(const Point& a, double s) {
    Point r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = s * a[j];
    return r;
}

inline Point negated(const Point& a) {
    Point r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = -a[j];
    return r;
}

// a / ||a||; callers must guarantee a != 0.
inline Point unit(const Point& a) {
    const double n = norm(a);
    Point r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] / n;
    return r;
}

inline bool all_finite(const Point& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace waist
