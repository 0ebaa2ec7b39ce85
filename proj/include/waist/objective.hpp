// Perimeter objective, its subgradient, and the first-order optimality
// residual for the constrained problem.
//
// Arithmetic note: summation order and expression shapes here are fixed
// (left-to-right accumulation, per-coordinate `(a-p)[j]/||a-p||` form) so
// that iteration traces are bit-reproducible across builds; see vec.hpp.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "waist/convex_set.hpp"
#include "waist/error.hpp"
#include "waist/problem.hpp"
#include "waist/vec.hpp"

namespace waist {

// One subgradient block per chain point.
using SubgradientField = std::vector<Point>;

// D(a): total length of the closed chain a_1 -> a_2 -> ... -> a_m -> a_1.
inline double perimeter(const Configuration& a) {
    if (a.size() < 2)
        throw GeometryError("invalid_configuration", "perimeter: needs at least 2 points");
    const std::size_t m = a.size();
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) total += distance(a[i], a[(i + 1) % m]);
    return total;
}

// Subgradient of the perimeter at a: component i is
//   (a_i - a_{i-1})/||a_i - a_{i-1}|| + (a_i - a_{i+1})/||a_i - a_{i+1}||
// (indices cyclic). Coincident adjacent points make the objective nonsmooth
// with no canonical choice, so that case is an error.
inline SubgradientField subgradient(const Configuration& a) {
    if (a.size() < 2)
        throw GeometryError("invalid_configuration", "subgradient: needs at least 2 points");
    const std::size_t m = a.size();
    SubgradientField g(m);
    for (std::size_t i = 0; i < m; ++i) {
        const Point& ai = a[i];
        const Point& p = a[(i + m - 1) % m];
        const Point& q = a[(i + 1) % m];
        const double np = distance(ai, p);
        const double nq = distance(ai, q);
        if (np == 0.0 || nq == 0.0)
            throw GeometryError("nonsmooth_point",
                                "subgradient: adjacent chain points coincide at index " +
                                    std::to_string(i));
        Point gi(ai.size());
        for (std::size_t j = 0; j < ai.size(); ++j)
            gi[j] = (ai[j] - p[j]) / np + (ai[j] - q[j]) / nq;
        g[i] = gi;
    }
    return g;
}

// First-order optimality residual at a feasible configuration:
//   max_i dist( -g_i, N_{C_i}(a_i) )
// where N is the normal cone. Zero iff a satisfies the stationarity
// condition -g_i in N_{C_i}(a_i) for every i.
inline double optimality_residual(const Problem& problem, const Configuration& a) {
    require_configuration(problem, a);
    if (!feasible(problem, a))
        throw GeometryError("infeasible_configuration",
                            "optimality_residual: configuration is not feasible");
    const auto g = subgradient(a);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = normal_cone_distance(problem.sets[i], a[i], negated(g[i]));
        if (d > worst) worst = d;
    }
    return worst;
}

// Norm of the summed negated subgradients; a closed-chain identity makes
// this exactly 0 in exact arithmetic, so it reports numerical quality only.
inline double normal_sum_norm(const Configuration& a) {
    const auto g = subgradient(a);
    Point s(a[0].size(), 0.0);
    for (const auto& gi : g)
        for (std::size_t j = 0; j < s.size(); ++j) s[j] -= gi[j];
    return norm(s);
}

}  // namespace waist
