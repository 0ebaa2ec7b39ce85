// Problem instance: an ordered tuple of closed convex sets in a common
// ambient dimension. A Configuration picks one point per set; the objective
// is the perimeter of the closed polygonal chain through them in order.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "waist/convex_set.hpp"
#include "waist/error.hpp"
#include "waist/vec.hpp"

namespace waist {

using Configuration = std::vector<Point>;

struct Problem {
    std::vector<ConvexSet> sets;
    int dimension = 0;

    std::size_t size() const { return sets.size(); }
};

// Builds a validated problem from a set list; throws GeometryError on
// structural violations (fewer than two sets, mixed dimensions, or any
// per-set invariant failure).
inline Problem make_problem(std::vector<ConvexSet> sets) {
    if (sets.size() < 2)
        throw GeometryError("invalid_problem", "problem: needs at least 2 sets");
    for (std::size_t i = 0; i < sets.size(); ++i) {
        try {
            validate(sets[i]);
        } catch (const GeometryError& e) {
            throw GeometryError("invalid_problem",
                                "sets[" + std::to_string(i) + "]: " + e.what());
        }
    }
    const int dim = dimension(sets[0]);
    for (std::size_t i = 1; i < sets.size(); ++i)
        if (dimension(sets[i]) != dim)
            throw GeometryError("invalid_problem",
                                "sets[" + std::to_string(i) + "]: ambient dimension " +
                                    std::to_string(dimension(sets[i])) + " differs from sets[0]'s " +
                                    std::to_string(dim));
    Problem p;
    p.sets = std::move(sets);
    p.dimension = dim;
    return p;
}

// Checks a configuration is structurally compatible with the problem.
inline void require_configuration(const Problem& problem, const Configuration& a) {
    if (a.size() != problem.sets.size())
        throw GeometryError("invalid_configuration",
                            "configuration: expected " + std::to_string(problem.sets.size()) +
                                " points, got " + std::to_string(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        if (static_cast<int>(a[i].size()) != problem.dimension)
            throw GeometryError("invalid_configuration",
                                "configuration[" + std::to_string(i) + "]: dimension " +
                                    std::to_string(a[i].size()) + " != " +
                                    std::to_string(problem.dimension));
}

// True iff every point lies in its set within tol.
inline bool feasible(const Problem& problem, const Configuration& a, double tol = kMembershipTol) {
    require_configuration(problem, a);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!contains(problem.sets[i], a[i], tol)) return false;
    return true;
}

// Default start: each point is the projection onto its set of the centroid
// of the other sets' representative points. Deterministic and feasible.
inline Configuration default_start(const Problem& problem) {
    const std::size_t m = problem.sets.size();
    std::vector<Point> reps(m);
    for (std::size_t i = 0; i < m; ++i) reps[i] = representative_point(problem.sets[i]);
    Configuration start(m);
    for (std::size_t i = 0; i < m; ++i) {
        Point centroid(problem.dimension, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            if (k == i) continue;
            for (int j = 0; j < problem.dimension; ++j) centroid[j] += reps[k][j];
        }
        for (int j = 0; j < problem.dimension; ++j)
            centroid[j] /= static_cast<double>(m - 1);
        start[i] = project(problem.sets[i], centroid);
    }
    return start;
}

}  // namespace waist
