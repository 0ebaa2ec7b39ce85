// Independent brute-force minimizer: exhaustive product-grid search over
// boundary parameterizations of every set, followed by cyclic per-parameter
// golden-section refinement. Used by the tests to validate solver output;
// shares no algorithmic machinery with the solver beyond the perimeter
// definition.
//
// The grid phase runs a min-plus dynamic program over the cyclic chain in
// tiles, which evaluates exactly the same minimum a naive nested loop over
// all parameter tuples would, in O(N^2) per chain link instead of O(N^m)
// work. All grid arithmetic is double precision with fixed association so
// nested grids (resolution R vs 2R) evaluate shared configurations to
// identical bits, making refinement monotone by construction.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "waist/convex_set.hpp"
#include "waist/error.hpp"
#include "waist/objective.hpp"
#include "waist/problem.hpp"
#include "waist/vec.hpp"

namespace waist {

// A parameterization of one set's boundary. `map` sends a parameter vector
// (lo[p] <= t_p <= hi[p]; wrapping parameters are periodic with period
// hi[p] - lo[p]) to a boundary point of the set.
struct BoundaryChart {
    int set_index = 0;
    int parameter_dim = 1;
    std::vector<double> lo, hi;
    std::vector<bool> wraps;
    std::function<Point(const std::vector<double>&)> map;
};

namespace oracle_detail {

inline double two_pi() { return 2.0 * 3.14159265358979323846; }
inline double pi() { return 3.14159265358979323846; }

// Deterministic length scale for truncating unbounded sets: ten times the
// largest distance between representative points (at least 1).
inline double line_window(const Problem& problem) {
    double diam = 0.0;
    std::vector<Point> reps;
    reps.reserve(problem.sets.size());
    for (const auto& s : problem.sets) reps.push_back(representative_point(s));
    for (std::size_t i = 0; i < reps.size(); ++i)
        for (std::size_t j = i + 1; j < reps.size(); ++j)
            diam = std::max(diam, distance(reps[i], reps[j]));
    return 10.0 * std::max(1.0, diam);
}

}  // namespace oracle_detail

// Builds the boundary chart for one set. Chartable variants: 2-D balls
// (angle), 3-D balls (spherical angles), segments (t in [0,1]), 2-D convex
// polygons (arc length), and lines (window parameter, truncated to a scale
// derived from the problem). Other variants have no chart and raise a
// structured error.
inline BoundaryChart make_boundary_chart(const Problem& problem, int set_index) {
    const ConvexSet& set = problem.sets.at(static_cast<std::size_t>(set_index));
    BoundaryChart chart;
    chart.set_index = set_index;
    if (const auto* b = std::get_if<Ball>(&set)) {
        if (b->center.size() == 2) {
            chart.parameter_dim = 1;
            chart.lo = {0.0};
            chart.hi = {oracle_detail::two_pi()};
            chart.wraps = {true};
            const Point c = b->center;
            const double r = b->radius;
            chart.map = [c, r](const std::vector<double>& t) -> Point {
                return {c[0] + r * std::cos(t[0]), c[1] + r * std::sin(t[0])};
            };
            return chart;
        }
        if (b->center.size() == 3) {
            chart.parameter_dim = 2;
            chart.lo = {0.0, 0.0};
            chart.hi = {oracle_detail::two_pi(), oracle_detail::pi()};
            chart.wraps = {true, false};
            const Point c = b->center;
            const double r = b->radius;
            chart.map = [c, r](const std::vector<double>& t) -> Point {
                const double st = std::sin(t[1]);
                return {c[0] + r * st * std::cos(t[0]), c[1] + r * st * std::sin(t[0]),
                        c[2] + r * std::cos(t[1])};
            };
            return chart;
        }
        throw Error("unchartable_set",
                    "oracle: balls are chartable only in dimensions 2 and 3 (set " +
                        std::to_string(set_index) + " has dimension " +
                        std::to_string(b->center.size()) + ")");
    }
    if (const auto* s = std::get_if<Segment>(&set)) {
        chart.parameter_dim = 1;
        chart.lo = {0.0};
        chart.hi = {1.0};
        chart.wraps = {false};
        const Point p = s->p, q = s->q;
        chart.map = [p, q](const std::vector<double>& t) -> Point {
            Point r(p.size());
            for (std::size_t j = 0; j < p.size(); ++j) r[j] = p[j] + t[0] * (q[j] - p[j]);
            return r;
        };
        return chart;
    }
    if (const auto* g = std::get_if<Polygon2D>(&set)) {
        const std::vector<Point> v = g->vertices;
        std::vector<double> cum(v.size() + 1, 0.0);
        for (std::size_t e = 0; e < v.size(); ++e)
            cum[e + 1] = cum[e] + distance(v[e], v[(e + 1) % v.size()]);
        const double total = cum.back();
        chart.parameter_dim = 1;
        chart.lo = {0.0};
        chart.hi = {total};
        chart.wraps = {true};
        chart.map = [v, cum, total](const std::vector<double>& t) -> Point {
            double s = std::fmod(t[0], total);
            if (s < 0.0) s += total;
            std::size_t e = 0;
            while (e + 1 < v.size() && cum[e + 1] <= s) ++e;
            const Point& a = v[e];
            const Point& b = v[(e + 1) % v.size()];
            const double len = cum[e + 1] - cum[e];
            const double u = (s - cum[e]) / len;
            return {a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])};
        };
        return chart;
    }
    if (const auto* l = std::get_if<Line>(&set)) {
        const double w = oracle_detail::line_window(problem);
        chart.parameter_dim = 1;
        chart.lo = {-w};
        chart.hi = {w};
        chart.wraps = {false};
        const Point base = l->base, dir = l->direction;
        chart.map = [base, dir](const std::vector<double>& t) -> Point {
            Point r(base.size());
            for (std::size_t j = 0; j < base.size(); ++j) r[j] = base[j] + t[0] * dir[j];
            return r;
        };
        return chart;
    }
    throw Error("unchartable_set",
                "oracle: set " + std::to_string(set_index) + " (" + variant_name(set) +
                    ") has no boundary chart; chartable variants are ball (2-D/3-D), "
                    "segment, polygon, and line");
}

namespace oracle_detail {

// One set's discretized chart: grid counts per parameter plus the flattened
// boundary points, enumerated in row-major order (last parameter fastest).
struct GridChart {
    BoundaryChart chart;
    std::vector<std::size_t> counts;    // grid points per parameter
    std::size_t total = 1;              // product of counts
    std::vector<double> points;         // total x dim, row-major
    long long resolution = 0;

    std::vector<double> params_at(std::size_t flat) const {
        std::vector<double> t(chart.lo.size());
        for (std::size_t p = chart.lo.size(); p-- > 0;) {
            const std::size_t idx = flat % counts[p];
            flat /= counts[p];
            // ratio-first form: grids at resolution R and 2R share bits for
            // shared indices because (2j)/(2R) rounds to exactly j/R.
            t[p] = chart.lo[p] +
                   (chart.hi[p] - chart.lo[p]) *
                       (static_cast<double>(idx) / static_cast<double>(resolution));
        }
        return t;
    }
};

inline GridChart discretize(const BoundaryChart& chart, long long resolution, int dim) {
    GridChart g;
    g.chart = chart;
    g.resolution = resolution;
    g.counts.resize(chart.lo.size());
    for (std::size_t p = 0; p < chart.lo.size(); ++p) {
        g.counts[p] = static_cast<std::size_t>(chart.wraps[p] ? resolution : resolution + 1);
        g.total *= g.counts[p];
    }
    g.points.resize(g.total * static_cast<std::size_t>(dim));
    for (std::size_t flat = 0; flat < g.total; ++flat) {
        const Point pt = chart.map(g.params_at(flat));
        for (int j = 0; j < dim; ++j) g.points[flat * dim + j] = pt[static_cast<std::size_t>(j)];
    }
    return g;
}

inline double point_distance(const std::vector<double>& a, std::size_t ia,
                             const std::vector<double>& b, std::size_t ib, int dim) {
    double s = 0.0;
    for (int j = 0; j < dim; ++j) {
        const double d = a[ia * dim + j] - b[ib * dim + j];
        s = std::fma(d, d, s);
    }
    return std::sqrt(s);
}

// Dense distance matrix between two grids; the memory hog of the DP.
inline std::unique_ptr<double[]> distance_matrix(const GridChart& a, const GridChart& b, int dim) {
    std::unique_ptr<double[]> m(new double[a.total * b.total]);
    for (std::size_t p = 0; p < a.total; ++p) {
        double* row = m.get() + p * b.total;
        for (std::size_t q = 0; q < b.total; ++q)
            row[q] = point_distance(a.points, p, b.points, q, dim);
    }
    return m;
}

// min-plus fold: next[b][q] = min_p cost[b][p] + m[p][q], for a tile of B
// chain starts. This is the hot loop; the inner q loop is contiguous and
// auto-vectorizes.
inline void fold_tile(const double* cost, std::size_t tile, std::size_t np, std::size_t nq,
                      const double* m, double* next) {
    std::fill(next, next + tile * nq, std::numeric_limits<double>::infinity());
    for (std::size_t p = 0; p < np; ++p) {
        const double* row = m + p * nq;
        for (std::size_t b = 0; b < tile; ++b) {
            const double c = cost[b * np + p];
            double* out = next + b * nq;
            for (std::size_t q = 0; q < nq; ++q) out[q] = std::min(out[q], c + row[q]);
        }
    }
}

}  // namespace oracle_detail

// Exhaustive minimization of the chain perimeter over the product of
// boundary grids at the given per-parameter resolution, then refine_rounds
// sweeps of cyclic per-parameter golden-section refinement from the best
// grid cell (each accepted only when it strictly improves the value, so
// refinement can never worsen the grid incumbent). Returns the best value
// and the corresponding configuration.
//
// Deterministic: grids are scanned in ascending index order and minima are
// kept on strict improvement only, so ties resolve to the lexicographically
// first parameter tuple regardless of any internal tiling.
inline std::pair<double, Configuration> brute_force_min(const Problem& problem,
                                                        long long resolution, int refine_rounds) {
    if (resolution < 4) throw Error("invalid_argument", "oracle: resolution must be >= 4");
    if (refine_rounds < 0) throw Error("invalid_argument", "oracle: refine_rounds must be >= 0");
    const std::size_t m = problem.sets.size();
    const int dim = problem.dimension;

    std::vector<oracle_detail::GridChart> grids;
    grids.reserve(m);
    for (std::size_t i = 0; i < m; ++i)
        grids.push_back(oracle_detail::discretize(make_boundary_chart(problem, static_cast<int>(i)),
                                                  resolution, dim));

    // Transition matrices for the middle links (2->3, ..., m-1->m).
    std::size_t matrix_bytes = 0;
    for (std::size_t t = 1; t + 1 < m; ++t) matrix_bytes += grids[t].total * grids[t + 1].total * 8;
    if (matrix_bytes > 1500000000ull)
        throw Error("resolution_too_large",
                    "oracle: the transition matrices would need " + std::to_string(matrix_bytes) +
                        " bytes; lower the resolution");
    std::vector<std::unique_ptr<double[]>> middle;
    for (std::size_t t = 1; t + 1 < m; ++t)
        middle.push_back(oracle_detail::distance_matrix(grids[t], grids[t + 1], dim));

    const std::size_t n1 = grids[0].total;
    constexpr std::size_t kTile = 64;
    std::size_t max_nt = 0;
    for (const auto& g : grids) max_nt = std::max(max_nt, g.total);
    std::vector<double> cost(kTile * max_nt), next(kTile * max_nt);

    double best = std::numeric_limits<double>::infinity();
    std::size_t best_p1 = 0;
    for (std::size_t tile_lo = 0; tile_lo < n1; tile_lo += kTile) {
        const std::size_t tile = std::min(kTile, n1 - tile_lo);
        // f_2[b][p2] = d(a_{tile_lo+b}, p2)
        for (std::size_t b = 0; b < tile; ++b)
            for (std::size_t q = 0; q < grids[1].total; ++q)
                cost[b * grids[1].total + q] = oracle_detail::point_distance(
                    grids[0].points, tile_lo + b, grids[1].points, q, dim);
        // fold through the middle links
        for (std::size_t t = 1; t + 1 < m; ++t) {
            oracle_detail::fold_tile(cost.data(), tile, grids[t].total, grids[t + 1].total,
                                     middle[t - 1].get(), next.data());
            std::swap(cost, next);
        }
        // close the cycle
        for (std::size_t b = 0; b < tile; ++b) {
            const double* row = cost.data() + b * grids[m - 1].total;
            double total = std::numeric_limits<double>::infinity();
            for (std::size_t q = 0; q < grids[m - 1].total; ++q) {
                const double v =
                    row[q] + oracle_detail::point_distance(grids[m - 1].points, q, grids[0].points,
                                                           tile_lo + b, dim);
                if (v < total) total = v;
            }
            if (total < best) {
                best = total;
                best_p1 = tile_lo + b;
            }
        }
    }

    // Recover the argmin chain for best_p1 with a second, backpointered pass
    // (first index wins ties, matching the strict-< scan above).
    std::vector<std::size_t> pick(m);
    pick[0] = best_p1;
    {
        std::vector<std::vector<double>> f(m);
        std::vector<std::vector<std::size_t>> parent(m);
        f[1].resize(grids[1].total);
        for (std::size_t q = 0; q < grids[1].total; ++q)
            f[1][q] = oracle_detail::point_distance(grids[0].points, best_p1, grids[1].points, q, dim);
        for (std::size_t t = 1; t + 1 < m; ++t) {
            f[t + 1].assign(grids[t + 1].total, std::numeric_limits<double>::infinity());
            parent[t + 1].assign(grids[t + 1].total, 0);
            const double* mat = middle[t - 1].get();
            for (std::size_t p = 0; p < grids[t].total; ++p) {
                const double* row = mat + p * grids[t + 1].total;
                for (std::size_t q = 0; q < grids[t + 1].total; ++q) {
                    const double v = f[t][p] + row[q];
                    if (v < f[t + 1][q]) {
                        f[t + 1][q] = v;
                        parent[t + 1][q] = p;
                    }
                }
            }
        }
        double total = std::numeric_limits<double>::infinity();
        std::size_t last = 0;
        for (std::size_t q = 0; q < grids[m - 1].total; ++q) {
            const double v = f[m - 1][q] + oracle_detail::point_distance(grids[m - 1].points, q,
                                                                         grids[0].points, best_p1, dim);
            if (v < total) {
                total = v;
                last = q;
            }
        }
        pick[m - 1] = last;
        for (std::size_t t = m - 1; t >= 2; --t) pick[t - 1] = parent[t][pick[t]];
    }

    // Materialize parameters and configuration for the argmin cell.
    std::vector<std::vector<double>> params(m);
    Configuration config(m);
    for (std::size_t i = 0; i < m; ++i) {
        params[i] = grids[i].params_at(pick[i]);
        config[i] = grids[i].chart.map(params[i]);
    }
    double value = perimeter(config);

    // Cyclic per-parameter golden-section refinement, +-1 grid cell.
    for (int round = 0; round < refine_rounds; ++round) {
        double max_change = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const auto& chart = grids[i].chart;
            for (std::size_t p = 0; p < params[i].size(); ++p) {
                const double cell = (chart.hi[p] - chart.lo[p]) / static_cast<double>(resolution);
                double lo = params[i][p] - cell;
                double hi = params[i][p] + cell;
                if (!chart.wraps[p]) {
                    lo = std::max(lo, chart.lo[p]);
                    hi = std::min(hi, chart.hi[p]);
                }
                auto phi = [&](double t) {
                    std::vector<double> tp = params[i];
                    tp[p] = t;
                    Configuration trial = config;
                    trial[i] = chart.map(tp);
                    return perimeter(trial);
                };
                // golden section on [lo, hi] to width 1e-10 (iteration-capped)
                const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
                double a = lo, b = hi;
                double c = b - gr * (b - a), d = a + gr * (b - a);
                double fc = phi(c), fd = phi(d);
                for (int it = 0; it < 300 && (b - a) > 1e-10; ++it) {
                    if (fc < fd) {
                        b = d; d = c; fd = fc;
                        c = b - gr * (b - a); fc = phi(c);
                    } else {
                        a = c; c = d; fc = fd;
                        d = a + gr * (b - a); fd = phi(d);
                    }
                }
                const double t_star = 0.5 * (a + b);
                const double v_star = phi(t_star);
                if (v_star < value) {
                    max_change = std::max(max_change, std::abs(t_star - params[i][p]));
                    params[i][p] = t_star;
                    config[i] = chart.map(params[i]);
                    value = v_star;
                }
            }
        }
        if (max_change < 1e-10) break;
    }

    return {value, config};
}

// Variant that additionally considers an externally supplied candidate
// (typically a solver result when the general-position hypothesis is in
// doubt and the boundary restriction may not be valid): returns whichever
// of the boundary search and the candidate has the smaller perimeter.
inline std::pair<double, Configuration> brute_force_min(const Problem& problem,
                                                        long long resolution, int refine_rounds,
                                                        const Configuration& interior_seed) {
    auto boundary = brute_force_min(problem, resolution, refine_rounds);
    require_configuration(problem, interior_seed);
    const double seed_value = perimeter(interior_seed);
    if (seed_value < boundary.first) return {seed_value, interior_seed};
    return boundary;
}

}  // namespace waist
