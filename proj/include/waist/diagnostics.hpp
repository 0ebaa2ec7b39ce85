// Hypothesis checks and certificates: pairwise disjointness, sampled
// general-position verdicts, convexity/boundedness census, and first-order
// optimality certification with the reflection-law angle report.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "waist/convex_set.hpp"
#include "waist/error.hpp"
#include "waist/objective.hpp"
#include "waist/problem.hpp"
#include "waist/vec.hpp"

namespace waist {

enum class GeneralPosition { Verified, Violated, Unknown };

inline const char* to_string(GeneralPosition g) {
    switch (g) {
        case GeneralPosition::Verified: return "verified";
        case GeneralPosition::Violated: return "violated";
        default: return "unknown";
    }
}

// (all pairwise set distances > 1e-9, minimum pairwise distance)
inline std::pair<bool, double> check_pairwise_disjoint(const Problem& problem) {
    bool ok = true;
    double min_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < problem.sets.size(); ++i)
        for (std::size_t j = i + 1; j < problem.sets.size(); ++j) {
            const double d = set_distance(problem.sets[i], problem.sets[j]).dist;
            min_d = std::min(min_d, d);
            if (!(d > 1e-9)) ok = false;
        }
    return {ok, min_d};
}

namespace diag_detail {

struct SampleSet {
    std::vector<Point> points;
    double margin = 0.0;   // Hausdorff bound between sampled hull and true set
    bool truncated = false;  // unbounded set: hull cannot represent it fully
};

// Deterministic boundary samples of one set plus the covering margin they
// guarantee. Polytope-like sets contribute their vertices (exact hull,
// margin 0); smooth sets contribute uniform angular samples.
inline SampleSet boundary_samples(const ConvexSet& set, int n_samples, double window) {
    SampleSet out;
    const double pi = 3.14159265358979323846;
    if (const auto* b = std::get_if<Ball>(&set)) {
        if (b->center.size() == 2) {
            for (int k = 0; k < n_samples; ++k) {
                const double th = 2.0 * pi * (static_cast<double>(k) / n_samples);
                out.points.push_back(
                    {b->center[0] + b->radius * std::cos(th), b->center[1] + b->radius * std::sin(th)});
            }
            out.margin = 2.0 * b->radius * std::sin(pi / n_samples);
            return out;
        }
        if (b->center.size() == 3) {
            // Fibonacci lattice; covering radius on the unit sphere is below
            // 3.5/sqrt(N), padded to 4/sqrt(N) for safety.
            const double golden_angle = pi * (3.0 - std::sqrt(5.0));
            for (int k = 0; k < n_samples; ++k) {
                const double z = 1.0 - 2.0 * ((k + 0.5) / n_samples);
                const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
                const double th = golden_angle * k;
                out.points.push_back({b->center[0] + b->radius * rho * std::cos(th),
                                      b->center[1] + b->radius * rho * std::sin(th),
                                      b->center[2] + b->radius * z});
            }
            out.margin = 4.0 * b->radius / std::sqrt(static_cast<double>(n_samples));
            return out;
        }
        // higher-dimensional ball: axis-aligned extreme points only; the
        // hull is a crude inner approximation, so never claim Verified.
        for (std::size_t j = 0; j < b->center.size(); ++j) {
            Point lo = b->center, hi = b->center;
            lo[j] -= b->radius;
            hi[j] += b->radius;
            out.points.push_back(lo);
            out.points.push_back(hi);
        }
        out.margin = std::numeric_limits<double>::infinity();
        return out;
    }
    if (const auto* s = std::get_if<Segment>(&set)) {
        out.points = {s->p, s->q};  // exact hull
        return out;
    }
    if (const auto* g = std::get_if<Polygon2D>(&set)) {
        out.points = g->vertices;  // exact hull
        return out;
    }
    if (const auto* bx = std::get_if<AxisBox>(&set)) {
        const std::size_t n = bx->lo.size();
        if (n <= 16) {  // all corners: exact hull
            for (std::size_t mask = 0; mask < (std::size_t(1) << n); ++mask) {
                Point p(n);
                for (std::size_t j = 0; j < n; ++j) p[j] = (mask >> j) & 1 ? bx->hi[j] : bx->lo[j];
                out.points.push_back(p);
            }
            return out;
        }
        out.points = {bx->lo, bx->hi};
        out.margin = std::numeric_limits<double>::infinity();
        return out;
    }
    if (const auto* l = std::get_if<Line>(&set)) {
        for (int k = 0; k < n_samples; ++k) {
            const double t = -window + 2.0 * window * (static_cast<double>(k) / (n_samples - 1));
            Point p(l->base.size());
            for (std::size_t j = 0; j < p.size(); ++j) p[j] = l->base[j] + t * l->direction[j];
            out.points.push_back(p);
        }
        out.truncated = true;  // the real set extends beyond any window
        return out;
    }
    // Halfspace: sample a window of the boundary hyperplane (2-D/3-D).
    const auto& h = std::get<Halfspace>(set);
    const std::size_t n = h.normal.size();
    Point origin = scaled(h.normal, h.offset);
    if (n == 2) {
        const Point tang{-h.normal[1], h.normal[0]};
        for (int k = 0; k < n_samples; ++k) {
            const double t = -window + 2.0 * window * (static_cast<double>(k) / (n_samples - 1));
            out.points.push_back({origin[0] + t * tang[0], origin[1] + t * tang[1]});
        }
    } else if (n == 3) {
        // two orthogonal tangents via the smallest normal component
        std::size_t jmin = 0;
        for (std::size_t j = 1; j < 3; ++j)
            if (std::abs(h.normal[j]) < std::abs(h.normal[jmin])) jmin = j;
        Point e(3, 0.0);
        e[jmin] = 1.0;
        Point t1 = sub(e, scaled(h.normal, dot(e, h.normal)));
        t1 = unit(t1);
        const Point t2{h.normal[1] * t1[2] - h.normal[2] * t1[1],
                       h.normal[2] * t1[0] - h.normal[0] * t1[2],
                       h.normal[0] * t1[1] - h.normal[1] * t1[0]};
        const int side = std::max(3, static_cast<int>(std::sqrt(static_cast<double>(n_samples))));
        for (int a = 0; a < side; ++a)
            for (int b = 0; b < side; ++b) {
                const double u = -window + 2.0 * window * (static_cast<double>(a) / (side - 1));
                const double v = -window + 2.0 * window * (static_cast<double>(b) / (side - 1));
                Point p(3);
                for (std::size_t j = 0; j < 3; ++j) p[j] = origin[j] + u * t1[j] + v * t2[j];
                out.points.push_back(p);
            }
    } else {
        out.points.push_back(origin);
    }
    out.truncated = true;
    return out;
}

// Euclidean projection of x onto conv(vertices) by Frank-Wolfe with away
// steps (exact step sizes). Deterministic: scans vertices in index order,
// strict comparisons keep the first extremum.
inline Point project_hull(const std::vector<Point>& vertices, const Point& x) {
    const std::size_t n = vertices.size();
    std::vector<double> w(n, 0.0);
    w[0] = 1.0;
    Point y = vertices[0];
    for (int it = 0; it < 10000; ++it) {
        const Point grad = sub(y, x);
        std::size_t fw = 0, away = 0;
        double fw_val = std::numeric_limits<double>::infinity();
        double away_val = -std::numeric_limits<double>::infinity();
        bool away_found = false;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = dot(grad, vertices[i]);
            if (v < fw_val) {
                fw_val = v;
                fw = i;
            }
            if (w[i] > 0.0 && v > away_val) {
                away_val = v;
                away = i;
                away_found = true;
            }
        }
        const double gap = dot(grad, y) - fw_val;  // duality gap bound
        if (gap <= 1e-12) break;
        const double away_gap = away_found ? away_val - dot(grad, y) : -1.0;
        Point dir;
        double gamma_max;
        bool is_away;
        if (gap >= away_gap) {
            dir = sub(vertices[fw], y);
            gamma_max = 1.0;
            is_away = false;
        } else {
            dir = sub(y, vertices[away]);
            gamma_max = w[away] >= 1.0 ? std::numeric_limits<double>::infinity()
                                       : w[away] / (1.0 - w[away]);
            is_away = true;
        }
        const double denom = dot(dir, dir);
        if (denom == 0.0) break;
        double gamma = -dot(grad, dir) / denom;
        gamma = std::clamp(gamma, 0.0, gamma_max);
        if (gamma == 0.0) break;
        if (!is_away) {
            for (std::size_t i = 0; i < n; ++i) w[i] *= (1.0 - gamma);
            w[fw] += gamma;
        } else {
            for (std::size_t i = 0; i < n; ++i) w[i] *= (1.0 + gamma);
            w[away] -= gamma;
            if (w[away] < 1e-16) w[away] = 0.0;
        }
        for (std::size_t j = 0; j < y.size(); ++j) y[j] += gamma * dir[j];
    }
    return y;
}

// Distance between a catalog set and a sampled hull via alternating
// projections (closed form on the set side, Frank-Wolfe on the hull side).
inline double set_hull_distance(const ConvexSet& set, const std::vector<Point>& hull) {
    Point x = representative_point(set);
    double d_prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 2000; ++it) {
        const Point h = project_hull(hull, x);
        x = project(set, h);
        const double d = distance(x, h);
        if (std::abs(d - d_prev) < 1e-13) return d;
        d_prev = d;
    }
    return d_prev;
}

inline double sample_window(const Problem& problem) {
    double diam = 0.0;
    std::vector<Point> reps;
    for (const auto& s : problem.sets) reps.push_back(representative_point(s));
    for (std::size_t i = 0; i < reps.size(); ++i)
        for (std::size_t j = i + 1; j < reps.size(); ++j)
            diam = std::max(diam, distance(reps[i], reps[j]));
    return 10.0 * std::max(1.0, diam);
}

}  // namespace diag_detail

// For each set index i, decides whether C_i is separated from the convex
// hull of the union of the other sets. The hull is approximated from inside
// by deterministic boundary samples, so:
//   - contact with the sampled hull (distance <= 1e-9)   -> Violated (sound);
//   - distance > the samples' covering margin            -> Verified;
//   - anything else, or any truncated unbounded sample   -> Unknown.
// With m = 2 the opposite hull is the other set itself and the verdict is
// exact (set_distance, no sampling).
inline std::vector<GeneralPosition> check_general_position(const Problem& problem,
                                                           int samples_per_set = 256) {
    if (samples_per_set < 8)
        throw GeometryError("invalid_argument", "check_general_position: needs >= 8 samples per set");
    const std::size_t m = problem.sets.size();
    std::vector<GeneralPosition> verdict(m, GeneralPosition::Unknown);
    const double window = diag_detail::sample_window(problem);

    if (m == 2) {
        for (std::size_t i = 0; i < 2; ++i) {
            const double d = set_distance(problem.sets[i], problem.sets[1 - i]).dist;
            verdict[i] = d > 1e-9 ? GeneralPosition::Verified : GeneralPosition::Violated;
        }
        return verdict;
    }

    std::vector<diag_detail::SampleSet> samples(m);
    for (std::size_t j = 0; j < m; ++j)
        samples[j] = diag_detail::boundary_samples(problem.sets[j], samples_per_set, window);

    for (std::size_t i = 0; i < m; ++i) {
        std::vector<Point> hull;
        double margin = 0.0;
        bool truncated = false;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            hull.insert(hull.end(), samples[j].points.begin(), samples[j].points.end());
            margin = std::max(margin, samples[j].margin);
            truncated = truncated || samples[j].truncated;
        }
        // fast path: a sample inside C_i settles it
        bool violated = false;
        for (const auto& s : hull)
            if (contains(problem.sets[i], s, 1e-9)) {
                violated = true;
                break;
            }
        const double d = violated ? 0.0 : diag_detail::set_hull_distance(problem.sets[i], hull);
        if (d <= 1e-9)
            verdict[i] = GeneralPosition::Violated;
        else if (!truncated && d > margin)
            verdict[i] = GeneralPosition::Verified;
        else
            verdict[i] = GeneralPosition::Unknown;
    }
    return verdict;
}

struct CertifyReport {
    bool certified = false;
    double residual = std::numeric_limits<double>::infinity();
    double normal_sum_norm = 0.0;
    // Incidence angles (radians) between each chain point's outward normal
    // and its two incident edges; equal pairs are the reflection-law
    // signature of first-order optimality.
    struct AnglePair {
        double incoming = 0.0, outgoing = 0.0;
    };
    std::vector<AnglePair> bisector_angles;
    double repair_distance = 0.0;  // how far the input was from feasibility
};

namespace diag_detail {

// Canonical outward unit normal at a boundary point, where one exists.
// Returns false for sets (or strata, e.g. polygon vertices) without a
// single canonical normal; callers fall back to the subgradient bisector.
inline bool outward_normal(const ConvexSet& set, const Point& x, Point* out) {
    if (const auto* b = std::get_if<Ball>(&set)) {
        const Point d = sub(x, b->center);
        const double n = norm(d);
        if (n == 0.0) return false;
        *out = scaled(d, 1.0 / n);
        return true;
    }
    if (const auto* h = std::get_if<Halfspace>(&set)) {
        *out = h->normal;
        return true;
    }
    if (const auto* bx = std::get_if<AxisBox>(&set)) {
        int active = -1;
        bool to_hi = false;
        int count = 0;
        for (std::size_t j = 0; j < bx->lo.size(); ++j) {
            if (x[j] <= bx->lo[j] + 1e-9 && bx->lo[j] < bx->hi[j]) {
                active = static_cast<int>(j);
                to_hi = false;
                ++count;
            }
            if (x[j] >= bx->hi[j] - 1e-9 && bx->lo[j] < bx->hi[j]) {
                active = static_cast<int>(j);
                to_hi = true;
                ++count;
            }
        }
        if (count != 1) return false;  // vertex/edge or interior
        Point n(bx->lo.size(), 0.0);
        n[static_cast<std::size_t>(active)] = to_hi ? 1.0 : -1.0;
        *out = n;
        return true;
    }
    if (const auto* g = std::get_if<Polygon2D>(&set)) {
        const std::size_t nv = g->vertices.size();
        for (const auto& vert : g->vertices)
            if (distance(x, vert) <= 1e-9) return false;  // vertex: a cone, not a normal
        for (std::size_t e = 0; e < nv; ++e) {
            const Point foot = detail::project_segment(g->vertices[e], g->vertices[(e + 1) % nv], x);
            if (distance(foot, x) <= 1e-9) {
                const Point t = unit(sub(g->vertices[(e + 1) % nv], g->vertices[e]));
                *out = {t[1], -t[0]};
                return true;
            }
        }
        return false;
    }
    return false;  // segment/line: normal space is not a single direction
}

inline double angle_between(const Point& a, const Point& b_unit) {
    const double na = norm(a);
    if (na == 0.0) return 0.0;
    const double c = std::clamp(dot(a, b_unit) / na, -1.0, 1.0);
    return std::acos(c);
}

}  // namespace diag_detail

// First-order optimality certificate at a configuration. Points may be
// supplied with limited precision (e.g. re-typed from a printed table);
// each is first projected onto its set, and the certificate is computed at
// the projected configuration. Projection moves larger than tol mean the
// input is not even approximately feasible and raise an error.
inline CertifyReport certify(const Problem& problem, const Configuration& config, double tol) {
    require_configuration(problem, config);
    if (!(tol > 0.0)) throw GeometryError("invalid_argument", "certify: tol must be > 0");
    Configuration repaired(config.size());
    double repair = 0.0;
    for (std::size_t i = 0; i < config.size(); ++i) {
        repaired[i] = project(problem.sets[i], config[i]);
        repair = std::max(repair, distance(repaired[i], config[i]));
    }
    if (repair > tol)
        throw GeometryError("infeasible_configuration",
                            "certify: configuration is " + std::to_string(repair) +
                                " away from feasibility, beyond the certification tolerance");
    // Low-precision inputs can land just *inside* a set, where the normal
    // cone degenerates to {0} and the residual would report a spurious
    // failure. Points within tol of the boundary are therefore judged on
    // the boundary; genuinely interior points are left where they are.
    for (std::size_t i = 0; i < config.size(); ++i) {
        const Point on_boundary = project_boundary(problem.sets[i], repaired[i]);
        if (distance(on_boundary, repaired[i]) <= tol) {
            repaired[i] = on_boundary;
            repair = std::max(repair, distance(repaired[i], config[i]));
        }
    }
    CertifyReport report;
    report.repair_distance = repair;
    report.residual = optimality_residual(problem, repaired);
    report.certified = report.residual <= tol;
    report.normal_sum_norm = normal_sum_norm(repaired);

    const auto g = subgradient(repaired);
    const std::size_t m = repaired.size();
    report.bisector_angles.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const Point e_prev = sub(repaired[(i + m - 1) % m], repaired[i]);
        const Point e_next = sub(repaired[(i + 1) % m], repaired[i]);
        Point n;
        if (!diag_detail::outward_normal(problem.sets[i], repaired[i], &n)) {
            // fallback: the negated subgradient direction (the edge bisector)
            const double gn = norm(g[i]);
            if (gn == 0.0) {
                report.bisector_angles[i] = {0.0, 0.0};
                continue;
            }
            n = scaled(g[i], -1.0 / gn);
        }
        report.bisector_angles[i].incoming = diag_detail::angle_between(e_prev, n);
        report.bisector_angles[i].outgoing = diag_detail::angle_between(e_next, n);
    }
    return report;
}

struct DiagnosticsReport {
    bool pairwise_disjoint = false;
    double min_pairwise_distance = 0.0;
    std::vector<GeneralPosition> general_position;
    std::vector<bool> strictly_convex;
    std::vector<bool> bounded;
    bool uniqueness_expected = false;
    std::vector<std::string> notes;
};

// Full hypothesis survey of a problem instance.
inline DiagnosticsReport diagnose(const Problem& problem, int samples_per_set = 256) {
    DiagnosticsReport rep;
    const auto disjoint = check_pairwise_disjoint(problem);
    rep.pairwise_disjoint = disjoint.first;
    rep.min_pairwise_distance = disjoint.second;
    rep.general_position = check_general_position(problem, samples_per_set);
    for (const auto& s : problem.sets) {
        rep.strictly_convex.push_back(strictly_convex(s));
        rep.bounded.push_back(bounded(s));
    }
    const bool all_gp = std::all_of(rep.general_position.begin(), rep.general_position.end(),
                                    [](GeneralPosition g) { return g == GeneralPosition::Verified; });
    const bool all_strict =
        std::all_of(rep.strictly_convex.begin(), rep.strictly_convex.end(), [](bool b) { return b; });
    rep.uniqueness_expected = all_gp && all_strict;

    if (!rep.pairwise_disjoint)
        rep.notes.push_back(
            "sets are not pairwise disjoint: boundary optimality and uniqueness arguments do not "
            "apply, and the chain may degenerate");
    if (std::any_of(rep.bounded.begin(), rep.bounded.end(), [](bool b) { return !b; }))
        rep.notes.push_back(
            "unbounded set present: existence of a minimizer relies on the objective growing along "
            "every recession direction; inspect the solver trace for divergence");
    if (all_gp && !all_strict)
        rep.notes.push_back(
            "separation verified but not every set is strictly convex: the optimal value is still "
            "attained, but multiple optimal configurations may exist");
    if (std::any_of(rep.general_position.begin(), rep.general_position.end(),
                    [](GeneralPosition g) { return g == GeneralPosition::Unknown; }))
        rep.notes.push_back(
            "general position could not be decided for at least one set (sampled hull is "
            "inconclusive or a set is unbounded); uniqueness is not claimed");
    return rep;
}

}  // namespace waist
