// Convex-set catalog with closed-form Euclidean projections, membership
// tests, normal-cone distance queries, and set-set distance via alternating
// projections. Every variant is a nonempty closed convex set.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "waist/error.hpp"
#include "waist/vec.hpp"

namespace waist {

struct Ball {
    Point center;
    double radius = 1.0;
};

struct AxisBox {
    Point lo, hi;
};

struct Segment {
    Point p, q;
};

struct Line {
    Point base, direction;  // direction must be unit length
};

// { x : <normal, x> <= offset }, normal unit length.
struct Halfspace {
    Point normal;
    double offset = 0.0;
};

// Strictly convex vertex ordering, counterclockwise, n = 2 only.
struct Polygon2D {
    std::vector<Point> vertices;
};

using ConvexSet = std::variant<Ball, AxisBox, Segment, Line, Halfspace, Polygon2D>;

// Default membership tolerance wherever the caller does not supply one.
inline constexpr double kMembershipTol = 1e-9;

inline int dimension(const ConvexSet& set) {
    return std::visit(
        [](const auto& s) -> int {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Ball>) return static_cast<int>(s.center.size());
            else if constexpr (std::is_same_v<T, AxisBox>) return static_cast<int>(s.lo.size());
            else if constexpr (std::is_same_v<T, Segment>) return static_cast<int>(s.p.size());
            else if constexpr (std::is_same_v<T, Line>) return static_cast<int>(s.base.size());
            else if constexpr (std::is_same_v<T, Halfspace>) return static_cast<int>(s.normal.size());
            else return 2;
        },
        set);
}

inline const char* variant_name(const ConvexSet& set) {
    static constexpr std::array<const char*, 6> names = {"ball",      "axis_box", "segment",
                                                         "line",      "halfspace", "polygon"};
    return names[set.index()];
}

// 2D cross product helper.
inline double cross2(const Point& a, const Point& b) { return a[0] * b[1] - a[1] * b[0]; }

// Validates the variant's structural invariants; throws GeometryError.
inline void validate(const ConvexSet& set) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Ball>) {
                if (s.center.empty()) throw GeometryError("invalid_set", "ball: empty center");
                if (!(s.radius > 0.0)) throw GeometryError("invalid_set", "ball: radius must be > 0");
                if (!all_finite(s.center)) throw GeometryError("invalid_set", "ball: non-finite center");
            } else if constexpr (std::is_same_v<T, AxisBox>) {
                if (s.lo.size() != s.hi.size() || s.lo.empty())
                    throw GeometryError("invalid_set", "axis_box: lo/hi dimension mismatch");
                for (std::size_t j = 0; j < s.lo.size(); ++j)
                    if (!(s.lo[j] <= s.hi[j]))
                        throw GeometryError("invalid_set", "axis_box: lo must be <= hi componentwise");
            } else if constexpr (std::is_same_v<T, Segment>) {
                if (s.p.size() != s.q.size() || s.p.empty())
                    throw GeometryError("invalid_set", "segment: endpoint dimension mismatch");
                if (distance(s.p, s.q) == 0.0)
                    throw GeometryError("invalid_set", "segment: endpoints must be distinct");
            } else if constexpr (std::is_same_v<T, Line>) {
                if (s.base.size() != s.direction.size() || s.base.empty())
                    throw GeometryError("invalid_set", "line: base/direction dimension mismatch");
                if (std::abs(norm(s.direction) - 1.0) > 1e-9)
                    throw GeometryError("invalid_set", "line: direction must be unit length");
            } else if constexpr (std::is_same_v<T, Halfspace>) {
                if (s.normal.empty()) throw GeometryError("invalid_set", "halfspace: empty normal");
                if (std::abs(norm(s.normal) - 1.0) > 1e-9)
                    throw GeometryError("invalid_set", "halfspace: normal must be unit length");
            } else {  // Polygon2D
                const auto& v = s.vertices;
                if (v.size() < 3) throw GeometryError("invalid_set", "polygon: needs at least 3 vertices");
                for (const auto& p : v)
                    if (p.size() != 2) throw GeometryError("invalid_set", "polygon: vertices must be 2D");
                const std::size_t nv = v.size();
                for (std::size_t i = 0; i < nv; ++i) {
                    const Point e1 = sub(v[(i + 1) % nv], v[i]);
                    const Point e2 = sub(v[(i + 2) % nv], v[(i + 1) % nv]);
                    if (!(cross2(e1, e2) > 0.0))
                        throw GeometryError("invalid_set",
                                            "polygon: vertices must be strictly convex counterclockwise");
                }
            }
        },
        set);
}

inline void require_dimension(const ConvexSet& set, const Point& x) {
    if (static_cast<int>(x.size()) != dimension(set))
        throw GeometryError("dimension_mismatch",
                            std::string("point dimension ") + std::to_string(x.size()) +
                                " does not match set dimension " + std::to_string(dimension(set)));
}

namespace detail {

inline Point project_segment(const Point& p, const Point& q, const Point& x) {
    const Point d = sub(q, p);
    const double t = std::clamp(dot(sub(x, p), d) / dot(d, d), 0.0, 1.0);
    Point r(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) r[j] = p[j] + t * d[j];
    return r;
}

inline bool polygon_contains(const Polygon2D& s, const Point& x) {
    const std::size_t nv = s.vertices.size();
    for (std::size_t i = 0; i < nv; ++i) {
        const Point& a = s.vertices[i];
        const Point& b = s.vertices[(i + 1) % nv];
        if (cross2(sub(b, a), sub(x, a)) < 0.0) return false;
    }
    return true;
}

inline Point project_polygon_boundary(const Polygon2D& s, const Point& x) {
    const std::size_t nv = s.vertices.size();
    Point best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nv; ++i) {
        const Point cand = project_segment(s.vertices[i], s.vertices[(i + 1) % nv], x);
        const double d = distance(cand, x);
        if (d < best_d) {
            best_d = d;
            best = cand;
        }
    }
    return best;
}

}  // namespace detail

// Euclidean projection onto the set: the unique nearest point. Members are
// fixed points (interior points included).
inline Point project(const ConvexSet& set, const Point& x) {
    require_dimension(set, x);
    return std::visit(
        [&x](const auto& s) -> Point {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Ball>) {
                const Point d = sub(x, s.center);
                const double n = norm(d);
                if (n <= s.radius) return x;
                Point r(x.size());
                for (std::size_t j = 0; j < x.size(); ++j) r[j] = s.center[j] + s.radius * d[j] / n;
                return r;
            } else if constexpr (std::is_same_v<T, AxisBox>) {
                Point r(x.size());
                for (std::size_t j = 0; j < x.size(); ++j) r[j] = std::clamp(x[j], s.lo[j], s.hi[j]);
                return r;
            } else if constexpr (std::is_same_v<T, Segment>) {
                return detail::project_segment(s.p, s.q, x);
            } else if constexpr (std::is_same_v<T, Line>) {
                const double t = dot(sub(x, s.base), s.direction);
                Point r(x.size());
                for (std::size_t j = 0; j < x.size(); ++j) r[j] = s.base[j] + t * s.direction[j];
                return r;
            } else if constexpr (std::is_same_v<T, Halfspace>) {
                const double excess = dot(s.normal, x) - s.offset;
                if (excess <= 0.0) return x;
                Point r(x.size());
                for (std::size_t j = 0; j < x.size(); ++j) r[j] = x[j] - excess * s.normal[j];
                return r;
            } else {  // Polygon2D
                if (detail::polygon_contains(s, x)) return x;
                return detail::project_polygon_boundary(s, x);
            }
        },
        set);
}

// Projection onto the set's boundary: nearest boundary point, pushing
// interior points outward. For sets with empty interior (segment, line)
// this coincides with `project`. The iterative solver uses this policy;
// optimal configurations of disjoint-set problems lie on boundaries, and
// the bundled reference trajectories are generated with it.
inline Point project_boundary(const ConvexSet& set, const Point& x) {
    require_dimension(set, x);
    return std::visit(
        [&x, &set](const auto& s) -> Point {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Ball>) {
                const Point d = sub(x, s.center);
                const double n = norm(d);
                if (n == 0.0) {
                    Point r = s.center;
                    r[0] += s.radius;
                    return r;
                }
                Point r(x.size());
                for (std::size_t j = 0; j < x.size(); ++j) r[j] = s.center[j] + s.radius * d[j] / n;
                return r;
            } else if constexpr (std::is_same_v<T, AxisBox>) {
                Point r(x.size());
                bool inside = true;
                for (std::size_t j = 0; j < x.size(); ++j) {
                    r[j] = std::clamp(x[j], s.lo[j], s.hi[j]);
                    inside = inside && (x[j] > s.lo[j] && x[j] < s.hi[j]);
                }
                if (!inside) return r;  // clamping an exterior/boundary point lands on the boundary
                // strictly interior: move to the nearest face
                std::size_t best_j = 0;
                double best_gap = std::numeric_limits<double>::infinity();
                bool to_lo = true;
                for (std::size_t j = 0; j < x.size(); ++j) {
                    const double glo = x[j] - s.lo[j];
                    const double ghi = s.hi[j] - x[j];
                    if (glo < best_gap) { best_gap = glo; best_j = j; to_lo = true; }
                    if (ghi < best_gap) { best_gap = ghi; best_j = j; to_lo = false; }
                }
                r[best_j] = to_lo ? s.lo[best_j] : s.hi[best_j];
                return r;
            } else if constexpr (std::is_same_v<T, Segment> || std::is_same_v<T, Line>) {
                return project(set, x);
            } else if constexpr (std::is_same_v<T, Halfspace>) {
                const double excess = dot(s.normal, x) - s.offset;
                Point r(x.size());
                for (std::size_t j = 0; j < x.size(); ++j) r[j] = x[j] - excess * s.normal[j];
                return r;
            } else {  // Polygon2D
                return detail::project_polygon_boundary(s, x);
            }
        },
        set);
}

// True iff x is within `tol` of the set.
inline bool contains(const ConvexSet& set, const Point& x, double tol = kMembershipTol) {
    if (tol < 0.0) throw GeometryError("invalid_argument", "contains: tolerance must be >= 0");
    return distance(x, project(set, x)) <= tol;
}

namespace detail {

// Distance from v to the ray { t*u : t >= 0 }, u unit.
inline double distance_to_ray(const Point& u, const Point& v) {
    const double t = std::max(dot(v, u), 0.0);
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double d = v[j] - t * u[j];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace detail

// Euclidean distance from v to the normal cone of the set at x (x must be a
// member within 1e-9). Returns 0 exactly when v lies in the cone; interior
// points have cone {0}, so the distance is ||v|| there.
inline double normal_cone_distance(const ConvexSet& set, const Point& x, const Point& v) {
    require_dimension(set, x);
    require_dimension(set, v);
    if (!contains(set, x, kMembershipTol))
        throw GeometryError("not_a_member", "normal_cone_distance: x is not in the set");
    constexpr double btol = kMembershipTol;
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Ball>) {
                const Point d = sub(x, s.center);
                const double n = norm(d);
                if (n < s.radius - btol) return norm(v);  // interior
                return detail::distance_to_ray(scaled(d, 1.0 / n), v);
            } else if constexpr (std::is_same_v<T, AxisBox>) {
                // The cone is a product of per-coordinate constraints; project
                // v coordinatewise and measure the residual.
                double sum = 0.0;
                for (std::size_t j = 0; j < x.size(); ++j) {
                    const bool at_lo = x[j] <= s.lo[j] + btol;
                    const bool at_hi = x[j] >= s.hi[j] - btol;
                    double w;
                    if (at_lo && at_hi) w = v[j];                    // degenerate slab: free
                    else if (at_lo) w = std::min(v[j], 0.0);         // outward is -e_j
                    else if (at_hi) w = std::max(v[j], 0.0);         // outward is +e_j
                    else w = 0.0;                                    // interior coordinate
                    const double d = v[j] - w;
                    sum += d * d;
                }
                return std::sqrt(sum);
            } else if constexpr (std::is_same_v<T, Segment>) {
                const Point u = unit(sub(s.q, s.p));
                const double len = distance(s.p, s.q);
                const double t = dot(sub(x, s.p), u);
                if (t <= btol) return std::max(dot(v, u), 0.0);        // at p: {w : <w,u> <= 0}
                if (t >= len - btol) return std::max(-dot(v, u), 0.0); // at q: {w : <w,u> >= 0}
                return std::abs(dot(v, u));                            // relative interior: u-perp
            } else if constexpr (std::is_same_v<T, Line>) {
                return std::abs(dot(v, s.direction));  // orthogonal complement of the direction
            } else if constexpr (std::is_same_v<T, Halfspace>) {
                const double slack = s.offset - dot(s.normal, x);
                if (slack > btol) return norm(v);  // interior
                return detail::distance_to_ray(s.normal, v);
            } else {  // Polygon2D
                const std::size_t nv = s.vertices.size();
                // Locate x: vertex, edge, or interior.
                auto edge_normal = [&](std::size_t i) {
                    const Point t = unit(sub(s.vertices[(i + 1) % nv], s.vertices[i]));
                    return Point{t[1], -t[0]};  // outward for CCW ordering
                };
                for (std::size_t i = 0; i < nv; ++i) {
                    if (distance(x, s.vertices[i]) <= btol) {
                        // Cone spanned by the two adjacent edge normals (CCW from na to nb).
                        const Point na = edge_normal((i + nv - 1) % nv);
                        const Point nb = edge_normal(i);
                        if (cross2(na, v) >= 0.0 && cross2(v, nb) >= 0.0) return 0.0;
                        return std::min(detail::distance_to_ray(na, v), detail::distance_to_ray(nb, v));
                    }
                }
                for (std::size_t i = 0; i < nv; ++i) {
                    const Point foot = detail::project_segment(s.vertices[i], s.vertices[(i + 1) % nv], x);
                    if (distance(x, foot) <= btol) return detail::distance_to_ray(edge_normal(i), v);
                }
                return norm(v);  // interior
            }
        },
        set);
}

// A deterministic member point, used to seed alternating projections and to
// build default start configurations.
inline Point representative_point(const ConvexSet& set) {
    return std::visit(
        [](const auto& s) -> Point {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Ball>) return s.center;
            else if constexpr (std::is_same_v<T, AxisBox>) {
                Point r(s.lo.size());
                for (std::size_t j = 0; j < s.lo.size(); ++j) r[j] = 0.5 * (s.lo[j] + s.hi[j]);
                return r;
            } else if constexpr (std::is_same_v<T, Segment>) {
                Point r(s.p.size());
                for (std::size_t j = 0; j < s.p.size(); ++j) r[j] = 0.5 * (s.p[j] + s.q[j]);
                return r;
            } else if constexpr (std::is_same_v<T, Line>) return s.base;
            else if constexpr (std::is_same_v<T, Halfspace>) return scaled(s.normal, s.offset);
            else {  // Polygon2D
                Point r{0.0, 0.0};
                for (const auto& p : s.vertices) {
                    r[0] += p[0];
                    r[1] += p[1];
                }
                r[0] /= static_cast<double>(s.vertices.size());
                r[1] /= static_cast<double>(s.vertices.size());
                return r;
            }
        },
        set);
}

struct SetDistanceResult {
    double dist = 0.0;
    Point point_a, point_b;
};

// Distance between two sets via alternating projections from the midpoint of
// their representative points; stops when successive distances change by
// less than 1e-13 or after 10000 sweeps. dist == 0 signals overlap.
inline SetDistanceResult set_distance(const ConvexSet& a, const ConvexSet& b) {
    if (dimension(a) != dimension(b))
        throw GeometryError("dimension_mismatch", "set_distance: ambient dimensions differ");
    const Point ra = representative_point(a);
    const Point rb = representative_point(b);
    Point mid(ra.size());
    for (std::size_t j = 0; j < ra.size(); ++j) mid[j] = 0.5 * (ra[j] + rb[j]);

    Point pa = project(a, mid);
    Point pb = project(b, pa);
    double d = distance(pa, pb);
    for (int it = 0; it < 10000; ++it) {
        pa = project(a, pb);
        pb = project(b, pa);
        const double dn = distance(pa, pb);
        const double change = std::abs(dn - d);
        d = dn;
        if (change < 1e-13) break;
    }
    return {d, pa, pb};
}

// Strict convexity census: open segments between members stay interior.
inline bool strictly_convex(const ConvexSet& set) { return std::holds_alternative<Ball>(set); }

inline bool bounded(const ConvexSet& set) {
    return !(std::holds_alternative<Line>(set) || std::holds_alternative<Halfspace>(set));
}

}  // namespace waist
