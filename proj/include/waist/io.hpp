// Problem-file ingestion (JSON), trace/summary/figure emission, and the
// benchmark runner. All emitters return deterministic strings; callers own
// file I/O.
#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "waist/convex_set.hpp"
#include "waist/diagnostics.hpp"
#include "waist/error.hpp"
#include "waist/objective.hpp"
#include "waist/problem.hpp"
#include "waist/solver.hpp"
#include "waist/vec.hpp"

namespace waist {

struct OutputSpec {
    std::string trace_csv;     // empty = not requested
    std::string summary_json;  // empty = not requested
    std::string figure_svg;    // empty = not requested
};

struct ParsedProblem {
    Problem problem;
    Configuration start;
    bool start_was_given = false;
    SolverConfig config;
    std::string method = "psd";  // "psd" | "nag"
    OutputSpec outputs;
};

namespace io_detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& path) {
    std::string unknown;
    for (const auto& item : obj.items())
        if (!allowed.count(item.key())) {
            if (!unknown.empty()) unknown += ", ";
            unknown += "'" + item.key() + "'";
        }
    if (!unknown.empty())
        throw ParseError("unknown_keys", path + ": unknown key(s) " + unknown);
}

inline const json& member(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError("missing_key", path + "." + key + ": required");
    return *it;
}

inline double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ParseError("bad_type", path + ": must be a number");
    return v.get<double>();
}

inline long long as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ParseError("bad_type", path + ": must be an integer");
    return v.get<long long>();
}

inline bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) throw ParseError("bad_type", path + ": must be a boolean");
    return v.get<bool>();
}

inline std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ParseError("bad_type", path + ": must be a string");
    return v.get<std::string>();
}

inline Point as_point(const json& v, const std::string& path, int dim) {
    if (!v.is_array()) throw ParseError("bad_type", path + ": must be an array of numbers");
    Point p;
    for (std::size_t j = 0; j < v.size(); ++j)
        p.push_back(as_number(v[j], path + "[" + std::to_string(j) + "]"));
    if (dim > 0 && static_cast<int>(p.size()) != dim)
        throw ParseError("bad_dimension", path + ": expected " + std::to_string(dim) +
                                              " coordinates, got " + std::to_string(p.size()));
    return p;
}

inline ConvexSet parse_set(const json& obj, const std::string& path, int dim) {
    if (!obj.is_object()) throw ParseError("bad_type", path + ": must be an object");
    reject_unknown_keys(obj, {"type", "parameters"}, path);
    const std::string type = as_string(member(obj, "type", path), path + ".type");
    const json& par = member(obj, "parameters", path);
    const std::string ppath = path + ".parameters";
    if (!par.is_object()) throw ParseError("bad_type", ppath + ": must be an object");

    if (type == "ball") {
        reject_unknown_keys(par, {"center", "radius"}, ppath);
        Ball b;
        b.center = as_point(member(par, "center", ppath), ppath + ".center", dim);
        b.radius = as_number(member(par, "radius", ppath), ppath + ".radius");
        if (!(b.radius > 0.0)) throw ParseError("bad_value", ppath + ".radius: must be > 0");
        return b;
    }
    if (type == "axis_box") {
        reject_unknown_keys(par, {"lo", "hi"}, ppath);
        AxisBox b;
        b.lo = as_point(member(par, "lo", ppath), ppath + ".lo", dim);
        b.hi = as_point(member(par, "hi", ppath), ppath + ".hi", dim);
        for (std::size_t j = 0; j < b.lo.size(); ++j)
            if (!(b.lo[j] <= b.hi[j]))
                throw ParseError("bad_value", ppath + ".lo: must be <= hi componentwise");
        return b;
    }
    if (type == "segment") {
        reject_unknown_keys(par, {"p", "q"}, ppath);
        Segment s;
        s.p = as_point(member(par, "p", ppath), ppath + ".p", dim);
        s.q = as_point(member(par, "q", ppath), ppath + ".q", dim);
        if (distance(s.p, s.q) == 0.0)
            throw ParseError("bad_value", ppath + ".q: endpoints must be distinct");
        return s;
    }
    if (type == "line") {
        reject_unknown_keys(par, {"base", "direction"}, ppath);
        Line l;
        l.base = as_point(member(par, "base", ppath), ppath + ".base", dim);
        l.direction = as_point(member(par, "direction", ppath), ppath + ".direction", dim);
        const double n = norm(l.direction);
        if (n == 0.0) throw ParseError("bad_value", ppath + ".direction: must be nonzero");
        l.direction = scaled(l.direction, 1.0 / n);  // normalize for the caller
        return l;
    }
    if (type == "halfspace") {
        reject_unknown_keys(par, {"normal", "offset"}, ppath);
        Halfspace h;
        h.normal = as_point(member(par, "normal", ppath), ppath + ".normal", dim);
        h.offset = as_number(member(par, "offset", ppath), ppath + ".offset");
        const double n = norm(h.normal);
        if (n == 0.0) throw ParseError("bad_value", ppath + ".normal: must be nonzero");
        h.normal = scaled(h.normal, 1.0 / n);
        h.offset = h.offset / n;
        return h;
    }
    if (type == "polygon") {
        reject_unknown_keys(par, {"vertices"}, ppath);
        Polygon2D g;
        const json& verts = member(par, "vertices", ppath);
        if (!verts.is_array() || verts.size() < 3)
            throw ParseError("bad_value", ppath + ".vertices: needs at least 3 vertices");
        for (std::size_t j = 0; j < verts.size(); ++j)
            g.vertices.push_back(
                as_point(verts[j], ppath + ".vertices[" + std::to_string(j) + "]", 2));
        return g;
    }
    throw ParseError("bad_value",
                     path + ".type: unknown set type '" + type +
                         "' (expected ball, axis_box, segment, line, halfspace, or polygon)");
}

inline StepRule parse_step_rule(const json& solver, const std::string& path) {
    std::string rule = "constant";
    if (solver.contains("step_rule")) rule = as_string(solver["step_rule"], path + ".step_rule");
    if (rule == "constant") {
        double alpha = 1.0;
        if (solver.contains("alpha")) alpha = as_number(solver["alpha"], path + ".alpha");
        if (!(alpha > 0.0)) throw ParseError("bad_value", path + ".alpha: must be > 0");
        return StepRule::constant(alpha);
    }
    if (rule == "diminishing") {
        double c = 1.0;
        if (solver.contains("c")) c = as_number(solver["c"], path + ".c");
        if (!(c > 0.0)) throw ParseError("bad_value", path + ".c: must be > 0");
        return StepRule::diminishing(c);
    }
    if (rule == "exact-line-search") {
        double alpha_max = 1.0;
        if (solver.contains("alpha_max"))
            alpha_max = as_number(solver["alpha_max"], path + ".alpha_max");
        if (!(alpha_max > 0.0)) throw ParseError("bad_value", path + ".alpha_max: must be > 0");
        StepRule::Refresh refresh = StepRule::Refresh::Once;
        if (solver.contains("refresh")) {
            const std::string r = as_string(solver["refresh"], path + ".refresh");
            if (r == "once")
                refresh = StepRule::Refresh::Once;
            else if (r == "every-iteration")
                refresh = StepRule::Refresh::EveryIteration;
            else
                throw ParseError("bad_value",
                                 path + ".refresh: must be 'once' or 'every-iteration'");
        }
        return StepRule::exact_line_search(alpha_max, refresh);
    }
    throw ParseError("bad_value", path + ".step_rule: unknown rule '" + rule +
                                      "' (expected constant, diminishing, or exact-line-search)");
}

}  // namespace io_detail

// Parses a problem document (JSON). Unknown keys anywhere are errors; all
// messages carry a path-qualified location. A missing start defaults to the
// projected-centroid rule (see default_start).
inline ParsedProblem parse_problem(const std::string& text) {
    io_detail::json doc;
    try {
        doc = io_detail::json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError("bad_json", std::string("document: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("bad_type", "document: must be a JSON object");
    io_detail::reject_unknown_keys(doc, {"dimension", "sets", "start", "solver", "outputs"},
                                   "document");

    ParsedProblem out;
    const long long dim = io_detail::as_integer(io_detail::member(doc, "dimension", "document"),
                                                "dimension");
    if (dim < 1 || dim > 64) throw ParseError("bad_value", "dimension: must be in [1, 64]");

    const auto& sets = io_detail::member(doc, "sets", "document");
    if (!sets.is_array() || sets.size() < 2)
        throw ParseError("bad_value", "sets: needs at least 2 entries");
    std::vector<ConvexSet> parsed;
    for (std::size_t i = 0; i < sets.size(); ++i)
        parsed.push_back(io_detail::parse_set(sets[i], "sets[" + std::to_string(i) + "]",
                                              static_cast<int>(dim)));
    try {
        out.problem = make_problem(std::move(parsed));
    } catch (const GeometryError& e) {
        throw ParseError(e.code(), e.what());
    }

    if (doc.contains("start")) {
        const auto& start = doc["start"];
        if (!start.is_array() || start.size() != out.problem.sets.size())
            throw ParseError("bad_value", "start: expected " +
                                              std::to_string(out.problem.sets.size()) + " points");
        for (std::size_t i = 0; i < start.size(); ++i)
            out.start.push_back(io_detail::as_point(start[i], "start[" + std::to_string(i) + "]",
                                                    static_cast<int>(dim)));
        out.start_was_given = true;
    } else {
        out.start = default_start(out.problem);
    }

    if (doc.contains("solver")) {
        const auto& solver = doc["solver"];
        if (!solver.is_object()) throw ParseError("bad_type", "solver: must be an object");
        io_detail::reject_unknown_keys(solver,
                                       {"method", "step_rule", "alpha", "c", "alpha_max", "refresh",
                                        "tolerance", "max_iterations", "aitken"},
                                       "solver");
        if (solver.contains("method")) {
            out.method = io_detail::as_string(solver["method"], "solver.method");
            if (out.method != "psd" && out.method != "nag")
                throw ParseError("bad_value", "solver.method: must be 'psd' or 'nag'");
        }
        out.config.step_rule = io_detail::parse_step_rule(solver, "solver");
        if (out.method == "nag" && out.config.step_rule.kind != StepRule::Kind::Constant)
            throw ParseError("bad_value",
                             "solver.step_rule: method 'nag' supports only a constant step");
        if (solver.contains("tolerance")) {
            out.config.tolerance = io_detail::as_number(solver["tolerance"], "solver.tolerance");
            if (!(out.config.tolerance > 0.0))
                throw ParseError("bad_value", "solver.tolerance: must be > 0");
        }
        if (solver.contains("max_iterations")) {
            out.config.max_iterations =
                io_detail::as_integer(solver["max_iterations"], "solver.max_iterations");
            if (out.config.max_iterations < 1)
                throw ParseError("bad_value", "solver.max_iterations: must be >= 1");
        }
        if (solver.contains("aitken"))
            out.config.aitken = io_detail::as_bool(solver["aitken"], "solver.aitken");
    }

    if (doc.contains("outputs")) {
        const auto& outputs = doc["outputs"];
        if (!outputs.is_object()) throw ParseError("bad_type", "outputs: must be an object");
        io_detail::reject_unknown_keys(outputs, {"trace_csv", "summary_json", "figure_svg"},
                                       "outputs");
        if (outputs.contains("trace_csv"))
            out.outputs.trace_csv = io_detail::as_string(outputs["trace_csv"], "outputs.trace_csv");
        if (outputs.contains("summary_json"))
            out.outputs.summary_json =
                io_detail::as_string(outputs["summary_json"], "outputs.summary_json");
        if (outputs.contains("figure_svg"))
            out.outputs.figure_svg =
                io_detail::as_string(outputs["figure_svg"], "outputs.figure_svg");
    }
    return out;
}

namespace io_detail {

inline json set_to_json(const ConvexSet& set) {
    json j;
    if (const auto* b = std::get_if<Ball>(&set)) {
        j["type"] = "ball";
        j["parameters"] = {{"center", b->center}, {"radius", b->radius}};
    } else if (const auto* bx = std::get_if<AxisBox>(&set)) {
        j["type"] = "axis_box";
        j["parameters"] = {{"lo", bx->lo}, {"hi", bx->hi}};
    } else if (const auto* s = std::get_if<Segment>(&set)) {
        j["type"] = "segment";
        j["parameters"] = {{"p", s->p}, {"q", s->q}};
    } else if (const auto* l = std::get_if<Line>(&set)) {
        j["type"] = "line";
        j["parameters"] = {{"base", l->base}, {"direction", l->direction}};
    } else if (const auto* h = std::get_if<Halfspace>(&set)) {
        j["type"] = "halfspace";
        j["parameters"] = {{"normal", h->normal}, {"offset", h->offset}};
    } else {
        const auto& g = std::get<Polygon2D>(set);
        j["type"] = "polygon";
        j["parameters"] = {{"vertices", g.vertices}};
    }
    return j;
}

}  // namespace io_detail

// Serializes a parsed problem back to a document that parse_problem accepts
// and that reproduces identical domain objects (numbers survive the round
// trip exactly).
inline std::string serialize_problem(const ParsedProblem& parsed) {
    io_detail::json doc;
    doc["dimension"] = parsed.problem.dimension;
    doc["sets"] = io_detail::json::array();
    for (const auto& s : parsed.problem.sets) doc["sets"].push_back(io_detail::set_to_json(s));
    if (parsed.start_was_given) doc["start"] = parsed.start;
    io_detail::json solver;
    solver["method"] = parsed.method;
    switch (parsed.config.step_rule.kind) {
        case StepRule::Kind::Constant:
            solver["step_rule"] = "constant";
            solver["alpha"] = parsed.config.step_rule.alpha;
            break;
        case StepRule::Kind::Diminishing:
            solver["step_rule"] = "diminishing";
            solver["c"] = parsed.config.step_rule.c;
            break;
        case StepRule::Kind::ExactLineSearch:
            solver["step_rule"] = "exact-line-search";
            solver["alpha_max"] = parsed.config.step_rule.alpha_max;
            solver["refresh"] = parsed.config.step_rule.refresh == StepRule::Refresh::Once
                                    ? "once"
                                    : "every-iteration";
            break;
    }
    solver["tolerance"] = parsed.config.tolerance;
    solver["max_iterations"] = parsed.config.max_iterations;
    solver["aitken"] = parsed.config.aitken;
    doc["solver"] = solver;
    if (!parsed.outputs.trace_csv.empty() || !parsed.outputs.summary_json.empty() ||
        !parsed.outputs.figure_svg.empty()) {
        io_detail::json outputs;
        if (!parsed.outputs.trace_csv.empty()) outputs["trace_csv"] = parsed.outputs.trace_csv;
        if (!parsed.outputs.summary_json.empty())
            outputs["summary_json"] = parsed.outputs.summary_json;
        if (!parsed.outputs.figure_svg.empty()) outputs["figure_svg"] = parsed.outputs.figure_svg;
        doc["outputs"] = outputs;
    }
    return doc.dump(2) + "\n";
}

namespace io_detail {

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline const char* coord_label(int j) {
    static const char* xyz[3] = {"x", "y", "z"};
    return j < 3 ? xyz[j] : nullptr;
}

}  // namespace io_detail

// Iteration table as CSV: one row per recorded iterate, 6-decimal values
// (full precision lives in the summary document). The delta column is empty
// on the start row and the ratio column is empty wherever undefined.
inline std::string trace_to_csv(const Problem& problem, const std::vector<IterationRecord>& trace) {
    std::ostringstream os;
    os << "k";
    for (std::size_t i = 0; i < problem.sets.size(); ++i)
        for (int j = 0; j < problem.dimension; ++j) {
            os << ",a" << (i + 1) << "_";
            if (const char* l = io_detail::coord_label(j))
                os << l;
            else
                os << "c" << j;
        }
    os << ",D,delta_D,xi\n";
    for (const auto& row : trace) {
        os << row.k;
        for (const auto& p : row.points)
            for (double v : p) os << "," << io_detail::fixed6(v);
        os << "," << io_detail::fixed6(row.D_k) << ",";
        if (row.k != 0) os << io_detail::fixed6(row.delta_D);
        os << ",";
        if (std::isfinite(row.xi)) os << io_detail::fixed6(row.xi);
        os << "\n";
    }
    return os.str();
}

// Run summary as JSON: full-precision final points and value, termination,
// certificate, and the hypothesis survey.
inline std::string summary_to_json(const Problem& problem, const SolveResult& result,
                                   const std::string& method,
                                   const DiagnosticsReport* diagnostics = nullptr,
                                   const std::pair<double, Configuration>* oracle = nullptr) {
    io_detail::json j;
    j["method"] = method;
    j["value"] = result.value;
    j["final"] = result.final;
    j["iterations"] = result.iterations;
    j["termination"] = to_string(result.termination);
    j["residual"] = result.residual;
    j["warnings"] = result.warnings;
    try {
        const CertifyReport cert = certify(problem, result.final, 1e-5);
        io_detail::json c;
        c["certified"] = cert.certified;
        c["residual"] = cert.residual;
        c["normal_sum_norm"] = cert.normal_sum_norm;
        c["repair_distance"] = cert.repair_distance;
        io_detail::json angles = io_detail::json::array();
        for (const auto& a : cert.bisector_angles)
            angles.push_back({{"incoming", a.incoming}, {"outgoing", a.outgoing}});
        c["incidence_angles"] = angles;
        j["certificate"] = c;
    } catch (const Error& e) {
        j["certificate"] = {{"error", e.what()}};
    }
    if (diagnostics) {
        io_detail::json d;
        d["pairwise_disjoint"] = diagnostics->pairwise_disjoint;
        d["min_pairwise_distance"] = diagnostics->min_pairwise_distance;
        io_detail::json gp = io_detail::json::array();
        for (auto g : diagnostics->general_position) gp.push_back(to_string(g));
        d["general_position"] = gp;
        d["strictly_convex"] = diagnostics->strictly_convex;
        d["bounded"] = diagnostics->bounded;
        d["uniqueness_expected"] = diagnostics->uniqueness_expected;
        d["notes"] = diagnostics->notes;
        j["diagnostics"] = d;
    }
    if (oracle) {
        j["oracle"] = {{"value", oracle->first}, {"config", oracle->second}};
    }
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Figure rendering: deterministic SVG. 2-D problems draw the sets, the
// start configuration, each point's iterate path, and the final chain;
// 3-D problems draw an orthographic projection onto the xy-plane with
// sphere outlines depth-sorted by center z (painter's order).
// ---------------------------------------------------------------------------

namespace io_detail {

struct Canvas {
    double min_x = 0, min_y = 0, scale = 1;
    double width = 0, height = 0;
    static constexpr double pad = 24.0;

    double sx(double x) const { return pad + (x - min_x) * scale; }
    double sy(double y) const { return height - pad - (y - min_y) * scale; }
};

inline std::string f4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

inline void grow(double& lo, double& hi, double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
}

inline void set_bounds_2d(const ConvexSet& set, double& x0, double& x1, double& y0, double& y1,
                          double window) {
    if (const auto* b = std::get_if<Ball>(&set)) {
        grow(x0, x1, b->center[0] - b->radius);
        grow(x0, x1, b->center[0] + b->radius);
        grow(y0, y1, b->center[1] - b->radius);
        grow(y0, y1, b->center[1] + b->radius);
    } else if (const auto* bx = std::get_if<AxisBox>(&set)) {
        grow(x0, x1, bx->lo[0]);
        grow(x0, x1, bx->hi[0]);
        grow(y0, y1, bx->lo[1]);
        grow(y0, y1, bx->hi[1]);
    } else if (const auto* s = std::get_if<Segment>(&set)) {
        grow(x0, x1, s->p[0]);
        grow(x0, x1, s->q[0]);
        grow(y0, y1, s->p[1]);
        grow(y0, y1, s->q[1]);
    } else if (const auto* l = std::get_if<Line>(&set)) {
        for (double t : {-window, window}) {
            grow(x0, x1, l->base[0] + t * l->direction[0]);
            grow(y0, y1, l->base[1] + t * l->direction[1]);
        }
    } else if (const auto* h = std::get_if<Halfspace>(&set)) {
        const Point origin = scaled(h->normal, h->offset);
        for (double t : {-window, window}) {
            grow(x0, x1, origin[0] - t * h->normal[1]);
            grow(y0, y1, origin[1] + t * h->normal[0]);
        }
    } else {
        for (const auto& v : std::get<Polygon2D>(set).vertices) {
            grow(x0, x1, v[0]);
            grow(y0, y1, v[1]);
        }
    }
}

}  // namespace io_detail

inline std::string render_svg(const Problem& problem, const SolveResult& result) {
    if (problem.dimension != 2 && problem.dimension != 3)
        throw Error("unsupported_dimension", "rendering supports dimensions 2 and 3");
    const bool three_d = problem.dimension == 3;
    const double window = diag_detail::sample_window(problem);

    // world bounds over sets (projected for 3-D) and all recorded points
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
    double y0 = x0, y1 = -x0;
    if (!three_d) {
        for (const auto& s : problem.sets) io_detail::set_bounds_2d(s, x0, x1, y0, y1, window);
    } else {
        for (const auto& s : problem.sets) {
            if (const auto* b = std::get_if<Ball>(&s)) {
                io_detail::grow(x0, x1, b->center[0] - b->radius);
                io_detail::grow(x0, x1, b->center[0] + b->radius);
                io_detail::grow(y0, y1, b->center[1] - b->radius);
                io_detail::grow(y0, y1, b->center[1] + b->radius);
            } else if (const auto* l = std::get_if<Line>(&s)) {
                for (double t : {-window, window}) {
                    io_detail::grow(x0, x1, l->base[0] + t * l->direction[0]);
                    io_detail::grow(y0, y1, l->base[1] + t * l->direction[1]);
                }
            } else if (const auto* sg = std::get_if<Segment>(&s)) {
                io_detail::grow(x0, x1, sg->p[0]);
                io_detail::grow(x0, x1, sg->q[0]);
                io_detail::grow(y0, y1, sg->p[1]);
                io_detail::grow(y0, y1, sg->q[1]);
            }
        }
    }
    for (const auto& p : result.final) {
        io_detail::grow(x0, x1, p[0]);
        io_detail::grow(y0, y1, p[1]);
    }
    for (const auto& row : result.trace)
        for (const auto& p : row.points) {
            io_detail::grow(x0, x1, p[0]);
            io_detail::grow(y0, y1, p[1]);
        }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;

    io_detail::Canvas cv;
    const double world_w = x1 - x0, world_h = y1 - y0;
    cv.scale = 520.0 / std::max(world_w, world_h);
    cv.min_x = x0;
    cv.min_y = y0;
    cv.width = world_w * cv.scale + 2 * io_detail::Canvas::pad;
    cv.height = world_h * cv.scale + 2 * io_detail::Canvas::pad;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << io_detail::f4(cv.width)
       << "\" height=\"" << io_detail::f4(cv.height) << "\" viewBox=\"0 0 "
       << io_detail::f4(cv.width) << " " << io_detail::f4(cv.height) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    auto circle = [&](double cx, double cy, double r, const char* style) {
        os << "<circle cx=\"" << io_detail::f4(cv.sx(cx)) << "\" cy=\"" << io_detail::f4(cv.sy(cy))
           << "\" r=\"" << io_detail::f4(r * cv.scale) << "\" " << style << "/>\n";
    };
    auto seg = [&](double ax, double ay, double bx, double by, const char* style) {
        os << "<line x1=\"" << io_detail::f4(cv.sx(ax)) << "\" y1=\"" << io_detail::f4(cv.sy(ay))
           << "\" x2=\"" << io_detail::f4(cv.sx(bx)) << "\" y2=\"" << io_detail::f4(cv.sy(by))
           << "\" " << style << "/>\n";
    };
    static const char* kSetStyle =
        "fill=\"#dbe9ff\" stroke=\"#3a6ea5\" stroke-width=\"1.5\" fill-opacity=\"0.55\"";
    static const char* kLineStyle = "stroke=\"#3a6ea5\" stroke-width=\"1.5\"";

    if (!three_d) {
        for (const auto& s : problem.sets) {
            if (const auto* b = std::get_if<Ball>(&s)) {
                circle(b->center[0], b->center[1], b->radius, kSetStyle);
            } else if (const auto* bx = std::get_if<AxisBox>(&s)) {
                os << "<rect x=\"" << io_detail::f4(cv.sx(bx->lo[0])) << "\" y=\""
                   << io_detail::f4(cv.sy(bx->hi[1])) << "\" width=\""
                   << io_detail::f4((bx->hi[0] - bx->lo[0]) * cv.scale) << "\" height=\""
                   << io_detail::f4((bx->hi[1] - bx->lo[1]) * cv.scale) << "\" " << kSetStyle
                   << "/>\n";
            } else if (const auto* sg = std::get_if<Segment>(&s)) {
                seg(sg->p[0], sg->p[1], sg->q[0], sg->q[1], kLineStyle);
            } else if (const auto* l = std::get_if<Line>(&s)) {
                seg(l->base[0] - window * l->direction[0], l->base[1] - window * l->direction[1],
                    l->base[0] + window * l->direction[0], l->base[1] + window * l->direction[1],
                    kLineStyle);
            } else if (const auto* h = std::get_if<Halfspace>(&s)) {
                const Point origin = scaled(h->normal, h->offset);
                seg(origin[0] - window * h->normal[1], origin[1] + window * h->normal[0],
                    origin[0] + window * h->normal[1], origin[1] - window * h->normal[0],
                    kLineStyle);
            } else {
                const auto& g = std::get<Polygon2D>(s);
                os << "<polygon points=\"";
                for (std::size_t v = 0; v < g.vertices.size(); ++v) {
                    if (v) os << " ";
                    os << io_detail::f4(cv.sx(g.vertices[v][0])) << ","
                       << io_detail::f4(cv.sy(g.vertices[v][1]));
                }
                os << "\" " << kSetStyle << "/>\n";
            }
        }
    } else {
        // painter's order: draw from smallest center z upward
        std::vector<std::size_t> order(problem.sets.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        auto depth = [&](std::size_t i) -> double {
            if (const auto* b = std::get_if<Ball>(&problem.sets[i])) return b->center[2];
            return representative_point(problem.sets[i])[2];
        };
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return depth(a) < depth(b); });
        for (std::size_t i : order) {
            const auto& s = problem.sets[i];
            if (const auto* b = std::get_if<Ball>(&s)) {
                circle(b->center[0], b->center[1], b->radius, kSetStyle);
            } else if (const auto* l = std::get_if<Line>(&s)) {
                seg(l->base[0] - window * l->direction[0], l->base[1] - window * l->direction[1],
                    l->base[0] + window * l->direction[0], l->base[1] + window * l->direction[1],
                    kLineStyle);
            } else if (const auto* sg = std::get_if<Segment>(&s)) {
                seg(sg->p[0], sg->p[1], sg->q[0], sg->q[1], kLineStyle);
            }
        }
    }

    // iterate paths, one polyline per chain point
    if (!result.trace.empty()) {
        for (std::size_t i = 0; i < result.final.size(); ++i) {
            os << "<polyline fill=\"none\" stroke=\"#9aa5b1\" stroke-width=\"0.8\" "
                  "stroke-dasharray=\"3,2\" points=\"";
            for (std::size_t r = 0; r < result.trace.size(); ++r) {
                if (r) os << " ";
                const auto& p = result.trace[r].points[i];
                os << io_detail::f4(cv.sx(p[0])) << "," << io_detail::f4(cv.sy(p[1]));
            }
            os << "\"/>\n";
        }
        for (const auto& p : result.trace.front().points)
            circle(p[0], p[1], 2.5 / cv.scale, "fill=\"#888888\" stroke=\"none\"");
    }

    // final closed chain
    os << "<polygon fill=\"none\" stroke=\"#c43d3d\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < result.final.size(); ++i) {
        if (i) os << " ";
        os << io_detail::f4(cv.sx(result.final[i][0])) << ","
           << io_detail::f4(cv.sy(result.final[i][1]));
    }
    os << "\"/>\n";
    for (const auto& p : result.final)
        circle(p[0], p[1], 3.0 / cv.scale, "fill=\"#c43d3d\" stroke=\"none\"");

    os << "</svg>\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Benchmark runner: every (strategy, tolerance) cell solved independently;
// a failing cell is recorded and skipped, never aborting the rest.
// ---------------------------------------------------------------------------

struct BenchStrategy {
    std::string method = "psd";  // "psd" | "nag"
    StepRule step_rule = StepRule::constant(1.0);
    bool aitken = false;
    long long max_iterations = 2000000;
};

struct BenchCell {
    std::string method;
    std::string alpha;  // step description: a number, "c/k", or "exact"
    double tolerance = 0.0;
    long long iterations = 0;
    double cpu_seconds = 0.0;
    bool failed = false;
    std::string error;
};

namespace io_detail {

inline std::string alpha_label(const BenchStrategy& s) {
    char buf[64];
    switch (s.step_rule.kind) {
        case StepRule::Kind::Constant:
            std::snprintf(buf, sizeof buf, "%g", s.step_rule.alpha);
            return buf;
        case StepRule::Kind::Diminishing:
            if (s.step_rule.c == 1.0) return "1/k";
            std::snprintf(buf, sizeof buf, "%g/k", s.step_rule.c);
            return buf;
        default:
            return "exact";
    }
}

}  // namespace io_detail

inline std::vector<BenchCell> run_benchmark(const Problem& problem, const Configuration& start,
                                            const std::vector<BenchStrategy>& strategies,
                                            const std::vector<double>& tolerances) {
    std::vector<BenchCell> cells;
    for (const auto& strat : strategies)
        for (double tol : tolerances) {
            BenchCell cell;
            cell.method = strat.method + (strat.aitken ? "-aitken" : "");
            cell.alpha = io_detail::alpha_label(strat);
            cell.tolerance = tol;
            const std::clock_t t0 = std::clock();
            try {
                SolveResult res;
                if (strat.method == "nag") {
                    if (strat.step_rule.kind != StepRule::Kind::Constant)
                        throw SolverError("invalid_config", "nag supports only a constant step");
                    res = nag_solve(problem, start, strat.step_rule.alpha, tol,
                                    strat.max_iterations);
                } else {
                    SolverConfig cfg;
                    cfg.step_rule = strat.step_rule;
                    cfg.tolerance = tol;
                    cfg.max_iterations = strat.max_iterations;
                    cfg.aitken = strat.aitken;
                    cfg.record_trace = false;
                    res = psd_solve(problem, start, cfg);
                }
                cell.iterations = res.iterations;
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
            }
            cell.cpu_seconds = static_cast<double>(std::clock() - t0) / CLOCKS_PER_SEC;
            cells.push_back(std::move(cell));
        }
    return cells;
}

inline std::string benchmark_to_csv(const std::vector<BenchCell>& cells) {
    std::ostringstream os;
    os << "method,alpha,tolerance,iterations,cpu_seconds\n";
    for (const auto& c : cells) {
        if (c.failed) continue;
        char tolbuf[64];
        std::snprintf(tolbuf, sizeof tolbuf, "%g", c.tolerance);
        char cpubuf[64];
        std::snprintf(cpubuf, sizeof cpubuf, "%.6f", c.cpu_seconds);
        os << c.method << "," << c.alpha << "," << tolbuf << "," << c.iterations << "," << cpubuf
           << "\n";
    }
    return os.str();
}

// Parses the benchmark grid document: {"strategies": [...], "tolerances": [...]}.
inline std::pair<std::vector<BenchStrategy>, std::vector<double>> parse_benchmark_grid(
    const std::string& text) {
    io_detail::json doc;
    try {
        doc = io_detail::json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError("bad_json", std::string("grid: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("bad_type", "grid: must be a JSON object");
    io_detail::reject_unknown_keys(doc, {"strategies", "tolerances"}, "grid");
    std::vector<BenchStrategy> strategies;
    const auto& strat_list = io_detail::member(doc, "strategies", "grid");
    if (!strat_list.is_array() || strat_list.empty())
        throw ParseError("bad_value", "grid.strategies: needs at least one entry");
    for (std::size_t i = 0; i < strat_list.size(); ++i) {
        const std::string path = "grid.strategies[" + std::to_string(i) + "]";
        const auto& s = strat_list[i];
        if (!s.is_object()) throw ParseError("bad_type", path + ": must be an object");
        io_detail::reject_unknown_keys(
            s, {"method", "step_rule", "alpha", "c", "alpha_max", "refresh", "aitken",
                "max_iterations"},
            path);
        BenchStrategy strat;
        if (s.contains("method")) {
            strat.method = io_detail::as_string(s["method"], path + ".method");
            if (strat.method != "psd" && strat.method != "nag")
                throw ParseError("bad_value", path + ".method: must be 'psd' or 'nag'");
        }
        strat.step_rule = io_detail::parse_step_rule(s, path);
        if (s.contains("aitken")) strat.aitken = io_detail::as_bool(s["aitken"], path + ".aitken");
        if (s.contains("max_iterations"))
            strat.max_iterations = io_detail::as_integer(s["max_iterations"], path + ".max_iterations");
        strategies.push_back(strat);
    }
    std::vector<double> tolerances;
    const auto& tol_list = io_detail::member(doc, "tolerances", "grid");
    if (!tol_list.is_array() || tol_list.empty())
        throw ParseError("bad_value", "grid.tolerances: needs at least one entry");
    for (std::size_t i = 0; i < tol_list.size(); ++i) {
        const double t =
            io_detail::as_number(tol_list[i], "grid.tolerances[" + std::to_string(i) + "]");
        if (!(t > 0.0))
            throw ParseError("bad_value", "grid.tolerances[" + std::to_string(i) + "]: must be > 0");
        tolerances.push_back(t);
    }
    return {strategies, tolerances};
}

}  // namespace waist
