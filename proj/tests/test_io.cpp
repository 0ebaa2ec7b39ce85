// Problem-file parsing, serialization round trips, and output formats.
#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "waist/waist.hpp"

using namespace waist;
using Catch::Approx;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string catalog(const std::string& name) {
    std::ifstream probe("problems/" + name);
    if (probe.good()) return slurp("problems/" + name);
    return slurp("../problems/" + name);
}

bool same_point(const Point& a, const Point& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

bool same_set(const ConvexSet& a, const ConvexSet& b) {
    if (a.index() != b.index()) return false;
    if (const auto* x = std::get_if<Ball>(&a))
        return same_point(x->center, std::get<Ball>(b).center) &&
               x->radius == std::get<Ball>(b).radius;
    if (const auto* x = std::get_if<AxisBox>(&a))
        return same_point(x->lo, std::get<AxisBox>(b).lo) &&
               same_point(x->hi, std::get<AxisBox>(b).hi);
    if (const auto* x = std::get_if<Segment>(&a))
        return same_point(x->p, std::get<Segment>(b).p) &&
               same_point(x->q, std::get<Segment>(b).q);
    if (const auto* x = std::get_if<Line>(&a))
        return same_point(x->base, std::get<Line>(b).base) &&
               same_point(x->direction, std::get<Line>(b).direction);
    if (const auto* x = std::get_if<Halfspace>(&a))
        return same_point(x->normal, std::get<Halfspace>(b).normal) &&
               x->offset == std::get<Halfspace>(b).offset;
    return std::get<Polygon2D>(a).vertices == std::get<Polygon2D>(b).vertices;
}

}  // namespace

TEST_CASE("catalog files parse and round-trip exactly") {
    for (const std::string name :
         {"disc_example.json", "sphere_example.json", "two_balls.json", "three_lines.json",
          "ball_segment_polygon.json", "four_balls.json"}) {
        INFO("file: " << name);
        const ParsedProblem a = parse_problem(catalog(name));
        const ParsedProblem b = parse_problem(serialize_problem(a));
        REQUIRE(a.problem.dimension == b.problem.dimension);
        REQUIRE(a.problem.sets.size() == b.problem.sets.size());
        for (std::size_t i = 0; i < a.problem.sets.size(); ++i)
            REQUIRE(same_set(a.problem.sets[i], b.problem.sets[i]));
        REQUIRE(a.start.size() == b.start.size());
        for (std::size_t i = 0; i < a.start.size(); ++i)
            REQUIRE(same_point(a.start[i], b.start[i]));
        REQUIRE(a.method == b.method);
        REQUIRE(a.config.step_rule.kind == b.config.step_rule.kind);
        REQUIRE(a.config.step_rule.alpha == b.config.step_rule.alpha);
        REQUIRE(a.config.step_rule.c == b.config.step_rule.c);
        REQUIRE(a.config.tolerance == b.config.tolerance);
        REQUIRE(a.config.max_iterations == b.config.max_iterations);
        REQUIRE(a.config.aitken == b.config.aitken);
        REQUIRE(a.outputs.trace_csv == b.outputs.trace_csv);
    }
}

TEST_CASE("missing start defaults to projected centroids") {
    const ParsedProblem parsed = parse_problem(catalog("four_balls.json"));
    REQUIRE_FALSE(parsed.start_was_given);
    const Configuration expect = default_start(parsed.problem);
    REQUIRE(parsed.start.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) REQUIRE(same_point(parsed.start[i], expect[i]));
    for (std::size_t i = 0; i < expect.size(); ++i)
        REQUIRE(contains(parsed.problem.sets[i], parsed.start[i], 1e-9));
}

TEST_CASE("parse errors carry path-qualified messages") {
    SECTION("negative radius") {
        const std::string doc = R"({"dimension":2,"sets":[
            {"type":"ball","parameters":{"center":[0,0],"radius":-1}},
            {"type":"ball","parameters":{"center":[5,0],"radius":1}}]})";
        try {
            parse_problem(doc);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            REQUIRE(std::string(e.what()).find("sets[0].parameters.radius: must be > 0") !=
                    std::string::npos);
        }
    }
    SECTION("unknown keys are listed") {
        const std::string doc = R"({"dimension":2,"sets":[
            {"type":"ball","parameters":{"center":[0,0],"radius":1,"colour":"red"}},
            {"type":"ball","parameters":{"center":[5,0],"radius":1}}]})";
        try {
            parse_problem(doc);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            const std::string msg = e.what();
            REQUIRE(msg.find("sets[0].parameters") != std::string::npos);
            REQUIRE(msg.find("colour") != std::string::npos);
        }
    }
    SECTION("top-level unknown key") {
        REQUIRE_THROWS_AS(parse_problem(R"({"dimension":2,"sets":[],"extra":1})"), ParseError);
    }
    SECTION("dimension mismatch in a point") {
        const std::string doc = R"({"dimension":3,"sets":[
            {"type":"ball","parameters":{"center":[0,0],"radius":1}},
            {"type":"ball","parameters":{"center":[5,0,0],"radius":1}}]})";
        try {
            parse_problem(doc);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            REQUIRE(std::string(e.what()).find("sets[0].parameters.center") != std::string::npos);
        }
    }
    SECTION("wrong start arity") {
        const std::string doc = R"({"dimension":2,"sets":[
            {"type":"ball","parameters":{"center":[0,0],"radius":1}},
            {"type":"ball","parameters":{"center":[5,0],"radius":1}}],
            "start":[[1,0]]})";
        REQUIRE_THROWS_AS(parse_problem(doc), ParseError);
    }
    SECTION("momentum method requires a constant step") {
        const std::string doc = R"({"dimension":2,"sets":[
            {"type":"ball","parameters":{"center":[0,0],"radius":1}},
            {"type":"ball","parameters":{"center":[5,0],"radius":1}}],
            "solver":{"method":"nag","step_rule":"diminishing","c":1.0}})";
        REQUIRE_THROWS_AS(parse_problem(doc), ParseError);
    }
    SECTION("malformed JSON") {
        REQUIRE_THROWS_AS(parse_problem("{"), ParseError);
    }
}

TEST_CASE("trace CSV layout") {
    const ParsedProblem parsed = parse_problem(catalog("disc_example.json"));
    const SolveResult r = psd_solve(parsed.problem, parsed.start, parsed.config);
    const std::string csv = trace_to_csv(parsed.problem, r.trace);

    std::istringstream is(csv);
    std::string line;
    REQUIRE(std::getline(is, line));
    REQUIRE(line == "k,a1_x,a1_y,a2_x,a2_y,a3_x,a3_y,D,delta_D,xi");

    std::vector<std::string> rows;
    while (std::getline(is, line)) rows.push_back(line);
    REQUIRE(static_cast<long long>(rows.size()) == r.iterations);

    // start row: k = 0, empty delta column
    REQUIRE(rows.front().substr(0, 2) == "0,");
    {
        std::size_t last_comma = rows.front().rfind(',');
        std::size_t prev_comma = rows.front().rfind(',', last_comma - 1);
        REQUIRE(last_comma == prev_comma + 1);  // delta_D is empty on the start row
    }
    // last row: xi column empty
    REQUIRE(rows.back().back() == ',');

    // D on the final row agrees with the result value at the printed precision
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", r.value);
    REQUIRE(rows.back().find(buf) != std::string::npos);

    // 6-decimal fixed-point fields everywhere
    REQUIRE(csv.find("1.000000,3.000000,10.000000,4.000000") != std::string::npos);
}

TEST_CASE("summary JSON carries full-precision values") {
    const ParsedProblem parsed = parse_problem(catalog("disc_example.json"));
    const SolveResult r = psd_solve(parsed.problem, parsed.start, parsed.config);
    const DiagnosticsReport diag = diagnose(parsed.problem);
    const std::string js = summary_to_json(parsed.problem, r, parsed.method, &diag);

    const auto doc = nlohmann::json::parse(js);
    REQUIRE(doc["method"] == "psd");
    REQUIRE(doc["value"].get<double>() == r.value);  // exact round trip
    REQUIRE(doc["iterations"].get<long long>() == r.iterations);
    REQUIRE(doc["termination"] == "tolerance_met");
    REQUIRE(doc["final"].size() == 3);
    REQUIRE(doc["final"][0][0].get<double>() == r.final[0][0]);
    REQUIRE(doc["certificate"]["certified"].get<bool>());
    REQUIRE(doc["certificate"]["residual"].get<double>() <= 1e-5);
    REQUIRE(doc["diagnostics"]["pairwise_disjoint"].get<bool>());
    REQUIRE(doc["diagnostics"]["uniqueness_expected"].get<bool>());
}

TEST_CASE("figure rendering is deterministic and dimension-guarded") {
    const ParsedProblem disc = parse_problem(catalog("disc_example.json"));
    const SolveResult r = psd_solve(disc.problem, disc.start, disc.config);
    const std::string svg1 = render_svg(disc.problem, r);
    const std::string svg2 = render_svg(disc.problem, r);
    REQUIRE(svg1 == svg2);
    REQUIRE(svg1.find("<svg") == 0);
    REQUIRE(svg1.find("<circle") != std::string::npos);    // the set outlines
    REQUIRE(svg1.find("<polygon") != std::string::npos);   // the final chain
    REQUIRE(svg1.find("<polyline") != std::string::npos);  // the iterate paths

    const ParsedProblem sphere = parse_problem(catalog("sphere_example.json"));
    const SolveResult rs = psd_solve(sphere.problem, sphere.start, sphere.config);
    REQUIRE_NOTHROW(render_svg(sphere.problem, rs));

    // dimensions above 3 are refused with a clear message
    const Problem p4 = make_problem({ConvexSet{Ball{{0.0, 0.0, 0.0, 0.0}, 1.0}},
                                     ConvexSet{Ball{{5.0, 0.0, 0.0, 0.0}, 1.0}}});
    SolverConfig cfg;
    cfg.step_rule = StepRule::constant(0.5);
    cfg.tolerance = 1e-10;
    const SolveResult r4 = psd_solve(p4, default_start(p4), cfg);
    try {
        render_svg(p4, r4);
        FAIL("expected a rendering error");
    } catch (const Error& e) {
        REQUIRE(std::string(e.what()).find("rendering supports dimensions 2 and 3") !=
                std::string::npos);
    }
}

TEST_CASE("benchmark grid: per-cell isolation and CSV schema") {
    const ParsedProblem parsed = parse_problem(catalog("two_balls.json"));
    std::vector<BenchStrategy> strategies(2);
    strategies[0].method = "psd";
    strategies[0].step_rule = StepRule::constant(0.5);
    strategies[1].method = "nag";
    strategies[1].step_rule = StepRule::diminishing(1.0);  // unsupported combo: must not abort
    const std::vector<double> tols = {1e-8, 1e-10};

    const auto cells = run_benchmark(parsed.problem, parsed.start, strategies, tols);
    REQUIRE(cells.size() == 4);
    REQUIRE_FALSE(cells[0].failed);
    REQUIRE_FALSE(cells[1].failed);
    REQUIRE(cells[2].failed);
    REQUIRE(cells[3].failed);
    REQUIRE(cells[0].iterations > 0);

    const std::string csv = benchmark_to_csv(cells);
    std::istringstream is(csv);
    std::string line;
    REQUIRE(std::getline(is, line));
    REQUIRE(line == "method,alpha,tolerance,iterations,cpu_seconds");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    REQUIRE(rows == 2);  // failed cells are reported separately, not in the table

    const auto [strats, gtols] = parse_benchmark_grid(catalog("bench_grid.json"));
    REQUIRE(strats.size() == 4);
    REQUIRE(gtols.size() == 2);
}
