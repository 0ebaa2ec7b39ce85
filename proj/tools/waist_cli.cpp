// Command-line front end: solve / bench / oracle over JSON problem files.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "waist/waist.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw waist::Error("io_error", path + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw waist::Error("io_error", path + ": cannot open for writing");
    out << content;
    if (!out) throw waist::Error("io_error", path + ": write failed");
}

std::string resolve_out(const std::string& out_dir, const std::string& path) {
    if (out_dir.empty()) return path;
    return (std::filesystem::path(out_dir) / path).string();
}

struct Overrides {
    std::optional<double> tol;
    std::optional<long long> max_iter;
    std::optional<double> alpha;
    std::optional<std::string> step_rule;
    bool aitken = false;
    std::optional<std::string> method;
};

void apply_overrides(waist::ParsedProblem& parsed, const Overrides& ov) {
    using waist::StepRule;
    if (ov.method) parsed.method = *ov.method;
    if (ov.step_rule) {
        if (*ov.step_rule == "constant")
            parsed.config.step_rule = StepRule::constant(parsed.config.step_rule.alpha);
        else if (*ov.step_rule == "diminishing")
            parsed.config.step_rule = StepRule::diminishing(parsed.config.step_rule.c);
        else if (*ov.step_rule == "exact-line-search")
            parsed.config.step_rule = StepRule::exact_line_search(parsed.config.step_rule.alpha_max);
        else
            throw waist::ParseError("bad_value", "--step-rule: unknown rule '" + *ov.step_rule +
                                                     "'");
    }
    if (ov.alpha) {
        switch (parsed.config.step_rule.kind) {
            case StepRule::Kind::Constant:
                parsed.config.step_rule.alpha = *ov.alpha;
                break;
            case StepRule::Kind::Diminishing:
                parsed.config.step_rule.c = *ov.alpha;
                break;
            case StepRule::Kind::ExactLineSearch:
                parsed.config.step_rule.alpha_max = *ov.alpha;
                break;
        }
    }
    if (ov.tol) parsed.config.tolerance = *ov.tol;
    if (ov.max_iter) parsed.config.max_iterations = *ov.max_iter;
    if (ov.aitken) parsed.config.aitken = true;
    if (parsed.method == "nag" && parsed.config.step_rule.kind != StepRule::Kind::Constant)
        throw waist::ParseError("bad_value", "--method: 'nag' supports only a constant step");
}

waist::SolveResult run_solver(const waist::ParsedProblem& parsed) {
    if (parsed.method == "nag")
        return waist::nag_solve(parsed.problem, parsed.start, parsed.config.step_rule.alpha,
                                parsed.config.tolerance, parsed.config.max_iterations);
    return waist::psd_solve(parsed.problem, parsed.start, parsed.config);
}

void emit_outputs(const waist::ParsedProblem& parsed, const waist::SolveResult& result,
                  const std::string& out_dir) {
    if (!parsed.outputs.trace_csv.empty()) {
        const std::string path = resolve_out(out_dir, parsed.outputs.trace_csv);
        write_file(path, waist::trace_to_csv(parsed.problem, result.trace));
        std::cout << "wrote " << path << "\n";
    }
    if (!parsed.outputs.summary_json.empty()) {
        const waist::DiagnosticsReport diag = waist::diagnose(parsed.problem);
        const std::string path = resolve_out(out_dir, parsed.outputs.summary_json);
        write_file(path, waist::summary_to_json(parsed.problem, result, parsed.method, &diag));
        std::cout << "wrote " << path << "\n";
    }
    if (!parsed.outputs.figure_svg.empty()) {
        const std::string path = resolve_out(out_dir, parsed.outputs.figure_svg);
        write_file(path, waist::render_svg(parsed.problem, result));
        std::cout << "wrote " << path << "\n";
    }
}

int cmd_solve(const std::string& file, const Overrides& ov, const std::string& out_dir) {
    waist::ParsedProblem parsed = waist::parse_problem(read_file(file));
    apply_overrides(parsed, ov);
    waist::SolveResult result;
    try {
        result = run_solver(parsed);
    } catch (const waist::SolverError& e) {
        // keep whatever trace exists so the failure can be inspected
        if (!parsed.outputs.trace_csv.empty() && !e.partial_trace().empty()) {
            const std::string path = resolve_out(out_dir, parsed.outputs.trace_csv);
            write_file(path, waist::trace_to_csv(parsed.problem, e.partial_trace()));
            std::cerr << "wrote partial trace to " << path << "\n";
        }
        throw;
    }
    char buf[64];
    std::cout << "method: " << parsed.method << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", result.value);
    std::cout << "value: " << buf << "\n";
    std::cout << "iterations: " << result.iterations << "\n";
    std::cout << "termination: " << waist::to_string(result.termination) << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", result.residual);
    std::cout << "residual: " << buf << "\n";
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    emit_outputs(parsed, result, out_dir);
    return result.termination == waist::Termination::ToleranceMet ? 0 : 2;
}

int cmd_bench(const std::string& file, const std::string& grid_file, const std::string& out_dir) {
    const waist::ParsedProblem parsed = waist::parse_problem(read_file(file));
    const auto [strategies, tolerances] = waist::parse_benchmark_grid(read_file(grid_file));
    const auto cells = waist::run_benchmark(parsed.problem, parsed.start, strategies, tolerances);
    std::size_t ok = 0;
    for (const auto& c : cells) {
        if (c.failed)
            std::cerr << "cell (" << c.method << ", alpha=" << c.alpha << ", tol=" << c.tolerance
                      << ") failed: " << c.error << "\n";
        else
            ++ok;
    }
    const std::string csv = waist::benchmark_to_csv(cells);
    std::cout << csv;
    if (!out_dir.empty()) {
        const std::string path = resolve_out(out_dir, "benchmark.csv");
        write_file(path, csv);
        std::cerr << "wrote " << path << "\n";
    }
    return ok > 0 ? 0 : 1;
}

int cmd_oracle(const std::string& file, long long resolution, long long refine_rounds,
               const std::string& out_dir) {
    waist::ParsedProblem parsed = waist::parse_problem(read_file(file));

    // When general position cannot be verified the optimum may sit in a
    // set's interior, which the boundary grid cannot see; seed the search
    // with a solver run so the reported minimum covers that case too.
    const auto gp = waist::check_general_position(parsed.problem);
    bool all_verified = true;
    for (auto v : gp)
        if (v != waist::GeneralPosition::Verified) all_verified = false;

    std::optional<waist::SolveResult> solved;
    try {
        solved = run_solver(parsed);
    } catch (const std::exception& e) {
        std::cerr << "warning: solver comparison unavailable: " << e.what() << "\n";
    }

    std::pair<double, waist::Configuration> best;
    if (!all_verified && solved) {
        std::cerr << "note: general position not verified; seeding grid search with the solver "
                     "result\n";
        best = waist::brute_force_min(parsed.problem, static_cast<int>(resolution),
                                      static_cast<int>(refine_rounds), solved->final);
    } else {
        best = waist::brute_force_min(parsed.problem, static_cast<int>(resolution),
                                      static_cast<int>(refine_rounds));
    }

    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", best.first);
    std::cout << "oracle value: " << buf << "\n";
    for (std::size_t i = 0; i < best.second.size(); ++i) {
        std::cout << "oracle a" << (i + 1) << ":";
        for (double v : best.second[i]) {
            std::snprintf(buf, sizeof buf, " %.9f", v);
            std::cout << buf;
        }
        std::cout << "\n";
    }
    if (solved) {
        std::snprintf(buf, sizeof buf, "%.17g", solved->value);
        std::cout << "solver value: " << buf << "\n";
        std::snprintf(buf, sizeof buf, "%.3e", std::abs(solved->value - best.first));
        std::cout << "abs difference: " << buf << "\n";
    }
    if (!out_dir.empty() && !parsed.outputs.summary_json.empty() && solved) {
        const std::string path = resolve_out(out_dir, parsed.outputs.summary_json);
        write_file(path,
                   waist::summary_to_json(parsed.problem, *solved, parsed.method, nullptr, &best));
        std::cerr << "wrote " << path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Shortest closed chain through an ordered family of disjoint convex sets:\n"
        "picks one point per set so the closed tour a1 -> a2 -> ... -> am -> a1\n"
        "has minimal total length."};
    app.require_subcommand(1);

    std::string file, grid_file, out_dir;
    Overrides ov;
    double tol = 0, alpha = 0;
    long long max_iter = 0, resolution = 64, refine_rounds = 2;
    std::string step_rule, method;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("file", file, "problem file (JSON)")->required();
        sub->add_option("--out-dir", out_dir, "directory for requested output files");
    };

    CLI::App* solve = app.add_subcommand("solve", "run the iterative solver");
    add_common(solve);
    auto* tol_opt = solve->add_option("--tol", tol, "stopping tolerance on |D_k - D_{k-1}|");
    auto* mi_opt = solve->add_option("--max-iter", max_iter, "iteration cap");
    auto* al_opt = solve->add_option(
        "--alpha", alpha, "step parameter (constant step, diminishing scale, or search cap)");
    auto* sr_opt = solve->add_option("--step-rule", step_rule, "step-size rule")
                       ->check(CLI::IsMember({"constant", "diminishing", "exact-line-search"}));
    auto* ak_flag = solve->add_flag("--aitken", "enable per-point sequence acceleration");
    auto* me_opt = solve->add_option("--method", method, "iteration scheme")
                       ->check(CLI::IsMember({"psd", "nag"}));

    CLI::App* bench = app.add_subcommand("bench", "run a strategy/tolerance grid, emit CSV");
    add_common(bench);
    bench->add_option("--grid", grid_file, "benchmark grid file (JSON)")->required();

    CLI::App* oracle = app.add_subcommand("oracle",
                                          "exhaustive boundary-grid minimum for cross-checking");
    add_common(oracle);
    oracle->add_option("--resolution", resolution, "grid points per boundary parameter")
        ->required();
    oracle->add_option("--refine-rounds", refine_rounds,
                       "local refinement passes after the grid sweep");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            if (*tol_opt) ov.tol = tol;
            if (*mi_opt) ov.max_iter = max_iter;
            if (*al_opt) ov.alpha = alpha;
            if (*sr_opt) ov.step_rule = step_rule;
            if (*ak_flag) ov.aitken = true;
            if (*me_opt) ov.method = method;
            return cmd_solve(file, ov, out_dir);
        }
        if (bench->parsed()) return cmd_bench(file, grid_file, out_dir);
        if (oracle->parsed()) return cmd_oracle(file, resolution, refine_rounds, out_dir);
    } catch (const waist::Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
