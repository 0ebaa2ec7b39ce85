// Projected subgradient solver for the closed-chain perimeter objective:
// synchronous (Jacobi-style) block updates, pluggable step-size rules,
// derivative-free exact line search, per-coordinate Aitken acceleration with
// greedy per-block acceptance, a Nesterov-momentum variant, and full trace
// recording.
//
// Reproducibility: the update loops keep the exact expression shapes listed
// in vec.hpp's header note; iteration counts at tight tolerances are part of
// the test contract, so do not "simplify" arithmetic here.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "waist/convex_set.hpp"
#include "waist/error.hpp"
#include "waist/objective.hpp"
#include "waist/problem.hpp"
#include "waist/vec.hpp"

namespace waist {

struct StepRule {
    enum class Kind { Constant, Diminishing, ExactLineSearch };
    enum class Refresh { Once, EveryIteration };

    Kind kind = Kind::Constant;
    double alpha = 1.0;      // Constant: fixed step
    double c = 1.0;          // Diminishing: alpha_k = c / k, k = 1, 2, ...
    double alpha_max = 1.0;  // ExactLineSearch: initial bracket end
    Refresh refresh = Refresh::Once;

    static StepRule constant(double alpha) {
        StepRule r;
        r.kind = Kind::Constant;
        r.alpha = alpha;
        return r;
    }
    static StepRule diminishing(double c) {
        StepRule r;
        r.kind = Kind::Diminishing;
        r.c = c;
        return r;
    }
    static StepRule exact_line_search(double alpha_max, Refresh refresh = Refresh::Once) {
        StepRule r;
        r.kind = Kind::ExactLineSearch;
        r.alpha_max = alpha_max;
        r.refresh = refresh;
        return r;
    }
};

struct SolverConfig {
    StepRule step_rule = StepRule::constant(1.0);
    double tolerance = 1e-12;  // on |D_k - D_{k-1}|
    long long max_iterations = 100000;
    bool aitken = false;
    bool record_trace = true;
};

struct IterationRecord {
    long long k = 0;  // 0 is the start row
    Configuration points;
    double D_k = 0.0;
    double delta_D = 0.0;  // |D_k - D_{k-1}|, 0 on the start row
    double xi = std::numeric_limits<double>::quiet_NaN();  // eps_{k+1}/eps_k
};

enum class Termination { ToleranceMet, MaxIterations, StalledDenominator };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::ToleranceMet: return "tolerance_met";
        case Termination::MaxIterations: return "max_iterations";
        default: return "stalled_denominator";
    }
}

struct SolveResult {
    Configuration final;
    double value = 0.0;
    long long iterations = 0;  // trace rows, start row included
    Termination termination = Termination::MaxIterations;
    double residual = 0.0;  // first-order optimality residual at `final`
    std::vector<IterationRecord> trace;
    std::vector<std::string> warnings;
};

// Runtime solver failure carrying whatever trace existed at the point of
// failure (useful for post-mortems of non-finite arithmetic).
class SolverError : public Error {
  public:
    SolverError(const std::string& code, const std::string& what,
                std::vector<IterationRecord> partial = {})
        : Error(code, what), partial_trace_(std::move(partial)) {}
    const std::vector<IterationRecord>& partial_trace() const noexcept { return partial_trace_; }

  private:
    std::vector<IterationRecord> partial_trace_;
};

inline void validate(const SolverConfig& cfg) {
    if (!(cfg.tolerance > 0.0)) throw SolverError("invalid_config", "tolerance must be > 0");
    if (cfg.max_iterations < 1) throw SolverError("invalid_config", "max_iterations must be >= 1");
    switch (cfg.step_rule.kind) {
        case StepRule::Kind::Constant:
            if (!(cfg.step_rule.alpha > 0.0))
                throw SolverError("invalid_config", "constant step: alpha must be > 0");
            break;
        case StepRule::Kind::Diminishing:
            if (!(cfg.step_rule.c > 0.0))
                throw SolverError("invalid_config", "diminishing step: c must be > 0");
            break;
        case StepRule::Kind::ExactLineSearch:
            if (!(cfg.step_rule.alpha_max > 0.0))
                throw SolverError("invalid_config", "exact line search: alpha_max must be > 0");
            break;
    }
}

namespace detail {

// Golden-section minimization of f on [lo, hi] down to interval width
// `width`. The iteration cap guarantees termination even when the interval
// endpoints are so large that one ulp exceeds `width` (a wide bracket makes
// the width test unreachable in floating point).
template <class F>
double golden_min(F&& f, double lo, double hi, double width = 1e-10, int max_iters = 300) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < max_iters && (b - a) > width; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Shared 1-D minimization used by every line-search entry point: expand the
// bracket end by doubling while the objective still decreases there, run
// golden section on [0, 2*hi], and never return a point worse than alpha=0.
template <class F>
double line_search_min(F&& phi, double alpha_max) {
    double hi = alpha_max;
    while (phi(2.0 * hi) < phi(hi) && hi < 1152921504606846976.0 /* 2^60 */) hi *= 2.0;
    const double a = golden_min(phi, 0.0, 2.0 * hi);
    return phi(a) <= phi(0.0) ? a : 0.0;
}

inline Configuration step_and_project_boundary(const Problem& problem, const Configuration& pts,
                                               const std::vector<Point>& g, double alpha) {
    Configuration next(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        Point moved(pts[i].size());
        for (std::size_t j = 0; j < pts[i].size(); ++j) moved[j] = pts[i][j] - alpha * g[i][j];
        next[i] = project_boundary(problem.sets[i], moved);
    }
    return next;
}

// Fills the error-ratio column eps_{k+1}/eps_k with eps_k = |D_k - D_last|;
// rows where the ratio is undefined (final row, or eps_k = 0) keep NaN.
inline void fill_xi(std::vector<IterationRecord>& trace) {
    if (trace.size() < 2) return;
    const double d_final = trace.back().D_k;
    for (std::size_t r = 0; r + 1 < trace.size(); ++r) {
        const double eps_k = std::abs(trace[r].D_k - d_final);
        const double eps_n = std::abs(trace[r + 1].D_k - d_final);
        if (eps_k != 0.0) trace[r].xi = eps_n / eps_k;
    }
}

inline void check_finite(const Configuration& pts, double value,
                         const std::vector<IterationRecord>& trace) {
    if (!std::isfinite(value))
        throw SolverError("non_finite", "solver: objective became non-finite", trace);
    for (const auto& p : pts)
        if (!all_finite(p))
            throw SolverError("non_finite", "solver: iterate became non-finite", trace);
}

}  // namespace detail

// Minimizes phi(alpha) = perimeter(config + alpha * direction) over
// alpha >= 0 along the joint (all blocks stacked) direction, using
// bracket-doubling golden-section search to interval width 1e-10. The
// caller passes the descent direction (normally the negated subgradient).
// Guarantees phi(result) <= phi(0).
inline double exact_line_search(const Problem& problem, const Configuration& config,
                                const SubgradientField& direction, double alpha_max) {
    require_configuration(problem, config);
    if (!(alpha_max > 0.0))
        throw SolverError("invalid_config", "exact_line_search: alpha_max must be > 0");
    if (direction.size() != config.size())
        throw SolverError("invalid_config", "exact_line_search: direction/config size mismatch");
    auto phi = [&](double al) {
        Configuration moved(config.size());
        for (std::size_t i = 0; i < config.size(); ++i) {
            Point p(config[i].size());
            for (std::size_t j = 0; j < config[i].size(); ++j)
                p[j] = config[i][j] + al * direction[i][j];
            moved[i] = std::move(p);
        }
        const double v = perimeter(moved);
        if (!std::isfinite(v))
            throw SolverError("non_finite", "exact_line_search: objective became non-finite");
        return v;
    };
    return detail::line_search_min(phi, alpha_max);
}

// Per-coordinate Aitken delta-squared transform of three consecutive
// iterates. Coordinates whose second difference falls below `guard` pass
// through from s2 unchanged; if every coordinate was guarded the sequence
// has stalled and nullopt is returned.
inline std::optional<Configuration> aitken_transform(const Configuration& s0,
                                                     const Configuration& s1,
                                                     const Configuration& s2, double guard) {
    if (!(guard > 0.0)) throw SolverError("invalid_config", "aitken_transform: guard must be > 0");
    if (s0.size() != s1.size() || s1.size() != s2.size())
        throw SolverError("invalid_config", "aitken_transform: configuration sizes differ");
    Configuration out = s2;
    std::size_t total = 0, guarded = 0;
    for (std::size_t i = 0; i < s2.size(); ++i) {
        if (s0[i].size() != s2[i].size() || s1[i].size() != s2[i].size())
            throw SolverError("invalid_config", "aitken_transform: point dimensions differ");
        for (std::size_t j = 0; j < s2[i].size(); ++j) {
            ++total;
            const double den = s2[i][j] - 2.0 * s1[i][j] + s0[i][j];
            if (std::abs(den) > guard) {
                const double diff = s1[i][j] - s0[i][j];
                out[i][j] = s0[i][j] - diff * diff / den;
            } else {
                ++guarded;
            }
        }
    }
    if (guarded == total) return std::nullopt;
    return out;
}

namespace detail {

// Block-level Aitken helper for the solver's greedy acceptance loop; same
// arithmetic as aitken_transform restricted to one point.
inline Point aitken_point(const Point& s0, const Point& s1, const Point& s2, double guard,
                          bool* any_unguarded) {
    Point out = s2;
    for (std::size_t j = 0; j < s2.size(); ++j) {
        const double den = s2[j] - 2.0 * s1[j] + s0[j];
        if (std::abs(den) > guard) {
            const double diff = s1[j] - s0[j];
            out[j] = s0[j] - diff * diff / den;
            *any_unguarded = true;
        }
    }
    return out;
}

}  // namespace detail

// Shared preamble for the iterative methods: validate shapes, project any
// infeasible start points onto their sets (Euclidean projection leaves
// feasible points untouched bit-for-bit), and warn about non-disjoint pairs.
namespace detail {

inline Configuration prepare_start(const Problem& problem, const Configuration& start,
                                   std::vector<std::string>* warnings) {
    require_configuration(problem, start);
    Configuration repaired(start.size());
    for (std::size_t i = 0; i < start.size(); ++i) {
        repaired[i] = project(problem.sets[i], start[i]);
        if (warnings && !contains(problem.sets[i], start[i]))
            warnings->push_back("start[" + std::to_string(i) +
                                "] was infeasible and has been projected onto its set");
    }
    return repaired;
}

inline void warn_if_not_disjoint(const Problem& problem, std::vector<std::string>* warnings) {
    if (!warnings) return;
    for (std::size_t i = 0; i < problem.sets.size(); ++i)
        for (std::size_t k = i + 1; k < problem.sets.size(); ++k) {
            const double d = set_distance(problem.sets[i], problem.sets[k]).dist;
            if (!(d > 1e-12))
                warnings->push_back("sets " + std::to_string(i) + " and " + std::to_string(k) +
                                    " are not disjoint (distance " + std::to_string(d) +
                                    "); optima may touch and uniqueness arguments fail");
        }
}

}  // namespace detail

// Projected subgradient descent. All blocks are updated synchronously from
// the k-th iterate (the whole subgradient field is evaluated first, then
// every block moves and is projected). Iterates are projected onto set
// boundaries, where optimal configurations of disjoint-set problems live.
// Stops when |D_{k} - D_{k-1}| < cfg.tolerance or at cfg.max_iterations.
// With cfg.aitken, every iteration from the second update onward builds a
// per-coordinate delta-squared candidate from the last three iterates and
// accepts it block-by-block, keeping each replacement only if the objective
// strictly decreases.
inline SolveResult psd_solve(const Problem& problem, const Configuration& start,
                             const SolverConfig& cfg) {
    validate(cfg);
    SolveResult result;
    Configuration pts = detail::prepare_start(problem, start, &result.warnings);
    detail::warn_if_not_disjoint(problem, &result.warnings);

    double d_prev = perimeter(pts);
    long long rows = 1;
    std::vector<IterationRecord> trace;
    if (cfg.record_trace) trace.push_back({0, pts, d_prev, 0.0, std::numeric_limits<double>::quiet_NaN()});

    // ExactLineSearch(Once): the step is chosen at the start configuration
    // along the unprojected joint direction and then frozen.
    double frozen_alpha = 0.0;
    if (cfg.step_rule.kind == StepRule::Kind::ExactLineSearch &&
        cfg.step_rule.refresh == StepRule::Refresh::Once) {
        SubgradientField g0;
        try {
            g0 = subgradient(pts);
        } catch (const GeometryError& e) {
            throw SolverError(e.code(), e.what(), trace);
        }
        SubgradientField dir(g0.size());
        for (std::size_t i = 0; i < g0.size(); ++i) dir[i] = negated(g0[i]);
        frozen_alpha = exact_line_search(problem, pts, dir, cfg.step_rule.alpha_max);
    }

    // History of the last two accepted configurations, for acceleration.
    Configuration hist0, hist1 = pts;
    bool have_two = false;
    bool last_transform_all_guarded = false;
    constexpr double kAitkenGuard = 1e-12;

    Termination termination = Termination::MaxIterations;
    double d_n = d_prev;
    for (long long k = 1; k <= cfg.max_iterations; ++k) {
        SubgradientField g;
        try {
            g = subgradient(pts);
        } catch (const GeometryError& e) {
            throw SolverError(e.code(), e.what(), trace);
        }

        double alpha = 0.0;
        switch (cfg.step_rule.kind) {
            case StepRule::Kind::Constant:
                alpha = cfg.step_rule.alpha;
                break;
            case StepRule::Kind::Diminishing:
                alpha = cfg.step_rule.c / static_cast<double>(k);
                break;
            case StepRule::Kind::ExactLineSearch:
                if (cfg.step_rule.refresh == StepRule::Refresh::Once) {
                    alpha = frozen_alpha;
                } else {
                    // Every iteration: minimize the objective *after* the
                    // boundary projection. Because boundary points are fixed
                    // points of the projection, alpha = 0 reproduces the
                    // current iterate, so the safeguarded minimum can never
                    // increase the objective: the trace is monotone.
                    auto phi = [&](double al) {
                        return perimeter(detail::step_and_project_boundary(problem, pts, g, al));
                    };
                    alpha = detail::line_search_min(phi, cfg.step_rule.alpha_max);
                }
                break;
        }

        Configuration cand = detail::step_and_project_boundary(problem, pts, g, alpha);

        if (cfg.aitken && have_two) {
            Configuration cur = cand;
            double d_cur = perimeter(cur);
            bool any_unguarded = false;
            for (std::size_t i = 0; i < cand.size(); ++i) {
                const Point acc =
                    detail::aitken_point(hist0[i], hist1[i], cand[i], kAitkenGuard, &any_unguarded);
                const Point accp = project_boundary(problem.sets[i], acc);
                Configuration trial = cur;
                trial[i] = accp;
                const double d_trial = perimeter(trial);
                if (d_trial < d_cur) {
                    cur = std::move(trial);
                    d_cur = d_trial;
                }
            }
            last_transform_all_guarded = !any_unguarded;
            cand = std::move(cur);
        }

        pts = std::move(cand);
        if (cfg.aitken) {
            hist0 = std::move(hist1);
            hist1 = pts;
            have_two = true;
        }

        d_n = perimeter(pts);
        ++rows;
        const double delta = std::abs(d_n - d_prev);
        if (cfg.record_trace) trace.push_back({k, pts, d_n, delta, std::numeric_limits<double>::quiet_NaN()});
        detail::check_finite(pts, d_n, trace);
        if (delta < cfg.tolerance) {
            termination = Termination::ToleranceMet;
            break;
        }
        d_prev = d_n;
    }

    if (termination == Termination::MaxIterations && cfg.aitken && last_transform_all_guarded)
        termination = Termination::StalledDenominator;

    detail::fill_xi(trace);
    result.final = pts;
    result.value = d_n;
    result.iterations = rows;
    result.termination = termination;
    result.residual = optimality_residual(problem, pts);
    result.trace = std::move(trace);
    return result;
}

// psd_solve with acceleration forced on.
inline SolveResult psd_solve_aitken(const Problem& problem, const Configuration& start,
                                    SolverConfig cfg) {
    cfg.aitken = true;
    return psd_solve(problem, start, cfg);
}

// Nesterov-momentum variant: extrapolates with the classical parameter
// sequence t_{k+1} = (1 + sqrt(1 + 4 t_k^2))/2 from t_1 = 1, takes the
// subgradient step at the extrapolated point, and projects each block
// (Euclidean projection). Same stopping rule and trace conventions as
// psd_solve.
inline SolveResult nag_solve(const Problem& problem, const Configuration& start, double alpha,
                             double tol, long long max_iter) {
    if (!(alpha > 0.0)) throw SolverError("invalid_config", "nag_solve: alpha must be > 0");
    if (!(tol > 0.0)) throw SolverError("invalid_config", "nag_solve: tol must be > 0");
    if (max_iter < 1) throw SolverError("invalid_config", "nag_solve: max_iter must be >= 1");

    SolveResult result;
    Configuration x = detail::prepare_start(problem, start, &result.warnings);
    Configuration x_prev = x;
    double t = 1.0;

    double d_prev = perimeter(x);
    long long rows = 1;
    std::vector<IterationRecord> trace;
    trace.push_back({0, x, d_prev, 0.0, std::numeric_limits<double>::quiet_NaN()});

    Termination termination = Termination::MaxIterations;
    double d_n = d_prev;
    for (long long k = 1; k <= max_iter; ++k) {
        const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
        const double beta = (t - 1.0) / t_next;
        Configuration y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            Point yi(x[i].size());
            for (std::size_t j = 0; j < x[i].size(); ++j)
                yi[j] = x[i][j] + beta * (x[i][j] - x_prev[i][j]);
            y[i] = std::move(yi);
        }
        SubgradientField g;
        try {
            g = subgradient(y);
        } catch (const GeometryError& e) {
            throw SolverError(e.code(), e.what(), trace);
        }
        Configuration x_next(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            Point moved(y[i].size());
            for (std::size_t j = 0; j < y[i].size(); ++j) moved[j] = y[i][j] - alpha * g[i][j];
            x_next[i] = project(problem.sets[i], moved);
        }
        x_prev = std::move(x);
        x = std::move(x_next);
        t = t_next;

        d_n = perimeter(x);
        ++rows;
        const double delta = std::abs(d_n - d_prev);
        trace.push_back({k, x, d_n, delta, std::numeric_limits<double>::quiet_NaN()});
        detail::check_finite(x, d_n, trace);
        if (delta < tol) {
            termination = Termination::ToleranceMet;
            break;
        }
        d_prev = d_n;
    }

    detail::fill_xi(trace);
    result.final = x;
    result.value = d_n;
    result.iterations = rows;
    result.termination = termination;
    result.residual = optimality_residual(problem, result.final);
    result.trace = std::move(trace);
    return result;
}

}  // namespace waist
