// Iterative solver: step rules, acceleration, momentum variant, traces.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "waist/waist.hpp"

using namespace waist;
using Catch::Approx;

namespace {

Problem disc_problem() {
    return make_problem({ConvexSet{Ball{{2.0, 3.0}, 1.0}}, ConvexSet{Ball{{8.0, 4.0}, 2.0}},
                         ConvexSet{Ball{{4.0, 11.0}, 3.0}}});
}
Configuration disc_start() { return {{1.0, 3.0}, {10.0, 4.0}, {1.0, 11.0}}; }

Problem sphere_problem() {
    return make_problem({ConvexSet{Ball{{2.0, 3.0, -1.0}, 2.0}},
                         ConvexSet{Ball{{4.0, -2.0, 1.0}, 2.0}},
                         ConvexSet{Ball{{6.0, 3.0, 2.0}, 2.0}}});
}
Configuration sphere_start() { return {{3.0, 3.0, -1.0}, {5.0, -2.0, 1.0}, {6.0, 4.0, 2.0}}; }

SolverConfig constant_cfg(double alpha, double tol = 1e-15) {
    SolverConfig cfg;
    cfg.step_rule = StepRule::constant(alpha);
    cfg.tolerance = tol;
    return cfg;
}

}  // namespace

TEST_CASE("constant step on the three-disc problem: pinned trajectory") {
    const auto r = psd_solve(disc_problem(), disc_start(), constant_cfg(2.0707749));
    REQUIRE(r.termination == Termination::ToleranceMet);
    REQUIRE(r.iterations == 16);
    REQUIRE(static_cast<long long>(r.trace.size()) == r.iterations);

    // exact double-precision regression pin for the final configuration
    REQUIRE(r.value == 11.935945246599287);
    REQUIRE(r.final[0][0] == 2.7231462607640147);
    REQUIRE(r.final[0][1] == 3.6906949294319622);
    REQUIRE(r.final[1][0] == 6.1404394938693194);
    REQUIRE(r.final[1][1] == 4.7362300754784519);
    REQUIRE(r.final[2][0] == 4.2653279303516012);
    REQUIRE(r.final[2][1] == 8.0117561864239839);

    REQUIRE(r.residual <= 1e-5);
    REQUIRE(r.warnings.empty());
}

TEST_CASE("iteration counts across constant and diminishing steps") {
    const Problem p = disc_problem();
    const Configuration s = disc_start();
    REQUIRE(psd_solve(p, s, constant_cfg(2.07)).iterations == 19);
    REQUIRE(psd_solve(p, s, constant_cfg(0.1)).iterations == 209);
    REQUIRE(psd_solve(p, s, constant_cfg(0.01)).iterations == 1865);

    SolverConfig dim_cfg;
    dim_cfg.step_rule = StepRule::diminishing(1.0);
    dim_cfg.tolerance = 1e-10;
    dim_cfg.max_iterations = 1000000;
    dim_cfg.record_trace = false;
    REQUIRE(psd_solve(p, s, dim_cfg).iterations == 7557);
}

TEST_CASE("three-sphere problem: pinned value and count") {
    const auto r = psd_solve(sphere_problem(), sphere_start(), constant_cfg(1.7432));
    REQUIRE(r.iterations == 65);
    REQUIRE(r.value == 5.8525999613095703);
    REQUIRE(r.final[0][0] == Approx(3.29841).margin(1e-5));
    REQUIRE(r.final[2][2] == Approx(1.08041).margin(1e-5));
}

TEST_CASE("trace bookkeeping invariants") {
    const auto r = psd_solve(disc_problem(), disc_start(), constant_cfg(2.0707749));
    REQUIRE(r.trace.front().k == 0);
    REQUIRE(r.trace.front().delta_D == 0.0);
    REQUIRE(r.trace.front().D_k == perimeter(disc_start()));
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        REQUIRE(r.trace[i].k == static_cast<long long>(i));
        REQUIRE(r.trace[i].D_k == perimeter(r.trace[i].points));
        if (i > 0)
            REQUIRE(r.trace[i].delta_D == std::abs(r.trace[i].D_k - r.trace[i - 1].D_k));
    }
    // convergence-ratio column: eps_{k+1}/eps_k with eps_k the distance of
    // D_k from the final value; undefined on the last row
    REQUIRE(std::isnan(r.trace.back().xi));
    const double d_last = r.trace.back().D_k;
    for (std::size_t i = 0; i + 1 < r.trace.size(); ++i) {
        const double e0 = std::abs(r.trace[i].D_k - d_last);
        const double e1 = std::abs(r.trace[i + 1].D_k - d_last);
        if (e0 != 0.0)
            REQUIRE(r.trace[i].xi == e1 / e0);
        else
            REQUIRE(std::isnan(r.trace[i].xi));
    }
    // final step met the tolerance
    REQUIRE(r.trace.back().delta_D < 1e-15);
}

TEST_CASE("acceleration: fewer iterations, no worse value") {
    const auto plain = psd_solve(disc_problem(), disc_start(), constant_cfg(2.0707749));
    const auto acc = psd_solve_aitken(disc_problem(), disc_start(), constant_cfg(2.0707749));
    REQUIRE(acc.iterations == 13);
    REQUIRE(acc.iterations <= 15);
    REQUIRE(acc.value == Approx(11.935945).margin(1e-4));
    REQUIRE(acc.value <= plain.value + 1e-9);

    const auto acc207 = psd_solve_aitken(disc_problem(), disc_start(), constant_cfg(2.07));
    REQUIRE(acc207.iterations == 12);

    const auto acc_s = psd_solve_aitken(sphere_problem(), sphere_start(), constant_cfg(1.7432));
    const auto plain_s = psd_solve(sphere_problem(), sphere_start(), constant_cfg(1.7432));
    REQUIRE(acc_s.iterations == 23);
    REQUIRE(acc_s.iterations <= 25);
    REQUIRE(acc_s.value == Approx(5.852600).margin(1e-4));
    REQUIRE(acc_s.value <= plain_s.value + 1e-9);
}

TEST_CASE("momentum variant: pinned iteration counts") {
    const Problem p = disc_problem();
    const Configuration s = disc_start();
    REQUIRE(nag_solve(p, s, 2.07, 1e-15, 100000).iterations == 32);
    REQUIRE(nag_solve(p, s, 0.1, 1e-15, 100000).iterations == 271);
    REQUIRE(nag_solve(p, s, 0.01, 1e-15, 100000).iterations == 1812);
    const auto r = nag_solve(p, s, 2.07, 1e-15, 100000);
    REQUIRE(r.value == Approx(11.935945).margin(1e-4));
    REQUIRE(r.termination == Termination::ToleranceMet);
}

TEST_CASE("exact line search: step from the reference start") {
    const Problem p = disc_problem();
    const Configuration s = disc_start();
    const SubgradientField g = subgradient(s);
    SubgradientField dir(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) dir[i] = negated(g[i]);

    const double a0 = exact_line_search(p, s, dir, 1.0);
    REQUIRE(a0 == Approx(3.2470832).margin(1e-3));

    // independent dense-grid cross-check of the scalar minimization
    auto phi = [&](double al) {
        Configuration c = s;
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; j < c[i].size(); ++j) c[i][j] += al * dir[i][j];
        return perimeter(c);
    };
    double grid_min = phi(0.0);
    for (int k = 1; k <= 20000; ++k) grid_min = std::min(grid_min, phi(8.0 * k / 20000.0));
    REQUIRE(phi(a0) <= grid_min + 1e-8);
    REQUIRE(phi(a0) <= phi(0.0));
}

TEST_CASE("line search every iteration: monotone trace") {
    SolverConfig cfg;
    cfg.step_rule = StepRule::exact_line_search(1.0, StepRule::Refresh::EveryIteration);
    cfg.tolerance = 1e-12;
    for (int which = 0; which < 2; ++which) {
        const Problem p = which ? sphere_problem() : disc_problem();
        const Configuration s = which ? sphere_start() : disc_start();
        const auto r = psd_solve(p, s, cfg);
        REQUIRE(r.termination == Termination::ToleranceMet);
        for (std::size_t i = 1; i < r.trace.size(); ++i)
            REQUIRE(r.trace[i].D_k <= r.trace[i - 1].D_k + 1e-12);
        REQUIRE(r.value == Approx(which ? 5.852600 : 11.935945).margin(1e-3));
    }

    // randomized ball problems stay monotone too
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> u(-8.0, 8.0), rr(0.3, 1.2);
    for (int t = 0; t < 5; ++t) {
        std::vector<ConvexSet> sets;
        const int m = 3 + t % 2;
        for (int i = 0; i < m; ++i) {
            Point c = {u(rng), u(rng)};
            c[0] += 20.0 * i;  // keep them far apart => disjoint
            sets.push_back(Ball{c, rr(rng)});
        }
        const Problem p = make_problem(std::move(sets));
        const auto r = psd_solve(p, default_start(p), cfg);
        for (std::size_t i = 1; i < r.trace.size(); ++i)
            REQUIRE(r.trace[i].D_k <= r.trace[i - 1].D_k + 1e-12);
    }
}

TEST_CASE("line search frozen at the start also converges here") {
    SolverConfig cfg;
    cfg.step_rule = StepRule::exact_line_search(1.0, StepRule::Refresh::Once);
    cfg.tolerance = 1e-12;
    const auto r = psd_solve(disc_problem(), disc_start(), cfg);
    REQUIRE(r.termination == Termination::ToleranceMet);
    REQUIRE(r.value == Approx(11.935945).margin(1e-3));
}

TEST_CASE("Aitken transform: exact on geometric-plus-constant sequences") {
    // s_k = limit + A * rho^k, coordinatewise
    const Configuration limit = {{1.0, -2.0}, {3.0, 4.0}};
    const Configuration amp = {{0.7, 0.3}, {-0.5, 1.1}};
    const double rho = 0.6;
    auto at = [&](int k) {
        Configuration s = limit;
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = 0; j < s[i].size(); ++j)
                s[i][j] += amp[i][j] * std::pow(rho, k);
        return s;
    };
    const auto acc = aitken_transform(at(0), at(1), at(2), 1e-12);
    REQUIRE(acc.has_value());
    for (std::size_t i = 0; i < limit.size(); ++i)
        for (std::size_t j = 0; j < limit[i].size(); ++j)
            REQUIRE((*acc)[i][j] == Approx(limit[i][j]).margin(1e-10));

    // constant sequence: every denominator vanishes -> no transform
    const Configuration c0 = {{1.0, 1.0}, {2.0, 2.0}};
    REQUIRE_FALSE(aitken_transform(c0, c0, c0, 1e-12).has_value());

    // mixed: the constant coordinate passes through unchanged
    Configuration m0 = at(0), m1 = at(1), m2 = at(2);
    m0[0][0] = m1[0][0] = m2[0][0] = 42.0;
    const auto mixed = aitken_transform(m0, m1, m2, 1e-12);
    REQUIRE(mixed.has_value());
    REQUIRE((*mixed)[0][0] == 42.0);
    REQUIRE((*mixed)[1][1] == Approx(limit[1][1]).margin(1e-10));
}

TEST_CASE("repeated runs produce bit-identical traces") {
    const auto a = psd_solve(disc_problem(), disc_start(), constant_cfg(2.0707749));
    const auto b = psd_solve(disc_problem(), disc_start(), constant_cfg(2.0707749));
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        REQUIRE(a.trace[i].D_k == b.trace[i].D_k);
        for (std::size_t j = 0; j < a.trace[i].points.size(); ++j)
            for (std::size_t d = 0; d < a.trace[i].points[j].size(); ++d)
                REQUIRE(a.trace[i].points[j][d] == b.trace[i].points[j][d]);
    }
    const auto n1 = nag_solve(disc_problem(), disc_start(), 2.07, 1e-15, 100000);
    const auto n2 = nag_solve(disc_problem(), disc_start(), 2.07, 1e-15, 100000);
    REQUIRE(n1.value == n2.value);
    REQUIRE(n1.iterations == n2.iterations);
}

TEST_CASE("configuration validation and error paths") {
    SolverConfig bad = constant_cfg(2.0);
    bad.tolerance = 0.0;
    REQUIRE_THROWS_AS(psd_solve(disc_problem(), disc_start(), bad), SolverError);

    bad = constant_cfg(-1.0);
    REQUIRE_THROWS_AS(psd_solve(disc_problem(), disc_start(), bad), SolverError);

    bad = constant_cfg(2.0);
    bad.max_iterations = 0;
    REQUIRE_THROWS_AS(psd_solve(disc_problem(), disc_start(), bad), SolverError);

    REQUIRE_THROWS_AS(nag_solve(disc_problem(), disc_start(), -1.0, 1e-12, 100), SolverError);
    REQUIRE_THROWS_AS(nag_solve(disc_problem(), disc_start(), 1.0, 0.0, 100), SolverError);
}

TEST_CASE("iteration cap reached") {
    SolverConfig cfg = constant_cfg(2.0707749);
    cfg.max_iterations = 3;
    const auto r = psd_solve(disc_problem(), disc_start(), cfg);
    REQUIRE(r.termination == Termination::MaxIterations);
    REQUIRE(r.iterations == 4);  // start row + 3 updates
    REQUIRE(to_string(r.termination) == std::string("max_iterations"));
}

TEST_CASE("overflow on unbounded sets raises a typed error with a partial trace") {
    const Problem p = make_problem({ConvexSet{Line{{0.0, 0.0}, {0.0, 1.0}}},
                                    ConvexSet{Line{{5.0, 0.0}, {0.0, 1.0}}}});
    const Configuration s = {{0.0, 0.0}, {5.0, 3.0}};
    SolverConfig cfg = constant_cfg(1e308);
    cfg.tolerance = 1e-12;
    try {
        psd_solve(p, s, cfg);
        FAIL("expected a solver error");
    } catch (const SolverError& e) {
        REQUIRE(std::string(e.code()) == "non_finite");
        REQUIRE_FALSE(e.partial_trace().empty());
    }
}

TEST_CASE("infeasible start is repaired with a warning") {
    const Configuration off = {{4.0, 3.0}, {10.0, 4.0}, {1.0, 11.0}};  // first point off its set
    const auto r = psd_solve(disc_problem(), off, constant_cfg(2.0707749));
    REQUIRE_FALSE(r.warnings.empty());
    REQUIRE(r.value == Approx(11.935945).margin(1e-4));
}

TEST_CASE("overlapping sets produce a warning, not a failure") {
    const Problem p = make_problem(
        {ConvexSet{Ball{{0.0, 0.0}, 2.0}}, ConvexSet{Ball{{1.0, 0.0}, 2.0}},
         ConvexSet{Ball{{0.0, 30.0}, 1.0}}});
    const auto r = psd_solve(p, default_start(p), constant_cfg(0.5, 1e-10));
    bool mentioned = false;
    for (const auto& w : r.warnings)
        if (w.find("disjoint") != std::string::npos) mentioned = true;
    REQUIRE(mentioned);
}
