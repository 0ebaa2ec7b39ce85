// Cyclic perimeter, subgradients, and first-order optimality measures.
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "waist/waist.hpp"

using namespace waist;
using Catch::Approx;

namespace {

Configuration rand_config(std::mt19937& rng, int m, int dim, double min_gap = 0.1) {
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (;;) {
        Configuration a(m, Point(dim));
        for (auto& p : a)
            for (auto& v : p) v = u(rng);
        bool ok = true;
        for (int i = 0; i < m; ++i)
            if (distance(a[i], a[(i + 1) % m]) < min_gap) ok = false;
        if (ok) return a;
    }
}

double perimeter_of(const Configuration& a) { return perimeter(a); }

}  // namespace

TEST_CASE("perimeter of a right triangle") {
    const Configuration tri = {{0.0, 0.0}, {3.0, 0.0}, {3.0, 4.0}};
    REQUIRE(perimeter(tri) == 12.0);
}

TEST_CASE("perimeter is translation and scale invariant") {
    std::mt19937 rng(31337);
    std::uniform_real_distribution<double> u(-20.0, 20.0), s(0.1, 50.0);
    for (int t = 0; t < 300; ++t) {
        const int m = 2 + t % 4;
        const int dim = (t % 2) ? 3 : 2;
        const Configuration a = rand_config(rng, m, dim);
        const double base = perimeter(a);

        Point shift(dim);
        for (auto& v : shift) v = u(rng);
        Configuration shifted = a;
        for (auto& p : shifted) p = add(p, shift);
        REQUIRE(perimeter(shifted) == Approx(base).epsilon(1e-12));

        const double k = s(rng);
        Configuration scaled_cfg = a;
        for (auto& p : scaled_cfg) p = scaled(p, k);
        REQUIRE(perimeter(scaled_cfg) == Approx(k * base).epsilon(1e-12));
    }
}

TEST_CASE("subgradient matches central finite differences on smooth configurations") {
    std::mt19937 rng(424242);
    std::uniform_int_distribution<int> pick_m(2, 5);
    const double h = 1e-6;
    for (int t = 0; t < 1000; ++t) {
        const int m = pick_m(rng);
        const int dim = (t % 2) ? 3 : 2;
        Configuration a = rand_config(rng, m, dim, 0.3);
        const SubgradientField g = subgradient(a);
        std::uniform_int_distribution<int> pick_i(0, m - 1), pick_j(0, dim - 1);
        const int i = pick_i(rng), j = pick_j(rng);
        Configuration up = a, dn = a;
        up[i][j] += h;
        dn[i][j] -= h;
        const double fd = (perimeter_of(up) - perimeter_of(dn)) / (2.0 * h);
        REQUIRE(g[i][j] == Approx(fd).margin(1e-5));
    }
}

TEST_CASE("subgradient inequality holds globally") {
    std::mt19937 rng(777);
    for (int t = 0; t < 1000; ++t) {
        const int m = 2 + t % 4;
        const int dim = (t % 2) ? 3 : 2;
        const Configuration x = rand_config(rng, m, dim, 0.2);
        const Configuration y = rand_config(rng, m, dim, 0.0);
        const SubgradientField g = subgradient(x);
        double lin = 0.0;
        for (int i = 0; i < m; ++i) lin += dot(g[i], sub(y[i], x[i]));
        REQUIRE(perimeter(y) >= perimeter(x) + lin - 1e-9);
    }
}

TEST_CASE("subgradient rejects coincident adjacent points") {
    const Configuration bad = {{0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}};
    REQUIRE_THROWS_AS(subgradient(bad), GeometryError);
    try {
        subgradient(bad);
    } catch (const GeometryError& e) {
        REQUIRE(std::string(e.code()) == "nonsmooth_point");
    }
}

TEST_CASE("optimality residual vanishes at a known optimum") {
    const Problem p =
        make_problem({ConvexSet{Ball{{0.0, 0.0}, 1.0}}, ConvexSet{Ball{{5.0, 0.0}, 1.0}}});
    const Configuration opt = {{1.0, 0.0}, {4.0, 0.0}};
    REQUIRE(optimality_residual(p, opt) <= 1e-12);

    // a clearly suboptimal feasible configuration has a large residual
    const Configuration off = {{0.0, 1.0}, {5.0, 1.0}};
    REQUIRE(optimality_residual(p, off) > 0.1);

    // infeasible input is rejected
    const Configuration bad = {{2.5, 0.0}, {4.0, 0.0}};
    REQUIRE_THROWS_AS(optimality_residual(p, bad), GeometryError);
}

TEST_CASE("negated subgradients sum to (numerically) zero") {
    std::mt19937 rng(2025);
    for (int t = 0; t < 300; ++t) {
        const Configuration a = rand_config(rng, 2 + t % 5, (t % 2) ? 3 : 2, 0.2);
        REQUIRE(normal_sum_norm(a) <= 1e-12);
    }
}
