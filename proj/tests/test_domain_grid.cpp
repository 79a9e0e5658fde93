#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "fraclab/domain_grid.hpp"
#include "fraclab/quadrature.hpp"
#include "fraclab/rng.hpp"

using namespace fraclab;

TEST_CASE("boundary distance clamps outside") {
    BallDomain dom(1, 1.0);
    CHECK(boundary_distance(dom, {0.0, 0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(boundary_distance(dom, {1.0, 0.0, 0.0}) == doctest::Approx(0.0));
    CHECK(boundary_distance(dom, {2.0, 0.0, 0.0}) == doctest::Approx(0.0));
    BallDomain b3(3, 2.0);
    CHECK(boundary_distance(b3, {1.0, 1.0, 1.0}) ==
          doctest::Approx(2.0 - std::sqrt(3.0)));
}

TEST_CASE("graded grid construction") {
    CHECK_THROWS_AS(build_graded_grid(1.0, 4, 2.0), ConfigError);
    CHECK_THROWS_AS(build_graded_grid(1.0, 64, 0.5), ConfigError);

    auto uniform = build_graded_grid(1.0, 15, 1.0);
    for (int i = 0; i + 1 < uniform->size(); ++i)
        CHECK(uniform->node(i + 1) - uniform->node(i) ==
              doctest::Approx(2.0 / 16.0).epsilon(1e-12));

    auto graded = build_graded_grid(1.0, 16, 2.0);
    double smallest = 1e300, largest = 0.0;
    int smallest_at = -1, largest_at = -1;
    for (int i = 0; i < graded->size(); ++i) {
        double w = graded->cell_width(i);
        if (w < smallest) { smallest = w; smallest_at = i; }
        if (w > largest) { largest = w; largest_at = i; }
    }
    CHECK((smallest_at == 0 || smallest_at == graded->size() - 1));
    CHECK(std::abs(graded->node(largest_at)) < 0.5);
}

TEST_CASE("doubling N halves the maximal cell width") {
    for (double q : {1.0, 2.0, 4.0}) {
        auto g1 = build_graded_grid(1.0, 255, q);
        auto g2 = build_graded_grid(1.0, 511, q);
        CHECK(g2->max_cell_width() / g1->max_cell_width() ==
              doctest::Approx(0.5).epsilon(0.02));
    }
}

TEST_CASE("grid function evaluation and exterior zero") {
    auto g = build_graded_grid(1.0, 32, 2.0);
    auto u = GridFunction::from_function(g, [](double x) { return x * x; });
    CHECK(u.eval(g->node(5)) == doctest::Approx(g->node(5) * g->node(5)));
    CHECK(u.eval(1.0) == 0.0);
    CHECK(u.eval(-3.0) == 0.0);
    CHECK(u.eval(2.0) == 0.0);
}

TEST_CASE("weighted norm closed forms") {
    auto g = build_graded_grid(1.0, 512, 3.0);
    auto one = GridFunction::from_function(g, [](double) { return 1.0; });
    for (double s : {0.25, 0.5, 0.75}) {
        // int_{-1}^{1} (1-|x|)^s dx = 2/(s+1)
        double got = weighted_norm(one, Weight::delta_s(s), 1.0);
        CHECK(got == doctest::Approx(2.0 / (s + 1.0)).epsilon(1e-12));
    }
    auto zero = GridFunction::zero(g);
    CHECK(weighted_norm(zero, Weight::delta_s(0.5), 1.0) == 0.0);
}

TEST_CASE("delta^s log weight against adaptive quadrature oracle") {
    auto g = build_graded_grid(1.0, 1024, 4.0);
    auto one = GridFunction::from_function(g, [](double) { return 1.0; });
    double s = 0.5;
    double got = weighted_norm(one, Weight::delta_s_log(s), 1.0);
    double oracle = 2.0 * adaptive_simpson(
                              [s](double d) {
                                  return std::pow(d, s) * (1.0 + std::abs(std::log(d)));
                              },
                              1e-14, 1.0, 1e-12);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("weighted norm properties") {
    auto g = build_graded_grid(1.0, 128, 2.0);
    SplitMix64 rng(3);
    Eigen::VectorXd uv(g->size()), vv(g->size());
    for (int i = 0; i < g->size(); ++i) {
        uv[i] = rng.uniform(-1.0, 1.0);
        vv[i] = rng.uniform(-1.0, 1.0);
    }
    GridFunction u(g, uv), v(g, vv);
    Weight w = Weight::delta_s(0.6);
    for (double alpha : {-2.5, 0.0, 3.25}) {
        GridFunction au(g, (alpha * uv).eval());
        CHECK(weighted_norm(au, w, 1.0) ==
              doctest::Approx(std::abs(alpha) * weighted_norm(u, w, 1.0)).epsilon(1e-12));
    }
    GridFunction upv(g, (uv + vv).eval());
    double lhs = weighted_norm(upv, w, 2.0);
    double rhs = weighted_norm(u, w, 2.0) + weighted_norm(v, w, 2.0);
    CHECK(lhs <= rhs + 1e-12 * rhs);
}

TEST_CASE("uniform-grid convergence of the plain norm is at least second order") {
    auto exact = 2.0 * std::sin(1.0); // int_{-1}^1 cos
    double errs[2];
    int idx = 0;
    for (int N : {256, 512}) {
        auto g = build_graded_grid(1.0, N - 1, 1.0); // odd count keeps midpoints exact
        auto u = GridFunction::from_function(g, [](double x) { return std::cos(x); });
        errs[idx++] = std::abs(lp_norm(u, 1.0) - exact);
    }
    double rate = std::log2(errs[0] / errs[1]);
    CHECK(rate >= 1.9);
}

TEST_CASE("csv round trip") {
    auto g = build_graded_grid(1.5, 64, 2.5);
    auto u = GridFunction::from_function(g, [](double x) { return std::sin(3.0 * x); });
    std::string path = "gridfn_roundtrip_test.csv";
    save_csv(u, path, 0.5);
    double s = 0.0;
    GridFunction v = load_csv(path, &s);
    CHECK(s == 0.5);
    REQUIRE(v.size() == u.size());
    for (int i = 0; i < u.size(); ++i) CHECK(v[i] == doctest::Approx(u[i]).epsilon(1e-15));
    CHECK(v.grid().R() == doctest::Approx(1.5));
    std::remove(path.c_str());
}

TEST_CASE("tabulated weights integrate their interpolant") {
    auto g = build_graded_grid(1.0, 256, 2.0);
    auto tab = GridFunction::from_function(g, [](double x) { return 1.0 + x * x; });
    auto u = GridFunction::from_function(g, [](double x) { return std::cos(x); });
    double got = weighted_norm(u, Weight::phi_1(tab), 1.0);
    double oracle = adaptive_simpson(
        [&](double x) { return std::abs(std::cos(x)) * (1.0 + x * x); }, -1.0, 1.0,
        1e-10);
    CHECK(got == doctest::Approx(oracle).epsilon(2e-3));
    double got2 = weighted_norm(u, Weight::phi_delta(tab), 1.0);
    CHECK(got2 == doctest::Approx(got).epsilon(1e-12));
}

TEST_CASE("custom weights fall back to per-cell quadrature") {
    auto g = build_graded_grid(1.0, 256, 1.0);
    auto one = GridFunction::from_function(g, [](double) { return 1.0; });
    double got = weighted_norm(one, Weight::custom([](double x) { return 2.0 + x; }), 1.0);
    CHECK(got == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("default grading caps at 6") {
    CHECK(default_grading(0.5) == doctest::Approx(4.0));
    CHECK(default_grading(0.25) == doctest::Approx(6.0));
    CHECK(default_grading(0.75) == doctest::Approx(2.0 / 0.75));
}
