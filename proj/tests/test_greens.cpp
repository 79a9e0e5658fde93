#include <cmath>

#include "doctest.h"
#include "fraclab/frac_operator.hpp"
#include "fraclab/greens.hpp"
#include "fraclab/rng.hpp"

using namespace fraclab;

TEST_CASE("green_solve reproduces the torsion profile") {
    BallDomain dom(1, 1.0);
    double s = 0.5;
    auto grid = build_graded_grid(1.0, 2048, 4.0);
    auto zero = GridFunction::zero(grid);
    auto u0 = green_solve(zero, FracOrder(s), dom);
    CHECK(u0.max_abs() == 0.0);

    auto one = GridFunction::from_function(grid, [](double) { return 1.0; });
    auto u = green_solve(one, FracOrder(s), dom);
    double worst = 0.0;
    for (int i = 0; i < grid->size(); ++i) {
        double x = grid->node(i);
        if (1.0 - std::abs(x) < 0.05) continue;
        double exact = std::sqrt(1.0 - x * x);
        worst = std::max(worst, std::abs(u[i] - exact) / exact);
    }
    CHECK(worst < 0.005);
}

TEST_CASE("green_solve agrees with the Galerkin solver on smooth data") {
    BallDomain dom(1, 1.0);
    double s = 0.6;
    auto grid = build_graded_grid(1.0, 1024, 3.0);
    auto f = GridFunction::from_function(
        grid, [](double x) { return 1.0 + 0.5 * std::cos(2.0 * x); });
    auto ug = green_solve(f, FracOrder(s), dom);
    OperatorMatrix A = assemble_galerkin(grid, FracOrder(s));
    auto ud = solve_dirichlet(A, f);
    Eigen::VectorXd diff = ug.values() - ud.values();
    double rel = lp_norm(GridFunction(grid, diff), 1.0) / lp_norm(ud, 1.0);
    CHECK(rel < 0.01);
}

TEST_CASE("torsion function: center value, positivity, delta^s band") {
    BallDomain dom(1, 1.0);
    auto tr = torsion_function(dom, FracOrder(0.5), 512);
    CHECK(tr.phi0.eval(0.0) == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(tr.phi0.values().minCoeff() > 0.0);
    const GradedGrid& g = tr.phi0.grid();
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        double r = tr.phi0[i] / std::sqrt(g.delta(i));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    CHECK(hi / lo < 10.0);
    CHECK(tr.hopf_fit > 0.0);
    CHECK(tr.hopf_fit == doctest::Approx(lo).epsilon(1e-12));
}

TEST_CASE("phi_delta truncations increase monotonically and dominate phi0") {
    BallDomain dom(1, 1.0);
    double s = 0.5;
    int N = 256;
    auto p1 = phi_delta(dom, FracOrder(s), N, 2.0);
    auto p2 = phi_delta(dom, FracOrder(s), N, 8.0);
    auto p3 = phi_delta(dom, FracOrder(s), N, 64.0);
    double tol = 1e-12 * p3.max_abs();
    CHECK(((p2.values() - p1.values()).minCoeff() >= -tol));
    CHECK(((p3.values() - p2.values()).minCoeff() >= -tol));
    // comparison with constant data: phi_delta >= phi0 / R^s = phi0
    auto tr = torsion_function(dom, FracOrder(s), N);
    auto pd = phi_delta(dom, FracOrder(s), N);
    CHECK(((pd.values() - tr.phi0.values()).minCoeff() >= -1e-10));
}

TEST_CASE("phi_delta obeys the log law on dyadic boundary distances") {
    BallDomain dom(1, 1.0);
    for (double s : {0.25, 0.5, 0.75}) {
        double rlo = 1e300, rhi = 0.0;
        for (int j = 3; j <= 12; ++j) {
            double delta = std::pow(2.0, -j);
            double x = 1.0 - delta;
            double val = phi_delta_value(dom, FracOrder(s), x);
            double envelope = std::pow(delta, s) * (1.0 + std::abs(std::log(delta)));
            double ratio = val / envelope;
            rlo = std::min(rlo, ratio);
            rhi = std::max(rhi, ratio);
        }
        CAPTURE(s);
        CHECK(rlo > 0.0);
        CHECK(rhi / rlo <= 20.0);
    }
}

TEST_CASE("two-sided kernel bounds hold with a modest spread") {
    BallDomain dom(1, 1.0);
    for (double s : {0.25, 0.5, 0.75}) {
        auto rep = verify_kernel_bounds(dom, FracOrder(s), 10000, 2024);
        CAPTURE(s);
        CHECK(rep.all_finite);
        CHECK(rep.lower_c > 0.0);
        CHECK(rep.ratio_spread() < 100.0);
    }
}

TEST_CASE("kernel ratio stays in band as delta(x) -> 0 at fixed separation") {
    BallDomain dom(1, 1.0);
    double s = 0.6;
    GreenKernel K(1, FracOrder(s), 1.0);
    double y = 0.0;
    double rlo = 1e300, rhi = 0.0;
    for (int j = 3; j <= 14; ++j) {
        double x = 1.0 - std::pow(2.0, -j);
        double ratio = K.eval_1d(x, y) / kernel_comparison_expr(dom, s, x, y);
        rlo = std::min(rlo, ratio);
        rhi = std::max(rhi, ratio);
    }
    CHECK(rhi / rlo < 10.0);
}

TEST_CASE("kernel ratio stays in band along the diagonal at fixed delta") {
    BallDomain dom(1, 1.0);
    for (double s : {0.25, 0.5, 0.75}) {
        GreenKernel K(1, FracOrder(s), 1.0);
        double x = 0.3;
        double rlo = 1e300, rhi = 0.0;
        for (int j = 3; j <= 16; ++j) {
            double y = x + std::pow(2.0, -j);
            double ratio = K.eval_1d(x, y) / kernel_comparison_expr(dom, s, x, y);
            rlo = std::min(rlo, ratio);
            rhi = std::max(rhi, ratio);
        }
        CAPTURE(s);
        CHECK(rhi / rlo < 10.0);
    }
}

TEST_CASE("Hopf kernel bound G >= c delta(x)^s delta(y)^s") {
    BallDomain dom(1, 1.0);
    double s = 0.5;
    GreenKernel K(1, FracOrder(s), 1.0);
    SplitMix64 rng(99);
    double cmin = 1e300;
    for (int i = 0; i < 2000; ++i) {
        double x = rng.uniform(-0.9999, 0.9999);
        double y = rng.uniform(-0.9999, 0.9999);
        if (std::abs(x - y) < 1e-9) continue;
        double dx = 1.0 - std::abs(x), dy = 1.0 - std::abs(y);
        cmin = std::min(cmin, K.eval_1d(x, y) / (std::pow(dx, s) * std::pow(dy, s)));
    }
    CHECK(cmin > 0.0);
}

TEST_CASE("green operator is self-adjoint, monotone and data-norm continuous") {
    BallDomain dom(1, 1.0);
    double s = 0.5;
    auto grid = build_graded_grid(1.0, 512, 4.0);
    GreenSolver1D solver(dom, FracOrder(s));
    SplitMix64 rng(7);

    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd fv(grid->size()), pv(grid->size());
        for (int i = 0; i < grid->size(); ++i) {
            fv[i] = rng.uniform(-1.0, 1.0);
            pv[i] = rng.uniform(-1.0, 1.0);
        }
        GridFunction f(grid, fv), p(grid, pv);
        auto Gf = solver.apply(f);
        auto Gp = solver.apply(p);
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < grid->size(); ++i) {
            lhs += Gf[i] * pv[i] * grid->cell_width(i);
            rhs += fv[i] * Gp[i] * grid->cell_width(i);
        }
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
    }

    // monotone: f1 <= f2 => G f1 <= G f2
    Eigen::VectorXd f1(grid->size()), f2(grid->size());
    for (int i = 0; i < grid->size(); ++i) {
        f1[i] = rng.uniform(-1.0, 1.0);
        f2[i] = f1[i] + rng.uniform(0.0, 1.0);
    }
    auto u1 = solver.apply(GridFunction(grid, f1));
    auto u2 = solver.apply(GridFunction(grid, f2));
    CHECK((u2.values() - u1.values()).minCoeff() >= -1e-12);

    // continuity constant of G: L^1(delta^s) -> L^1 stable under refinement
    double prev = -1.0;
    for (int N : {256, 512}) {
        auto g = build_graded_grid(1.0, N, 4.0);
        SplitMix64 r2(11);
        double worst = 0.0;
        for (int t = 0; t < 5; ++t) {
            Eigen::VectorXd fv(g->size());
            for (int i = 0; i < g->size(); ++i) fv[i] = r2.uniform(-1.0, 1.0);
            GridFunction f(g, fv);
            double num = lp_norm(solver.apply(f), 1.0);
            double den = weighted_norm(f, Weight::delta_s(s), 1.0);
            worst = std::max(worst, num / den);
        }
        if (prev > 0.0) CHECK(worst == doctest::Approx(prev).epsilon(0.5));
        prev = worst;
    }
}

TEST_CASE("densities outside the data class are rejected") {
    BallDomain dom(1, 1.0);
    double s = 0.5;
    // admissible: f = delta^{-s/2}
    auto u = green_solve_density([s](double d) { return std::pow(d, -0.5 * s); },
                                 true, FracOrder(s), dom, 128);
    CHECK(u.values().minCoeff() > 0.0);
    // inadmissible: f = delta^{-1-s}
    CHECK_THROWS_AS(green_solve_density(
                        [s](double d) { return std::pow(d, -1.0 - s); }, false,
                        FracOrder(s), dom, 128),
                    DomainError);
}

TEST_CASE("dense storage cap guards the assembly") {
    auto grid = build_graded_grid(1.0, 64, 1.0);
    CHECK_THROWS_AS(assemble_galerkin(grid, FracOrder(0.5), 32), ConfigError);
}

TEST_CASE("radial torsion identity in dimensions 2 and 3") {
    for (int n : {2, 3}) {
        for (double s : {0.5, 0.75}) {
            BallDomain dom(n, 1.0);
            int m = 96;
            std::vector<double> radii(m), vals(m, 1.0);
            for (int i = 0; i < m; ++i) {
                double t = (i + 1.0) / (m + 1.0);
                radii[i] = 1.0 - std::pow(1.0 - t, 2.0); // graded toward r = 1
            }
            RadialProfile f(dom, radii, vals);
            RadialProfile u = green_solve(f, FracOrder(s));
            double lam = torsion_constant(n, FracOrder(s));
            double worst = 0.0;
            for (int i = 0; i < m; ++i) {
                if (1.0 - radii[i] < 0.05) continue;
                double exact = std::pow(1.0 - radii[i] * radii[i], s) / lam;
                worst = std::max(worst, std::abs(u.values[i] - exact) / exact);
            }
            CAPTURE(n);
            CAPTURE(s);
            CHECK(worst < 0.02);
        }
    }
}
