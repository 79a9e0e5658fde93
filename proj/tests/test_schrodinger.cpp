#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fraclab/schrodinger.hpp"
#include "fraclab/rng.hpp"

using namespace fraclab;

namespace {

GridFunction random_fn(GridPtr g, SplitMix64& rng, double lo, double hi) {
    Eigen::VectorXd v(g->size());
    for (int i = 0; i < g->size(); ++i) v[i] = rng.uniform(lo, hi);
    return GridFunction(g, std::move(v));
}

} // namespace

TEST_CASE("potential kinds and grammar") {
    BallDomain dom(1, 1.0);
    auto pw = Potential::power_singular(2.0, 1.0);
    CHECK(pw.eval(0.5, 0.5) == doctest::Approx(4.0));
    CHECK_THROWS_AS(Potential::power_singular(-1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(Potential::poschl_teller(1.0, 1.0, 0.5, 2.0), ConfigError);
    auto pt = Potential::poschl_teller(2.0, 1.0, 2.0, 0.0);
    CHECK(pt.eval(0.5, 0.5) ==
          doctest::Approx(0.5 * 2.0 * 2.0 / (std::sin(0.5) * std::sin(0.5))));
    CHECK(pt.eval(0.5, 0.5) >= 0.0);

    auto well = Potential::infinite_well(Potential::zero());
    CHECK(well.eval(0.5, 0.5) == 0.0);
    CHECK(std::isinf(well.eval(2.0, 0.0)));

    CHECK(parse_potential("power 2 1").singular_coeff() == 2.0);
    CHECK(parse_potential("zero").kind() == Potential::Kind::zero);
    CHECK(parse_potential("well power 1 0.5").kind() == Potential::Kind::infinite_well);
    CHECK_THROWS_AS(parse_potential("nonsense 1"), ConfigError);
    CHECK_THROWS_AS(parse_potential("bounded nosuch"), ConfigError);
}

TEST_CASE("zero potential reduces to the dirichlet solve") {
    auto grid = build_graded_grid(1.0, 128, 2.0);
    OperatorMatrix A = assemble_galerkin(grid, FracOrder(0.5));
    auto f = GridFunction::from_function(grid, [](double x) { return 0.5 + x * x; });
    auto u_t = solve_truncated(Potential::zero(), f, 4.0, 1024.0, A);
    auto u_d = solve_dirichlet(A, f);
    CHECK((u_t.values() - u_d.values()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("truncation monotone in k and in m") {
    auto grid = build_graded_grid(1.0, 128, 2.0);
    OperatorMatrix A = assemble_galerkin(grid, FracOrder(0.5));
    auto f = GridFunction::from_function(grid, [](double x) { return 2.0 + std::cos(x); });
    Potential V = Potential::power_singular(1.0, 1.0);
    double tol = 1e-12;

    auto uk1 = solve_truncated(V, f, 2.0, 1e6, A);
    auto uk2 = solve_truncated(V, f, 16.0, 1e6, A);
    CHECK(((uk1.values() - uk2.values()).minCoeff() >= -tol)); // u_{k2} <= u_{k1}

    auto um1 = solve_truncated(V, f, 1e6, 1.0, A);
    auto um2 = solve_truncated(V, f, 1e6, 2.5, A);
    CHECK(((um2.values() - um1.values()).minCoeff() >= -tol)); // u_{m1} <= u_{m2}
}

TEST_CASE("solve: zero data, convergence flags, history") {
    auto grid = build_graded_grid(1.0, 128, 2.0);
    OperatorMatrix A = assemble_galerkin(grid, FracOrder(0.5));
    Potential V = Potential::power_singular(1.0, 1.0);
    auto rep0 = solve(V, GridFunction::zero(grid), A);
    CHECK(rep0.u.max_abs() == 0.0);
    CHECK(rep0.converged);

    auto one = GridFunction::from_function(grid, [](double) { return 1.0; });
    auto rep = solve(V, one, A);
    CHECK(rep.converged);
    CHECK(rep.positive);
    CHECK(rep.history.size() >= 2);
}

TEST_CASE("bounded potential: trace-pair constants stay at one") {
    auto grid = build_graded_grid(1.0, 256, 4.0);
    OperatorMatrix A = assemble_galerkin(grid, FracOrder(0.5));
    auto one = GridFunction::from_function(grid, [](double) { return 1.0; });
    Potential V = Potential::bounded([](double x) { return 1.0 + x * x; }, "quad");
    auto rep = solve(V, one, A);
    CHECK(rep.converged);
    CHECK(rep.c_u_over_deltas <= 1.0 + 0.02);
    CHECK(rep.c_Vu_phidelta <= 1.0 + 0.02);
    CHECK(rep.c_u_over_deltas > 0.0);
}

TEST_CASE("super-singular potential keeps u/delta^s integrable") {
    double s = 0.5, eps = 0.25;
    double gamma = gamma_beta(GammaBetaQuery(1, FracOrder(s), s + eps));
    Potential V = Potential::power_singular(2.0 * std::abs(gamma), 2.0 * s);
    auto grid = build_graded_grid(1.0, 256, 4.0);
    OperatorMatrix A = assemble_galerkin(grid, FracOrder(s));
    auto one = GridFunction::from_function(grid, [](double) { return 1.0; });
    auto rep = solve(V, one, A);
    CHECK(rep.converged);
    CHECK(rep.u_over_delta_finite);
    CHECK(rep.positive);
}

TEST_CASE("L2 and energy estimates hold with refinement-stable constants") {
    double s = 0.6;
    Potential V = Potential::power_singular(1.0, 2.0 * s);
    double prev_c2 = -1.0, prev_ce = -1.0;
    for (int N : {256, 512}) {
        auto grid = build_graded_grid(1.0, N, 3.0);
        OperatorMatrix A = assemble_galerkin(grid, FracOrder(s));
        auto f = GridFunction::from_function(grid,
                                             [](double x) { return 1.0 + std::sin(2.0 * x); });
        auto rep = solve(V, f, A);
        double f2 = lp_norm(f, 2.0);
        double c2 = rep.norms.u_L2 / f2;
        double ce = rep.norms.energy / (f2 * f2);
        CHECK(c2 > 0.0);
        CHECK(ce > 0.0);
        if (prev_c2 > 0.0) {
            CHECK(c2 == doctest::Approx(prev_c2).epsilon(0.25));
            CHECK(ce == doctest::Approx(prev_ce).epsilon(0.25));
        }
        prev_c2 = c2;
        prev_ce = ce;
    }
}

TEST_CASE("solution monotone in V and dominated by the green solution") {
    auto grid = build_graded_grid(1.0, 128, 2.0);
    OperatorMatrix A = assemble_galerkin(grid, FracOrder(0.6));
    auto f = GridFunction::from_function(grid, [](double x) { return 1.0 + 0.3 * x; });
    Potential Va = Potential::bounded([](double) { return 0.5; }, "half");
    Potential Vb = Potential::bounded([](double x) { return 0.5 + x * x; }, "more");
    auto ua = solve(Va, f, A).u;
    auto ub = solve(Vb, f, A).u;
    CHECK(((ua.values() - ub.values()).minCoeff() >= -1e-12));
    auto u0 = solve_dirichlet(A, f);
    CHECK(((u0.values() - ua.values()).minCoeff() >= -1e-12));
}

TEST_CASE("split scheme agrees with the direct signed solve") {
    auto grid = build_graded_grid(1.0, 128, 2.0);
    OperatorMatrix A = assemble_galerkin(grid, FracOrder(0.5));
    auto f = GridFunction::from_function(grid, [](double x) { return std::sin(3.0 * x); });
    Potential V = Potential::bounded([](double x) { return 1.0 + 0.5 * std::cos(x); }, "c");
    auto u_direct = solve_direct(V, f, A);
    auto rep = solve(V, f, A, 1e-12);
    CHECK(rep.converged);
    double scale = u_direct.max_abs();
    CHECK((rep.u.values() - u_direct.values()).cwiseAbs().maxCoeff() < 1e-10 * scale);
}

TEST_CASE("very weak residual: discrete battery is exact, residual shrinks") {
    auto grid = build_graded_grid(1.0, 256, 4.0);
    OperatorMatrix A = assemble_galerkin(grid, FracOrder(0.5));
    auto f = GridFunction::from_function(grid, [](double x) { return 1.0 + 0.2 * x; });
    Potential V = Potential::power_singular(1.0, 0.5);
    auto rep = solve(V, f, A, 1e-13);
    TestBattery bd = battery_discrete(A);
    // the discrete solution satisfies the discrete dual identity exactly
    CHECK(very_weak_residual(rep, V, f, bd) < 1e-10);

    // continuum battery: residual is discretization-sized and shrinks
    BallDomain dom(1, 1.0);
    double res_prev = -1.0;
    for (int N : {128, 256, 512}) {
        auto g = build_graded_grid(1.0, N, 4.0);
        OperatorMatrix An = assemble_galerkin(g, FracOrder(0.5));
        auto fn = GridFunction::from_function(g, [](double x) { return 1.0 + 0.2 * x; });
        auto repn = solve(V, fn, An, 1e-13);
        TestBattery bg = battery_green(dom, FracOrder(0.5), g);
        double res = very_weak_residual(repn, V, fn, bg);
        if (res_prev > 0.0) CHECK(res < res_prev);
        res_prev = res;
    }
    CHECK(res_prev < 1e-4);
}

TEST_CASE("very weak residual small for the zero-potential cross check") {
    BallDomain dom(1, 1.0);
    auto grid = build_graded_grid(1.0, 1024, 4.0);
    OperatorMatrix A = assemble_galerkin(grid, FracOrder(0.5));
    auto f = GridFunction::from_function(grid, [](double x) { return 1.0 - 0.4 * x * x; });
    auto rep = solve(Potential::zero(), f, A, 1e-13);
    TestBattery bg = battery_green(dom, FracOrder(0.5), grid);
    CHECK(very_weak_residual(rep, Potential::zero(), f, bg) < 1e-5);
}

TEST_CASE("kato margins") {
    auto grid = build_graded_grid(1.0, 256, 1.0);
    OperatorMatrix A = assemble_galerkin(grid, FracOrder(0.5));
    TestBattery b = battery_discrete(A);

    // nonnegative solution: both variants collapse to equalities
    auto g_pos = GridFunction::from_function(grid, [](double x) { return 1.0 + 0.5 * x; });
    auto u_pos = solve_dirichlet(A, g_pos);
    auto m0 = kato_margin(u_pos, g_pos, b);
    CHECK(std::abs(m0.sign_margin) <= 1e-10 * m0.scale);

    // sign-changing data keeps the margins nonnegative up to roundoff
    SplitMix64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        auto g = random_fn(grid, rng, -1.0, 1.0);
        auto u = solve_dirichlet(A, g);
        auto m = kato_margin(u, g, b);
        CHECK(m.sign_margin >= -1e-8 * m.scale);
        CHECK(m.sign_plus_margin >= -1e-8 * m.scale);
    }

    // uniqueness corollary: identical runs agree
    Potential V = Potential::power_singular(1.0, 1.0);
    auto f = GridFunction::from_function(grid, [](double x) { return 1.0 + x; });
    auto r1 = solve(V, f, A);
    auto r2 = solve(V, f, A);
    Eigen::VectorXd diff = r1.u.values() - r2.u.values();
    CHECK(lp_norm(GridFunction(grid, std::move(diff)), 1.0) <= 1e-10);
}

TEST_CASE("resolvent contraction margins across lambdas, weights, potentials") {
    auto grid = build_graded_grid(1.0, 192, 1.0);
    OperatorMatrix A = assemble_galerkin(grid, FracOrder(0.5));
    Eigenpair e = eigenpair(A);
    Weight wone = Weight::one();
    Weight wphi = Weight::phi_1(e.phi1);
    SplitMix64 rng(77);

    auto fa = random_fn(grid, rng, 0.0, 1.0);
    auto fb = GridFunction(grid, (fa.values() * 0.7).eval());
    auto same = resolvent_contraction_margin(1.0, fa, fa, Potential::zero(), wone, A);
    CHECK(std::abs(same.positive_part) <= 1e-12 * same.scale);

    std::vector<Potential> pots;
    pots.push_back(Potential::zero());
    pots.push_back(Potential::bounded([](double x) { return 1.0 + x * x; }, "b"));
    pots.push_back(Potential::power_singular(1.0, 1.0));
    for (const auto& V : pots) {
        for (double lambda : {0.1, 1.0, 10.0}) {
            auto f1 = random_fn(grid, rng, -1.0, 1.0);
            auto f2 = random_fn(grid, rng, -1.0, 1.0);
            for (const Weight* w : {&wone, &wphi}) {
                auto m = resolvent_contraction_margin(lambda, f1, f2, V, *w, A);
                CHECK(m.positive_part >= -1e-10 * m.scale);
                CHECK(m.plain >= -1e-10 * m.scale);
            }
        }
    }
}

TEST_CASE("stroock-varopoulos margins") {
    auto grid = build_graded_grid(1.0, 160, 1.0);
    OperatorMatrix A = assemble_galerkin(grid, FracOrder(0.5));
    SqrtOperator root(A);
    SplitMix64 rng(13);

    // p = 2 with nonnegative v: exact equality
    auto v_pos = random_fn(grid, rng, 0.0, 1.0);
    auto m2 = stroock_varopoulos_margin(v_pos, 2.0, A, root);
    CHECK(std::abs(m2.margin) <= 1e-10 * m2.scale);

    for (double p : {1.5, 3.0}) {
        for (int trial = 0; trial < 20; ++trial) {
            auto v = random_fn(grid, rng, -1.0, 1.0);
            auto m = stroock_varopoulos_margin(v, p, A, root);
            CHECK(m.margin >= -1e-8 * m.scale);
        }
    }
}

TEST_CASE("poschl-teller ring confinement pushes the solution down locally") {
    // V = (V0/2) mu(mu-1)/cos^2(alpha |x|) blows up on the ring |x| = pi/(2 alpha);
    // with alpha = 2 the ring sits inside (-1, 1)
    double s = 0.5;
    auto grid = build_graded_grid(1.0, 384, 2.0);
    OperatorMatrix A = assemble_galerkin(grid, FracOrder(s));
    auto f = GridFunction::from_function(grid, [](double) { return 1.0; });
    Potential V = Potential::poschl_teller(1.0, 2.0, 0.0, 2.0);
    auto rep = solve(V, f, A);
    CHECK(rep.converged);
    CHECK(rep.positive);
    auto u0 = solve_dirichlet(A, f);
    // strictly below the free solution everywhere, strongly near the ring
    CHECK(((u0.values() - rep.u.values()).minCoeff() >= -1e-12));
    double ring = std::numbers::pi / 4.0;
    CHECK(rep.u.eval(ring) < 0.2 * u0.eval(ring));
    CHECK(rep.u.eval(0.0) < u0.eval(0.0));
}

TEST_CASE("unbounded-potential construction grows in the q norm") {
    SpikeSpec g;
    g.amplitude = 0.02;
    g.exponent = 0.98;
    g.center = 0.3;
    auto rep = counterexample_experiment(FracOrder(0.75), Potential::bounded([](double) {
                                             return 0.5;
                                         }),
                                         g, 8.0, {256, 512, 1024});
    CHECK(rep.lower_bound_ok);
    CHECK(rep.grew);
    for (double r : rep.growth_ratios) CHECK(r >= 1.5);

    // control: no spike, q norms refinement-stable
    SpikeSpec g0 = g;
    g0.amplitude = 0.0;
    auto rep0 = counterexample_experiment(FracOrder(0.75), Potential::bounded([](double) {
                                              return 0.5;
                                          }),
                                          g0, 8.0, {128, 256});
    CHECK(!rep0.grew);
    CHECK(rep0.q_norms[1] == doctest::Approx(rep0.q_norms[0]).epsilon(0.05));
    CHECK_THROWS_AS(counterexample_experiment(
                        FracOrder(0.75), Potential::zero(),
                        SpikeSpec{0.1, 0.2, 0.0}, 4.0, {64, 128}),
                    ConfigError);
}
