#include "fraclab/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fraclab/quadrature.hpp"

namespace fraclab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Potential Potential::zero() { return Potential(Kind::zero); }

Potential Potential::bounded(std::function<double(double)> fn, std::string label) {
    Potential v(Kind::bounded);
    v.fn_ = std::move(fn);
    v.label_ = std::move(label);
    return v;
}

Potential Potential::power_singular(double C_V, double p) {
    if (!(C_V > 0.0) || !(p > 0.0))
        throw ConfigError("power_singular potential needs C_V > 0, p > 0");
    Potential v(Kind::power_singular);
    v.c_ = C_V;
    v.p_ = p;
    v.label_ = "power";
    return v;
}

Potential Potential::poschl_teller(double V0, double alpha, double k, double mu) {
    if (!(V0 >= 0.0) || !(alpha > 0.0))
        throw ConfigError("poschl_teller: V0 >= 0 and alpha > 0 required");
    // k(k-1) and mu(mu-1) must be nonnegative to keep V >= 0
    if ((k > 0.0 && k < 1.0) || (mu > 0.0 && mu < 1.0))
        throw ConfigError("poschl_teller: k and mu must be 0 or >= 1");
    Potential v(Kind::poschl_teller);
    v.v0_ = V0;
    v.alpha_ = alpha;
    v.kk_ = k;
    v.mu_ = mu;
    v.label_ = "poschl";
    return v;
}

Potential Potential::tabulated(GridFunction tab) {
    if (tab.size() && tab.values().minCoeff() < 0.0)
        throw ConfigError("tabulated potential must be nonnegative");
    Potential v(Kind::tabulated);
    v.tab_ = std::move(tab);
    v.label_ = "tabulated";
    return v;
}

Potential Potential::infinite_well(Potential inner) {
    Potential v(Kind::infinite_well);
    v.inner_ = std::make_shared<Potential>(std::move(inner));
    v.label_ = "well";
    return v;
}

double Potential::eval(double x, double delta) const {
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::bounded: {
            double v = fn_(x);
            if (v < 0.0) throw InvariantViolation("potential evaluated negative");
            return v;
        }
        case Kind::power_singular:
            return delta > 0.0 ? c_ * std::pow(delta, -p_) : kInf;
        case Kind::poschl_teller: {
            double sk = std::sin(alpha_ * std::abs(x));
            double ck = std::cos(alpha_ * std::abs(x));
            double t1 = kk_ * (kk_ - 1.0), t2 = mu_ * (mu_ - 1.0);
            double a = (sk == 0.0 && t1 > 0.0) ? kInf : (t1 > 0.0 ? t1 / (sk * sk) : 0.0);
            double b = (ck == 0.0 && t2 > 0.0) ? kInf : (t2 > 0.0 ? t2 / (ck * ck) : 0.0);
            return 0.5 * v0_ * (a + b);
        }
        case Kind::tabulated: return std::max(tab_.eval(x), 0.0);
        case Kind::infinite_well: return delta > 0.0 ? inner_->eval(x, delta) : kInf;
    }
    return 0.0;
}

Eigen::VectorXd Potential::at_nodes(const GradedGrid& grid) const {
    Eigen::VectorXd v(grid.size());
    for (int i = 0; i < grid.size(); ++i) v[i] = eval(grid.node(i), grid.delta(i));
    return v;
}

Potential parse_potential(const std::string& spec) {
    std::istringstream in(spec);
    std::string head;
    in >> head;
    if (head == "zero" || head.empty()) return Potential::zero();
    if (head == "power") {
        double c = 0, p = 0;
        if (!(in >> c >> p)) throw ConfigError("potential grammar: power C_V p");
        return Potential::power_singular(c, p);
    }
    if (head == "poschl") {
        double v0, a, k, mu;
        if (!(in >> v0 >> a >> k >> mu))
            throw ConfigError("potential grammar: poschl V0 alpha k mu");
        return Potential::poschl_teller(v0, a, k, mu);
    }
    if (head == "bounded") {
        std::string id;
        in >> id;
        if (id == "one") return Potential::bounded([](double) { return 1.0; }, "one");
        if (id == "cosine")
            return Potential::bounded(
                [](double x) { return 1.0 + std::cos(3.0 * x); }, "cosine");
        if (id == "gauss")
            return Potential::bounded(
                [](double x) { return 2.0 * std::exp(-4.0 * x * x); }, "gauss");
        throw ConfigError("unknown bounded potential id: " + id);
    }
    if (head == "well") {
        std::string rest;
        std::getline(in, rest);
        return Potential::infinite_well(parse_potential(rest.empty() ? "zero" : rest));
    }
    throw ConfigError("unknown potential spec: " + spec);
}

// ---------------------------------------------------------------------------
// truncated solves
// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXd truncate_data(const Eigen::VectorXd& f, double m) {
    Eigen::VectorXd out(f.size());
    for (int i = 0; i < f.size(); ++i) {
        double plus = std::min(std::max(f[i], 0.0), m);
        double minus = std::min(std::max(-f[i], 0.0), m);
        out[i] = plus - minus;
    }
    return out;
}

GridFunction shifted_solve(const OperatorMatrix& A, const Eigen::VectorXd& Vk,
                           const Eigen::VectorXd& rhs_data) {
    Eigen::MatrixXd B = A.matrix();
    B.diagonal() += A.mass().cwiseProduct(Vk);
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() != Eigen::Success)
        throw InvariantViolation("shifted solve: factorization failed");
    Eigen::VectorXd u = llt.solve(A.mass().cwiseProduct(rhs_data));
    return GridFunction(A.grid_ptr(), std::move(u));
}

} // namespace

GridFunction solve_truncated(const Potential& V, const GridFunction& f, double k,
                             double m, const OperatorMatrix& A) {
    if (!(k >= 1.0) || !(m >= 1.0)) throw ConfigError("solve_truncated: k, m >= 1");
    const GradedGrid& g = A.grid();
    Eigen::VectorXd Vk = V.at_nodes(g).cwiseMin(k);
    return shifted_solve(A, Vk, truncate_data(f.values(), m));
}

GridFunction solve_direct(const Potential& V, const GridFunction& f,
                          const OperatorMatrix& A) {
    Eigen::VectorXd Vn = V.at_nodes(A.grid());
    if (!Vn.allFinite())
        throw ConfigError("solve_direct: potential unbounded at a node; use truncation");
    return shifted_solve(A, Vn, f.values());
}

SolveReport solve(const Potential& V, const GridFunction& f, const OperatorMatrix& A,
                  double tol, int level_cap) {
    const GradedGrid& g = A.grid();
    const int N = g.size();
    const double s = A.order();
    Eigen::VectorXd Vn = V.at_nodes(g);
    Eigen::VectorXd Vfinite = Vn;
    for (int i = 0; i < N; ++i)
        if (!std::isfinite(Vfinite[i])) Vfinite[i] = 1e300;

    SolveReport rep;
    rep.data_norm_deltas = weighted_norm(f, Weight::delta_s(s), 1.0);

    Weight wds = Weight::delta_s(s);
    auto vu_norm = [&](const Eigen::VectorXd& u) {
        Eigen::VectorXd vu = Vfinite.cwiseProduct(u);
        return weighted_norm(GridFunction(A.grid_ptr(), std::move(vu)), wds, 1.0);
    };

    Eigen::VectorXd u_prev = Eigen::VectorXd::Zero(N);
    double vu_prev = 0.0;
    bool converged = false;
    double scale = std::max(f.values().cwiseAbs().maxCoeff(), 1e-300);
    for (int j = 0; j <= level_cap; ++j) {
        double level = std::ldexp(1.0, j);
        Eigen::VectorXd Vk = Vn.cwiseMin(level);
        GridFunction u = shifted_solve(A, Vk, truncate_data(f.values(), level));
        double unorm = lp_norm(u, 1.0);
        Eigen::VectorXd diff = u.values() - u_prev;
        double inc = lp_norm(GridFunction(A.grid_ptr(), std::move(diff)), 1.0);
        double vu = vu_norm(u.values());
        double inc_vu = std::abs(vu - vu_prev);
        rep.history.push_back({level, level, inc, inc_vu});
        u_prev = u.values();
        vu_prev = vu;
        // truncation is inactive once the level clears the data and the
        // potential at every node
        bool saturated = level >= Vfinite.maxCoeff() &&
                         level >= f.values().cwiseAbs().maxCoeff();
        if (saturated || (j > 0 && inc <= tol * std::max(unorm, 1e-300) &&
                          inc_vu <= tol * std::max(vu, 1e-300))) {
            converged = true;
            break;
        }
    }
    rep.converged = converged;
    rep.u = GridFunction(A.grid_ptr(), u_prev);

    bool f_nonneg = f.values().minCoeff() >= 0.0;
    rep.positive = f_nonneg && rep.u.values().minCoeff() >= -1e-12 * scale;

    // discrete phi_delta on this very grid: A w = M delta^{-s}; with it the
    // trace estimates hold with constant one by the same test-function
    // pairing that proves them
    Eigen::VectorXd dinv(N);
    for (int i = 0; i < N; ++i) dinv[i] = std::pow(g.delta(i), -s);
    Eigen::VectorXd phid = A.llt().solve(A.mass().cwiseProduct(dinv));

    auto nodal_l1 = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
        double acc = 0.0;
        for (int i = 0; i < N; ++i) acc += std::abs(v[i]) * w[i] * g.cell_width(i);
        return acc;
    };
    Eigen::VectorXd vu = Vfinite.cwiseProduct(u_prev);

    rep.norms.u_L1 = lp_norm(rep.u, 1.0);
    rep.norms.Vu_deltas_L1 = vu_norm(u_prev);
    rep.norms.u_over_deltas_L1 = nodal_l1(u_prev, dinv);
    rep.norms.Vu_phidelta_L1 = nodal_l1(vu, phid);
    rep.norms.u_L2 = lp_norm(rep.u, 2.0);
    rep.norms.energy = A.quadratic_form(u_prev);
    rep.data_norm_phidelta = nodal_l1(f.values(), phid);
    rep.u_over_delta_finite = std::isfinite(rep.norms.u_over_deltas_L1);

    double eps = 1e-300;
    rep.c_u_L1 = rep.norms.u_L1 / std::max(rep.data_norm_deltas, eps);
    rep.c_Vu_deltas = rep.norms.Vu_deltas_L1 / std::max(rep.data_norm_deltas, eps);
    rep.c_u_over_deltas =
        rep.norms.u_over_deltas_L1 / std::max(rep.data_norm_phidelta, eps);
    rep.c_Vu_phidelta =
        rep.norms.Vu_phidelta_L1 / std::max(rep.data_norm_phidelta, eps);
    return rep;
}

// ---------------------------------------------------------------------------
// test battery
// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, std::function<double(double)>>>
default_battery_profiles(double R) {
    using P = std::pair<std::string, std::function<double(double)>>;
    const double pi = std::numbers::pi;
    auto bump = [](double c, double w) {
        return [c, w](double x) {
            double z = (x - c) / w;
            return std::exp(-z * z);
        };
    };
    std::vector<P> out;
    out.emplace_back("one", [](double) { return 1.0; });
    out.emplace_back("x", [R](double x) { return x / R; });
    out.emplace_back("minus_x", [R](double x) { return -x / R; });
    out.emplace_back("x2", [R](double x) { return (x / R) * (x / R); });
    out.emplace_back("bump0", bump(0.0, 0.3 * R));
    out.emplace_back("bump_left", bump(-0.4 * R, 0.2 * R));
    out.emplace_back("bump_right", bump(0.5 * R, 0.25 * R));
    out.emplace_back("sign", [](double x) { return x < 0.0 ? -1.0 : 1.0; });
    out.emplace_back("block", [R](double x) { return std::abs(x) < 0.5 * R ? 1.0 : 0.0; });
    out.emplace_back("sine", [R, pi](double x) { return std::sin(pi * x / R); });
    out.emplace_back("cosine", [R, pi](double x) { return std::cos(0.5 * pi * x / R); });
    out.emplace_back("stripes", [R, pi](double x) {
        return std::sin(3.0 * pi * x / R) < 0.0 ? -1.0 : 1.0;
    });
    return out;
}

TestBattery battery_discrete(const OperatorMatrix& A) {
    TestBattery b;
    GridPtr grid = A.grid_ptr();
    for (auto& [name, fn] : default_battery_profiles(grid->R())) {
        auto psi = GridFunction::from_function(grid, fn);
        Eigen::VectorXd phi = A.llt().solve(A.mass().cwiseProduct(psi.values()));
        bool nonneg = psi.values().minCoeff() >= 0.0;
        b.members.push_back(
            {GridFunction(grid, std::move(phi)), std::move(psi), nonneg, name});
    }
    return b;
}

TestBattery battery_green(const BallDomain& domain, FracOrder s, GridPtr grid) {
    TestBattery b;
    GreenSolver1D solver(domain, s);
    for (auto& [name, fn] : default_battery_profiles(domain.R)) {
        auto psi = GridFunction::from_function(grid, fn);
        GridFunction phi = solver.apply(psi);
        bool nonneg = psi.values().minCoeff() >= 0.0;
        b.members.push_back({std::move(phi), std::move(psi), nonneg, name});
    }
    return b;
}

double very_weak_residual(const SolveReport& rep, const Potential& V,
                          const GridFunction& f, const TestBattery& battery) {
    if (battery.members.empty()) throw ConfigError("very_weak_residual: empty battery");
    const GradedGrid& g = rep.u.grid();
    const int N = g.size();
    Eigen::VectorXd Vn = V.at_nodes(g);
    for (int i = 0; i < N; ++i)
        if (!std::isfinite(Vn[i])) Vn[i] = 1e300;
    double scale = std::max(rep.data_norm_deltas, 1e-300);
    double worst = 0.0;
    for (const auto& memb : battery.members) {
        double acc = 0.0;
        for (int i = 0; i < N; ++i) {
            double m = g.cell_width(i);
            acc += m * (rep.u[i] * memb.psi[i] + Vn[i] * rep.u[i] * memb.phi[i] -
                        f[i] * memb.phi[i]);
        }
        worst = std::max(worst, std::abs(acc));
    }
    return worst / scale;
}

KatoMargins kato_margin(const GridFunction& u, const GridFunction& g,
                        const TestBattery& battery) {
    const GradedGrid& grid = u.grid();
    const int N = grid.size();
    KatoMargins out;
    out.sign_margin = 1e300;
    out.sign_plus_margin = 1e300;
    bool any = false;
    for (const auto& memb : battery.members) {
        if (!memb.nonneg) continue;
        any = true;
        double lhs_abs = 0.0, rhs_abs = 0.0, lhs_plus = 0.0, rhs_plus = 0.0, sc = 0.0;
        for (int i = 0; i < N; ++i) {
            double m = grid.cell_width(i);
            double sgn = u[i] > 0.0 ? 1.0 : (u[i] < 0.0 ? -1.0 : 0.0);
            double sgp = u[i] > 0.0 ? 1.0 : 0.0;
            rhs_abs += m * sgn * g[i] * memb.phi[i];
            lhs_abs += m * std::abs(u[i]) * memb.psi[i];
            rhs_plus += m * sgp * g[i] * memb.phi[i];
            lhs_plus += m * std::max(u[i], 0.0) * memb.psi[i];
            sc += m * (std::abs(g[i]) * memb.phi[i] + std::abs(u[i] * memb.psi[i]));
        }
        out.sign_margin = std::min(out.sign_margin, rhs_abs - lhs_abs);
        out.sign_plus_margin = std::min(out.sign_plus_margin, rhs_plus - lhs_plus);
        out.scale = std::max(out.scale, sc);
    }
    if (!any) throw ConfigError("kato_margin: battery has no nonnegative members");
    return out;
}

ContractionMargins resolvent_contraction_margin(double lambda, const GridFunction& f1,
                                                const GridFunction& f2,
                                                const Potential& V, const Weight& w,
                                                const OperatorMatrix& A) {
    if (!(lambda > 0.0)) throw ConfigError("resolvent: lambda must be positive");
    if (w.kind() != Weight::Kind::one && w.kind() != Weight::Kind::phi_1)
        throw ConfigError("resolvent: weight must be one or phi_1");
    const GradedGrid& g = A.grid();
    const int N = g.size();
    Eigen::VectorXd Vn = V.at_nodes(g);
    for (int i = 0; i < N; ++i)
        if (!std::isfinite(Vn[i])) Vn[i] = 1e300;

    // (M + lambda (A + M diag V)) u = M f
    Eigen::MatrixXd B = lambda * A.matrix();
    B.diagonal() +=
        A.mass().cwiseProduct((Eigen::VectorXd::Ones(N) + lambda * Vn).eval());
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() != Eigen::Success)
        throw InvariantViolation("resolvent: factorization failed");
    Eigen::VectorXd u1 = llt.solve(A.mass().cwiseProduct(f1.values()));
    Eigen::VectorXd u2 = llt.solve(A.mass().cwiseProduct(f2.values()));

    Eigen::VectorXd wn(N);
    for (int i = 0; i < N; ++i) wn[i] = w.eval(g, g.node(i));

    auto norm_plus = [&](const Eigen::VectorXd& v) {
        double acc = 0.0;
        for (int i = 0; i < N; ++i)
            acc += g.cell_width(i) * wn[i] * std::max(v[i], 0.0);
        return acc;
    };
    auto norm_abs = [&](const Eigen::VectorXd& v) {
        double acc = 0.0;
        for (int i = 0; i < N; ++i) acc += g.cell_width(i) * wn[i] * std::abs(v[i]);
        return acc;
    };
    Eigen::VectorXd df = f1.values() - f2.values();
    Eigen::VectorXd du = u1 - u2;
    ContractionMargins out;
    out.positive_part = norm_plus(df) - norm_plus(du);
    out.plain = norm_abs(df) - norm_abs(du);
    out.scale = std::max(norm_abs(df), 1e-300);
    return out;
}

SqrtOperator::SqrtOperator(const OperatorMatrix& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A.matrix());
    if (eig.info() != Eigen::Success)
        throw InvariantViolation("SqrtOperator: eigendecomposition failed");
    vecs_ = eig.eigenvectors();
    sqrt_vals_ = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
}

Eigen::VectorXd SqrtOperator::apply(const Eigen::VectorXd& v) const {
    return vecs_ * sqrt_vals_.cwiseProduct(vecs_.transpose() * v).eval();
}

StroockVaropoulosMargin stroock_varopoulos_margin(const GridFunction& v, double p,
                                                  const OperatorMatrix& A,
                                                  const SqrtOperator& root) {
    if (!(p > 1.0)) throw ConfigError("stroock-varopoulos: p > 1 required");
    const int N = v.size();
    Eigen::VectorXd phi_p(N), w(N);
    for (int i = 0; i < N; ++i) {
        double a = v[i];
        phi_p[i] = std::pow(std::abs(a), p - 1.0) * (a < 0.0 ? -1.0 : 1.0);
        w[i] = std::pow(std::abs(a), 0.5 * p);
    }
    double lhs = phi_p.dot(A.matrix() * v.values());
    Eigen::VectorXd hw = root.apply(w);
    double rhs = 4.0 * (p - 1.0) / (p * p) * hw.squaredNorm();
    StroockVaropoulosMargin out;
    out.margin = lhs - rhs;
    out.scale = std::max(std::abs(lhs) + std::abs(rhs), 1e-300);
    return out;
}

// ---------------------------------------------------------------------------
// unbounded-potential construction
// ---------------------------------------------------------------------------

CounterexampleReport counterexample_experiment(FracOrder s, const Potential& V1,
                                               const SpikeSpec& g, double q_exponent,
                                               const std::vector<int>& levels,
                                               double R) {
    if (!(g.exponent > 0.0) || !(g.exponent < 1.0))
        throw ConfigError(
            "spike exponent must lie in (0, 1) so that g is in some L^p, p > 1");
    if (g.amplitude > 0.0 && !(g.exponent * q_exponent > 1.0))
        throw ConfigError("spike must fail q-integrability: exponent * q > 1");
    if (levels.size() < 2) throw ConfigError("need at least two refinement levels");

    CounterexampleReport rep;
    rep.levels = levels;
    auto f_data = [R](double x) {
        double z = x / (0.8 * R);
        double b = 1.0 - z * z;
        return b > 0.0 ? b * b : 0.0;
    };
    auto spike = [&](double x) {
        double d = std::abs(x - g.center);
        return d > 0.0 ? g.amplitude * std::pow(d, -g.exponent) : kInf;
    };

    for (std::size_t lev = 0; lev < levels.size(); ++lev) {
        int N = levels[lev];
        auto grid = build_graded_grid(R, N, default_grading(s.value()));
        OperatorMatrix A = assemble_galerkin(grid, s);
        auto f = GridFunction::from_function(grid, f_data);
        GridFunction u1 = solve(V1, f, A).u;

        Eigen::VectorXd V2n(grid->size());
        for (int i = 0; i < grid->size(); ++i) {
            double x = grid->node(i);
            V2n[i] = V1.eval(x, grid->delta(i)) + spike(x);
            if (!std::isfinite(V2n[i])) V2n[i] = 1e300;
        }
        GridFunction u2 = shifted_solve(A, V2n, f.values());

        if (lev == 0) {
            rep.c0 = u1.eval(g.center);
            double r0 = 0.0;
            for (double r = 0.02 * R; r < 0.5 * R; r += 0.02 * R) {
                if (u1.eval(g.center - r) >= 0.5 * rep.c0 &&
                    u1.eval(g.center + r) >= 0.5 * rep.c0)
                    r0 = r;
                else
                    break;
            }
            rep.ball_radius = r0;
        }
        double min_u2 = 1e300;
        for (int i = 0; i < grid->size(); ++i)
            if (std::abs(grid->node(i) - g.center) <= rep.ball_radius)
                min_u2 = std::min(min_u2, u2[i]);
        if (lev + 1 == levels.size()) rep.min_u2_on_ball = min_u2;

        Eigen::VectorXd v2u2 = V2n.cwiseProduct(u2.values());
        rep.q_norms.push_back(
            weighted_norm(GridFunction(grid, std::move(v2u2)), Weight::one(), q_exponent));
    }
    for (std::size_t i = 0; i + 1 < rep.q_norms.size(); ++i)
        rep.growth_ratios.push_back(rep.q_norms[i + 1] / rep.q_norms[i]);
    rep.lower_bound_ok = rep.min_u2_on_ball >= 0.25 * rep.c0;
    rep.grew = g.amplitude > 0.0 && !rep.growth_ratios.empty();
    for (double r : rep.growth_ratios)
        if (!(r >= 1.2)) rep.grew = false;
    return rep;
}

} // namespace fraclab
