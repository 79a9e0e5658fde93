#include "fraclab/flatness.hpp"

#include <algorithm>
#include <cmath>

#include "fraclab/quadrature.hpp"

namespace fraclab {

double PowerLogData::eval(double delta) const {
    if (!(delta > 0.0)) return 0.0;
    double L = 1.0 + std::abs(std::log(delta));
    return std::pow(delta, -a) * std::pow(L, -b);
}

GridFunction PowerLogData::on_grid(GridPtr grid) const {
    Eigen::VectorXd v(grid->size());
    for (int i = 0; i < grid->size(); ++i) v[i] = eval(grid->delta(i));
    return GridFunction(std::move(grid), std::move(v));
}

bool PowerLogData::admissible(double s) const {
    // integral of delta^{s-a} (1+|log|)^{-b} near delta = 0
    if (s - a > -1.0) return true;
    if (s - a < -1.0) return false;
    return b > 1.0;
}

bool PowerLogData::classifier_finite(double s) const {
    // integral of delta^{s-a} (1+|log|)^{1-b}
    if (s - a > -1.0) return true;
    if (s - a < -1.0) return false;
    return b > 2.0;
}

double classifier_cutoff_integral(const PowerLogData& f, double s, double R,
                                  double eps, bool with_log) {
    // substitute delta = e^{-t}: integral over t in (log(1/R), log(1/eps))
    double t_lo = std::log(1.0 / R), t_hi = std::log(1.0 / eps);
    auto integrand = [&](double t) {
        double delta = std::exp(-t);
        double L = 1.0 + std::abs(std::log(delta));
        double v = std::pow(delta, s + 1.0 - f.a) * std::pow(L, -f.b);
        if (with_log) v *= L;
        return v;
    };
    return 2.0 * adaptive_simpson(integrand, t_lo, t_hi, 1e-12, 30);
}

BoundaryFit fit_boundary_exponent(const GridFunction& u, int discard_cells,
                                  int min_levels) {
    const GradedGrid& g = u.grid();
    const double R = g.R();
    const int N = g.size();
    BoundaryFit fit;
    for (int j = 2; j < 60; ++j) {
        double hi = R * std::pow(2.0, -j);
        double lo = 0.5 * hi;
        double sup = 0.0;
        bool seen = false;
        for (int i = 0; i < N; ++i) {
            if (i < discard_cells || i >= N - discard_cells) continue;
            double d = g.delta(i);
            if (d >= lo && d < hi) {
                sup = std::max(sup, std::abs(u[i]));
                seen = true;
            }
        }
        if (!seen || sup <= 0.0) break;
        fit.deltas.push_back(std::sqrt(lo * hi));
        fit.sups.push_back(sup);
    }
    if (fit.levels() < min_levels)
        throw InvariantViolation("fit_boundary_exponent: fewer than the required dyadic levels");
    // least squares on log2
    double n = fit.levels(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < fit.levels(); ++i) {
        double x = std::log2(fit.deltas[i]);
        double y = std::log2(fit.sups[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.alpha = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double icept = (sy - fit.alpha * sx) / n;
    for (int i = 0; i < fit.levels(); ++i) {
        double pred = fit.alpha * std::log2(fit.deltas[i]) + icept;
        fit.fit_residual =
            std::max(fit.fit_residual, std::abs(pred - std::log2(fit.sups[i])));
    }
    return fit;
}

double hopf_constant(const GridFunction& u, const GridFunction& f, double s) {
    if (f.values().minCoeff() < 0.0 || f.values().maxCoeff() <= 0.0)
        throw ConfigError("hopf_constant: data must be nonnegative and nonzero");
    const GradedGrid& g = u.grid();
    double data = weighted_norm(f, Weight::delta_s(s), 1.0);
    double c = 1e300;
    for (int i = 0; i < g.size(); ++i)
        c = std::min(c, u[i] / (std::pow(g.delta(i), s) * data));
    return c;
}

BlowupReport blowup_experiment(const PowerLogData& f, FracOrder s,
                               const std::vector<double>& k_levels,
                               const OperatorMatrix& A) {
    BlowupReport rep;
    rep.k_levels = k_levels;
    rep.data_admissible = f.admissible(s.value());
    const GradedGrid& g = A.grid();
    GridPtr grid = A.grid_ptr();
    for (double k : k_levels) {
        Eigen::VectorXd fk(g.size());
        for (int i = 0; i < g.size(); ++i) fk[i] = std::min(f.eval(g.delta(i)), k);
        auto u = solve_dirichlet(A, GridFunction(grid, std::move(fk)));
        rep.center_values.push_back(u.eval(0.0));
        rep.l1_norms.push_back(lp_norm(u, 1.0));
    }
    rep.classified_blowup = rep.center_values.size() >= 2;
    for (std::size_t i = 0; i + 1 < rep.center_values.size(); ++i) {
        double ratio = rep.center_values[i + 1] / rep.center_values[i];
        rep.growth_ratios.push_back(ratio);
        if (!(ratio >= 1.2)) rep.classified_blowup = false;
    }
    return rep;
}

std::vector<TraceVerdict> trace_equivalence_experiment(
    const std::vector<PowerLogData>& fs, FracOrder s,
    const std::vector<int>& resolutions, double R, double stability_threshold) {
    std::vector<TraceVerdict> out(fs.size());
    for (std::size_t d = 0; d < fs.size(); ++d) {
        if (!fs[d].admissible(s.value()))
            throw ConfigError("trace experiment: data outside L^1(delta^s)");
        out[d].resolutions = resolutions;
        out[d].classifier_finite = fs[d].classifier_finite(s.value());
    }
    for (int N : resolutions) {
        auto grid = build_graded_grid(R, N, default_grading(s.value()));
        OperatorMatrix A = assemble_galerkin(grid, s);
        for (std::size_t d = 0; d < fs.size(); ++d) {
            auto u = solve_dirichlet(A, fs[d].on_grid(grid));
            out[d].trace_norms.push_back(
                weighted_norm(u, Weight::delta_pow(-s.value()), 1.0));
        }
    }
    for (auto& v : out) {
        std::size_t n = v.trace_norms.size();
        if (n >= 2) {
            v.last_increment = (v.trace_norms[n - 1] - v.trace_norms[n - 2]) /
                               std::max(v.trace_norms[n - 1], 1e-300);
            v.numeric_stable = std::abs(v.last_increment) < stability_threshold;
        }
        v.match = (v.classifier_finite == v.numeric_stable);
    }
    return out;
}

TraceVerdict trace_equivalence_experiment(const PowerLogData& f, FracOrder s,
                                          const std::vector<int>& resolutions,
                                          double R, double stability_threshold) {
    return trace_equivalence_experiment(std::vector<PowerLogData>{f}, s, resolutions,
                                        R, stability_threshold)
        .front();
}

double barrier_bound(FracOrder s, double eps, double C_V, double f_sup,
                     double R_dist) {
    if (!(eps > 0.0) || !(eps < s.value()))
        throw ConfigError("barrier_bound: eps must lie in (0, s)");
    double gamma = gamma_beta(GammaBetaQuery(1, s, s.value() + eps));
    if (!(C_V > -gamma))
        throw ConfigError("barrier_bound: need C_V > -gamma_{s+eps}");
    return f_sup * std::pow(R_dist, s.value() - eps) / (gamma + C_V);
}

FlatnessCheck verify_flatness(double C_V, double f_sup, double eps,
                              const SolveReport& rep, FracOrder s) {
    const GradedGrid& g = rep.u.grid();
    FlatnessCheck out;
    // the barrier radius of the interval is its diameter
    out.bound = barrier_bound(s, eps, C_V, f_sup, 2.0 * g.R());
    double sup = 0.0;
    for (int i = 0; i < g.size(); ++i)
        sup = std::max(sup, rep.u[i] / std::pow(g.delta(i), s.value() + eps));
    out.sup_ratio = sup;
    out.margin = out.bound - sup;
    out.fit = fit_boundary_exponent(rep.u);
    return out;
}

double large_solution_residual(FracOrder s, const std::vector<double>& points,
                               double R) {
    const double sv = s.value();
    PointwiseField u = PointwiseField::compact(
        [sv, R](double y) {
            double gap = (R - y) * (R + y);
            return gap > 0.0 ? std::pow(gap, sv - 1.0) : 0.0;
        },
        R);
    double worst = 0.0;
    for (double x : points) {
        double delta = R - std::abs(x);
        if (!(delta >= 0.1 * R))
            throw ConfigError("large_solution_residual: points must keep delta >= 0.1 R");
        auto r = apply_pointwise(u, s, x, 0.5 * delta, 1e-11);
        double scale = u.f(x) * std::pow(delta, -2.0 * sv);
        worst = std::max(worst, std::abs(r.value) / scale);
    }
    return worst;
}

} // namespace fraclab
