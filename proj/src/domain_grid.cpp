#include "fraclab/domain_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fraclab/quadrature.hpp"

namespace fraclab {

BallDomain::BallDomain(int n_, double R_) : n(n_), R(R_) {
    if (n < 1 || n > 3) throw ConfigError("BallDomain: n must be 1, 2 or 3");
    if (!(R > 0.0)) throw ConfigError("BallDomain: R must be positive");
}

double boundary_distance(const BallDomain& domain, const Point& x) {
    double r2 = 0.0;
    for (int i = 0; i < domain.n; ++i) r2 += x[i] * x[i];
    return std::max(domain.R - std::sqrt(r2), 0.0);
}

GradedGrid::GradedGrid(double R, int N, double q) : R_(R), N_(N), q_(q) {
    if (N < 8) throw ConfigError("GradedGrid: need N >= 8");
    if (!(q >= 1.0)) throw ConfigError("GradedGrid: grading exponent must be >= 1");
    if (!(R > 0.0)) throw ConfigError("GradedGrid: R must be positive");
    nodes_.resize(N);
    for (int i = 0; i < N; ++i) {
        double t = -1.0 + 2.0 * (i + 1.0) / (N + 1.0);
        double sgn = t < 0.0 ? -1.0 : (t > 0.0 ? 1.0 : 0.0);
        nodes_[i] = R * sgn * (1.0 - std::pow(1.0 - std::abs(t), q));
    }
    bounds_.resize(N + 1);
    bounds_[0] = -R;
    bounds_[N] = R;
    for (int i = 1; i < N; ++i) bounds_[i] = 0.5 * (nodes_[i - 1] + nodes_[i]);
    for (int i = 0; i + 1 < N; ++i)
        if (!(nodes_[i] < nodes_[i + 1]))
            throw InvariantViolation("GradedGrid: nodes not strictly increasing");
    if (!(R - std::abs(nodes_.front()) > 0.0) || !(R - std::abs(nodes_.back()) > 0.0))
        throw InvariantViolation("GradedGrid: boundary gap vanished");
}

double GradedGrid::min_delta() const {
    return std::min(R_ - std::abs(nodes_.front()), R_ - std::abs(nodes_.back()));
}

double GradedGrid::max_cell_width() const {
    double w = 0.0;
    for (int i = 0; i < N_; ++i) w = std::max(w, cell_width(i));
    return w;
}

int GradedGrid::cell_of(double x) const {
    auto it = std::upper_bound(bounds_.begin(), bounds_.end(), x);
    int idx = static_cast<int>(it - bounds_.begin()) - 1;
    return std::clamp(idx, 0, N_ - 1);
}

GridPtr build_graded_grid(double R, int N, double q) {
    return std::make_shared<const GradedGrid>(R, N, q);
}

double default_grading(double s) { return std::min(2.0 / s, 6.0); }

GridFunction::GridFunction(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw ConfigError("GridFunction: null grid");
    if (values_.size() != grid_->size())
        throw ConfigError("GridFunction: size mismatch with grid");
    if (!values_.allFinite())
        throw InvariantViolation("GridFunction: non-finite entries");
}

GridFunction GridFunction::from_function(GridPtr grid,
                                         const std::function<double(double)>& f) {
    Eigen::VectorXd v(grid->size());
    for (int i = 0; i < grid->size(); ++i) v[i] = f(grid->node(i));
    return GridFunction(std::move(grid), std::move(v));
}

GridFunction GridFunction::zero(GridPtr grid) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(grid->size());
    return GridFunction(std::move(grid), std::move(v));
}

double GridFunction::eval(double x) const {
    const GradedGrid& g = *grid_;
    if (std::abs(x) >= g.R()) return 0.0;
    const auto& xs = g.nodes();
    auto it = std::lower_bound(xs.begin(), xs.end(), x);
    int hi = static_cast<int>(it - xs.begin());
    if (hi == 0) {
        // between -R (value 0) and the first node
        double t = (x + g.R()) / (xs[0] + g.R());
        return t * values_[0];
    }
    if (hi == g.size()) {
        double t = (g.R() - x) / (g.R() - xs[g.size() - 1]);
        return t * values_[g.size() - 1];
    }
    double t = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
    return (1.0 - t) * values_[hi - 1] + t * values_[hi];
}

// --- Weight ---------------------------------------------------------------

Weight Weight::one() { return Weight(Kind::one); }

Weight Weight::delta_s(double s) {
    Weight w(Kind::delta_s);
    w.p_ = s;
    return w;
}

Weight Weight::delta_s_log(double s) {
    Weight w(Kind::delta_s_log);
    w.p_ = s;
    w.with_log_ = true;
    return w;
}

Weight Weight::delta_pow(double p) {
    if (!(p > -1.0)) throw ConfigError("Weight: delta power must exceed -1");
    Weight w(Kind::delta_pow);
    w.p_ = p;
    return w;
}

Weight Weight::phi_delta(GridFunction tab) {
    Weight w(Kind::phi_delta);
    w.tab_ = std::move(tab);
    return w;
}

Weight Weight::phi_1(GridFunction tab) {
    Weight w(Kind::phi_1);
    w.tab_ = std::move(tab);
    return w;
}

Weight Weight::custom(std::function<double(double)> fn) {
    Weight w(Kind::custom);
    w.fn_ = std::move(fn);
    return w;
}

namespace {

// int_0^d t^p dt
double power_primitive(double p, double d) {
    return std::pow(d, p + 1.0) / (p + 1.0);
}

// int_0^d t^p (1 + |log t|) dt for 0 < d; splits at t = 1 where |log|
// changes branch. int t^p log t = t^{p+1} log t/(p+1) - t^{p+1}/(p+1)^2.
double power_log_primitive(double p, double d) {
    if (d <= 0.0) return 0.0;
    auto plain = [p](double t) { return std::pow(t, p + 1.0) / (p + 1.0); };
    auto tlog = [p](double t) {
        double tp = std::pow(t, p + 1.0);
        return tp * std::log(t) / (p + 1.0) - tp / ((p + 1.0) * (p + 1.0));
    };
    if (d <= 1.0) {
        // |log t| = -log t on (0, 1]; the t^p log t primitive vanishes at 0
        return plain(d) - tlog(d);
    }
    double below = plain(1.0) - tlog(1.0);
    return below + (plain(d) - plain(1.0)) + (tlog(d) - tlog(1.0));
}

// integral of (R - x)^p [1 + |log(R - x)|] over [lo, hi] with lo,hi <= R
double right_side_integral(double R, double p, bool with_log, double lo, double hi) {
    double d_hi = R - lo; // larger distance
    double d_lo = R - hi;
    if (with_log)
        return power_log_primitive(p, d_hi) - power_log_primitive(p, d_lo);
    return power_primitive(p, d_hi) - power_primitive(p, d_lo);
}

double delta_family_integral(double R, double p, bool with_log, double lo, double hi) {
    if (lo >= hi) return 0.0;
    lo = std::max(lo, -R);
    hi = std::min(hi, R);
    if (lo >= 0.0) return right_side_integral(R, p, with_log, lo, hi);
    if (hi <= 0.0) return right_side_integral(R, p, with_log, -hi, -lo);
    return right_side_integral(R, p, with_log, 0.0, -lo) +
           right_side_integral(R, p, with_log, 0.0, hi);
}

double tab_integral(const GridFunction& tab, double lo, double hi) {
    // trapezoid of the piecewise-linear interpolant; exact because cell
    // bounds are interior to the linear segments
    double mid = 0.5 * (lo + hi);
    double a = tab.eval(lo), m = tab.eval(mid), b = tab.eval(hi);
    return 0.25 * (a + m) * (hi - lo) + 0.25 * (m + b) * (hi - lo);
}

} // namespace

double Weight::cell_integral(const GradedGrid& grid, double lo, double hi) const {
    switch (kind_) {
        case Kind::one: return hi - lo;
        case Kind::delta_s:
        case Kind::delta_pow:
            return delta_family_integral(grid.R(), p_, false, lo, hi);
        case Kind::delta_s_log:
            return delta_family_integral(grid.R(), p_, true, lo, hi);
        case Kind::phi_delta:
        case Kind::phi_1: return tab_integral(tab_, lo, hi);
        case Kind::custom: return gl_integrate(fn_, lo, hi, 4);
    }
    return 0.0;
}

double Weight::eval(const GradedGrid& grid, double x) const {
    double d = grid.R() - std::abs(x);
    switch (kind_) {
        case Kind::one: return 1.0;
        case Kind::delta_s:
        case Kind::delta_pow: return std::pow(d, p_);
        case Kind::delta_s_log: return std::pow(d, p_) * (1.0 + std::abs(std::log(d)));
        case Kind::phi_delta:
        case Kind::phi_1: return tab_.eval(x);
        case Kind::custom: return fn_(x);
    }
    return 0.0;
}

double weighted_norm(const GridFunction& u, const Weight& w, double p) {
    if (!(p >= 1.0)) throw ConfigError("weighted_norm: need p >= 1");
    const GradedGrid& g = u.grid();
    double acc = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        double ui = std::abs(u[i]);
        if (ui == 0.0) continue;
        acc += std::pow(ui, p) * w.cell_integral(g, g.cell_lo(i), g.cell_hi(i));
    }
    return p == 1.0 ? acc : std::pow(acc, 1.0 / p);
}

double lp_norm(const GridFunction& u, double p) {
    return weighted_norm(u, Weight::one(), p);
}

void save_csv(const GridFunction& u, const std::string& path, double s) {
    std::ofstream out(path);
    if (!out) throw ConfigError("save_csv: cannot open " + path);
    const GradedGrid& g = u.grid();
    char buf[160];
    std::snprintf(buf, sizeof(buf), "# N=%d q=%.17g R=%.17g s=%.17g\n", g.size(),
                  g.grading(), g.R(), s);
    out << buf << "node,value\n";
    for (int i = 0; i < g.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", g.node(i), u[i]);
        out << buf;
    }
}

GridFunction load_csv(const std::string& path, double* s_out) {
    std::ifstream in(path);
    if (!in) throw ConfigError("load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# N=", 0) != 0)
        throw ConfigError("load_csv: missing header in " + path);
    int N = 0;
    double q = 0, R = 0, s = 0;
    if (std::sscanf(line.c_str(), "# N=%d q=%lf R=%lf s=%lf", &N, &q, &R, &s) != 4)
        throw ConfigError("load_csv: malformed header in " + path);
    if (s_out) *s_out = s;
    std::getline(in, line); // column names
    GridPtr grid = build_graded_grid(R, N, q);
    Eigen::VectorXd v(N);
    for (int i = 0; i < N; ++i) {
        if (!std::getline(in, line)) throw ConfigError("load_csv: truncated file");
        double node = 0, val = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf", &node, &val) != 2)
            throw ConfigError("load_csv: malformed row");
        v[i] = val;
    }
    return GridFunction(std::move(grid), std::move(v));
}

} // namespace fraclab
