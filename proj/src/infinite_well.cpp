#include "fraclab/infinite_well.hpp"

#include <algorithm>
#include <cmath>

namespace fraclab {

ExtendedGrid::ExtendedGrid(GridPtr inner, double L, int exterior_per_side,
                           double q_ext)
    : inner_(std::move(inner)), L_(L) {
    const double R = inner_->R();
    if (!(L >= 4.0 * R)) throw ConfigError("ExtendedGrid: need L >= 4R");
    if (exterior_per_side < 4) throw ConfigError("ExtendedGrid: too few exterior nodes");
    std::vector<double> right;
    for (int j = 1; j <= exterior_per_side; ++j) {
        double t = static_cast<double>(j) / (exterior_per_side + 1);
        right.push_back(R + (L - R) * std::pow(t, q_ext));
    }
    nodes_.clear();
    for (auto it = right.rbegin(); it != right.rend(); ++it) nodes_.push_back(-*it);
    nodes_.push_back(-R);
    inner_offset_ = static_cast<int>(nodes_.size());
    for (double x : inner_->nodes()) nodes_.push_back(x);
    nodes_.push_back(R);
    for (double x : right) nodes_.push_back(x);

    bounds_.resize(nodes_.size() + 1);
    bounds_.front() = -L;
    bounds_.back() = L;
    for (std::size_t i = 1; i < nodes_.size(); ++i)
        bounds_[i] = 0.5 * (nodes_[i - 1] + nodes_[i]);
}

double ExtendedGrid::exterior_mass(const Eigen::VectorXd& v) const {
    const double R = inner_->R();
    // piecewise-linear interpolant through (nodes, v), zero at +-L,
    // integrated over [-L, -R] and [R, L] with exact splits at +-R
    double mass = 0.0;
    const int N = size();
    auto add_interval = [&](double xa, double va, double xb, double vb) {
        // clip to |x| > R
        for (int side = 0; side < 2; ++side) {
            double lo = side == 0 ? std::max(xa, R) : xa;
            double hi = side == 0 ? xb : std::min(xb, -R);
            if (hi <= lo) continue;
            double ta = (lo - xa) / (xb - xa), tb = (hi - xa) / (xb - xa);
            double vlo = va + (vb - va) * ta, vhi = va + (vb - va) * tb;
            mass += 0.5 * (vlo + vhi) * (hi - lo);
        }
    };
    add_interval(-L_, 0.0, nodes_[0], v[0]);
    for (int i = 0; i + 1 < N; ++i)
        add_interval(nodes_[i], v[i], nodes_[i + 1], v[i + 1]);
    add_interval(nodes_[N - 1], v[N - 1], L_, 0.0);
    return mass;
}

Eigen::VectorXd ExtendedGrid::restrict_inner(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(inner_->size());
    for (int i = 0; i < inner_->size(); ++i) out[i] = v[inner_index(i)];
    return out;
}

WholeSpaceOperator::WholeSpaceOperator(const ExtendedGrid& ext_, FracOrder s_)
    : ext(&ext_), s(s_.value()) {
    A = assemble_stiffness_nodes(ext_.nodes(), -ext_.outer_halfwidth(),
                                 ext_.outer_halfwidth(), s_);
    mass.resize(ext_.size());
    for (int i = 0; i < ext_.size(); ++i) mass[i] = ext_.cell_width(i);
}

Eigen::VectorXd whole_space_solve(const Potential& V_inner, double k,
                                  const GridFunction& f, const WholeSpaceOperator& W) {
    if (!(k >= 1.0)) throw ConfigError("whole_space_solve: k >= 1 required");
    const ExtendedGrid& ext = *W.ext;
    if (f.grid_ptr() != ext.inner_ptr())
        throw ConfigError("whole_space_solve: data must live on the inner grid");
    const double R = ext.inner_radius();
    const int N = ext.size();
    Eigen::VectorXd Vk(N), rhs = Eigen::VectorXd::Zero(N);
    for (int i = 0; i < N; ++i) {
        double x = ext.node(i);
        double delta = R - std::abs(x);
        Vk[i] = (delta > 0.0) ? std::min(V_inner.eval(x, delta), k) : k;
    }
    for (int i = 0; i < ext.inner().size(); ++i)
        rhs[ext.inner_index(i)] = f[i];

    Eigen::MatrixXd B = W.A;
    B.diagonal() += W.mass.cwiseProduct(Vk);
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() != Eigen::Success)
        throw InvariantViolation("whole_space_solve: factorization failed");
    return llt.solve(W.mass.cwiseProduct(rhs));
}

WellLimitReport well_limit_experiment(const GridFunction& f,
                                      const std::vector<double>& k_schedule,
                                      const WholeSpaceOperator& W,
                                      const Potential& V_inner) {
    const ExtendedGrid& ext = *W.ext;
    GridPtr inner = ext.inner_ptr();

    // restricted-domain reference with the same interior potential
    OperatorMatrix A_in = assemble_galerkin(inner, FracOrder(W.s));
    GridFunction u_D = solve_direct(V_inner, f, A_in);

    WellLimitReport rep;
    rep.restricted_l1 = lp_norm(u_D, 1.0);
    rep.fitted_C_min = 1e300;
    rep.fitted_C_max = 0.0;
    for (double k : k_schedule) {
        Eigen::VectorXd u = whole_space_solve(V_inner, k, f, W);
        WellLimitRow row;
        row.k = k;
        Eigen::VectorXd diff = ext.restrict_inner(u) - u_D.values();
        row.l1_gap = lp_norm(GridFunction(inner, std::move(diff)), 1.0);
        row.exterior_mass = ext.exterior_mass(u);
        row.k_times_mass = k * row.exterior_mass;
        rep.fitted_C_min = std::min(rep.fitted_C_min, row.k_times_mass);
        rep.fitted_C_max = std::max(rep.fitted_C_max, row.k_times_mass);
        rep.rows.push_back(row);
    }
    rep.gaps_decreasing = rep.rows.size() >= 2;
    for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i)
        if (!(rep.rows[i + 1].l1_gap < rep.rows[i].l1_gap))
            rep.gaps_decreasing = false;
    return rep;
}

} // namespace fraclab
