#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fraclab/errors.hpp"
#include "fraclab/special_functions.hpp"

namespace fraclab {

// Ball (interval for n = 1) of radius R centered at the origin.
struct BallDomain {
    BallDomain(int n, double R);
    int n;
    double R;

    double boundary_distance_1d(double x) const { return std::max(R - std::abs(x), 0.0); }
};

double boundary_distance(const BallDomain& domain, const Point& x);

// 1D node set on (-R, R) algebraically refined toward both endpoints:
//   x_i = R sign(t_i) (1 - (1-|t_i|)^q),  t_i uniform in (-1, 1).
// Cell bounds sit at node midpoints; the outermost cells abut +-R, which are
// never nodes themselves.
class GradedGrid {
  public:
    GradedGrid(double R, int N, double q);

    double R() const { return R_; }
    int size() const { return N_; }
    double grading() const { return q_; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& cell_bounds() const { return bounds_; }

    double node(int i) const { return nodes_[i]; }
    double cell_lo(int i) const { return bounds_[i]; }
    double cell_hi(int i) const { return bounds_[i + 1]; }
    double cell_width(int i) const { return bounds_[i + 1] - bounds_[i]; }
    double delta(int i) const { return R_ - std::abs(nodes_[i]); }
    double min_delta() const;
    double max_cell_width() const;

    // index of the cell containing x (clamped to [0, N-1])
    int cell_of(double x) const;

  private:
    double R_;
    int N_;
    double q_;
    std::vector<double> nodes_;
    std::vector<double> bounds_;
};

using GridPtr = std::shared_ptr<const GradedGrid>;

GridPtr build_graded_grid(double R, int N, double q);

// grading exponent that resolves the delta^s boundary profile, capped at 6
double default_grading(double s);

// Real values on grid nodes, implicitly zero outside the domain.
class GridFunction {
  public:
    GridFunction() = default;
    GridFunction(GridPtr grid, Eigen::VectorXd values);
    static GridFunction from_function(GridPtr grid, const std::function<double(double)>& f);
    static GridFunction zero(GridPtr grid);

    const GradedGrid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    const Eigen::VectorXd& values() const { return values_; }
    Eigen::VectorXd& values() { return values_; }
    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_[i]; }

    // piecewise-linear evaluation, zero outside (-R, R) and tied to zero at
    // the endpoints
    double eval(double x) const;

    double max_abs() const { return values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0; }

  private:
    GridPtr grid_;
    Eigen::VectorXd values_;
};

// Weight for the weighted Lebesgue norms. The delta-power family carries
// exact cell antiderivatives; tabulated weights integrate their
// piecewise-linear interpolant; custom callables get per-cell quadrature.
class Weight {
  public:
    enum class Kind { one, delta_s, delta_s_log, delta_pow, phi_delta, phi_1, custom };

    static Weight one();
    static Weight delta_s(double s);
    static Weight delta_s_log(double s);        // delta^s (1 + |log delta|)
    static Weight delta_pow(double p);          // delta^p, p > -1
    static Weight phi_delta(GridFunction tab);
    static Weight phi_1(GridFunction tab);
    static Weight custom(std::function<double(double)> fn);

    Kind kind() const { return kind_; }
    double exponent() const { return p_; }
    const GridFunction& table() const { return tab_; }

    // integral of the weight over [lo, hi] inside (-R, R)
    double cell_integral(const GradedGrid& grid, double lo, double hi) const;

    double eval(const GradedGrid& grid, double x) const;

  private:
    Weight(Kind k) : kind_(k) {}
    Kind kind_;
    double p_ = 0.0;
    bool with_log_ = false;
    GridFunction tab_;
    std::function<double(double)> fn_;
};

// || |u|^p w ||^{1/p} with per-cell piecewise-constant |u|^p against exact
// (or interpolated) weight cell integrals
double weighted_norm(const GridFunction& u, const Weight& w, double p);

// plain L^p norm shortcut
double lp_norm(const GridFunction& u, double p);

// CSV round trip: header line with N, q, R, s then "node,value" rows
void save_csv(const GridFunction& u, const std::string& path, double s);
GridFunction load_csv(const std::string& path, double* s_out = nullptr);

} // namespace fraclab
