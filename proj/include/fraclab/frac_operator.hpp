#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fraclab/domain_grid.hpp"
#include "fraclab/special_functions.hpp"

namespace fraclab {

// Scalar function on the line together with the tail information the
// singular-integral evaluator needs. Compact fields vanish outside
// [-support_radius, support_radius]; power fields behave like
// tail_coeff |y|^{tail_exponent} for large |y|.
struct PointwiseField {
    std::function<double(double)> f;
    enum class Tail { zero_outside, power_law } tail = Tail::zero_outside;
    double support_radius = 1.0;
    double tail_exponent = 0.0;
    double tail_coeff = 1.0;
    std::vector<double> breakpoints; // points where f is not C^2

    static PointwiseField compact(std::function<double(double)> fn, double support,
                                  std::vector<double> breaks = {});
    static PointwiseField power(std::function<double(double)> fn, double exponent,
                                double coeff = 1.0, std::vector<double> breaks = {0.0});
};

struct PointwiseResult {
    double value = 0.0;
    double err_est = 0.0;
    bool accuracy_warning = false;
};

// c_{1,s} PV int (u(x)-u(y)) / |x-y|^{1+2s} dy.  The principal value is
// regularized by the symmetric second difference on |y-x| < radius_split,
// the middle range is integrated panel-by-panel with tanh-sinh quadrature,
// and the tail is summed analytically from the declared tail behaviour.
PointwiseResult apply_pointwise(const PointwiseField& u, FracOrder s, double x,
                                double radius_split, double tol = 1e-10);

// Stiffness matrix of the bilinear form
//   a(u,v) = (c_{1,s}/2) iint (u(x)-u(y))(v(x)-v(y)) |x-y|^{-1-2s} dy dx
// over hat functions vanishing outside (-R, R). Panels are integrated in
// closed form: each hat is a combination of kinks, so
//   A_ij = sum_{l,m} w_l w_m Q(t_l - t_m)
// with Q the second antiderivative of the kernel of (-Laplace)^s |.|, i.e.
// Q(z) = gamma_1/2 |z|^{3-2s} / ((2-2s)(3-2s)) and z^2 log|z| / (2 pi) at
// s = 1/2.
Eigen::MatrixXd assemble_stiffness_nodes(const std::vector<double>& nodes,
                                         double box_lo, double box_hi, FracOrder s);

class OperatorMatrix {
  public:
    OperatorMatrix(GridPtr grid, FracOrder s, Eigen::MatrixXd A, Eigen::VectorXd mass);

    const GradedGrid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    double order() const { return s_; }
    int size() const { return static_cast<int>(mass_.size()); }
    const Eigen::MatrixXd& matrix() const { return A_; }
    const Eigen::VectorXd& mass() const { return mass_; }

    const Eigen::LLT<Eigen::MatrixXd>& llt() const; // lazy, thread-safe

    double quadratic_form(const Eigen::VectorXd& v) const { return v.dot(A_ * v); }

    struct Validation {
        double symmetry_rel = 0.0;
        bool positive_definite = false;
        double max_offdiag = 0.0;      // most positive off-diagonal entry
        double min_rowsum = 0.0;
        bool m_matrix = false;
    };
    Validation validate(double tol = 1e-10) const;

  private:
    GridPtr grid_;
    double s_;
    Eigen::MatrixXd A_;
    Eigen::VectorXd mass_;
    mutable std::unique_ptr<Eigen::LLT<Eigen::MatrixXd>> llt_;
    mutable std::once_flag llt_once_;
};

OperatorMatrix assemble_galerkin(GridPtr grid, FracOrder s, int dense_cap = 8192);

// A u = M f with zero exterior values
GridFunction solve_dirichlet(const OperatorMatrix& A, const GridFunction& f);

struct Eigenpair {
    double lambda1 = 0.0;
    GridFunction phi1;
};

// inverse power iteration on A phi = lambda M phi
Eigenpair eigenpair(const OperatorMatrix& A, double tol = 1e-12, int max_iter = 500);

// | (-L)^s(uv)(x) - u(x)(-L)^s v(x) - v(x)(-L)^s u(x)
//   + A_s int (u(x)-u(y))(v(x)-v(y))|x-y|^{-1-2s} dy |  with A_s = c_{1,s}
double eilertsen_residual(const PointwiseField& u, const PointwiseField& v,
                          FracOrder s, double x, double radius_split = 0.25);

// binary dump, 32-byte header: magic, N, s, R (8-byte little-endian fields)
void dump_matrix(const OperatorMatrix& A, const std::string& path);

} // namespace fraclab
