#pragma once

#include <vector>

#include "fraclab/schrodinger.hpp"

namespace fraclab {

// Whole-line node set: the inner grid on (-R, R) extended by nodes at +-R
// and exterior nodes on (R, L) graded toward the boundary kink, truncated
// with a zero condition at +-L.
class ExtendedGrid {
  public:
    ExtendedGrid(GridPtr inner, double L, int exterior_per_side, double q_ext = 2.0);

    const GradedGrid& inner() const { return *inner_; }
    GridPtr inner_ptr() const { return inner_; }
    double inner_radius() const { return inner_->R(); }
    double outer_halfwidth() const { return L_; }
    int size() const { return static_cast<int>(nodes_.size()); }
    const std::vector<double>& nodes() const { return nodes_; }
    double node(int i) const { return nodes_[i]; }
    double cell_width(int i) const { return bounds_[i + 1] - bounds_[i]; }
    // index of inner node i within the extended node set
    int inner_index(int i) const { return inner_offset_ + i; }

    // integral of the piecewise-linear interpolant of v over R < |x| < L
    double exterior_mass(const Eigen::VectorXd& v) const;
    // nodal restriction to the inner grid
    Eigen::VectorXd restrict_inner(const Eigen::VectorXd& v) const;

  private:
    GridPtr inner_;
    double L_;
    int inner_offset_ = 0;
    std::vector<double> nodes_;
    std::vector<double> bounds_;
};

// Galerkin matrix on (-L, L) with zero exterior beyond +-L, plus the lumped
// mass of the extended cells
struct WholeSpaceOperator {
    WholeSpaceOperator(const ExtendedGrid& ext, FracOrder s);
    const ExtendedGrid* ext;
    double s;
    Eigen::MatrixXd A;
    Eigen::VectorXd mass;
};

// (A + M diag(k ^ V)) u = M f with V = V_inner inside Omega and +infinity
// outside; f must vanish outside Omega
Eigen::VectorXd whole_space_solve(const Potential& V_inner, double k,
                                  const GridFunction& f, const WholeSpaceOperator& W);

struct WellLimitRow {
    double k = 0.0;
    double l1_gap = 0.0;        // ||u_k - u_D||_{L^1(Omega)}
    double exterior_mass = 0.0; // integral of u_k over Omega^c
    double k_times_mass = 0.0;
};

struct WellLimitReport {
    std::vector<WellLimitRow> rows;
    double restricted_l1 = 0.0; // ||u_D||_{L^1(Omega)}
    bool gaps_decreasing = false;
    double fitted_C_min = 0.0, fitted_C_max = 0.0; // spread of k * mass
};

// convergence of the finite-well whole-line solves toward the restricted
// Dirichlet solution with the same interior potential
WellLimitReport well_limit_experiment(const GridFunction& f,
                                      const std::vector<double>& k_schedule,
                                      const WholeSpaceOperator& W,
                                      const Potential& V_inner);

} // namespace fraclab
