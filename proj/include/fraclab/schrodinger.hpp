#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fraclab/frac_operator.hpp"
#include "fraclab/greens.hpp"

namespace fraclab {

// Nonnegative potential. Evaluation may return +infinity (infinite well
// outside the domain, Poeschl-Teller rings); the truncated solves cap it.
class Potential {
  public:
    enum class Kind { zero, bounded, power_singular, poschl_teller, tabulated, infinite_well };

    static Potential zero();
    static Potential bounded(std::function<double(double)> fn, std::string label = "bounded");
    static Potential power_singular(double C_V, double p);
    static Potential poschl_teller(double V0, double alpha, double k, double mu);
    static Potential tabulated(GridFunction tab);
    static Potential infinite_well(Potential inner);

    Kind kind() const { return kind_; }
    const std::string& label() const { return label_; }
    double singular_coeff() const { return c_; }
    double singular_power() const { return p_; }

    // x with its distance to the boundary of Omega; x outside Omega gives
    // +infinity for wells and 0 otherwise
    double eval(double x, double delta) const;
    Eigen::VectorXd at_nodes(const GradedGrid& grid) const;

  private:
    explicit Potential(Kind k) : kind_(k) {}
    Kind kind_;
    std::string label_;
    std::function<double(double)> fn_;
    double c_ = 0.0, p_ = 0.0;
    double v0_ = 0.0, alpha_ = 0.0, kk_ = 0.0, mu_ = 0.0;
    GridFunction tab_;
    std::shared_ptr<Potential> inner_;
};

// potential grammar: "zero" | "power C p" | "poschl V0 alpha k mu"
//                    | "bounded <id>" | "well <inner...>"
Potential parse_potential(const std::string& spec);

struct SolveNorms {
    double u_L1 = 0.0;
    double Vu_deltas_L1 = 0.0;
    double u_over_deltas_L1 = 0.0;
    double Vu_phidelta_L1 = 0.0;
    double u_L2 = 0.0;
    double energy = 0.0;
};

struct TruncationStep {
    double k = 0.0, m = 0.0;
    double inc_L1 = 0.0, inc_Vu = 0.0;
};

struct SolveReport {
    GridFunction u;
    SolveNorms norms;
    std::vector<TruncationStep> history;
    bool positive = false;
    bool converged = false;
    bool u_over_delta_finite = false;
    double data_norm_deltas = 0.0;   // ||f delta^s||_1
    double data_norm_phidelta = 0.0; // ||f phi_delta||_1 (discrete phi_delta)
    // fitted constants of the four weighted estimates
    double c_u_L1 = 0.0, c_Vu_deltas = 0.0, c_u_over_deltas = 0.0, c_Vu_phidelta = 0.0;
};

// one truncated level: (A + M diag(min(V,k))) u = M (min(f_+,m) - min(f_-,m))
GridFunction solve_truncated(const Potential& V, const GridFunction& f, double k,
                             double m, const OperatorMatrix& A);

// doubling schedule k = m = 2^j until the L1 and ||V u delta^s|| increments
// drop below tol; signed data is split f = f_+ - f_- with two nonnegative
// runs
SolveReport solve(const Potential& V, const GridFunction& f, const OperatorMatrix& A,
                  double tol = 1e-10, int level_cap = 60);

// direct untruncated linear solve (cross-check for the split scheme)
GridFunction solve_direct(const Potential& V, const GridFunction& f,
                          const OperatorMatrix& A);

struct BatteryMember {
    GridFunction phi;
    GridFunction psi; // (-L)^s phi
    bool nonneg = false;
    std::string label;
};

struct TestBattery {
    std::vector<BatteryMember> members;
    int size() const { return static_cast<int>(members.size()); }
};

// the default twelve bounded psi profiles
std::vector<std::pair<std::string, std::function<double(double)>>>
default_battery_profiles(double R);

// phi = A^{-1} M psi: X^s membership holds exactly for the discrete pair
TestBattery battery_discrete(const OperatorMatrix& A);

// phi = G_s psi by kernel quadrature (continuum route)
TestBattery battery_green(const BallDomain& domain, FracOrder s, GridPtr grid);

// max over the battery of |sum u psi + sum V u phi - sum f phi| / ||f d^s||
double very_weak_residual(const SolveReport& rep, const Potential& V,
                          const GridFunction& f, const TestBattery& battery);

struct KatoMargins {
    double sign_margin = 0.0;      // min over battery, |u| variant
    double sign_plus_margin = 0.0; // u_+ variant
    double scale = 0.0;
};

// margins of int sign(u) g phi - int |u| (-L)^s phi over nonnegative battery
// members; u must solve the V = 0 problem with data g
KatoMargins kato_margin(const GridFunction& u, const GridFunction& g,
                        const TestBattery& battery);

struct ContractionMargins {
    double positive_part = 0.0; // ||(f1-f2)_+||_w - ||(u1-u2)_+||_w
    double plain = 0.0;         // ||f1-f2||_w - ||u1-u2||_w
    double scale = 0.0;
};

// u_i + lambda L_V u_i = f_i; weighted nodal L^1 norms with weight one or
// phi_1
ContractionMargins resolvent_contraction_margin(double lambda, const GridFunction& f1,
                                                const GridFunction& f2,
                                                const Potential& V, const Weight& w,
                                                const OperatorMatrix& A);

// symmetric square root of the stiffness matrix by full eigendecomposition
class SqrtOperator {
  public:
    explicit SqrtOperator(const OperatorMatrix& A);
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

  private:
    Eigen::MatrixXd vecs_;
    Eigen::VectorXd sqrt_vals_;
};

struct StroockVaropoulosMargin {
    double margin = 0.0;
    double scale = 0.0;
};

// <|v|^{p-2} v, A v> - (4(p-1)/p^2) || A^{1/2} |v|^{p/2} ||^2
StroockVaropoulosMargin stroock_varopoulos_margin(const GridFunction& v, double p,
                                                  const OperatorMatrix& A,
                                                  const SqrtOperator& root);

struct SpikeSpec {
    double amplitude = 0.05;
    double exponent = 0.95; // g(x) = amplitude |x-center|^{-exponent}
    double center = 0.3;
};

struct CounterexampleReport {
    std::vector<int> levels;
    std::vector<double> q_norms;
    std::vector<double> growth_ratios;
    double c0 = 0.0;
    double ball_radius = 0.0;
    double min_u2_on_ball = 0.0;
    bool lower_bound_ok = false;
    bool grew = false;
};

// the unbounded-potential construction: V2 = V1 + g with an L^p spike that
// fails to lie in L^q; ||V2 u2||_q must grow without bound under refinement
// while u2 stays above c0/4 near the spike
CounterexampleReport counterexample_experiment(FracOrder s, const Potential& V1,
                                               const SpikeSpec& g, double q_exponent,
                                               const std::vector<int>& levels,
                                               double R = 1.0);

} // namespace fraclab
