#pragma once

#include <array>
#include <memory>
#include <vector>

#include "fraclab/errors.hpp"

namespace fraclab {

// Fractional order s strictly inside (0, 1).
class FracOrder {
  public:
    explicit FracOrder(double s);
    double value() const { return s_; }

  private:
    double s_;
};

// Query for the radial-power eigenconstant gamma_beta, with the pole at
// beta = 2s and the even integers excluded.
struct GammaBetaQuery {
    GammaBetaQuery(int n, FracOrder s, double beta);
    int n;
    FracOrder s;
    double beta;
};

// ln Gamma(x) for x > 0, relative error below 1e-13 on [1e-3, 1e3]
double log_gamma(double x);

// Gamma(x) for x > 0
double gamma_fn(double x);

// ln|Gamma(x)| plus the sign of Gamma(x), any non-integer x (reflection
// formula below zero)
struct SignedLogGamma {
    double log_abs;
    int sign;
};
SignedLogGamma signed_log_gamma(double x);

// c_{n,s} = 4^s Gamma(n/2+s) / (pi^{n/2} |Gamma(-s)|), the constant that
// makes the singular-integral operator have Fourier symbol |xi|^{2s}
double normalization_constant(int n, FracOrder s);

// gamma_beta = 2^{2s} Gamma((n+beta)/2) Gamma(s-beta/2)
//              / ( Gamma(-beta/2) Gamma(-s+(beta+n)/2) ),
// the eigenconstant in (-Laplace)^s |x|^beta = gamma_beta |x|^{beta-2s}
double gamma_beta(const GammaBetaQuery& q);

// value of (-Laplace)^s (R^2-|x|^2)^s_+ inside the ball (a constant)
double torsion_constant(int n, FracOrder s);

using Point = std::array<double, 3>;

// Ball Green kernel
//   G(x,y) = kappa_{n,s} |x-y|^{2s-n} int_0^{r0} t^{s-1} (1+t)^{-n/2} dt,
//   r0 = (R^2-|x|^2)(R^2-|y|^2) / (R^2 |x-y|^2).
// The incomplete integral is evaluated through theta = atan(sqrt(r0)) as
// 2 int_0^theta sin^{2s-1} cos^{n-2s-1}, which is uniformly well conditioned
// in r0; for n = 1 this also produces the logarithmic (s = 1/2) and bounded
// (s > 1/2) diagonal behaviour of the same classical formula.
class GreenKernel {
  public:
    GreenKernel(int n, FracOrder s, double R);

    // |x-y| together with R^2-|x|^2 and R^2-|y|^2 (must be positive)
    double eval(double dist, double x_gap2, double y_gap2) const;

    double eval_1d(double x, double y) const;
    double eval_nd(const Point& x, const Point& y) const;

    // incomplete profile integral F(r0), exposed for tests
    double profile(double r0) const;

    int dim() const { return n_; }
    double order() const { return s_; }
    double radius() const { return R_; }
    double kappa() const { return kappa_; }

    struct Profile;

  private:
    int n_;
    double s_, R_, kappa_;
    std::shared_ptr<const Profile> profile_;
    double profile_value(double ratio) const; // ratio = sqrt(r0)
};

// one-shot evaluation (constructs the kernel evaluator internally)
double green_kernel(int n, FracOrder s, double R, const Point& x, const Point& y);
double green_kernel_1d(FracOrder s, double R, double x, double y);

} // namespace fraclab
