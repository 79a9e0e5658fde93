#pragma once

#include <functional>
#include <vector>

namespace fraclab {

// Gauss-Legendre rule on [-1, 1]; nodes/weights computed once per order and
// cached. Orders up to 64 are used in this project.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_legendre(int order);

// integral of f over [a, b] with an n-point Gauss-Legendre rule
double gl_integrate(const std::function<double(double)>& f, double a, double b,
                    int order);

struct QuadResult {
    double value = 0.0;
    double err_est = 0.0;
    bool converged = true;
};

// tanh-sinh (double-exponential) quadrature on (a, b). Handles integrable
// algebraic/log singularities at either endpoint. The integrand receives the
// abscissa plus its exact distances to both endpoints, so that x - a can be
// formed without cancellation when f is singular there.
QuadResult de_integrate(const std::function<double(double, double, double)>& f,
                        double a, double b, double rel_tol = 1e-12,
                        int max_level = 9);

// convenience wrapper for integrands that only need the abscissa
QuadResult de_integrate(const std::function<double(double)>& f, double a,
                        double b, double rel_tol = 1e-12, int max_level = 9);

// classic adaptive Simpson; used mostly by test oracles
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 40);

} // namespace fraclab
