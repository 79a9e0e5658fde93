#pragma once

#include <vector>

#include "fraclab/schrodinger.hpp"

namespace fraclab {

// boundary data family f = delta^{-a} (1 + |log delta|)^{-b}; the log factor
// is regularized through 1 + |log| so the profile is smooth away from the
// boundary
struct PowerLogData {
    double a = 0.0;
    double b = 0.0;
    double eval(double delta) const;
    GridFunction on_grid(GridPtr grid) const;

    // exact integrability of f delta^s (the data class)
    bool admissible(double s) const;
    // exact integrability of f delta^s (1 + |log delta|) (the trace classifier)
    bool classifier_finite(double s) const;
};

// cutoff integrals int_{delta > eps} f delta^s (1+|log|)^{w} d delta used as
// the numeric side of the classification
double classifier_cutoff_integral(const PowerLogData& f, double s, double R,
                                  double eps, bool with_log);

// least-squares exponent of sup|u| over dyadic boundary shells
struct BoundaryFit {
    std::vector<double> deltas; // shell centers
    std::vector<double> sups;
    double alpha = 0.0;         // fitted exponent
    double fit_residual = 0.0;  // max deviation of the fit in log2 units
    int levels() const { return static_cast<int>(deltas.size()); }
};

BoundaryFit fit_boundary_exponent(const GridFunction& u, int discard_cells = 2,
                                  int min_levels = 6);

// min over interior nodes of u / (delta^s ||f delta^s||_1) for f >= 0
double hopf_constant(const GridFunction& u, const GridFunction& f, double s);

struct BlowupReport {
    std::vector<double> k_levels;
    std::vector<double> center_values;
    std::vector<double> l1_norms;
    bool data_admissible = false;   // exact integrability of f delta^s
    bool classified_blowup = false; // monotone growth >= 1.2 per level
    std::vector<double> growth_ratios;
};

// u_k = solve_dirichlet(min(f, k)) along the level schedule
BlowupReport blowup_experiment(const PowerLogData& f, FracOrder s,
                               const std::vector<double>& k_levels,
                               const OperatorMatrix& A);

struct TraceVerdict {
    bool classifier_finite = false;
    bool numeric_stable = false;
    bool match = false;
    std::vector<int> resolutions;
    std::vector<double> trace_norms; // ||u/delta^s||_1 per resolution
    double last_increment = 0.0;     // relative change at the finest pair
};

// compares the exact classifier against refinement stability of the trace
// norm; stable means the last relative increment falls below the pinned
// threshold
TraceVerdict trace_equivalence_experiment(const PowerLogData& f, FracOrder s,
                                          const std::vector<int>& resolutions,
                                          double R = 1.0,
                                          double stability_threshold = 0.02);

// same classification for a whole family, sharing one operator per
// resolution
std::vector<TraceVerdict> trace_equivalence_experiment(
    const std::vector<PowerLogData>& fs, FracOrder s,
    const std::vector<int>& resolutions, double R = 1.0,
    double stability_threshold = 0.02);

// C_U = f_sup R(x0)^{s-eps} / (gamma_{s+eps} + C_V); R_dist is the maximal
// distance from the boundary point to the closure of the domain
double barrier_bound(FracOrder s, double eps, double C_V, double f_sup,
                     double R_dist);

struct FlatnessCheck {
    double bound = 0.0;     // barrier value C_U
    double sup_ratio = 0.0; // max over nodes of u / delta^{s+eps}
    double margin = 0.0;    // bound - sup_ratio
    BoundaryFit fit;
};

// barrier check for V = C_V delta^{-2s} with bounded data; the fitted
// boundary exponent accompanies the sup bound
FlatnessCheck verify_flatness(double C_V, double f_sup, double eps,
                              const SolveReport& rep, FracOrder s);

// max |(-L)^s (R^2-x^2)^{s-1}| at the sample points, relative to the local
// scale |u(x)| delta(x)^{-2s}
double large_solution_residual(FracOrder s, const std::vector<double>& points,
                               double R = 1.0);

} // namespace fraclab
