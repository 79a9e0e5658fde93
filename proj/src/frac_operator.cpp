#include "fraclab/frac_operator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "fraclab/parallel.hpp"
#include "fraclab/quadrature.hpp"

namespace fraclab {

namespace {
constexpr double kPi = std::numbers::pi;
}

PointwiseField PointwiseField::compact(std::function<double(double)> fn,
                                       double support, std::vector<double> breaks) {
    PointwiseField u;
    u.f = std::move(fn);
    u.tail = Tail::zero_outside;
    u.support_radius = support;
    u.breakpoints = std::move(breaks);
    u.breakpoints.push_back(-support);
    u.breakpoints.push_back(support);
    std::sort(u.breakpoints.begin(), u.breakpoints.end());
    return u;
}

PointwiseField PointwiseField::power(std::function<double(double)> fn, double exponent,
                                     double coeff, std::vector<double> breaks) {
    PointwiseField u;
    u.f = std::move(fn);
    u.tail = Tail::power_law;
    u.tail_exponent = exponent;
    u.tail_coeff = coeff;
    u.breakpoints = std::move(breaks);
    std::sort(u.breakpoints.begin(), u.breakpoints.end());
    return u;
}

namespace {

// int_Y^inf y^beta (y + c)^{-1-2s} dy for Y > 2|c|, via the binomial series
// in c/y; requires beta < 2s
double power_tail_integral(double Y, double c, double beta, double s, double tol) {
    double binom = 1.0; // C(-1-2s, k)
    double ck = 1.0;    // c^k
    double acc = 0.0;
    for (int k = 0; k < 200; ++k) {
        double denom = 2.0 * s + k - beta;
        double term = binom * ck * std::pow(Y, beta - 2.0 * s - k) / denom;
        acc += term;
        if (k > 2 && std::abs(term) < tol * std::abs(acc)) break;
        binom *= (-1.0 - 2.0 * s - k) / (k + 1.0);
        ck *= c;
    }
    return acc;
}

} // namespace

PointwiseResult apply_pointwise(const PointwiseField& u, FracOrder s_order, double x,
                                double radius_split, double tol) {
    const double s = s_order.value();
    const double cns = normalization_constant(1, s_order);
    PointwiseResult res;

    if (!(radius_split > 0.0)) throw ConfigError("apply_pointwise: radius_split must be positive");

    // keep the symmetric panel clear of kinks of u
    double r = radius_split;
    for (double b : u.breakpoints) {
        double d = std::abs(b - x);
        if (d < 1e-14) {
            res.accuracy_warning = true; // probing at a non-smooth point
            continue;
        }
        r = std::min(r, 0.45 * d);
    }

    const double ux = u.f(x);
    double err = 0.0;

    // Symmetric second difference absorbs the principal value. Below h_c the
    // float-evaluated difference is pure cancellation noise amplified by
    // h^{-1-2s}, so that head is integrated against the local quadratic
    // model of the second difference instead.
    double h_c = std::min(0.25 * r, 1e-3 * (1.0 + std::abs(x)));
    auto secdiff = [&](double h) { return 2.0 * ux - u.f(x + h) - u.f(x - h); };
    double d1 = secdiff(h_c) / (h_c * h_c);
    double d2 = secdiff(2.0 * h_c) / (4.0 * h_c * h_c);
    double curv_b = (d2 - d1) / (3.0 * h_c * h_c);
    double curv_a = d1 - curv_b * h_c * h_c;
    double total = curv_a * std::pow(h_c, 2.0 - 2.0 * s) / (2.0 - 2.0 * s) +
                   curv_b * std::pow(h_c, 4.0 - 2.0 * s) / (4.0 - 2.0 * s);
    QuadResult near = de_integrate(
        [&](double h, double, double) {
            return secdiff(h) * std::pow(h, -1.0 - 2.0 * s);
        },
        h_c, r, tol);
    err += near.err_est;
    if (!near.converged) res.accuracy_warning = true;
    total += near.value;

    // middle panels split at the kinks of u
    double W;
    if (u.tail == PointwiseField::Tail::zero_outside) {
        W = u.support_radius;
        if (std::abs(x) >= W)
            throw DomainError("apply_pointwise: probe outside the support of a compact field");
    } else {
        W = std::max(8.0 * std::abs(x), 8.0);
    }
    auto panel = [&](double a, double b) {
        if (b - a <= 0.0) return;
        QuadResult q = de_integrate(
            [&](double y, double, double) {
                return (ux - u.f(y)) * std::pow(std::abs(x - y), -1.0 - 2.0 * s);
            },
            a, b, tol);
        total += q.value;
        err += q.err_est;
        if (!q.converged) res.accuracy_warning = true;
    };
    auto run_side = [&](double lo, double hi) {
        // subdivide [lo, hi] at breakpoints
        std::vector<double> cuts{lo};
        for (double b : u.breakpoints)
            if (b > lo + 1e-15 && b < hi - 1e-15) cuts.push_back(b);
        cuts.push_back(hi);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) panel(cuts[i], cuts[i + 1]);
    };
    double left_edge = (u.tail == PointwiseField::Tail::zero_outside) ? -W : x - W;
    double right_edge = (u.tail == PointwiseField::Tail::zero_outside) ? W : x + W;
    if (x - r > left_edge) run_side(left_edge, x - r);
    if (right_edge > x + r) run_side(x + r, right_edge);

    // analytic tails
    if (u.tail == PointwiseField::Tail::zero_outside) {
        // beyond the support u == 0, so the integrand is ux * kernel
        double dr = W - x, dl = W + x;
        total += ux * (std::pow(dr, -2.0 * s) + std::pow(dl, -2.0 * s)) / (2.0 * s);
    } else {
        if (!(u.tail_exponent < 2.0 * s))
            throw DomainError("apply_pointwise: power tail requires beta < 2s");
        double Yr = right_edge;            // y > Yr, u ~ coeff * y^beta
        double Yl = -left_edge;            // y < -Yl
        double A = u.tail_coeff, beta = u.tail_exponent;
        total += ux * (std::pow(Yr - x, -2.0 * s) + std::pow(Yl + x, -2.0 * s)) / (2.0 * s);
        total -= A * power_tail_integral(Yr, -x, beta, s, tol);
        total -= A * power_tail_integral(Yl, +x, beta, s, tol);
    }

    res.value = cns * total;
    res.err_est = cns * err;
    double scale = std::max(std::abs(res.value), std::abs(cns * near.value));
    if (res.err_est > 1e-6 * std::max(scale, 1e-12)) res.accuracy_warning = true;
    return res;
}

// ---------------------------------------------------------------------------
// Galerkin assembly
// ---------------------------------------------------------------------------

namespace {

// Q'' equals the kernel of (-Laplace)^s applied to |.|/2; quadratic terms are
// immaterial because every hat has vanishing zeroth and first kink moments.
struct KinkKernel {
    double s;
    bool half; // s == 1/2
    double coef = 0.0;
    double expo = 0.0;

    explicit KinkKernel(FracOrder so) : s(so.value()) {
        half = std::abs(s - 0.5) < 1e-13;
        if (!half) {
            double g1 = gamma_beta(GammaBetaQuery(1, so, 1.0));
            coef = 0.5 * g1 / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
            expo = 3.0 - 2.0 * s;
        }
    }
    double operator()(double z) const {
        z = std::abs(z);
        if (z == 0.0) return 0.0;
        if (half) return z * z * std::log(z) / (2.0 * kPi);
        return coef * std::pow(z, expo);
    }
};

} // namespace

namespace {

// Gauss order for a separated panel pair, from the size-to-distance ratio
int far_order(double span, double dist) {
    double rho = span / dist;
    if (rho < 0.08) return 2;
    if (rho < 0.2) return 3;
    if (rho < 0.5) return 4;
    return 6;
}

struct PanelPair {
    double ax, bx, ay, by;
};

// cross integral iint phi_i(x) phi_j(y) |x-y|^{-1-2s} over one panel pair,
// bisecting the longer panel until the pair is comfortably separated
template <typename PhiX, typename PhiY>
double cross_panel(const PhiX& phix, const PhiY& phiy, double kpow, PanelPair p,
                   int depth) {
    double lx = p.bx - p.ax, ly = p.by - p.ay;
    double dist = std::max(p.ay - p.bx, p.ax - p.by);
    if (depth > 0 && std::max(lx, ly) > 1.2 * dist) {
        PanelPair q = p;
        if (lx >= ly) {
            double mid = 0.5 * (p.ax + p.bx);
            p.bx = mid;
            q.ax = mid;
        } else {
            double mid = 0.5 * (p.ay + p.by);
            p.by = mid;
            q.ay = mid;
        }
        return cross_panel(phix, phiy, kpow, p, depth - 1) +
               cross_panel(phix, phiy, kpow, q, depth - 1);
    }
    int order = far_order(std::max(lx, ly), dist);
    const GaussRule& rule = gauss_legendre(order);
    double cx = 0.5 * (p.ax + p.bx), hx = 0.5 * lx;
    double cy = 0.5 * (p.ay + p.by), hy = 0.5 * ly;
    double acc = 0.0;
    for (int qa = 0; qa < order; ++qa) {
        double x = cx + hx * rule.nodes[qa];
        double inner = 0.0;
        for (int qb = 0; qb < order; ++qb) {
            double y = cy + hy * rule.nodes[qb];
            inner += rule.weights[qb] * phiy(y) * std::pow(std::abs(x - y), kpow);
        }
        acc += rule.weights[qa] * phix(x) * inner;
    }
    return acc * hx * hy;
}

} // namespace

Eigen::MatrixXd assemble_stiffness_nodes(const std::vector<double>& nodes,
                                         double box_lo, double box_hi, FracOrder s) {
    const int N = static_cast<int>(nodes.size());
    if (N < 1) throw ConfigError("assemble_stiffness_nodes: empty node set");
    if (!(box_lo < nodes.front()) || !(nodes.back() < box_hi))
        throw ConfigError("assemble_stiffness_nodes: nodes must lie inside the box");

    std::vector<double> kink(N + 2);
    kink[0] = box_lo;
    for (int i = 0; i < N; ++i) kink[i + 1] = nodes[i];
    kink[N + 1] = box_hi;

    KinkKernel Q(s);
    const double sv = s.value();
    const double cns = normalization_constant(1, s);
    const double kpow = -1.0 - 2.0 * sv;

    // kink weights of hat i: (1/hL, -(1/hL + 1/hR), 1/hR) at kinks i, i+1, i+2
    auto weights = [&](int i, double w[3]) {
        double hL = kink[i + 1] - kink[i];
        double hR = kink[i + 2] - kink[i + 1];
        w[0] = 1.0 / hL;
        w[1] = -(1.0 / hL + 1.0 / hR);
        w[2] = 1.0 / hR;
    };

    // Closed-form pairing of kink combs through the second antiderivative of
    // the kernel. Only used when the two hats live at a common local scale;
    // for well-separated pairs the equivalent cross-product integral is
    // better conditioned.
    auto near_entry = [&](int i, int j) {
        double wi[3], wj[3];
        weights(i, wi);
        weights(j, wj);
        double acc = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                acc += wi[a] * wj[b] * Q(kink[i + a] - kink[j + b]);
        return acc;
    };

    // For disjoint supports the bilinear form collapses to
    //   -c_{1,s} iint phi_i(x) phi_j(y) |x-y|^{-1-2s} dy dx.
    auto far_entry = [&](int i, int j) {
        auto hat = [&](int k) {
            double l = kink[k], c = kink[k + 1], r = kink[k + 2];
            return [l, c, r](double x) {
                return x < c ? (x - l) / (c - l) : (r - x) / (r - c);
            };
        };
        auto phix = hat(i);
        auto phiy = hat(j);
        double acc = 0.0;
        for (int pa = 0; pa < 2; ++pa)
            for (int pb = 0; pb < 2; ++pb)
                acc += cross_panel(phix, phiy, kpow,
                                   {kink[i + pa], kink[i + pa + 1], kink[j + pb],
                                    kink[j + pb + 1]},
                                   24);
        return -cns * acc;
    };

    Eigen::MatrixXd A(N, N);
    parallel_for(N, [&](std::size_t ii) {
        int i = static_cast<int>(ii);
        for (int j = 0; j <= i; ++j) {
            // the kink pairing loses ~(z^2/(h_i h_j))^2 eps in relative
            // accuracy; fall back to the cross integral when that is poor
            double gap = kink[j] - kink[i + 2]; // j's support minus i's top
            double z_max = kink[std::max(i, j) + 2] - kink[std::min(i, j)];
            double hi_min = std::min(kink[i + 1] - kink[i], kink[i + 2] - kink[i + 1]);
            double hj_min = std::min(kink[j + 1] - kink[j], kink[j + 2] - kink[j + 1]);
            double cond = z_max * z_max / (hi_min * hj_min);
            bool disjoint = gap >= 0.0 || kink[i] - kink[j + 2] >= 0.0;
            double v = (disjoint && cond > 3e4) ? far_entry(i, j) : near_entry(i, j);
            A(i, j) = v;
            A(j, i) = v;
        }
    });
    return A;
}

OperatorMatrix::OperatorMatrix(GridPtr grid, FracOrder s, Eigen::MatrixXd A,
                               Eigen::VectorXd mass)
    : grid_(std::move(grid)), s_(s.value()), A_(std::move(A)), mass_(std::move(mass)) {}

const Eigen::LLT<Eigen::MatrixXd>& OperatorMatrix::llt() const {
    std::call_once(llt_once_, [this] {
        llt_ = std::make_unique<Eigen::LLT<Eigen::MatrixXd>>(A_);
        if (llt_->info() != Eigen::Success)
            throw InvariantViolation("OperatorMatrix: Cholesky factorization failed");
    });
    return *llt_;
}

OperatorMatrix::Validation OperatorMatrix::validate(double tol) const {
    Validation v;
    const int N = size();
    double asym = 0.0, scale = 0.0, offdiag = -1e300, rowsum_min = 1e300;
    for (int i = 0; i < N; ++i) {
        double row = 0.0;
        for (int j = 0; j < N; ++j) {
            asym = std::max(asym, std::abs(A_(i, j) - A_(j, i)));
            scale = std::max(scale, std::abs(A_(i, j)));
            if (i != j) offdiag = std::max(offdiag, A_(i, j));
            row += A_(i, j);
        }
        rowsum_min = std::min(rowsum_min, row);
    }
    v.symmetry_rel = scale > 0 ? asym / scale : 0.0;
    v.max_offdiag = offdiag;
    v.min_rowsum = rowsum_min;
    Eigen::LLT<Eigen::MatrixXd> chol(A_);
    v.positive_definite = chol.info() == Eigen::Success;
    v.m_matrix = offdiag <= tol * scale && rowsum_min >= -tol * scale;
    return v;
}

OperatorMatrix assemble_galerkin(GridPtr grid, FracOrder s, int dense_cap) {
    const int N = grid->size();
    if (N > dense_cap)
        throw ConfigError("assemble_galerkin: N exceeds the dense storage cap");
    Eigen::MatrixXd A =
        assemble_stiffness_nodes(grid->nodes(), -grid->R(), grid->R(), s);
    Eigen::VectorXd mass(N);
    for (int i = 0; i < N; ++i) mass[i] = grid->cell_width(i);
    return OperatorMatrix(std::move(grid), s, std::move(A), std::move(mass));
}

GridFunction solve_dirichlet(const OperatorMatrix& A, const GridFunction& f) {
    if (f.size() != A.size()) throw ConfigError("solve_dirichlet: size mismatch");
    Eigen::VectorXd rhs = A.mass().cwiseProduct(f.values());
    Eigen::VectorXd u = A.llt().solve(rhs);
    return GridFunction(A.grid_ptr(), std::move(u));
}

Eigenpair eigenpair(const OperatorMatrix& A, double tol, int max_iter) {
    const int N = A.size();
    Eigen::VectorXd x = Eigen::VectorXd::Ones(N);
    double lambda = 0.0, lambda_prev = -1.0;
    const auto& M = A.mass();
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd y = A.llt().solve(M.cwiseProduct(x));
        double nrm = std::sqrt(y.dot(M.cwiseProduct(y)));
        if (!(nrm > 0.0)) throw IterationError("eigenpair: iterate collapsed");
        x = y / nrm;
        lambda = x.dot(A.matrix() * x) / x.dot(M.cwiseProduct(x));
        if (std::abs(lambda - lambda_prev) < tol * std::abs(lambda)) {
            if (x.sum() < 0.0) x = -x;
            x /= std::sqrt(x.dot(M.cwiseProduct(x)));
            return {lambda, GridFunction(A.grid_ptr(), std::move(x))};
        }
        lambda_prev = lambda;
    }
    double resid = (A.matrix() * x - lambda * M.cwiseProduct(x)).norm();
    throw IterationError("eigenpair: no convergence, residual " + std::to_string(resid));
}

double eilertsen_residual(const PointwiseField& u, const PointwiseField& v,
                          FracOrder s_order, double x, double radius_split) {
    const double s = s_order.value();
    const double cns = normalization_constant(1, s_order);

    PointwiseField uv;
    uv.f = [fu = u.f, fv = v.f](double y) { return fu(y) * fv(y); };
    uv.tail = PointwiseField::Tail::zero_outside;
    uv.support_radius = std::min(u.support_radius, v.support_radius);
    uv.breakpoints = u.breakpoints;
    uv.breakpoints.insert(uv.breakpoints.end(), v.breakpoints.begin(), v.breakpoints.end());
    std::sort(uv.breakpoints.begin(), uv.breakpoints.end());

    double Luv = apply_pointwise(uv, s_order, x, radius_split).value;
    double Lu = apply_pointwise(u, s_order, x, radius_split).value;
    double Lv = apply_pointwise(v, s_order, x, radius_split).value;
    double ux = u.f(x), vx = v.f(x);

    // Correlation integral. The product of differences is O(h^2) at the
    // diagonal; below h_c it is replaced by its quadratic model to avoid
    // amplified cancellation noise, as in apply_pointwise.
    double W = std::max(u.support_radius, v.support_radius);
    double h_c = 1e-3 * (1.0 + std::abs(x));
    auto prod = [&](double h) {
        return (ux - u.f(x + h)) * (vx - v.f(x + h)) +
               (ux - u.f(x - h)) * (vx - v.f(x - h));
    };
    double t1 = prod(h_c) / (h_c * h_c);
    double t2 = prod(2.0 * h_c) / (4.0 * h_c * h_c);
    double cb = (t2 - t1) / (3.0 * h_c * h_c);
    double ca = t1 - cb * h_c * h_c;
    double J = ca * std::pow(h_c, 2.0 - 2.0 * s) / (2.0 - 2.0 * s) +
               cb * std::pow(h_c, 4.0 - 2.0 * s) / (4.0 - 2.0 * s);
    auto integrand = [&](double y) {
        return (ux - u.f(y)) * (vx - v.f(y)) * std::pow(std::abs(x - y), -1.0 - 2.0 * s);
    };
    J += de_integrate([&](double y, double, double) { return integrand(y); }, -W,
                      x - h_c, 1e-12)
             .value;
    J += de_integrate([&](double y, double, double) { return integrand(y); }, x + h_c,
                      W, 1e-12)
             .value;
    // outside [-W, W] both fields vanish
    J += ux * vx * (std::pow(W - x, -2.0 * s) + std::pow(W + x, -2.0 * s)) / (2.0 * s);

    return Luv - ux * Lv - vx * Lu + cns * J;
}

void dump_matrix(const OperatorMatrix& A, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("dump_matrix: cannot open " + path);
    char magic[8] = {'F', 'R', 'L', 'B', 'M', 'A', 'T', '1'};
    std::uint64_t n = static_cast<std::uint64_t>(A.size());
    double s = A.order();
    double R = A.grid().R();
    out.write(magic, 8);
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(&s), 8);
    out.write(reinterpret_cast<const char*>(&R), 8);
    const Eigen::MatrixXd& m = A.matrix();
    for (int i = 0; i < A.size(); ++i)
        for (int j = 0; j < A.size(); ++j) {
            double v = m(i, j);
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
}

} // namespace fraclab
