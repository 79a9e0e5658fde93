#include "fraclab/special_functions.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "fraclab/quadrature.hpp"

namespace fraclab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;
} // namespace

FracOrder::FracOrder(double s) : s_(s) {
    if (!(s > 0.0) || !(s < 1.0))
        throw DomainError("fractional order must satisfy 0 < s < 1");
}

GammaBetaQuery::GammaBetaQuery(int n_, FracOrder s_, double beta_)
    : n(n_), s(s_), beta(beta_) {
    if (n < 1) throw DomainError("dimension must be >= 1");
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw DomainError("beta must be positive and finite");
    if (std::abs(beta - 2.0 * s.value()) < 1e-12)
        throw PoleError("gamma_{2s} diverges");
    double half = 0.5 * beta;
    if (std::abs(half - std::round(half)) < 1e-12 && std::round(half) >= 1.0)
        throw DomainError("beta at an even integer: 1/Gamma(-beta/2) vanishes");
}

double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw DomainError("log_gamma requires finite x > 0");
    // Lanczos, g = 7, 9 coefficients
    static const double coef[9] = {
        0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
        771.32342877765313,       -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x < 0.5) {
        // reflection keeps the argument of the core expansion above 0.5
        return std::log(kPi / std::sin(kPi * x)) - log_gamma(1.0 - x);
    }
    double z = x - 1.0;
    double acc = coef[0];
    for (int i = 1; i < 9; ++i) acc += coef[i] / (z + i);
    double t = z + 7.5;
    return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(acc);
}

double gamma_fn(double x) { return std::exp(log_gamma(x)); }

SignedLogGamma signed_log_gamma(double x) {
    if (!std::isfinite(x)) throw DomainError("signed_log_gamma: non-finite input");
    if (x > 0.0) return {log_gamma(x), 1};
    if (x == std::floor(x)) throw PoleError("Gamma pole at non-positive integer");
    // Gamma(x) = pi / (sin(pi x) Gamma(1-x)), sign follows sin(pi x)
    double s = std::sin(kPi * x);
    return {std::log(kPi / std::abs(s)) - log_gamma(1.0 - x), s > 0.0 ? 1 : -1};
}

double normalization_constant(int n, FracOrder s) {
    if (n < 1) throw DomainError("dimension must be >= 1");
    const double sv = s.value();
    // |Gamma(-s)| = pi / (sin(pi s) Gamma(1+s))
    double log_abs_gamma_ms = std::log(kPi) - std::log(std::sin(kPi * sv)) -
                              log_gamma(1.0 + sv);
    double lc = sv * std::log(4.0) + log_gamma(0.5 * n + sv) -
                0.5 * n * std::log(kPi) - log_abs_gamma_ms;
    return std::exp(lc);
}

double gamma_beta(const GammaBetaQuery& q) {
    const double s = q.s.value();
    const double b = q.beta;
    const double n = q.n;
    SignedLogGamma g1 = signed_log_gamma(0.5 * (n + b));
    SignedLogGamma g2 = signed_log_gamma(s - 0.5 * b);
    SignedLogGamma g3 = signed_log_gamma(-0.5 * b);
    SignedLogGamma g4 = signed_log_gamma(-s + 0.5 * (b + n));
    double lg = 2.0 * s * std::log(2.0) + g1.log_abs + g2.log_abs - g3.log_abs -
                g4.log_abs;
    int sign = g1.sign * g2.sign * g3.sign * g4.sign;
    return sign * std::exp(lg);
}

double torsion_constant(int n, FracOrder s) {
    const double sv = s.value();
    return std::exp(sv * std::log(4.0) + log_gamma(1.0 + sv) +
                    log_gamma(0.5 * n + sv) - log_gamma(0.5 * n));
}

// ---------------------------------------------------------------------------
// Green kernel profile
// ---------------------------------------------------------------------------

// F(r0) = 2 int_0^{atan sqrt(r0)} sin^a cos^b,  a = 2s-1, b = n-2s-1.
// Endpoint series are subtracted analytically; the smooth remainder S is
// tabulated once per (n, s) on [0, pi/2] and interpolated with cubic Hermite
// segments.
struct GreenKernel::Profile {
    int n;
    double s, a, b;
    double c1, c2, d1, d2;
    bool log_case; // b == -1, i.e. n == 2s
    int M = 640;
    double h;
    std::vector<double> Sv, Sd;

    Profile(int n_, double s_) : n(n_), s(s_) {
        a = 2.0 * s - 1.0;
        b = n - 2.0 * s - 1.0;
        log_case = std::abs(b + 1.0) < 1e-13;
        // sin^a cos^b = theta^a (1 + c1 theta^2 + c2 theta^4 + ...)
        c1 = -a / 6.0 - b / 2.0;
        c2 = a * (a - 1.0) / 72.0 + a / 120.0 + b / 24.0 +
             b * (b - 1.0) / 8.0 + a * b / 12.0;
        // swap roles near theta = pi/2 (psi = pi/2 - theta)
        d1 = -b / 6.0 - a / 2.0;
        d2 = b * (b - 1.0) / 72.0 + b / 120.0 + a / 24.0 +
             a * (a - 1.0) / 8.0 + a * b / 12.0;

        h = kHalfPi / M;
        Sv.resize(M + 1);
        Sd.resize(M + 1);
        Sv[0] = -P1(kHalfPi);
        Sd[0] = -dP1(kHalfPi);
        const GaussRule& rule = gauss_legendre(16);
        for (int k = 0; k < M; ++k) {
            double lo = k * h, hi = (k + 1) * h;
            double c = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            double acc = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                acc += rule.weights[i] * Sprime(c + half * rule.nodes[i]);
            Sv[k + 1] = Sv[k] + half * acc;
            double th = (k + 1) * h;
            Sd[k + 1] = (k + 1 == M) ? -dP0(kHalfPi) : Sprime(th);
        }
    }

    double g(double theta) const {
        return 2.0 * std::pow(std::sin(theta), a) * std::pow(std::cos(theta), b);
    }
    double P0(double theta) const {
        double t1 = std::pow(theta, a + 1.0);
        double t2 = theta * theta;
        return 2.0 * t1 *
               (1.0 / (a + 1.0) + c1 * t2 / (a + 3.0) + c2 * t2 * t2 / (a + 5.0));
    }
    double dP0(double theta) const {
        double t2 = theta * theta;
        return 2.0 * std::pow(theta, a) * (1.0 + c1 * t2 + c2 * t2 * t2);
    }
    double P1(double psi) const {
        double p2 = psi * psi;
        if (log_case) return -2.0 * std::log(psi) - d1 * p2 - 0.5 * d2 * p2 * p2;
        double t1 = std::pow(psi, b + 1.0);
        return -2.0 * t1 *
               (1.0 / (b + 1.0) + d1 * p2 / (b + 3.0) + d2 * p2 * p2 / (b + 5.0));
    }
    double dP1(double psi) const { // derivative with respect to theta
        double p2 = psi * psi;
        return 2.0 * std::pow(psi, b) * (1.0 + d1 * p2 + d2 * p2 * p2);
    }
    double Sprime(double theta) const {
        return g(theta) - dP0(theta) - dP1(kHalfPi - theta);
    }
    double S(double theta) const {
        double pos = theta / h;
        int k = static_cast<int>(pos);
        if (k >= M) k = M - 1;
        double t = pos - k;
        double v0 = Sv[k], v1 = Sv[k + 1];
        double m0 = Sd[k] * h, m1 = Sd[k + 1] * h;
        double t2 = t * t, t3 = t2 * t;
        return (2.0 * t3 - 3.0 * t2 + 1.0) * v0 + (t3 - 2.0 * t2 + t) * m0 +
               (-2.0 * t3 + 3.0 * t2) * v1 + (t3 - t2) * m1;
    }
    // theta and psi are each computed directly from the ratio so both are
    // accurate near their respective endpoint
    double value(double theta, double psi) const {
        if (theta <= 0.01) return P0(theta);
        return P0(theta) + P1(psi) + S(theta);
    }
};

namespace {

std::shared_ptr<const GreenKernel::Profile> profile_cache(int n, double s) {
    static std::map<std::pair<int, long long>, std::shared_ptr<const GreenKernel::Profile>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(n, static_cast<long long>(std::llround(s * 1e12)));
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, std::make_shared<GreenKernel::Profile>(n, s)).first;
    }
    return it->second;
}

} // namespace

GreenKernel::GreenKernel(int n, FracOrder s, double R)
    : n_(n), s_(s.value()), R_(R) {
    if (n < 1 || n > 3) throw DomainError("GreenKernel: dimension must be 1, 2 or 3");
    if (!(R > 0.0)) throw DomainError("GreenKernel: radius must be positive");
    kappa_ = std::exp(log_gamma(0.5 * n) - s_ * std::log(4.0) -
                      0.5 * n * std::log(kPi) - 2.0 * log_gamma(s_));
    if (std::abs(s_ - 0.5) > 1e-13) profile_ = profile_cache(n_, s_);
}

double GreenKernel::profile_value(double ratio) const {
    if (std::abs(s_ - 0.5) <= 1e-13) {
        switch (n_) {
            case 1: return 2.0 * std::asinh(ratio);
            case 2: return 2.0 * std::atan(ratio);
            default: return 2.0 * ratio / std::sqrt(1.0 + ratio * ratio);
        }
    }
    double theta = std::atan(ratio);
    double psi = std::atan(1.0 / ratio);
    return profile_->value(theta, psi);
}

double GreenKernel::profile(double r0) const {
    if (!(r0 >= 0.0)) throw DomainError("profile: r0 must be nonnegative");
    if (r0 == 0.0) return 0.0;
    return profile_value(std::sqrt(r0));
}

double GreenKernel::eval(double dist, double x_gap2, double y_gap2) const {
    if (dist <= 0.0) throw SingularityError("Green kernel evaluated on the diagonal");
    if (!(x_gap2 > 0.0) || !(y_gap2 > 0.0))
        throw DomainError("Green kernel: points must lie inside the open ball");
    double ratio = std::sqrt(x_gap2 * y_gap2) / (R_ * dist);
    double F = profile_value(ratio);
    return kappa_ * std::pow(dist, 2.0 * s_ - n_) * F;
}

double GreenKernel::eval_1d(double x, double y) const {
    return eval(std::abs(x - y), (R_ - x) * (R_ + x), (R_ - y) * (R_ + y));
}

double GreenKernel::eval_nd(const Point& x, const Point& y) const {
    double d2 = 0.0, nx2 = 0.0, ny2 = 0.0;
    for (int i = 0; i < n_; ++i) {
        double di = x[i] - y[i];
        d2 += di * di;
        nx2 += x[i] * x[i];
        ny2 += y[i] * y[i];
    }
    return eval(std::sqrt(d2), R_ * R_ - nx2, R_ * R_ - ny2);
}

double green_kernel(int n, FracOrder s, double R, const Point& x, const Point& y) {
    return GreenKernel(n, s, R).eval_nd(x, y);
}

double green_kernel_1d(FracOrder s, double R, double x, double y) {
    return GreenKernel(1, s, R).eval_1d(x, y);
}

} // namespace fraclab
