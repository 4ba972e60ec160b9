#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgds/propagators.hpp"
#include "sgds/quadrature.hpp"
#include "sgds/test_function.hpp"

namespace sgds {

// Coupling beta^2, restricted to the convergence window (0, 4 pi), together
// with the exponents derived from it.
struct Coupling {
    double beta2;

    explicit Coupling(double b2) : beta2(b2)
    {
        if (!(b2 > 0.0) || !(b2 < 4.0 * M_PI))
            throw std::domain_error("Coupling: beta^2 must lie in (0, 4 pi)");
    }

    double beta() const { return std::sqrt(beta2); }
    // Hoelder exponent of the split, (4 pi + beta^2)/(8 pi) < 1
    double holder_exponent() const { return (4.0 * M_PI + beta2) / (8.0 * M_PI); }
    // conjugate norm index 8 pi / (4 pi - beta^2)
    double norm_exponent() const { return 8.0 * M_PI / (4.0 * M_PI - beta2); }
    // exponent of each cosine-difference pair after the split, 2 beta^2/(4 pi + beta^2) < 1
    double pair_exponent() const { return 2.0 * beta2 / (4.0 * M_PI + beta2); }
    // factorial suppression exponent (4 pi - beta^2)/(8 pi)
    double factorial_exponent() const { return (4.0 * M_PI - beta2) / (8.0 * M_PI); }
};

// Two weight conventions appear in the norm bounds: the S-matrix chain uses
// [2 integral |f/(2 H^2 sin^2 tau)|^p]^{1/p}, the interacting-field constants
// use the plain ||f/(H^2 sin^2 tau)||_p.
enum class NormConvention { SmatrixHalf, Plain };

struct BoundReport {
    std::string quantity;
    double value = 0.0;
    bool finite = true;
};

namespace detail {

inline double norm_weight_denominator(NormConvention conv, double hubble, double sin_tau)
{
    const double base = hubble * hubble * sin_tau * sin_tau;
    return conv == NormConvention::SmatrixHalf ? 2.0 * base : base;
}

}  // namespace detail

// Essential sup of |f| / (w H^2 sin^2 tau) via a refinement ladder of sample
// grids, doubled until the max is stable to 1e-6 relative.
inline double weighted_linf_norm(const TestFunction& f, double hubble = 1.0,
                                 NormConvention conv = NormConvention::SmatrixHalf)
{
    const double lo = f.support_lo(), hi = f.support_hi();
    if (!(hi > lo)) return 0.0;
    double prev = -1.0;
    for (std::size_t n = 64; n <= 16384; n *= 2) {
        double mx = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            const double tau = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
            const double denom = detail::norm_weight_denominator(conv, hubble, std::sin(tau));
            for (std::size_t j = 0; j < n; ++j) {
                const double th = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(n);
                mx = std::max(mx, std::abs(f(tau, th)) / denom);
            }
        }
        if (prev >= 0.0 && std::abs(mx - prev) <= 1e-6 * std::max(1.0, mx)) return mx;
        prev = mx;
    }
    return prev;
}

// Weighted L^p norm of the test function; SmatrixHalf convention returns
// [2 integral |f/(2 H^2 sin^2 tau)|^p dtau dtheta]^{1/p}, Plain returns the
// standard ||f/(H^2 sin^2 tau)||_p. p = infinity dispatches to the sup norm.
inline double weighted_lp_norm(const TestFunction& f, double p, double hubble = 1.0,
                               NormConvention conv = NormConvention::SmatrixHalf)
{
    if (std::isinf(p)) return weighted_linf_norm(f, hubble, conv);
    if (!(p >= 1.0)) throw std::invalid_argument("weighted_lp_norm: p must be >= 1 or infinity");
    const double lo = f.support_lo(), hi = f.support_hi();
    if (!(hi > lo)) return 0.0;
    if (!(lo > 0.0) || !(hi < M_PI))
        throw std::domain_error("weighted_lp_norm: support touches tau = 0 or pi (divergent)");
    auto slice = [&](double tau) {
        const double denom = detail::norm_weight_denominator(conv, hubble, std::sin(tau));
        return quad::panels(
            [&](double th) { return std::pow(std::abs(f(tau, th)) / denom, p); }, 0.0,
            2.0 * M_PI, 64);
    };
    const double integral = quad::adaptive(slice, lo, hi, 1e-12);
    const double outer = conv == NormConvention::SmatrixHalf ? 2.0 : 1.0;
    return std::pow(outer * integral, 1.0 / p);
}

// C(g) = 36 sqrt(2) pi^3 (4 pi - beta^2)^{-(4 pi + beta^2)/(8 pi)}
//        * || g/(2 H^2 sin^2 tau) ||_{8 pi/(4 pi - beta^2)}
inline double smatrix_constant_C(const TestFunction& g, const Coupling& c, double hubble = 1.0)
{
    const double norm = weighted_lp_norm(g, c.norm_exponent(), hubble, NormConvention::SmatrixHalf);
    return 36.0 * std::sqrt(2.0) * M_PI * M_PI * M_PI
           * std::pow(4.0 * M_PI - c.beta2, -c.holder_exponent()) * norm;
}

// Per-order bound (k!)^{-(4 pi - beta^2)/(8 pi)} [2 C(g)]^k on the k-th
// series term applied to a coherent domain vector.
inline double smatrix_order_bound(int k, const Coupling& c, double cg)
{
    if (k < 0) throw std::invalid_argument("smatrix_order_bound: k must be >= 0");
    if (!(cg >= 0.0)) throw std::invalid_argument("smatrix_order_bound: Cg must be >= 0");
    const double log_term = -c.factorial_exponent() * std::lgamma(static_cast<double>(k) + 1.0)
                            + static_cast<double>(k) * std::log(2.0 * std::max(cg, 1e-300));
    return cg == 0.0 && k > 0 ? 0.0 : std::exp(log_term);
}

struct TailBound {
    double tail;
    std::int64_t k_star;
    double tail_at_k_star;
};

namespace detail {

// rigorous tail: finite sum until the term ratio 2 Cg (k+1)^{-q} drops below
// 1/2, then a geometric majorant with that (decreasing) ratio
inline double tail_from(int k0, const Coupling& c, double cg)
{
    if (cg == 0.0) return k0 == 0 ? 1.0 : 0.0;
    const double q = c.factorial_exponent();
    double sum = 0.0;
    int k = k0;
    for (;; ++k) {
        const double ratio = 2.0 * cg * std::pow(static_cast<double>(k) + 1.0, -q);
        const double term = smatrix_order_bound(k, c, cg);
        if (std::isinf(term)) return term;  // the sum already exceeds double range
        if (ratio < 0.5) return sum + term / (1.0 - ratio);
        sum += term;
        if (k > 2000000) throw std::runtime_error("tail_from: ratio never dropped below 1/2");
    }
}

// log of an upper bound on the tail starting at (large) order kd, valid once
// the per-order terms are nonincreasing (kd + 1 >= (2 Cg)^{1/q}): geometric
// majorant when the ratio is below 1/2, otherwise term count times the first
// term until the ratio falls to 1/2
inline double log_tail_upper(double kd, const Coupling& c, double cg)
{
    const double q = c.factorial_exponent();
    const double ratio = 2.0 * cg * std::pow(kd + 1.0, -q);
    const double lterm = kd * std::log(2.0 * cg) - q * std::lgamma(kd + 1.0);
    if (ratio < 0.5) return lterm - std::log1p(-ratio);
    return lterm + std::log(std::pow(4.0 * cg, 1.0 / q) - kd + 2.0);
}

}  // namespace detail

// Upper bound on the series tail from order k0, and the smallest starting
// order whose tail is below the target. When the crossover order is too large
// for the incremental scan (large Cg), the start order is located by a
// log-space search on the majorant; it is then an upper bracket within the
// majorant's slack rather than the exact minimum.
inline TailBound tail_bound(int k0, const Coupling& c, double cg, double target)
{
    if (k0 < 0) throw std::invalid_argument("tail_bound: k0 must be >= 0");
    const double tail = detail::tail_from(k0, c, cg);
    std::int64_t k_star = k0;
    double t = tail;
    int steps = 0;
    while (t >= target) {
        if (std::isinf(t) || steps > 100000) {
            // jump to where the terms are provably nonincreasing
            const double q = c.factorial_exponent();
            const double lt = std::log(target);
            double lo = std::max(static_cast<double>(k_star),
                                 std::ceil(std::pow(2.0 * cg, 1.0 / q)));
            if (detail::log_tail_upper(lo, c, cg) < lt) return {tail, static_cast<std::int64_t>(lo),
                                                                std::exp(detail::log_tail_upper(lo, c, cg))};
            double hi = 2.0 * lo + 1.0;
            while (detail::log_tail_upper(hi, c, cg) >= lt) {
                hi = 2.0 * hi + 1.0;
                if (hi > 1e18) throw std::runtime_error("tail_bound: target not reached");
            }
            while (hi - lo > 1.0) {
                const double mid = std::floor(0.5 * (lo + hi));
                (detail::log_tail_upper(mid, c, cg) >= lt ? lo : hi) = mid;
            }
            return {tail, static_cast<std::int64_t>(hi),
                    std::exp(detail::log_tail_upper(hi, c, cg))};
        }
        ++k_star;
        ++steps;
        if (k_star > 1000000) throw std::runtime_error("tail_bound: target not reached");
        t = detail::tail_from(static_cast<int>(k_star), c, cg);
    }
    return {tail, k_star, t};
}

struct CauchyCheck {
    double det;      // LU determinant of the matrix 1/(x_i - y_j)
    double product;  // prod_{i<j}(x_i-x_j)(y_i-y_j) / prod_{i,j}(x_i-y_j)
};

// Cauchy determinant identity. The determinant and the product formula agree
// up to the sign (-1)^{k(k-1)/2} of the row ordering convention; callers
// compare magnitudes.
inline CauchyCheck cauchy_det_check(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t k = x.size();
    if (y.size() != k || k == 0) throw std::invalid_argument("cauchy_det_check: size mismatch");
    std::vector<std::vector<double>> m(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double d = x[i] - y[j];
            if (std::abs(d) < 1e-14) throw std::domain_error("cauchy_det_check: x_i == y_j");
            m[i][j] = 1.0 / d;
        }
    // LU with partial pivoting
    double det = 1.0;
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < k; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        if (piv != col) {
            std::swap(m[piv], m[col]);
            det = -det;
        }
        det *= m[col][col];
        if (m[col][col] == 0.0) break;
        for (std::size_t r = col + 1; r < k; ++r) {
            const double factor = m[r][col] / m[col][col];
            for (std::size_t cc = col; cc < k; ++cc) m[r][cc] -= factor * m[col][cc];
        }
    }
    double num = 1.0, den = 1.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) num *= (x[i] - x[j]) * (y[i] - y[j]);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) den *= x[i] - y[j];
    return {det, num / den};
}

// Margin of 1/(2 - 2 cos x) below its piecewise majorant: pi^2/(8 x^2) on
// [-pi/2, pi/2], 1/2 on [pi/2, 3 pi/2]. Nonnegative on the stated domain,
// zero exactly at x = pi/2.
inline double cosine_bound_margin(double x)
{
    if (x == 0.0) throw std::domain_error("cosine_bound_margin: x = 0");
    const double value = 1.0 / (2.0 - 2.0 * std::cos(x));
    if (std::abs(x) <= M_PI_2) return M_PI * M_PI / (8.0 * x * x) - value;
    if (x >= M_PI_2 && x <= 3.0 * M_PI_2) return 0.5 - value;
    throw std::domain_error("cosine_bound_margin: x outside [-pi/2, pi/2] u [pi/2, 3 pi/2]");
}

// Analytic majorant 72 pi^3 / (4 pi - beta^2) for the double light-cone
// integral of |e^{iu} - e^{iu~}|^{-2 beta^2/(4 pi + beta^2)}.
inline double u_integral_bound(const Coupling& c) { return 72.0 * M_PI * M_PI * M_PI / (4.0 * M_PI - c.beta2); }

// Direct quadrature of that integral over u, u~ in (-2 pi, pi): reduce to
// the difference variable with overlap weight 3 pi - |d| and integrable
// power singularities at d in {-2 pi, 0, 2 pi}.
inline double u_integral_quadrature(const Coupling& c, double tol = 1e-9)
{
    const double s = c.beta2 / (4.0 * M_PI + c.beta2);  // half the pair exponent
    auto integrand = [&](double d) {
        // 2 - 2 cos d = 4 sin^2(d/2), stable against cancellation near the zeros
        const double sd = 2.0 * std::abs(std::sin(0.5 * d));
        return (3.0 * M_PI - std::abs(d)) * std::pow(sd, -2.0 * s);
    };
    return quad::adaptive_split(integrand, -3.0 * M_PI, 3.0 * M_PI,
                                {-2.0 * M_PI, 0.0, 2.0 * M_PI}, tol);
}

// The kernel K_pm entering the interacting-field norm: the smeared causal
// sign integral of f at x', plus the sigma-weighted log/step sum over the k
// conjugate insertion pairs (points has size 2k; pair j is points[j] vs
// points[k+j]).
inline complexd k_pm(const TestFunction& f, const Point& x, int sign,
                     const std::vector<int>& sigmas, const std::vector<Point>& points,
                     const Coupling& c, double hubble = 1.0)
{
    if (sign != 1 && sign != -1) throw std::invalid_argument("k_pm: sign must be +-1");
    const std::size_t k = sigmas.size();
    if (points.size() != 2 * k) throw std::invalid_argument("k_pm: need 2k points");
    complexd val(smeared_commutator(f, x, hubble), 0.0);
    const complexd pref(0.0, c.beta() / (4.0 * M_PI));
    for (std::size_t j = 0; j < k; ++j) {
        auto term = [&](const Point& pj, double theta_sign) -> complexd {
            const double dtau = x.tau - pj.tau;
            const double dth = x.theta - pj.theta;
            const double arg = detail::cone_log_arg(dtau, dth);
            if (std::abs(arg) < 1e-300) throw std::domain_error("k_pm: point on a light cone");
            complexd t(std::log(std::abs(arg)), 0.0);
            if (arg < 0.0)
                t += complexd(0.0, theta_sign * static_cast<double>(sign) * M_PI
                                       * detail::sgn(std::sin(dtau)));
            return t;
        };
        val += pref * static_cast<double>(sigmas[j]) * (term(points[j], 1.0) - term(points[k + j], -1.0));
    }
    return val;
}

struct CtildeConstants {
    double c0;
    double c1;
    double c2;
};

// The three constants of the interacting-field per-order bound, built from
// the plain weighted 1- and sup-norms of f and h. h must integrate to zero
// against the volume measure (enforced to tolerance).
inline CtildeConstants ctilde_constants(const TestFunction& f, const TestFunction& h,
                                        const Coupling& c, double hubble = 1.0,
                                        double neutrality_tol = 1e-8)
{
    const double lo = h.support_lo(), hi = h.support_hi();
    if (hi > lo) {
        auto slice = [&](double tau) {
            const double s = std::sin(tau);
            return quad::panels([&](double th) { return h(tau, th); }, 0.0, 2.0 * M_PI, 64)
                   / (hubble * hubble * s * s);
        };
        const double mean = quad::adaptive(slice, lo, hi, 1e-12);
        if (std::abs(mean) > neutrality_tol)
            throw std::domain_error("ctilde_constants: h must integrate to zero against the volume measure");
    }
    const double n1f = weighted_lp_norm(f, 1.0, hubble, NormConvention::Plain);
    const double n1h = weighted_lp_norm(h, 1.0, hubble, NormConvention::Plain);
    const double ninfh = weighted_linf_norm(h, hubble, NormConvention::Plain);
    const double beta = c.beta();
    const double mixed = n1h + 15.0 * M_PI * ninfh;
    const double c0 = 0.25 * (1.0 + n1f * n1f) * n1h * n1h
                      + 67.5 * M_PI * M_PI * M_PI * ninfh * ninfh;
    const double c1 = beta * n1f * n1h * mixed;
    const double c2 = beta * beta * mixed * mixed;
    return {c0, c1, c2};
}

enum class ObservableKind { Field, Vertex };

// Per-order bound on the interacting observable applied to a domain vector:
//   field:  (k+1) (k!)^{-(4 pi - beta^2)/(8 pi)} [4 Cg]^k sqrt(Cmax)
//   vertex: (k+1) [(k+1)!]^{-(4 pi - beta^2)/(8 pi)} Ch [4 Cg]^k
// For the vertex variant the last argument is C(h) itself (no square root).
inline double field_order_bound(int k, const Coupling& c, double cg, double cmax,
                                ObservableKind kind = ObservableKind::Field)
{
    if (k < 0) throw std::invalid_argument("field_order_bound: k must be >= 0");
    if (!(cg >= 0.0) || !(cmax >= 0.0))
        throw std::invalid_argument("field_order_bound: inputs must be nonnegative");
    const double kd = static_cast<double>(k);
    const double geom = cg == 0.0 && k > 0 ? 0.0 : std::pow(4.0 * cg, kd);
    if (kind == ObservableKind::Field)
        return (kd + 1.0) * std::exp(-c.factorial_exponent() * std::lgamma(kd + 1.0)) * geom
               * std::sqrt(cmax);
    return (kd + 1.0) * std::exp(-c.factorial_exponent() * std::lgamma(kd + 2.0)) * geom * cmax;
}

}  // namespace sgds
