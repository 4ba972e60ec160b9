#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <stdexcept>

#include "sgds/geometry.hpp"
#include "sgds/quadrature.hpp"
#include "sgds/test_function.hpp"

namespace sgds {

using complexd = std::complex<double>;

// Parameter of the one-real-parameter family of vacuum-like states; the
// zero-mode amplitudes c3, c4 are fixed so the zero mode has unit norm,
// 2*pi*i*(conj(c3) c4 - c3 conj(c4)) = 1.
struct StateAlpha {
    double alpha = 1.0;

    explicit StateAlpha(double a) : alpha(a)
    {
        if (!(a > 0.0)) throw std::domain_error("StateAlpha: alpha must be positive");
    }

    complexd c3() const { return {0.5 * alpha, 0.25 / alpha}; }
    complexd c4() const { return {0.0, -1.0 / (2.0 * M_PI * alpha)}; }
};

// Convergence factor e^{-|n| eps} used in mode sums; the matching closed
// forms carry the same eps so comparisons need no extrapolation.
struct Regulator {
    double epsilon = 1e-3;

    explicit Regulator(double eps) : epsilon(eps)
    {
        if (!(eps > 0.0)) throw std::domain_error("Regulator: epsilon must be positive");
    }
};

// Mode function phi_n at coordinates (tau, theta). For n != 0 the
// positive-frequency choice is c1 = Theta(-n)/sqrt(4 pi |n|),
// c2 = Theta(n)/sqrt(4 pi |n|); n = 0 is the zero mode c3 + c4 tau.
inline complexd mode_fn(int n, const StateAlpha& st, double tau, double theta)
{
    if (n == 0) return st.c3() + st.c4() * tau;
    const double norm = 1.0 / std::sqrt(4.0 * M_PI * std::abs(n));
    const complexd phase = std::polar(1.0, n * theta);
    if (n > 0) return norm * std::polar(1.0, -n * tau) * phase;
    return norm * std::polar(1.0, n * tau) * phase;
}

inline complexd mode_fn(int n, const StateAlpha& st, const Point& p)
{
    return mode_fn(n, st, p.tau, p.theta);
}

// Analytic tau-derivative of phi_n, for the conserved inner product.
inline complexd mode_fn_dtau(int n, const StateAlpha& st, double tau, double theta)
{
    if (n == 0) return st.c4();
    if (n > 0) return complexd(0.0, -static_cast<double>(n)) * mode_fn(n, st, tau, theta);
    return complexd(0.0, static_cast<double>(n)) * mode_fn(n, st, tau, theta);
}

// Conserved inner product <f, g> = i * integral over the theta circle of
// [conj(f) dtau g - dtau conj(f) g] at fixed tau = tau0. The callables take
// (tau, theta); derivative callables supply the analytic tau-derivatives.
template <typename F, typename DF, typename G, typename DG>
complexd inner_product(F&& f, DF&& df, G&& g, DG&& dg, double tau0, std::size_t theta_panels = 256)
{
    auto integrand = [&](double th) {
        return std::conj(f(tau0, th)) * dg(tau0, th) - std::conj(df(tau0, th)) * g(tau0, th);
    };
    return complexd(0.0, 1.0) * quad::panels(integrand, 0.0, 2.0 * M_PI, theta_panels);
}

inline complexd mode_inner_product(int m, int n, const StateAlpha& st, double tau0,
                                   std::size_t theta_panels = 256)
{
    auto f = [&](double t, double h) { return mode_fn(m, st, t, h); };
    auto df = [&](double t, double h) { return mode_fn_dtau(m, st, t, h); };
    auto g = [&](double t, double h) { return mode_fn(n, st, t, h); };
    auto dg = [&](double t, double h) { return mode_fn_dtau(n, st, t, h); };
    return inner_product(f, df, g, dg, tau0, theta_panels);
}

// Partial mode sum over |n| <= N of phi_n(p) conj(phi_n(q)) e^{-|n| eps};
// the oracle for every closed-form two-point kernel.
inline complexd mode_sum_kernel(int N, const Regulator& reg, const Point& p, const Point& q,
                                const StateAlpha& st)
{
    if (N < 1) throw std::invalid_argument("mode_sum_kernel: N must be >= 1");
    complexd sum = mode_fn(0, st, p) * std::conj(mode_fn(0, st, q));
    const double dtau = p.tau - q.tau;
    const double dth = p.theta - q.theta;
    // pair +n with -n: e^{-i n dtau} cos(n dth) / (2 pi n)
    for (int n = 1; n <= N; ++n) {
        const double damp = std::exp(-n * reg.epsilon);
        sum += damp * std::polar(1.0, -n * dtau) * std::cos(n * dth) / (2.0 * M_PI * n);
    }
    return sum;
}

// Smeared mode phi_n(f) = integral of phi_n * f / (H^2 sin^2 tau) dtau dtheta.
inline complexd smeared_mode(int n, const StateAlpha& st, const TestFunction& f, double hubble = 1.0,
                             std::size_t panels_tau = 12, std::size_t panels_theta = 12)
{
    const double lo = f.support_lo(), hi = f.support_hi();
    if (!(hi > lo)) return {};
    auto g = [&](double tau, double th) {
        const double s = std::sin(tau);
        return mode_fn(n, st, tau, th) * (f(tau, th) / (hubble * hubble * s * s));
    };
    return quad::tensor2d(g, lo, hi, 0.0, 2.0 * M_PI, panels_tau, panels_theta);
}

}  // namespace sgds
