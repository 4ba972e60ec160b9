#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "sgds/geometry.hpp"
#include "sgds/modes.hpp"

namespace sgds {

enum class Ordering { Wightman, TimeOrdered, AntiTimeOrdered };

inline double apply_ordering(double dtau, Ordering ord)
{
    switch (ord) {
        case Ordering::Wightman: return dtau;
        case Ordering::TimeOrdered: return std::abs(dtau);
        case Ordering::AntiTimeOrdered: return -std::abs(dtau);
    }
    return dtau;
}

namespace detail {

// 2 cos(dtau) - 2 cos(dtheta): argument of the light-cone logarithm
inline double cone_log_arg(double dtau, double dtheta)
{
    return 2.0 * std::cos(dtau) - 2.0 * std::cos(dtheta);
}

inline double sgn(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace detail

// Two-point kernel with the convergence factor e^{-|n| eps} retained; this is
// the closed form of the mode sum at the same eps:
//   alpha^2/4 - i dtau/(4 pi) + (tau - pi/2)(tau' - pi/2)/(4 pi^2 alpha^2)
//   - (1/4pi) [ ln(1 - e^{-eps - i(dtau - dtheta)}) + ln(1 - e^{-eps - i(dtau + dtheta)}) ]
inline complexd wightman_regulated(const Point& p, const Point& q, const StateAlpha& st,
                                   const Regulator& reg, Ordering ord = Ordering::Wightman)
{
    const double dtau = apply_ordering(p.tau - q.tau, ord);
    const double dth = p.theta - q.theta;
    const double a2 = st.alpha * st.alpha;
    complexd val = a2 / 4.0 + complexd(0.0, -dtau / (4.0 * M_PI))
                   + (p.tau - M_PI_2) * (q.tau - M_PI_2) / (4.0 * M_PI * M_PI * a2);
    const complexd xp = std::exp(complexd(-reg.epsilon, -(dtau - dth)));
    const complexd xm = std::exp(complexd(-reg.epsilon, -(dtau + dth)));
    val -= (std::log(1.0 - xp) + std::log(1.0 - xm)) / (4.0 * M_PI);
    return val;
}

// Exact-limit two-point kernel i G^+ (eps -> 0 taken analytically through the
// distributional identity ln(-A - i0) = ln|A| + i pi Theta(A) for the
// light-cone logarithm):
//   alpha^2/4 + (tau - pi/2)(tau' - pi/2)/(4 pi^2 alpha^2)
//   - (1/4pi) ln|2 cos(dtau) - 2 cos(dtheta)|
//   - (i/4) Theta[cos(dtheta) - cos(dtau)] sgn(sin dtau)
// Throws on the light cone, where the kernel is singular support, and at
// coincidence, where it diverges logarithmically.
inline complexd wightman(const Point& p, const Point& q, const StateAlpha& st,
                         Ordering ord = Ordering::Wightman)
{
    const double dtau = apply_ordering(p.tau - q.tau, ord);
    const double dth = p.theta - q.theta;
    const double arg = detail::cone_log_arg(dtau, dth);
    if (std::abs(arg) < 1e-300)
        throw std::domain_error("wightman: point pair on the light cone (logarithmic divergence)");
    const double a2 = st.alpha * st.alpha;
    complexd val = a2 / 4.0 + (p.tau - M_PI_2) * (q.tau - M_PI_2) / (4.0 * M_PI * M_PI * a2);
    val -= std::log(std::abs(arg)) / (4.0 * M_PI);
    if (arg < 0.0)  // timelike separation: cos(dtheta) > cos(dtau)
        val -= complexd(0.0, 0.25) * detail::sgn(std::sin(dtau));
    return val;
}

inline complexd ordered_kernel(const Point& p, const Point& q, const StateAlpha& st, Ordering ord)
{
    return wightman(p, q, st, ord);
}

// Commutator kernel G^+(p,q) - G^+(q,p): alpha-independent, real,
//   -(1/2) Theta[cos(dtheta) - cos(dtau)] sgn(sin(tau_p - tau_q)).
// The overall sign is pinned by the mode-sum oracle in the test suite.
inline double commutator_kernel(const Point& p, const Point& q)
{
    const double dtau = p.tau - q.tau;
    const double dth = p.theta - q.theta;
    if (detail::cone_log_arg(dtau, dth) >= 0.0) return 0.0;  // spacelike or null
    return -0.5 * detail::sgn(std::sin(dtau));
}

// Retarded propagator: Theta(tau_p - tau_q) times the antisymmetric part,
// supported in the past light cone of p. Satisfies
//   integral G_ret(p, y) (box h)(y) sqrt(-g) d^2 y = h(p),
// where in these coordinates sqrt(-g) box = -d^2/dtau^2 + d^2/dtheta^2.
inline double retarded(const Point& p, const Point& q)
{
    if (p.tau <= q.tau) return 0.0;
    return commutator_kernel(p, q);
}

// State-dependent smooth part W of the Hadamard form: with z = cos(H mu),
//   W = pi alpha^2 + (tau-pi/2)(tau'-pi/2)/(pi alpha^2) - ln[4 sin tau sin tau']
//       - ln[(1 - cos(H mu)) / (M mu^2)].
// The last term extends analytically through coincidence (z -> 1) and to
// timelike separation z > 1; pairs with z <= -1 are not geodesically
// connected and are rejected.
inline double hadamard_w(const Point& p, const Point& q, const StateAlpha& st, double scale_m,
                         double hubble = 1.0)
{
    if (!(scale_m > 0.0)) throw std::domain_error("hadamard_w: scale M must be positive");
    const double z = geodesic_z(p, q);
    if (z <= -1.0) throw std::domain_error("hadamard_w: points not geodesically connected (z <= -1)");
    // (1 - cos(H mu))/(H mu)^2 as an analytic function of (H mu)^2 = acos(z)^2;
    // for z > 1 the angle is imaginary and (H mu)^2 = -acosh(z)^2 < 0.
    const double hmu2 = (z <= 1.0) ? std::pow(std::acos(z), 2) : -std::pow(std::acosh(z), 2);
    // (1 - cos(H mu))/(H mu)^2, analytic in (H mu)^2 (series near coincidence)
    const double ratio = detail::one_minus_cos_over_s2(hmu2);
    const double a2 = st.alpha * st.alpha;
    return M_PI * a2 + (p.tau - M_PI_2) * (q.tau - M_PI_2) / (M_PI * a2)
           - std::log(4.0 * std::sin(p.tau) * std::sin(q.tau))
           - std::log(ratio * hubble * hubble / scale_m);
}

// Squared geodesic distance parameterization used with hadamard_w: Synge
// function sigma = mu^2 / 2 (negative for timelike pairs).
inline double synge_sigma(const Point& p, const Point& q, double hubble = 1.0)
{
    const double z = geodesic_z(p, q);
    if (z <= -1.0) throw std::domain_error("synge_sigma: points not geodesically connected");
    const double hmu2 = (z <= 1.0) ? std::pow(std::acos(z), 2) : -std::pow(std::acosh(z), 2);
    return 0.5 * hmu2 / (hubble * hubble);
}

// Closed-form variation of G^+ under the simultaneous boost action on both
// arguments (the state breaks boost invariance):
//   [xi_b1(x) + xi_b1(x')] G^+ =
//     i [2 pi alpha^2 cos tau + (pi - 2 tau') sin tau] cos theta / (8 pi^2 alpha^2)
//   + i [2 pi alpha^2 cos tau' + (pi - 2 tau) sin tau'] cos theta' / (8 pi^2 alpha^2);
// boost2 replaces cos theta -> sin theta at both points.
inline complexd boost_variation(const Point& p, const Point& q, const StateAlpha& st,
                                KillingField which)
{
    if (which == KillingField::Rotation) return {};
    const double a2 = st.alpha * st.alpha;
    const double ang_p = (which == KillingField::Boost1) ? std::cos(p.theta) : std::sin(p.theta);
    const double ang_q = (which == KillingField::Boost1) ? std::cos(q.theta) : std::sin(q.theta);
    const double term_p =
        (2.0 * M_PI * a2 * std::cos(p.tau) + (M_PI - 2.0 * q.tau) * std::sin(p.tau)) * ang_p;
    const double term_q =
        (2.0 * M_PI * a2 * std::cos(q.tau) + (M_PI - 2.0 * p.tau) * std::sin(q.tau)) * ang_q;
    return complexd(0.0, (term_p + term_q) / (8.0 * M_PI * M_PI * a2));
}

// Closed-form variation of the mixed derivative two-point kernel: the 2x2
// matrix [L_xi + L_xi'] d_mu d_nu' G^+ in (tau, theta) x (tau', theta')
// components. Away from coincidence the (tau, tau') entry carries the sum
// cos(tau) cos(theta) + cos(tau') cos(theta'), which reduces to the familiar
// 2 cos(tau) cos(theta) on the diagonal x = x'.
inline std::array<std::array<complexd, 2>, 2> boost_variation_derivative(const Point& p, const Point& q,
                                                                         const StateAlpha& st,
                                                                         KillingField which)
{
    std::array<std::array<complexd, 2>, 2> out{};
    if (which == KillingField::Rotation) return out;
    const complexd pref(0.0, 1.0 / (4.0 * M_PI * M_PI * st.alpha * st.alpha));
    double cp, sp, cq, sq;  // the theta-dependent weights per boost direction
    if (which == KillingField::Boost1) {
        cp = std::cos(p.theta);
        sp = std::sin(p.theta);
        cq = std::cos(q.theta);
        sq = std::sin(q.theta);
    } else {
        cp = std::sin(p.theta);
        sp = -std::cos(p.theta);
        cq = std::sin(q.theta);
        sq = -std::cos(q.theta);
    }
    out[0][0] = pref * (-(std::cos(p.tau) * cp + std::cos(q.tau) * cq));
    out[0][1] = pref * (std::sin(q.tau) * sq);
    out[1][0] = pref * (std::sin(p.tau) * sp);
    out[1][1] = 0.0;
    return out;
}

// Flat-slicing chart of the expanding patch: (t, x) -> (tau, theta).
inline Point chart_poincare(double t, double x, double hubble)
{
    const double em = std::exp(-hubble * t);
    const double tau = M_PI + std::atan(hubble * x - em) - std::atan(hubble * x + em);
    const double theta = M_PI - std::atan(hubble * x - em) - std::atan(hubble * x + em);
    return Point(tau, theta);
}

// Global chart covering the full hyperboloid: (T, X) -> (tau, theta).
inline Point chart_global(double T, double X, double hubble)
{
    const double tau = 2.0 * std::atan(std::exp(hubble * T));
    const double theta = M_PI_2 + std::atan(hubble * X);
    return Point(tau, theta);
}

// Parameter matching the small-curvature state to a flat-space mass m.
inline double alpha_of_mass(double hubble, double mass)
{
    constexpr double euler_gamma = 0.57721566490153286;
    const double arg = mass * std::exp(euler_gamma) / (2.0 * hubble);
    if (!(arg > 1.0)) throw std::domain_error("alpha_of_mass: need m e^gamma > 2 H");
    return std::sqrt(2.0 / M_PI * std::log(arg));
}

// Flat-space limit form of the two-point function at lightlike-safe
// separations: alpha^2/4 - (1/4pi) ln[iH(dt + dx - i0)] - (1/4pi) ln[iH(dt - dx - i0)].
inline complexd flat_limit_form(double alpha, double hubble, double dt, double dx)
{
    auto log_branch = [&](double a) {
        // ln[iH(a - i0)] = ln(H|a|) + i (pi/2) sgn(a)
        return complexd(std::log(hubble * std::abs(a)), M_PI_2 * detail::sgn(a));
    };
    return alpha * alpha / 4.0 - (log_branch(dt + dx) + log_branch(dt - dx)) / (4.0 * M_PI);
}

enum class FlatChart { Poincare, Global };

// Maps flat pairs into the chosen chart, evaluates the exact kernel at
// alpha(H, m), subtracts the flat-space form, and returns the largest
// absolute deviation (which is O(H)).
inline double minkowski_compare(double hubble, double mass,
                                const std::vector<std::array<double, 4>>& flat_pairs,
                                FlatChart chart = FlatChart::Poincare)
{
    const double alpha = alpha_of_mass(hubble, mass);
    const StateAlpha st(alpha);
    double worst = 0.0;
    for (const auto& pr : flat_pairs) {
        const auto map = [&](double t, double x) {
            return chart == FlatChart::Poincare ? chart_poincare(t, x, hubble)
                                                : chart_global(t, x, hubble);
        };
        const Point p = map(pr[0], pr[1]);
        const Point q = map(pr[2], pr[3]);
        const complexd curved = wightman(p, q, st);
        const complexd flat = flat_limit_form(alpha, hubble, pr[0] - pr[2], pr[1] - pr[3]);
        worst = std::max(worst, std::abs(curved - flat));
    }
    return worst;
}

// Smeared antisymmetric part G^+(f, x) - G^+(x, f) for a real test function
// f: the commutator kernel integrated against f/(H^2 sin^2 tau'); real.
inline double smeared_commutator(const TestFunction& f, const Point& x, double hubble = 1.0,
                                 std::size_t panels_tau = 24, std::size_t panels_theta = 24)
{
    const double lo = f.support_lo(), hi = f.support_hi();
    if (!(hi > lo)) return 0.0;
    // kernel(y, x) = G^+(y, x) - G^+(x, y) integrated in y gives G^+(f,x) - G^+(x,f)
    auto g = [&](double tau, double th) {
        const double s = std::sin(tau);
        return commutator_kernel(Point(tau, th), x) * f(tau, th) / (hubble * hubble * s * s);
    };
    return quad::tensor2d(g, lo, hi, 0.0, 2.0 * M_PI, panels_tau, panels_theta);
}

}  // namespace sgds
