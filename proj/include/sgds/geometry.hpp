#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace sgds {

inline double wrap_2pi(double theta)
{
    double t = std::fmod(theta, 2.0 * M_PI);
    if (t < 0.0) t += 2.0 * M_PI;
    return t;
}

// Wrap an angle difference into (-pi, pi].
inline double wrap_pm_pi(double dtheta)
{
    double t = std::fmod(dtheta, 2.0 * M_PI);
    if (t <= -M_PI) t += 2.0 * M_PI;
    if (t > M_PI) t -= 2.0 * M_PI;
    return t;
}

// Point in global conformal coordinates on the de Sitter cylinder:
// tau in (0,pi), theta in [0,2pi).
struct Point {
    double tau;
    double theta;

    Point(double tau_, double theta_) : tau(tau_), theta(wrap_2pi(theta_))
    {
        if (!(tau > 0.0 && tau < M_PI))
            throw std::domain_error("Point: tau must lie strictly inside (0, pi)");
    }
};

struct EmbeddingPoint {
    double X0;
    double X1;
    double X2;
};

// Parameters (a,b,c) of a finite rotation/boost flow; s2 = a^2 - b^2 - c^2 may
// have either sign.
struct GroupParams {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double s2() const { return a * a - b * b - c * c; }
};

enum class CausalClass { TimelikeFuture, TimelikePast, Lightlike, Spacelike };

inline EmbeddingPoint embed(const Point& p, double hubble = 1.0)
{
    if (!(hubble > 0.0)) throw std::domain_error("embed: H must be positive");
    const double s = std::sin(p.tau);
    return {-std::cos(p.tau) / (s * hubble), std::cos(p.theta) / (hubble * s),
            std::sin(p.theta) / (hubble * s)};
}

namespace detail {

// cos(s), (1-cos s)/s^2 and sin(s)/s as functions of s2 = s^2, analytic in s2
// (cos s -> cosh t, s sin s -> -t sinh t for s2 < 0). Series near s2 = 0.
inline double cos_s(double s2)
{
    if (std::abs(s2) < 1e-8) return 1.0 - s2 / 2.0 + s2 * s2 / 24.0;
    if (s2 > 0.0) return std::cos(std::sqrt(s2));
    return std::cosh(std::sqrt(-s2));
}

inline double one_minus_cos_over_s2(double s2)
{
    if (std::abs(s2) < 1e-8) return 0.5 - s2 / 24.0 + s2 * s2 / 720.0;
    if (s2 > 0.0) return (1.0 - std::cos(std::sqrt(s2))) / s2;
    const double t = std::sqrt(-s2);
    return (std::cosh(t) - 1.0) / (t * t);
}

inline double sin_over_s(double s2)
{
    if (std::abs(s2) < 1e-8) return 1.0 - s2 / 6.0 + s2 * s2 / 120.0;
    if (s2 > 0.0) {
        const double s = std::sqrt(s2);
        return std::sin(s) / s;
    }
    const double t = std::sqrt(-s2);
    return std::sinh(t) / t;
}

}  // namespace detail

// Finite symmetry flow applied to a point; inverse flips (a,b,c).
inline Point transform(const GroupParams& g, const Point& p, bool inverse = false, double hubble = 1.0)
{
    const GroupParams gg = inverse ? GroupParams{-g.a, -g.b, -g.c} : g;
    const double a = gg.a, b = gg.b, c = gg.c;
    const double s2 = gg.s2();
    const double cs = detail::cos_s(s2);
    const double E = detail::one_minus_cos_over_s2(s2);
    const double F = detail::sin_over_s(s2);

    const EmbeddingPoint X = embed(p, hubble);
    // matrix entries written via E and F so they stay finite as s2 -> 0
    const double Y0 = (1.0 + (b * b + c * c) * E) * X.X0 + (a * c * E + b * F) * X.X1
                      + (-a * b * E + c * F) * X.X2;
    const double Y1 = (-a * c * E + b * F) * X.X0 + (cs - c * c * E) * X.X1
                      + (b * c * E - a * F) * X.X2;
    const double Y2 = (a * b * E + c * F) * X.X0 + (b * c * E + a * F) * X.X1
                      + (cs - b * b * E) * X.X2;

    // invert the embedding: tau = arccot(-H Y0), theta = atan2(Y2, Y1)
    const double tau = std::atan2(1.0, -hubble * Y0);
    const double theta = std::atan2(Y2, Y1);
    return Point(tau, theta);
}

// Geodesic function z(x,x') = cos(H mu); symmetric, z = 1 at coincidence.
inline double geodesic_z(const Point& p, const Point& q)
{
    const double dth = wrap_pm_pi(p.theta - q.theta);
    return 1.0 + (std::cos(dth) - std::cos(p.tau - q.tau)) / (std::sin(p.tau) * std::sin(q.tau));
}

// Causal relation of q relative to p, from the support of the commutator
// kernel. Rejects |dtau| >= pi (light-cone wrap-around on the cylinder).
inline CausalClass causal_class(const Point& p, const Point& q, double tol = 1e-12)
{
    const double dtau = q.tau - p.tau;
    if (!(std::abs(dtau) < M_PI))
        throw std::domain_error("causal_class: |tau - tau'| must be < pi");
    const double dth = wrap_pm_pi(q.theta - p.theta);
    const double gap = std::cos(dth) - std::cos(dtau);
    if (std::abs(gap) <= tol) return CausalClass::Lightlike;
    if (gap < 0.0) return CausalClass::Spacelike;
    return dtau > 0.0 ? CausalClass::TimelikeFuture : CausalClass::TimelikePast;
}

// Killing vector fields (components in (tau, theta)).
enum class KillingField { Rotation, Boost1, Boost2 };

inline std::array<double, 2> killing_vector(KillingField k, const Point& p)
{
    switch (k) {
        case KillingField::Rotation: return {0.0, 1.0};
        case KillingField::Boost1:
            return {std::sin(p.tau) * std::cos(p.theta), std::cos(p.tau) * std::sin(p.theta)};
        case KillingField::Boost2:
            return {std::sin(p.tau) * std::sin(p.theta), -std::cos(p.tau) * std::cos(p.theta)};
    }
    return {0.0, 0.0};
}

// Analytic Jacobian matrix d xi^mu / d x^nu of a Killing field.
inline std::array<std::array<double, 2>, 2> killing_jacobian(KillingField k, const Point& p)
{
    const double st = std::sin(p.tau), ct = std::cos(p.tau);
    const double sh = std::sin(p.theta), ch = std::cos(p.theta);
    switch (k) {
        case KillingField::Rotation: return {{{0.0, 0.0}, {0.0, 0.0}}};
        case KillingField::Boost1: return {{{ct * ch, -st * sh}, {-st * sh, ct * ch}}};
        case KillingField::Boost2: return {{{ct * sh, st * ch}, {st * ch, ct * sh}}};
    }
    return {{{0.0, 0.0}, {0.0, 0.0}}};
}

// Lie bracket [X, Y]^mu = X^nu d_nu Y^mu - Y^nu d_nu X^mu using the analytic
// Jacobians above.
inline std::array<double, 2> killing_bracket(KillingField x, KillingField y, const Point& p)
{
    const auto xv = killing_vector(x, p);
    const auto yv = killing_vector(y, p);
    const auto xj = killing_jacobian(x, p);
    const auto yj = killing_jacobian(y, p);
    std::array<double, 2> out{};
    for (int mu = 0; mu < 2; ++mu)
        out[mu] = xv[0] * yj[mu][0] + xv[1] * yj[mu][1] - yv[0] * xj[mu][0] - yv[1] * xj[mu][1];
    return out;
}

}  // namespace sgds
