#pragma once

#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sgds/propagators.hpp"

namespace sgds {

struct VertexInsertion {
    double gamma;
    Point point;
};

// An ordered product of vertex operators evaluated in the alpha state, or in
// the alpha -> infinity limit (which enforces charge neutrality).
struct VertexConfiguration {
    std::vector<VertexInsertion> insertions;
    Ordering ordering = Ordering::Wightman;
    double alpha = 1.0;
    bool alpha_infinity = false;

    double charge_sum() const
    {
        double s = 0.0;
        for (const auto& v : insertions) s += v.gamma;
        return s;
    }

    bool neutral(double tol = 1e-12) const { return std::abs(charge_sum()) < tol; }
};

namespace detail {

// ln[2 cos(dtau - i0) - 2 cos(dtheta)] with the branch fixed by the
// convergence factor of the underlying mode sum:
// ln|D| + i pi Theta(-D) sgn(sin dtau).
inline complexd cone_log(double dtau, double dtheta)
{
    const double arg = cone_log_arg(dtau, dtheta);
    if (std::abs(arg) < 1e-300)
        throw std::domain_error("cone_log: pair on the light cone (singular support)");
    complexd val(std::log(std::abs(arg)), 0.0);
    if (arg < 0.0) val += complexd(0.0, M_PI * sgn(std::sin(dtau)));
    return val;
}

inline void check_time_ordering(const VertexConfiguration& cfg)
{
    if (cfg.ordering == Ordering::Wightman) return;
    for (std::size_t j = 0; j < cfg.insertions.size(); ++j)
        for (std::size_t k = j + 1; k < cfg.insertions.size(); ++k)
            if (-cfg.insertions[j].gamma * cfg.insertions[k].gamma >= 4.0 * M_PI)
                throw std::domain_error(
                    "vertex correlator: time-ordered pair (" + std::to_string(j) + ","
                    + std::to_string(k) + ") violates -gamma_j gamma_k < 4 pi");
}

}  // namespace detail

// Correlation function of a product of vertex operators:
//   exp[- sum_{j<k} gamma_j gamma_k i G^+(x_j, x_k)]
//   * prod_j exp[- gamma_j^2/2 (alpha^2/4 + (tau_j - pi/2)^2/(4 pi^2 alpha^2))]
// with the ordering's dtau replacement inside every pair kernel. In the
// alpha -> infinity limit only neutral configurations survive; the value is
// the product of cosine-difference pair powers.
inline complexd vertex_correlator(const VertexConfiguration& cfg)
{
    const auto& ins = cfg.insertions;
    if (ins.empty()) return 1.0;
    detail::check_time_ordering(cfg);

    // pairwise part: sum over j < k of gamma_j gamma_k times the ordered
    // light-cone log and, at finite alpha, the full kernel
    complexd pair_exponent{};
    for (std::size_t j = 0; j < ins.size(); ++j) {
        for (std::size_t k = j + 1; k < ins.size(); ++k) {
            const double gg = ins[j].gamma * ins[k].gamma;
            const double dtau = apply_ordering(ins[j].point.tau - ins[k].point.tau, cfg.ordering);
            const double dth = ins[j].point.theta - ins[k].point.theta;
            if (std::abs(detail::cone_log_arg(dtau, dth)) < 1e-300) {
                // a vanishing pair power is allowed (the factor is 0), a
                // divergent one is not
                if (gg > 0.0) return 0.0;
                throw std::domain_error("vertex_correlator: singular pair with gamma_j gamma_k < 0");
            }
            pair_exponent += gg / (4.0 * M_PI) * detail::cone_log(dtau, dth);
        }
    }

    if (cfg.alpha_infinity) {
        if (!cfg.neutral()) return 0.0;
        return std::exp(pair_exponent);
    }

    const double a2 = cfg.alpha * cfg.alpha;
    // zero-mode and single-point factors: writing the pair kernels through
    // the light-cone log leaves the Gaussian charge factors
    double gamma_sum = 0.0, weighted_tau = 0.0;
    for (const auto& v : ins) {
        gamma_sum += v.gamma;
        weighted_tau += v.gamma * (v.point.tau - M_PI_2);
    }
    const double real_exponent = -a2 / 8.0 * gamma_sum * gamma_sum
                                 - weighted_tau * weighted_tau / (8.0 * M_PI * M_PI * a2);
    return std::exp(pair_exponent + real_exponent);
}

// The Weyl dressing e^{-i phi(f)} ... e^{i phi(f)} multiplies the correlator
// by the pure phase exp[i sum_j gamma_j (G^+(f, x_j) - G^+(x_j, f))].
inline complexd weyl_dressing_phase(const VertexConfiguration& cfg, const TestFunction& f,
                                    double hubble = 1.0)
{
    double arg = 0.0;
    for (const auto& v : cfg.insertions) arg += v.gamma * smeared_commutator(f, v.point, hubble);
    return std::polar(1.0, arg);
}

namespace detail {

// the bracket multiplying the correlator when one field is inserted:
//   i alpha^2/4 sum gamma + (i/(4 pi^2 alpha^2)) (tau' - pi/2) sum gamma_j (tau_j - pi/2)
//   - (i/4pi) sum gamma_j ln[2 cos(tau_j - tau' - i0) - 2 cos(theta_j - theta')]
// plus the smeared commutator of the dressing when present
inline complexd field_bracket(const VertexConfiguration& cfg, const Point& x,
                              const TestFunction* dressing, double hubble)
{
    complexd b{};
    double gamma_sum = 0.0, weighted_tau = 0.0;
    for (const auto& v : cfg.insertions) {
        gamma_sum += v.gamma;
        weighted_tau += v.gamma * (v.point.tau - M_PI_2);
        const double dtau = apply_ordering(v.point.tau - x.tau, cfg.ordering);
        b -= complexd(0.0, v.gamma / (4.0 * M_PI)) * cone_log(dtau, v.point.theta - x.theta);
    }
    if (cfg.alpha_infinity) {
        if (dressing) b += smeared_commutator(*dressing, x, hubble);
        return b;  // the alpha-dependent terms are dropped in the limit
    }
    const double a2 = cfg.alpha * cfg.alpha;
    b += complexd(0.0, a2 / 4.0 * gamma_sum);
    b += complexd(0.0, (x.tau - M_PI_2) * weighted_tau / (4.0 * M_PI * M_PI * a2));
    if (dressing) b += smeared_commutator(*dressing, x, hubble);
    return b;
}

}  // namespace detail

// Correlator with zero, one or two field insertions appended, optionally
// conjugated by Weyl operators e^{i phi(f)}. Two field insertions require a
// neutral configuration (the closed form assumes it); the n = 0 two-field
// case reduces to the plain two-point kernel.
inline complexd vertex_with_fields(const VertexConfiguration& cfg,
                                   const std::vector<Point>& field_points,
                                   const std::optional<TestFunction>& dressing = std::nullopt,
                                   double hubble = 1.0)
{
    if (field_points.size() > 2)
        throw std::invalid_argument("vertex_with_fields: at most two field insertions");
    const TestFunction* f = dressing ? &*dressing : nullptr;

    complexd corr = vertex_correlator(cfg);
    if (f) corr *= weyl_dressing_phase(cfg, *f, hubble);

    if (field_points.empty()) return corr;

    // non-neutral configurations with at least one vertex operator vanish in
    // the limit (an empty configuration is trivially neutral)
    if (cfg.alpha_infinity && !cfg.neutral()) return complexd{};

    if (field_points.size() == 1) {
        if (f)
            throw std::invalid_argument(
                "vertex_with_fields: dressing is supported for zero or two field insertions");
        return corr * detail::field_bracket(cfg, field_points[0], nullptr, hubble);
    }

    if (!cfg.insertions.empty() && !cfg.neutral())
        throw std::domain_error("vertex_with_fields: two field insertions require neutrality");

    const Point& xp = field_points[0];
    const Point& xq = field_points[1];
    const complexd b1 = detail::field_bracket(cfg, xp, f, hubble);
    const complexd b2 = detail::field_bracket(cfg, xq, f, hubble);

    const double dtau = apply_ordering(xp.tau - xq.tau, cfg.ordering);
    complexd pair = -detail::cone_log(dtau, xp.theta - xq.theta) / (4.0 * M_PI);
    if (!cfg.alpha_infinity) {
        const double a2 = cfg.alpha * cfg.alpha;
        pair += a2 / 4.0 + (xp.tau - M_PI_2) * (xq.tau - M_PI_2) / (4.0 * M_PI * M_PI * a2);
    }
    return corr * (b1 * b2 + pair);
}

// Scaling-degree estimate at the partial diagonal x_j = x_k: log-log
// regression of the pair factor against the separation scale; the closed
// form predicts -gamma_j gamma_k / (2 pi).
struct ScalingFit {
    double degree;
    double residual;
};

inline ScalingFit scaling_degree_estimate(double gamma_j, double gamma_k, const Point& base,
                                          const std::array<double, 2>& direction,
                                          const std::vector<double>& lambdas)
{
    if (lambdas.size() < 8)
        throw std::invalid_argument("scaling_degree_estimate: need at least 8 scales");
    std::vector<double> xs, ys;
    for (double lam : lambdas) {
        const double dtau = lam * direction[0];
        const double dth = lam * direction[1];
        const double arg = detail::cone_log_arg(dtau, dth);
        if (std::abs(arg) < 1e-300) throw std::domain_error("scaling_degree_estimate: null direction");
        // magnitude of the pair factor [2 cos dtau - 2 cos dtheta]^{g g'/4pi}
        const double logmag = gamma_j * gamma_k / (4.0 * M_PI) * std::log(std::abs(arg));
        (void)base;  // the pair factor is translation invariant on the cylinder
        xs.push_back(std::log(lam));
        ys.push_back(logmag);
    }
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - my - slope * (xs[i] - mx);
        ss += r * r;
    }
    return {-slope, std::sqrt(ss / n)};
}

}  // namespace sgds
