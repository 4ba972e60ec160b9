#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sgds/bounds.hpp"
#include "sgds/quadrature.hpp"
#include "sgds/rng.hpp"
#include "sgds/test_function.hpp"

namespace sgds {

enum class Scheme { TensorAdaptive, McPlain, McSubstituted };

// Declares that the integrand behaves like |x_a - x_b|^{-exponent} near the
// pair diagonal; with periodic_images the singular set repeats at offsets
// -2 pi, 0, +2 pi of the difference.
struct AxisPairSingularity {
    std::size_t axis_a;
    std::size_t axis_b;
    double exponent;
    bool periodic_images = false;
};

struct IntegralSpec {
    std::function<double(const std::vector<double>&)> integrand;
    std::vector<std::array<double, 2>> box;
    // interior singular coordinates per axis, honored by the tensor scheme
    std::vector<std::vector<double>> axis_splits;
    // pair diagonals, honored by the substituted Monte Carlo scheme
    std::vector<AxisPairSingularity> singular_pairs;
    Scheme scheme = Scheme::McPlain;

    std::size_t dimension() const { return box.size(); }
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::McPlain;
    bool converged = true;
};

namespace detail {

// power density on [c - half, c + half] proportional to |d - c|^{-p}, p < 1
struct PowerKernel {
    double exponent;
    double half_range;

    double sample(CounterRng& rng, double center) const
    {
        const double r = half_range * std::pow(rng.next_double(), 1.0 / (1.0 - exponent));
        const double side = rng.next_double() < 0.5 ? -1.0 : 1.0;
        return center + side * std::max(r, 1e-300);
    }

    double pdf(double d, double center) const
    {
        const double r = std::abs(d - center);
        if (r > half_range || r == 0.0) return r == 0.0 ? 1e300 : 0.0;
        return (1.0 - exponent) * std::pow(r, -exponent)
               / (2.0 * std::pow(half_range, 1.0 - exponent));
    }
};

struct MomentAccumulator {
    double n = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;

    void add(double x)
    {
        n += 1.0;
        s1 += x;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
    }

    double kurtosis() const
    {
        const double m = s1 / n;
        const double m2 = s2 / n - m * m;
        const double m4 = s4 / n - 4.0 * m * s3 / n + 6.0 * m * m * s2 / n - 3.0 * m * m * m * m;
        return m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
    }
};

inline void batch_statistics(const std::vector<double>& batch_means, double& value, double& stderr_out)
{
    const double nb = static_cast<double>(batch_means.size());
    double mean = 0.0;
    for (double m : batch_means) mean += m;
    mean /= nb;
    double var = 0.0;
    for (double m : batch_means) var += (m - mean) * (m - mean);
    value = mean;
    stderr_out = nb > 1.0 ? std::sqrt(var / (nb * (nb - 1.0))) : 0.0;
}

}  // namespace detail

// Deterministic integration of a boxed integrand. The tensor scheme supports
// dimensions 1 and 2 (with declared interior singular coordinates); the Monte
// Carlo schemes support any dimension, with the substituted variant importance
// sampling the declared pair diagonals through a power-law mixture.
inline Estimate integrate(const IntegralSpec& spec, std::uint64_t budget, std::uint64_t seed)
{
    const std::size_t d = spec.dimension();
    if (d == 0) throw std::invalid_argument("integrate: empty box");
    Estimate est;
    est.seed = seed;
    est.scheme = spec.scheme;

    if (spec.scheme == Scheme::TensorAdaptive) {
        if (d > 2)
            throw std::invalid_argument("integrate: tensor scheme supports dimension <= 2");
        auto splits = [&](std::size_t axis) {
            return axis < spec.axis_splits.size() ? spec.axis_splits[axis] : std::vector<double>{};
        };
        auto run = [&](double tol) {
            if (d == 1) {
                std::vector<double> x(1);
                return quad::adaptive_split(
                    [&](double t) {
                        x[0] = t;
                        return spec.integrand(x);
                    },
                    spec.box[0][0], spec.box[0][1], splits(0), tol);
            }
            std::vector<double> x(2);
            return quad::adaptive_split(
                [&](double t0) {
                    x[0] = t0;
                    return quad::adaptive_split(
                        [&](double t1) {
                            x[1] = t1;
                            return spec.integrand(x);
                        },
                        spec.box[1][0], spec.box[1][1], splits(1), 0.1 * tol);
                },
                spec.box[0][0], spec.box[0][1], splits(0), tol);
        };
        const double tol = 1e-8;
        const double fine = run(tol);
        const double coarse = run(100.0 * tol);
        est.value = fine;
        est.std_error = std::abs(fine - coarse);
        est.n_samples = budget;
        return est;
    }

    double volume = 1.0;
    for (const auto& b : spec.box) volume *= b[1] - b[0];

    const std::size_t n_batches = 32;
    const std::uint64_t per_batch = std::max<std::uint64_t>(budget / n_batches, 1);
    std::vector<double> batch_means;
    detail::MomentAccumulator moments;

    if (spec.scheme == Scheme::McPlain) {
        std::vector<double> x(d);
        for (std::size_t b = 0; b < n_batches; ++b) {
            CounterRng rng(seed, b);
            double sum = 0.0;
            for (std::uint64_t s = 0; s < per_batch; ++s) {
                for (std::size_t i = 0; i < d; ++i)
                    x[i] = rng.uniform(spec.box[i][0], spec.box[i][1]);
                const double w = volume * spec.integrand(x);
                sum += w;
                moments.add(w);
            }
            batch_means.push_back(sum / static_cast<double>(per_batch));
        }
        detail::batch_statistics(batch_means, est.value, est.std_error);
        est.n_samples = per_batch * n_batches;
        return est;
    }

    // mc_substituted: mixture of the uniform density and one component per
    // declared pair diagonal, combined with the balance heuristic
    const std::size_t n_pairs = spec.singular_pairs.size();
    if (n_pairs == 0)
        throw std::invalid_argument("integrate: substituted scheme needs declared singular pairs");
    const double w_uniform = 0.5;
    const double w_pair = 0.5 / static_cast<double>(n_pairs);
    std::vector<detail::PowerKernel> kernels;
    std::vector<double> spans;
    for (const auto& sp : spec.singular_pairs) {
        if (!(sp.exponent < 1.0))
            throw std::domain_error("integrate: pair exponent must be < 1 (integrable)");
        const double span = std::max(spec.box[sp.axis_a][1] - spec.box[sp.axis_b][0],
                                     spec.box[sp.axis_b][1] - spec.box[sp.axis_a][0]);
        kernels.push_back({sp.exponent, sp.periodic_images ? M_PI : span});
        spans.push_back(spec.box[sp.axis_b][1] - spec.box[sp.axis_b][0]);
    }
    auto pair_pdf = [&](std::size_t i, double xa, double xb) {
        const auto& sp = spec.singular_pairs[i];
        (void)sp;
        if (!spec.singular_pairs[i].periodic_images) return kernels[i].pdf(xa - xb, 0.0);
        double p = 0.0;
        for (double c : {-2.0 * M_PI, 0.0, 2.0 * M_PI}) p += kernels[i].pdf(xa - xb, c) / 3.0;
        return p;
    };
    std::vector<double> x(d);
    for (std::size_t b = 0; b < n_batches; ++b) {
        CounterRng rng(seed, b);
        double sum = 0.0;
        for (std::uint64_t s = 0; s < per_batch; ++s) {
            // draw the component, then the sample
            const double pick = rng.next_double();
            for (std::size_t i = 0; i < d; ++i) x[i] = rng.uniform(spec.box[i][0], spec.box[i][1]);
            if (pick >= w_uniform) {
                const std::size_t i =
                    std::min(n_pairs - 1, static_cast<std::size_t>((pick - w_uniform) / w_pair));
                const auto& sp = spec.singular_pairs[i];
                double delta;
                if (sp.periodic_images) {
                    const double c = 2.0 * M_PI * (static_cast<double>(rng.next_u64() % 3) - 1.0);
                    delta = kernels[i].sample(rng, c);
                } else {
                    delta = kernels[i].sample(rng, 0.0);
                }
                x[sp.axis_b] = x[sp.axis_a] - delta;
            }
            // contribution: zero outside the box, otherwise f / mixture density
            bool inside = true;
            for (std::size_t i = 0; i < d; ++i)
                if (x[i] < spec.box[i][0] || x[i] > spec.box[i][1]) inside = false;
            double w = 0.0;
            if (inside) {
                double density = w_uniform / volume;
                for (std::size_t i = 0; i < n_pairs; ++i) {
                    const auto& sp = spec.singular_pairs[i];
                    density += w_pair * (spans[i] / volume)
                               * pair_pdf(i, x[sp.axis_a], x[sp.axis_b]);
                }
                w = spec.integrand(x) / density;
            }
            sum += w;
            moments.add(w);
        }
        batch_means.push_back(sum / static_cast<double>(per_batch));
    }
    detail::batch_statistics(batch_means, est.value, est.std_error);
    est.n_samples = per_batch * n_batches;
    return est;
}

namespace detail {

// The explicit pre-split integrand of the squared k-th order norm: the first
// k points carry the cross-pair powers -beta^2/(4 pi) against the second k
// points, within-group pairs carry +beta^2/(4 pi), and each point carries a
// |g|/(H^2 sin^2 tau) density. pts has 2k (tau, theta) pairs flattened.
inline double smatrix_integrand(int k, double beta2, const TestFunction& g, double hubble,
                                const std::vector<double>& pts)
{
    const double p = beta2 / (4.0 * M_PI);
    double log_pairs = 0.0;
    auto dfactor = [&](int i, int j) {
        const double dtau = pts[2 * i] - pts[2 * j];
        const double dth = pts[2 * i + 1] - pts[2 * j + 1];
        return std::abs(2.0 * std::cos(dtau) - 2.0 * std::cos(dth));
    };
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            const double a = dfactor(i, j) * dfactor(k + i, k + j);
            if (a == 0.0) return 0.0;
            log_pairs += p * std::log(a);
        }
    for (int i = 0; i < k; ++i)
        for (int j = k; j < 2 * k; ++j) {
            const double a = dfactor(i, j);
            if (a == 0.0) return 1e300;  // on the singular diagonal
            log_pairs -= p * std::log(a);
        }
    double dens = 1.0;
    for (int i = 0; i < 2 * k; ++i) {
        const double tau = pts[2 * i];
        if (tau <= 0.0 || tau >= M_PI) return 0.0;
        const double s = std::sin(tau);
        dens *= std::abs(g(tau, wrap_2pi(pts[2 * i + 1]))) / (hubble * hubble * s * s);
        if (dens == 0.0) return 0.0;
    }
    return dens * std::exp(log_pairs);
}

// Conditional density of a partner point generated from a base point by
// independent power-law draws of the light-cone differences du = u - u~,
// dv = v - v~ (centers -2 pi, 0, 2 pi; half range pi each), mapped back with
// Jacobian 1/2 and theta wrapped to [0, 2 pi).
struct LightConeKernel {
    PowerKernel q;  // per-difference kernel

    void sample(CounterRng& rng, double tau, double theta, double& tau2, double& theta2) const
    {
        auto draw = [&] {
            const double c = 2.0 * M_PI * (static_cast<double>(rng.next_u64() % 3) - 1.0);
            return q.sample(rng, c);
        };
        const double du = draw();
        const double dv = draw();
        tau2 = tau - 0.5 * (du + dv);
        theta2 = wrap_2pi(theta - 0.5 * (du - dv));
    }

    double diff_pdf(double delta) const
    {
        double p = 0.0;
        for (double c : {-2.0 * M_PI, 0.0, 2.0 * M_PI}) p += q.pdf(delta, c) / 3.0;
        return p;
    }

    double pdf(double tau, double theta, double tau2, double theta2) const
    {
        // sum over the theta images that could have produced the wrapped angle
        double total = 0.0;
        for (int k = -2; k <= 2; ++k) {
            const double dth = theta - theta2 - 2.0 * M_PI * static_cast<double>(k);
            const double du = (tau - tau2) - dth;
            const double dv = (tau - tau2) + dth;
            if (std::abs(du) > 3.0 * M_PI || std::abs(dv) > 3.0 * M_PI) continue;
            total += 2.0 * diff_pdf(du) * diff_pdf(dv);
        }
        return total;
    }
};

// Smooth autocorrelation S(du, dv) of the weighted cutoff density, tabulated
// on a uniform grid over [-3 pi, 3 pi]^2 with Catmull-Rom interpolation.
struct Autocorrelation {
    std::size_t n;
    double lo, hi, h;
    std::vector<double> values;  // (n+3)^2 with one ghost ring for interpolation

    Autocorrelation(const TestFunction& g, double hubble, std::size_t grid, std::size_t panels)
        : n(grid), lo(-3.0 * M_PI), hi(3.0 * M_PI), h((hi - lo) / static_cast<double>(grid))
    {
        auto weighted = [&](double tau, double theta) {
            if (tau <= 0.0 || tau >= M_PI) return 0.0;
            const double s = std::sin(tau);
            return std::abs(g(tau, wrap_2pi(theta))) / (hubble * hubble * s * s);
        };
        const double slo = g.support_lo(), shi = g.support_hi();
        values.assign((n + 3) * (n + 3), 0.0);
        for (std::size_t i = 0; i <= n + 2; ++i) {
            const double du = lo + h * (static_cast<double>(i) - 1.0);
            for (std::size_t j = 0; j <= n + 2; ++j) {
                const double dv = lo + h * (static_cast<double>(j) - 1.0);
                auto f = [&](double tau, double theta) {
                    return weighted(tau, theta)
                           * weighted(tau - 0.5 * (du + dv), theta - 0.5 * (du - dv));
                };
                values[i * (n + 3) + j] =
                    shi > slo ? quad::tensor2d(f, slo, shi, 0.0, 2.0 * M_PI, panels, panels) : 0.0;
            }
        }
    }

    static double catmull(double pm1, double p0, double p1, double p2, double t)
    {
        return 0.5
               * ((2.0 * p0) + (-pm1 + p1) * t + (2.0 * pm1 - 5.0 * p0 + 4.0 * p1 - p2) * t * t
                  + (-pm1 + 3.0 * p0 - 3.0 * p1 + p2) * t * t * t);
    }

    double operator()(double du, double dv) const
    {
        if (du < lo || du > hi || dv < lo || dv > hi) return 0.0;
        const double fx = std::min((du - lo) / h, static_cast<double>(n) - 1e-12);
        const double fy = std::min((dv - lo) / h, static_cast<double>(n) - 1e-12);
        const std::size_t ix = static_cast<std::size_t>(fx);
        const std::size_t iy = static_cast<std::size_t>(fy);
        const double tx = fx - static_cast<double>(ix);
        const double ty = fy - static_cast<double>(iy);
        double col[4];
        for (int r = 0; r < 4; ++r) {
            const std::size_t row = (ix + static_cast<std::size_t>(r)) * (n + 3) + iy;
            col[r] = catmull(values[row], values[row + 1], values[row + 2], values[row + 3], ty);
        }
        return catmull(col[0], col[1], col[2], col[3], tx);
    }
};

}  // namespace detail

// Estimate of the 4k-dimensional pre-split integral bounding the squared norm
// of the k-th series term (k = 1 or 2). The comparison value is the analytic
// (k!)^{1 + beta^2/(4 pi)} C(g)^{2k}. The plain Monte Carlo scheme has finite
// variance only for beta^2 < 2 pi and is replaced by the substituted scheme
// outside that range or when the running kurtosis blows up.
inline Estimate smatrix_norm2_estimate(int k, const Coupling& c, const TestFunction& g,
                                       Scheme scheme, std::uint64_t budget, std::uint64_t seed,
                                       double hubble = 1.0)
{
    if (k != 1 && k != 2) throw std::invalid_argument("smatrix_norm2_estimate: k must be 1 or 2");
    const double slo = g.support_lo(), shi = g.support_hi();
    Estimate est;
    est.seed = seed;

    if (scheme == Scheme::TensorAdaptive) {
        if (k != 1)
            throw std::invalid_argument("smatrix_norm2_estimate: tensor scheme supports k = 1 only");
        // reduce to light-cone difference variables: the singular kernel
        // factorizes per axis and the cutoff enters through its smooth
        // autocorrelation
        const double p = c.beta2 / (4.0 * M_PI);
        auto run = [&](std::size_t grid, std::size_t panels) {
            detail::Autocorrelation s(g, hubble, grid, panels);
            // 2 - 2 cos t = 4 sin^2(t/2), stable near the zeros
            auto kernel = [&](double t) {
                return std::pow(2.0 * std::abs(std::sin(0.5 * t)), -p);
            };
            // the per-axis kernel is singular only on the axis-aligned lines
            // t in {-2 pi, 0, 2 pi}; a composite Gauss rule on a partition
            // geometrically graded into those lines (and the interval ends)
            // resolves it without any adaptive nesting
            const auto& gauss = quad::rule16();
            auto graded_axis = [&](double a, double b, std::vector<double>& nodes,
                                   std::vector<double>& weights) {
                nodes.clear();
                weights.clear();
                if (!(b > a)) return;
                std::vector<double> anchors{a};
                for (double sp : {-2.0 * M_PI, 0.0, 2.0 * M_PI})
                    if (sp > a + 1e-12 && sp < b - 1e-12) anchors.push_back(sp);
                anchors.push_back(b);
                std::sort(anchors.begin(), anchors.end());
                for (std::size_t seg = 0; seg + 1 < anchors.size(); ++seg) {
                    const double lo = anchors[seg], hi = anchors[seg + 1];
                    const double mid = 0.5 * (lo + hi);
                    std::vector<double> cuts{lo};
                    for (int l = 30; l >= 1; --l) cuts.push_back(lo + (mid - lo) * std::pow(0.5, l));
                    cuts.push_back(mid);
                    for (int l = 1; l <= 30; ++l) cuts.push_back(hi - (hi - mid) * std::pow(0.5, l));
                    cuts.push_back(hi);
                    for (std::size_t ci = 0; ci + 1 < cuts.size(); ++ci) {
                        const double cc = 0.5 * (cuts[ci] + cuts[ci + 1]);
                        const double hh = 0.5 * (cuts[ci + 1] - cuts[ci]);
                        if (!(hh > 0.0)) continue;
                        for (std::size_t i = 0; i < gauss.nodes.size(); ++i) {
                            const double t = cc + hh * gauss.nodes[i];
                            nodes.push_back(t);
                            weights.push_back(hh * gauss.weights[i] * kernel(t));
                        }
                    }
                }
            };
            std::vector<double> un, uw, vn, vw;
            graded_axis(-3.0 * M_PI, 3.0 * M_PI, un, uw);
            double total = 0.0;
            for (std::size_t i = 0; i < un.size(); ++i) {
                // each physical pair appears once per 2 pi window of the
                // angle difference: restrict |du - dv| <= 2 pi
                graded_axis(std::max(-3.0 * M_PI, un[i] - 2.0 * M_PI),
                            std::min(3.0 * M_PI, un[i] + 2.0 * M_PI), vn, vw);
                double row = 0.0;
                for (std::size_t j = 0; j < vn.size(); ++j) row += vw[j] * s(un[i], vn[j]);
                total += uw[i] * 0.5 * row;
            }
            return total;
        };
        const double coarse = run(48, 3);
        const double fine = run(96, 5);
        est.value = fine;
        est.std_error = std::abs(fine - coarse);
        est.n_samples = 96 * 96;
        est.scheme = Scheme::TensorAdaptive;
        return est;
    }

    if (scheme == Scheme::McPlain && c.beta2 >= 2.0 * M_PI) scheme = Scheme::McSubstituted;

    const std::size_t n_batches = 32;
    const std::uint64_t per_batch = std::max<std::uint64_t>(budget / n_batches, 1);
    const double area = (shi - slo) * 2.0 * M_PI;
    const int n_pts = 2 * k;
    std::vector<double> pts(static_cast<std::size_t>(2 * n_pts));

    auto sample_uniform_point = [&](CounterRng& rng, int i) {
        pts[2 * i] = rng.uniform(slo, shi);
        pts[2 * i + 1] = rng.uniform(0.0, 2.0 * M_PI);
    };

    auto run_mc = [&](Scheme sch) {
        std::vector<double> batch_means;
        detail::MomentAccumulator moments;
        const detail::LightConeKernel lck{{c.beta2 / (4.0 * M_PI), M_PI}};
        for (std::size_t b = 0; b < n_batches; ++b) {
            CounterRng rng(seed, b);
            double sum = 0.0;
            for (std::uint64_t smp = 0; smp < per_batch; ++smp) {
                double weight = 0.0;
                if (sch == Scheme::McPlain) {
                    for (int i = 0; i < n_pts; ++i) sample_uniform_point(rng, i);
                    weight = std::pow(area, n_pts)
                             * detail::smatrix_integrand(k, c.beta2, g, hubble, pts);
                } else {
                    // mixture: uniform over all points, or a perfect matching
                    // of base points to light-cone partners
                    const double pick = rng.next_double();
                    for (int i = 0; i < k; ++i) sample_uniform_point(rng, i);
                    if (pick < 0.5) {
                        for (int i = k; i < n_pts; ++i) sample_uniform_point(rng, i);
                    } else if (k == 1 || pick < 0.75) {
                        for (int i = 0; i < k; ++i)
                            lck.sample(rng, pts[2 * i], pts[2 * i + 1], pts[2 * (k + i)],
                                       pts[2 * (k + i) + 1]);
                    } else {
                        for (int i = 0; i < k; ++i) {
                            const int partner = k + (i + 1) % k;
                            lck.sample(rng, pts[2 * i], pts[2 * i + 1], pts[2 * partner],
                                       pts[2 * partner + 1]);
                        }
                    }
                    bool inside = true;
                    for (int i = k; i < n_pts; ++i)
                        if (pts[2 * i] < slo || pts[2 * i] > shi) inside = false;
                    if (inside) {
                        const double base = std::pow(area, -static_cast<double>(k));
                        auto ker = [&](int i, int j) {
                            return lck.pdf(pts[2 * i], pts[2 * i + 1], pts[2 * j], pts[2 * j + 1]);
                        };
                        double density;
                        if (k == 1) {
                            density = base * (0.5 / area + 0.5 * ker(0, 1));
                        } else {
                            density = base
                                      * (0.5 / (area * area) + 0.25 * ker(0, 2) * ker(1, 3)
                                         + 0.25 * ker(0, 3) * ker(1, 2));
                        }
                        weight = detail::smatrix_integrand(k, c.beta2, g, hubble, pts) / density;
                    }
                }
                sum += weight;
                moments.add(weight);
            }
            batch_means.push_back(sum / static_cast<double>(per_batch));
        }
        Estimate e;
        detail::batch_statistics(batch_means, e.value, e.std_error);
        e.n_samples = per_batch * n_batches;
        e.seed = seed;
        e.scheme = sch;
        e.converged = moments.kurtosis() < 1e4;
        return e;
    };

    est = run_mc(scheme);
    if (scheme == Scheme::McPlain && !est.converged) est = run_mc(Scheme::McSubstituted);
    return est;
}

}  // namespace sgds
