// End-to-end acceptance gate: one pass/fail line per criterion, nonzero exit
// if any fails. Tolerances are pinned here, independent of the unit suites.
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sgds/bounds.hpp"
#include "sgds/estimator.hpp"
#include "sgds/fock.hpp"
#include "sgds/geometry.hpp"
#include "sgds/modes.hpp"
#include "sgds/propagators.hpp"
#include "sgds/quadrature.hpp"
#include "sgds/rng.hpp"
#include "sgds/vertex.hpp"

using namespace sgds;

namespace {

int failures = 0;

void report(int n, const char* desc, bool ok, const std::string& detail)
{
    std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", n, desc, detail.c_str());
    if (!ok) ++failures;
}

void run(int n, const char* desc, const std::function<bool(std::string&)>& body)
{
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    report(n, desc, ok, detail);
}

std::string fmt(double x)
{
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    return buf;
}

Point random_point(CounterRng& rng, double margin = 0.15)
{
    return Point(rng.uniform(margin, M_PI - margin), rng.uniform(0.0, 2.0 * M_PI));
}

std::pair<Point, Point> random_separated_pair(CounterRng& rng)
{
    for (;;) {
        const Point p = random_point(rng);
        const Point q = random_point(rng);
        if (std::abs(detail::cone_log_arg(p.tau - q.tau, p.theta - q.theta)) > 0.05)
            return {p, q};
    }
}

GroupParams flow_params(KillingField k, double t)
{
    switch (k) {
        case KillingField::Rotation: return {t, 0.0, 0.0};
        case KillingField::Boost1: return {0.0, t, 0.0};
        case KillingField::Boost2: return {0.0, 0.0, t};
    }
    return {};
}

// analytic mixed-derivative two-point tensor d_mu d_nu' of the kernel
std::array<std::array<complexd, 2>, 2> mixed_tensor(const Point& p, const Point& q,
                                                    const StateAlpha& st)
{
    const double dtau = p.tau - q.tau, dth = p.theta - q.theta;
    const double d = detail::cone_log_arg(dtau, dth);
    std::array<std::array<complexd, 2>, 2> t{};
    const double st2 = std::sin(dtau), ct2 = std::cos(dtau);
    const double sh2 = std::sin(dth), ch2 = std::cos(dth);
    t[0][0] = 1.0 / (4.0 * M_PI * M_PI * st.alpha * st.alpha)
              - (2.0 * ct2 / d + 4.0 * st2 * st2 / (d * d)) / (4.0 * M_PI);
    t[0][1] = -(-4.0 * st2 * sh2 / (d * d)) / (4.0 * M_PI);
    t[1][0] = t[0][1];
    t[1][1] = -(-2.0 * ch2 / d + 4.0 * sh2 * sh2 / (d * d)) / (4.0 * M_PI);
    return t;
}

}  // namespace

int main()
{
    std::setvbuf(stdout, nullptr, _IONBF, 0);

    run(1, "symmetry algebra, analytic and flow-generated", [](std::string& detail) {
        CounterRng rng(1001);
        double worst_an = 0.0;
        for (int i = 0; i < 100; ++i) {
            const Point p = random_point(rng);
            const auto c1 = killing_bracket(KillingField::Rotation, KillingField::Boost1, p);
            const auto e1 = killing_vector(KillingField::Boost2, p);
            const auto c2 = killing_bracket(KillingField::Rotation, KillingField::Boost2, p);
            const auto e2 = killing_vector(KillingField::Boost1, p);
            const auto c3 = killing_bracket(KillingField::Boost1, KillingField::Boost2, p);
            const auto e3 = killing_vector(KillingField::Rotation, p);
            for (int m = 0; m < 2; ++m)
                worst_an = std::max({worst_an, std::abs(c1[m] + e1[m]), std::abs(c2[m] - e2[m]),
                                     std::abs(c3[m] - e3[m])});
        }
        // finite-flow version: Richardson-corrected group commutator
        auto bracket_fd = [](KillingField x, KillingField y, const Point& p) {
            auto comm = [&](double t) -> std::array<double, 2> {
                Point q = transform(flow_params(x, t), p);
                q = transform(flow_params(y, t), q);
                q = transform(flow_params(x, -t), q);
                q = transform(flow_params(y, -t), q);
                return {(q.tau - p.tau) / (t * t), wrap_pm_pi(q.theta - p.theta) / (t * t)};
            };
            const double t = 4e-4;
            const auto b1 = comm(t);
            const auto b2 = comm(2.0 * t);
            return std::array<double, 2>{2.0 * b1[0] - b2[0], 2.0 * b1[1] - b2[1]};
        };
        double worst_fd = 0.0;
        for (int i = 0; i < 10; ++i) {
            const Point p = random_point(rng, 0.3);
            const auto f1 = bracket_fd(KillingField::Rotation, KillingField::Boost1, p);
            const auto e1 = killing_vector(KillingField::Boost2, p);
            const auto f2 = bracket_fd(KillingField::Rotation, KillingField::Boost2, p);
            const auto e2 = killing_vector(KillingField::Boost1, p);
            const auto f3 = bracket_fd(KillingField::Boost1, KillingField::Boost2, p);
            const auto e3 = killing_vector(KillingField::Rotation, p);
            for (int m = 0; m < 2; ++m)
                worst_fd = std::max({worst_fd, std::abs(f1[m] + e1[m]), std::abs(f2[m] - e2[m]),
                                     std::abs(f3[m] - e3[m])});
        }
        detail = "analytic " + fmt(worst_an) + ", flow " + fmt(worst_fd);
        return worst_an < 1e-10 && worst_fd < 1e-6;
    });

    run(2, "finite flows: inverse, measure, first-order expansion", [](std::string& detail) {
        CounterRng rng(1002);
        double worst_rt = 0.0;
        int neg = 0;
        for (int i = 0; i < 1000; ++i) {
            const Point p = random_point(rng);
            GroupParams g{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            if (i % 2 == 0) g.a *= 0.1;
            if (g.s2() < 0.0) ++neg;
            const Point q = transform(g, p);
            const Point back = transform(g, q, true);
            worst_rt = std::max(worst_rt,
                                std::hypot(back.tau - p.tau, wrap_pm_pi(back.theta - p.theta)));
        }
        if (neg < 100 || neg > 900) {
            detail = "parameter draws did not cover both signs of s^2";
            return false;
        }
        double worst_jac = 0.0;
        const double h = 1e-5;
        for (int i = 0; i < 50; ++i) {
            const Point p = random_point(rng, 0.3);
            const GroupParams g{rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6),
                                rng.uniform(-0.6, 0.6)};
            const Point q = transform(g, p);
            if (q.tau < 0.2 || q.tau > M_PI - 0.2) continue;
            auto image = [&](double dt, double dh) {
                return transform(g, Point(p.tau + dt, p.theta + dh));
            };
            const Point tp = image(h, 0.0), tm = image(-h, 0.0);
            const Point hp = image(0.0, h), hm = image(0.0, -h);
            const double det = ((tp.tau - tm.tau) * wrap_pm_pi(hp.theta - hm.theta)
                                - (hp.tau - hm.tau) * wrap_pm_pi(tp.theta - tm.theta))
                               / (4.0 * h * h);
            const double expected = std::pow(std::sin(q.tau) / std::sin(p.tau), 2);
            worst_jac = std::max(worst_jac, std::abs(det - expected) / expected);
        }
        // leading-order flow formulas with quadratic Richardson slope; a fresh
        // stream avoids draws where the quadratic coefficient itself vanishes
        CounterRng srng(44);
        double worst_slope_dev = 0.0;
        for (int rep = 0; rep < 10; ++rep) {
            const Point p = random_point(srng, 0.4);
            const GroupParams dir{srng.uniform(-1.0, 1.0), srng.uniform(-1.0, 1.0),
                                  srng.uniform(-1.0, 1.0)};
            auto remainder = [&](double lam) {
                const Point q = transform({lam * dir.a, lam * dir.b, lam * dir.c}, p);
                const double stt = std::sin(p.tau), ct = std::cos(p.tau);
                const double ch = std::cos(p.theta), sh = std::sin(p.theta);
                const double tau1 = p.tau + lam * (dir.b * ch + dir.c * sh) * stt;
                const double th1 = p.theta + lam * (dir.a + (dir.b * sh - dir.c * ch) * ct);
                return std::hypot(q.tau - tau1, wrap_pm_pi(q.theta - th1));
            };
            double sum = 0.0;
            int count = 0;
            double lam = 0.1;
            for (int i = 0; i < 6; ++i, lam *= 0.5) {
                const double r1 = remainder(lam), r2 = remainder(0.5 * lam);
                if (r1 > 1e-12 && r2 > 1e-12) {
                    sum += std::log2(r1 / r2);
                    ++count;
                }
            }
            if (count > 0) worst_slope_dev = std::max(worst_slope_dev, std::abs(sum / count - 2.0));
        }
        detail = "round trip " + fmt(worst_rt) + ", jacobian " + fmt(worst_jac) + ", slope dev "
                 + fmt(worst_slope_dev);
        return worst_rt < 1e-9 && worst_jac < 1e-8 && worst_slope_dev < 0.1;
    });

    run(3, "mode sum equals the closed form and converges geometrically", [](std::string& detail) {
        CounterRng rng(1003);
        const Regulator reg(0.05);
        double worst = 0.0;
        int done = 0;
        while (done < 20) {
            auto [p, q] = random_separated_pair(rng);
            const StateAlpha st(rng.uniform(0.4, 2.5));
            worst = std::max(worst, std::abs(mode_sum_kernel(400, reg, p, q, st)
                                             - wightman_regulated(p, q, st, reg)));
            ++done;
        }
        const Regulator slow(0.1);
        const StateAlpha st1(1.0);
        const Point p(M_PI_2, 0.0), q(M_PI_2 - 0.4, 2.0);
        const complexd ref = mode_sum_kernel(4000, slow, p, q, st1);
        double sum_rate = 0.0;
        int count = 0;
        for (int N : {40, 60, 80, 100, 120}) {
            const double e1 = std::abs(mode_sum_kernel(N, slow, p, q, st1) - ref);
            const double e2 = std::abs(mode_sum_kernel(N + 20, slow, p, q, st1) - ref);
            if (e1 > 1e-13 && e2 > 1e-13) {
                sum_rate += std::log(e1 / e2) / 20.0;
                ++count;
            }
        }
        const double rate = count ? sum_rate / count : 0.0;
        detail = "residual " + fmt(worst) + ", rate " + fmt(rate) + " vs eps 0.1";
        return worst < 1e-6 && std::abs(rate - slow.epsilon) < 0.1 * slow.epsilon;
    });

    run(4, "state positivity and the smeared closed form", [](std::string& detail) {
        const StateAlpha st(1.0);
        CounterRng rng(1004);
        double lowest = 0.0;
        for (int rep = 0; rep < 10; ++rep) {
            const double lo = rng.uniform(0.5, 1.2);
            const double hi = lo + rng.uniform(0.4, 1.2);
            TestFunction f = TestFunction::bump(lo, hi, rng.uniform(-2.0, 2.0));
            if (rep % 2 == 0)
                f = f.plus(TestFunction::bump2d(lo + 0.1, hi + 0.2, rng.uniform(0.0, 2.0 * M_PI),
                                                1.0, rng.uniform(-1.0, 1.0)));
            double total = 0.0;
            for (int n = -40; n <= 40; ++n) total += std::norm(smeared_mode(n, st, f));
            lowest = std::min(lowest, total);
        }
        // cross-smeared kernel vs the mode expansion, disjoint smooth supports
        const TestFunction f = TestFunction::bump2d(0.6, 1.0, 1.0, 0.8, 1.0);
        const TestFunction g = TestFunction::bump2d(1.8, 2.2, 4.0, 0.8, 1.0);
        complexd modes{};
        for (int n = -80; n <= 80; ++n)
            modes += smeared_mode(n, st, f) * std::conj(smeared_mode(n, st, g));
        auto inner = [&](double ty, double hy) {
            auto kf = [&](double tx, double hx) {
                const double s = std::sin(tx);
                return wightman(Point(tx, hx), Point(ty, hy), st) * (f(tx, hx) / (s * s));
            };
            return quad::tensor2d(kf, 0.6, 1.0, 0.0, 2.0 * M_PI, 6, 12);
        };
        auto outer = [&](double ty, double hy) {
            const double s = std::sin(ty);
            return inner(ty, hy) * (g(ty, hy) / (s * s));
        };
        const complexd direct = quad::tensor2d(outer, 1.8, 2.2, 0.0, 2.0 * M_PI, 6, 12);
        const double gap = std::abs(modes - direct);
        detail = "lowest quadratic form " + fmt(lowest) + ", smeared gap " + fmt(gap);
        return lowest >= -1e-10 && gap < 1e-6;
    });

    run(5, "wave equation in each argument", [](std::string& detail) {
        const StateAlpha st(1.0);
        const double s = 1e-3;
        auto d2 = [&](auto&& f, double x) {
            return (-f(x + 2.0 * s) + 16.0 * f(x + s) - 30.0 * f(x) + 16.0 * f(x - s)
                    - f(x - 2.0 * s))
                   / (12.0 * s * s);
        };
        CounterRng rng(1005);
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            auto [p, q] = random_separated_pair(rng);
            if (std::abs(detail::cone_log_arg(p.tau - q.tau, p.theta - q.theta)) < 0.3) continue;
            auto gt = [&](double t) { return wightman(Point(t, p.theta), q, st); };
            auto gh = [&](double h) { return wightman(Point(p.tau, h), q, st); };
            worst = std::max(worst, std::abs(-d2(gt, p.tau) + d2(gh, p.theta)));
        }
        detail = "residual " + fmt(worst);
        return worst < 1e-4;
    });

    run(6, "boost action on the kernel and its derivative matrix", [](std::string& detail) {
        CounterRng rng(1006);
        double worst_flow = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            auto [p, q] = random_separated_pair(rng);
            const StateAlpha st(rng.uniform(0.6, 1.8));
            for (KillingField kf : {KillingField::Boost1, KillingField::Boost2}) {
                auto params = [&](double s) { return flow_params(kf, s); };
                auto flowed = [&](double s) {
                    return wightman(transform(params(s), p), transform(params(s), q), st);
                };
                const double s = 1e-4;
                const complexd fd = (-flowed(2.0 * s) + 8.0 * flowed(s) - 8.0 * flowed(-s)
                                     + flowed(-2.0 * s))
                                    / (12.0 * s);
                const complexd closed = complexd(0.0, 1.0) * boost_variation(p, q, st, kf);
                worst_flow = std::max(worst_flow, std::abs(fd - closed));
            }
        }
        // Lie derivative of the analytic derivative tensor, assembled from the
        // analytic Killing jacobians and high-order coordinate differences
        double worst_tensor = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            auto [p, q] = random_separated_pair(rng);
            if (std::abs(detail::cone_log_arg(p.tau - q.tau, p.theta - q.theta)) < 0.3) continue;
            const StateAlpha st(rng.uniform(0.7, 1.6));
            for (KillingField kf : {KillingField::Boost1, KillingField::Boost2}) {
                const auto xi_p = killing_vector(kf, p);
                const auto xi_q = killing_vector(kf, q);
                const auto jp = killing_jacobian(kf, p);
                const auto jq = killing_jacobian(kf, q);
                const double h = 1e-3;
                auto T = [&](double a, double b, double c, double d) {
                    return mixed_tensor(Point(p.tau + a, p.theta + b),
                                        Point(q.tau + c, q.theta + d), st);
                };
                auto d4 = [&](auto&& f) {
                    const auto f1 = f(h), f2 = f(-h), f3 = f(2.0 * h), f4 = f(-2.0 * h);
                    std::array<std::array<complexd, 2>, 2> out{};
                    for (int mu = 0; mu < 2; ++mu)
                        for (int nu = 0; nu < 2; ++nu)
                            out[mu][nu] = (-f3[mu][nu] + 8.0 * f1[mu][nu] - 8.0 * f2[mu][nu]
                                           + f4[mu][nu])
                                          / (12.0 * h);
                    return out;
                };
                const auto dp = d4([&](double s) { return T(s * xi_p[0], s * xi_p[1], 0, 0); });
                const auto dq = d4([&](double s) { return T(0, 0, s * xi_q[0], s * xi_q[1]); });
                const auto t0 = T(0, 0, 0, 0);
                const auto closed = boost_variation_derivative(p, q, st, kf);
                for (int mu = 0; mu < 2; ++mu)
                    for (int nu = 0; nu < 2; ++nu) {
                        complexd lie = dp[mu][nu] + dq[mu][nu];
                        for (int a = 0; a < 2; ++a) lie += jp[a][mu] * t0[a][nu];
                        for (int b = 0; b < 2; ++b) lie += jq[b][nu] * t0[mu][b];
                        worst_tensor = std::max(
                            worst_tensor, std::abs(lie - complexd(0.0, 1.0) * closed[mu][nu]));
                    }
            }
        }
        // the variation settles to its limit like alpha^{-2}
        const Point p(1.0, 0.4), q(1.9, 5.3);
        auto deviation = [&](double a) {
            const complexd lim = boost_variation(p, q, StateAlpha(1e8), KillingField::Boost1);
            return std::abs(boost_variation(p, q, StateAlpha(a), KillingField::Boost1) - lim);
        };
        const double slope = std::log(deviation(16.0) / deviation(2.0)) / std::log(8.0);
        detail = "flow " + fmt(worst_flow) + ", tensor " + fmt(worst_tensor) + ", slope "
                 + fmt(slope);
        return worst_flow < 1e-5 && worst_tensor < 1e-8 && std::abs(slope + 2.0) < 0.05;
    });

    run(7, "short-distance form: coincidence limit and reconstruction", [](std::string& detail) {
        double worst_coin = 0.0;
        for (double a : {0.7, 1.0, 1.9}) {
            for (double hub : {1.0, 1.4}) {
                const StateAlpha st(a);
                const double scale_m = 0.5;
                const Point p(1.1, 2.0);
                const double direct = hadamard_w(p, p, st, scale_m, hub);
                const double expect = M_PI * a * a
                                      + std::pow(p.tau - M_PI_2, 2) / (M_PI * a * a)
                                      - std::log(4.0 * std::sin(p.tau) * std::sin(p.tau))
                                      - std::log(hub * hub / (2.0 * scale_m));
                worst_coin = std::max(worst_coin, std::abs(direct - expect));
            }
        }
        CounterRng rng(1007);
        const double scale_m = 0.7, hub = 1.3;
        double worst_rec = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            auto [p, q] = random_separated_pair(rng);
            if (geodesic_z(p, q) <= -0.99) continue;
            const StateAlpha st(rng.uniform(0.5, 2.0));
            const double w = hadamard_w(p, q, st, scale_m, hub);
            const double sigma = synge_sigma(p, q, hub);
            const complexd log_msigma(std::log(scale_m * std::abs(sigma)),
                                      sigma < 0.0 ? M_PI : 0.0);
            const complexd rec = (complexd(w, 0.0) - log_msigma) / (4.0 * M_PI);
            worst_rec = std::max(worst_rec,
                                 std::abs(rec - wightman(p, q, st, Ordering::TimeOrdered)));
        }
        detail = "coincidence " + fmt(worst_coin) + ", reconstruction " + fmt(worst_rec);
        return worst_coin < 1e-8 && worst_rec < 1e-10;
    });

    run(8, "flat-space limit: linear decay, chart independence", [](std::string& detail) {
        CounterRng rng(1008);
        std::vector<std::array<double, 4>> pairs;
        while (pairs.size() < 8) {
            std::array<double, 4> pr{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4),
                                     rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)};
            if (std::abs(std::abs(pr[0] - pr[2]) - std::abs(pr[1] - pr[3])) > 0.15)
                pairs.push_back(pr);
        }
        double min_slope = 1e300;
        for (FlatChart chart : {FlatChart::Poincare, FlatChart::Global}) {
            const double d1 = minkowski_compare(0.02, 1.0, pairs, chart);
            const double d2 = minkowski_compare(0.005, 1.0, pairs, chart);
            min_slope = std::min(min_slope, std::log(d1 / d2) / std::log(4.0));
        }
        // deep in the limit the two charts give the same kernel values; pairs
        // centered on the chart origin avoid the O(H * mean time) drift of the
        // comoving spatial coordinate between the two slicings
        const double hub = 1e-5;
        const StateAlpha st(alpha_of_mass(hub, 1.0));
        double chart_gap = 0.0;
        for (int i = 0; i < 8; ++i) {
            double t, x;
            do {
                t = rng.uniform(-0.4, 0.4);
                x = rng.uniform(-0.4, 0.4);
            } while (std::abs(std::abs(2.0 * t) - std::abs(2.0 * x)) < 0.15);
            const complexd a = wightman(chart_poincare(t, x, hub),
                                        chart_poincare(-t, -x, hub), st);
            const complexd b = wightman(chart_global(t, x, hub),
                                        chart_global(-t, -x, hub), st);
            chart_gap = std::max(chart_gap, std::abs(a - b));
        }
        detail = "slope " + fmt(min_slope) + ", chart gap " + fmt(chart_gap);
        return min_slope >= 1.0 && chart_gap < 1e-9;
    });

    run(9, "vertex correlators: oracle, suppression, scaling, symmetry", [](std::string& detail) {
        // truncated oracles against the closed forms, 1 to 3 spacelike
        // insertions with every |gamma_j gamma_k| <= 2 pi
        VertexConfiguration one;
        one.insertions = {{0.9, Point(1.3, 0.4)}};
        one.alpha = 1.1;
        VertexConfiguration two;
        two.insertions = {{0.6, Point(1.1, 0.2)}, {-0.6, Point(1.1, 3.0)}};
        two.alpha = 1.0;
        VertexConfiguration three;
        three.insertions = {{0.8, Point(1.1, 0.0)}, {-0.5, Point(1.1, 2.0)},
                            {-0.3, Point(1.1, 4.2)}};
        three.alpha = 0.9;
        double worst_win = 0.0, tail_win = 0.0;
        for (const auto& cfg : {one, two, three}) {
            const complexd exact = vertex_correlator(cfg);
            const complexd fine = matched_truncation_correlator(cfg, 20000);
            worst_win = std::max(worst_win, std::abs(fine - exact));
            tail_win = std::max(tail_win, std::abs(fine - matched_truncation_correlator(cfg, 10000)));
        }
        // ladder-operator oracle against the correlator with the pairwise
        // kernel truncated to the same mode window
        const VertexExpectation ve = truncated_vertex_expectation(two, {6, 3, 6}, 30);
        double fock_gap = std::abs(ve.value - matched_truncation_correlator(two, 6));
        const VertexExpectation ve3 = truncated_vertex_expectation(three, {6, 3, 6}, 30);
        fock_gap = std::max(fock_gap,
                            std::abs(ve3.value - matched_truncation_correlator(three, 6))
                                - ve3.tail_estimate);

        VertexConfiguration nn;
        nn.insertions = {{1.0, Point(1.0, 0.2)}, {0.5, Point(2.0, 4.0)}};
        std::vector<double> xs, ys;
        for (double a : {1.0, 1.5, 2.2, 3.0}) {
            nn.alpha = a;
            xs.push_back(a * a);
            ys.push_back(std::log(std::abs(vertex_correlator(nn))));
        }
        const double slope = (ys.back() - ys.front()) / (xs.back() - xs.front());
        const double want = -1.5 * 1.5 / 8.0;
        const double slope_rel = std::abs(slope - want) / std::abs(want);

        std::vector<double> lambdas;
        for (int i = 0; i < 10; ++i) lambdas.push_back(0.05 * std::pow(0.7, i));
        const auto fit = scaling_degree_estimate(1.0, -1.0, Point(1.4, 2.0), {0.6, 0.8}, lambdas);
        const double deg_gap = std::abs(fit.degree - 1.0 / (2.0 * M_PI));

        VertexConfiguration tord;
        tord.insertions = {{0.9, Point(0.7, 0.1)}, {-0.4, Point(1.9, 3.0)},
                           {-0.5, Point(2.4, 5.0)}};
        tord.ordering = Ordering::TimeOrdered;
        tord.alpha = 0.9;
        const complexd base = vertex_correlator(tord);
        std::swap(tord.insertions[0], tord.insertions[2]);
        const double perm_gap = std::abs(vertex_correlator(tord) - base);

        detail = "window " + fmt(worst_win) + " (tail " + fmt(tail_win) + "), ladder " + fmt(fock_gap)
                 + " (tail " + fmt(ve.tail_estimate) + "), suppression rel " + fmt(slope_rel)
                 + ", degree gap " + fmt(deg_gap) + ", permutation " + fmt(perm_gap);
        return worst_win < 1e-4 && fock_gap < 1e-4 && slope_rel < 0.01 && deg_gap < 0.05
               && perm_gap < 1e-12;
    });

    run(10, "conserved charges on the truncated space", [](std::string& detail) {
        const auto t0 = std::chrono::steady_clock::now();
        const StateAlpha st(1.0);
        const Truncation tr{12, 4, -1};
        const double rot_vac = fock_norm(apply_charge(fock_vacuum(tr), ChargeKind::Rotation, st, tr));
        double boost_gap = 0.0;
        for (double a : {0.7, 1.0, 2.5}) {
            const StateAlpha sta(a);
            const double norm =
                fock_norm(apply_charge(fock_vacuum(tr), ChargeKind::Boost1, sta, tr));
            boost_gap = std::max(boost_gap, std::abs(norm - 1.0 / (a * std::sqrt(8.0 * M_PI))));
        }
        const double rot_comm =
            charge_field_commutator_check(ChargeKind::Rotation, st, tr, Point(1.3, 0.8));
        // smeared boost commutator residual decreasing in the mode window
        const TestFunction f = TestFunction::bump2d(0.8, 2.2, 1.5, 0.9, 1.0);
        std::vector<double> res;
        for (int nm : {6, 10, 14})
            res.push_back(charge_smeared_commutator_residual(ChargeKind::Boost1, st,
                                                             {nm, 4, -1}, f));
        const bool decreasing = res[0] > res[1] && res[1] > res[2];
        const double fit_slope = std::log(res[2] / res[0]) / std::log(14.0 / 6.0);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                .count();
        detail = "rotation vac " + fmt(rot_vac) + ", boost norm gap " + fmt(boost_gap)
                 + ", rotation comm " + fmt(rot_comm) + ", boost residuals " + fmt(res[0]) + " > "
                 + fmt(res[1]) + " > " + fmt(res[2]) + " (fit slope " + fmt(fit_slope) + "), "
                 + fmt(secs) + " s";
        return rot_vac == 0.0 && boost_gap < 1e-10 && rot_comm < 1e-10 && decreasing
               && secs < 60.0;
    });

    run(11, "bound chain: determinant, majorant, pair integral, Hoelder", [](std::string& detail) {
        CounterRng rng(1011);
        double worst_det = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const int k = 1 + static_cast<int>(rng.uniform(0.0, 5.0));
            std::vector<double> x(k), y(k);
            for (int i = 0; i < k; ++i) {
                x[i] = rng.uniform(0.0, 1.0) + 2.0 * i;
                y[i] = rng.uniform(0.0, 1.0) + 2.0 * i + 2.0 * k + 1.0;
            }
            // det = (-1)^{k(k-1)/2} * product
            const double sign = (k * (k - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
            const CauchyCheck cc = cauchy_det_check(x, y);
            worst_det = std::max(worst_det, std::abs(cc.det - sign * cc.product)
                                                / std::max(std::abs(cc.product), 1e-300));
        }
        double lowest_margin = 1e300;
        const int n = 100000;
        for (int i = 1; i < n; ++i)
            lowest_margin = std::min(lowest_margin, cosine_bound_margin(1.5 * M_PI * i / n));
        double worst_ratio = 0.0;
        for (double b2 : {M_PI, 2.0 * M_PI, 3.0 * M_PI}) {
            const Coupling c(b2);
            worst_ratio = std::max(worst_ratio, u_integral_quadrature(c) / u_integral_bound(c));
        }
        // discrete Hoelder at the conjugate exponent pair of the split
        const Coupling c(2.0 * M_PI);
        const double p = 1.0 / c.holder_exponent(), q = 1.0 / c.factorial_exponent();
        double worst_holder = -1e300;
        for (int trial = 0; trial < 100; ++trial) {
            double lhs = 0.0, na = 0.0, nb = 0.0;
            for (int i = 0; i < 16; ++i) {
                const double a = rng.uniform(0.0, 2.0), b = rng.uniform(0.0, 2.0);
                lhs += a * b;
                na += std::pow(a, p);
                nb += std::pow(b, q);
            }
            worst_holder = std::max(worst_holder,
                                    lhs - std::pow(na, 1.0 / p) * std::pow(nb, 1.0 / q));
        }
        detail = "det " + fmt(worst_det) + ", margin " + fmt(lowest_margin) + ", pair ratio "
                 + fmt(worst_ratio) + ", Hoelder slack " + fmt(-worst_holder);
        return worst_det < 1e-10 && lowest_margin >= -1e-12 && worst_ratio <= 1.0
               && worst_holder <= 1e-12;
    });

    run(12, "series-term norms stay under the factorial bound", [](std::string& detail) {
        const auto t0 = std::chrono::steady_clock::now();
        const TestFunction g = TestFunction::indicator(M_PI_4, 3.0 * M_PI_4);
        std::ostringstream oss;
        bool ok = true;
        for (double b2 : {M_PI, 2.0 * M_PI}) {
            const Coupling c(b2);
            const double cg = smatrix_constant_C(g, c);
            for (int k : {1, 2}) {
                const Estimate est = smatrix_norm2_estimate(k, c, g, Scheme::McSubstituted,
                                                            10000000, 12);
                const double ceiling = std::exp((1.0 + b2 / (4.0 * M_PI)) * std::lgamma(k + 1.0))
                                       * std::pow(cg, 2.0 * k);
                const bool below = est.value + 2.576 * est.std_error <= ceiling;
                ok = ok && below && est.value > 0.0;
                oss << " k=" << k << " b2=" << fmt(b2) << ": " << fmt(est.value) << "+-"
                    << fmt(est.std_error) << " vs " << fmt(ceiling) << ";";
            }
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                .count();
        oss << " " << fmt(secs) << " s";
        detail = oss.str();
        return ok && secs < 600.0;
    });

    run(13, "interacting-field constants, kernel, and summable bound", [](std::string& detail) {
        const Coupling c(2.0 * M_PI);
        const double hub = 1.0;
        // step-profile functions give every norm in closed form, so the
        // constants can be rebuilt fully independently of the library
        const double fa = 0.9, fb = 1.3, famp = 1.0;
        const TestFunction f = TestFunction::indicator(fa, fb, famp);
        auto cot = [](double x) { return std::cos(x) / std::sin(x); };
        const double a1 = 0.7, b1 = 1.1, a2 = 1.7, b2 = 2.1, amp1 = 1.0;
        // balance the second step so h integrates to zero against 1/sin^2
        const double amp2 = amp1 * (cot(a1) - cot(b1)) / (cot(a2) - cot(b2));
        const TestFunction h = TestFunction::indicator(a1, b1, amp1)
                                   .plus(TestFunction::indicator(a2, b2, -amp2));
        const CtildeConstants ct = ctilde_constants(f, h, c, hub);
        const double n1f = famp * 2.0 * M_PI * (cot(fa) - cot(fb));
        const double n1h = 2.0 * M_PI
                           * (amp1 * (cot(a1) - cot(b1)) + amp2 * (cot(a2) - cot(b2)));
        const double ninfh = std::max(amp1 / std::pow(std::sin(a1), 2),
                                      amp2 / std::pow(std::sin(b2), 2));
        const double beta = c.beta();
        const double mixed = n1h + 15.0 * M_PI * ninfh;
        const double c0 = 0.25 * (1.0 + n1f * n1f) * n1h * n1h
                          + 67.5 * M_PI * M_PI * M_PI * ninfh * ninfh;
        const double c1 = beta * n1f * n1h * mixed;
        const double c2 = beta * beta * mixed * mixed;
        const double ct_gap = std::max({std::abs(c0 - ct.c0) / ct.c0, std::abs(c1 - ct.c1) / ct.c1,
                                        std::abs(c2 - ct.c2) / ct.c2});

        // one-pair kernel vs a from-scratch assembly of its definition; the
        // smooth smearing function sits entirely inside the past cone of x so
        // both quadratures see no kink and converge fast
        const TestFunction fs = TestFunction::bump2d(0.9, 1.5, 1.0, 0.8, 0.8);
        const Point x(2.9, 1.0);
        const std::vector<Point> pts{Point(2.0, 1.0), Point(2.1, 4.0)};
        const std::vector<int> sigmas{1};
        const complexd lib = k_pm(fs, x, +1, sigmas, pts, c, hub);
        auto cone_term = [&](const Point& pj, double theta_sign) {
            const double dtau = x.tau - pj.tau, dth = x.theta - pj.theta;
            const double arg = 2.0 * std::cos(dtau) - 2.0 * std::cos(dth);
            complexd t(std::log(std::abs(arg)), 0.0);
            if (arg < 0.0)
                t += complexd(0.0, theta_sign * M_PI * ((std::sin(dtau) > 0.0) - (std::sin(dtau) < 0.0)));
            return t;
        };
        auto smear = [&](double tau, double th) {
            const double s = std::sin(tau);
            return commutator_kernel(Point(tau, th), x) * fs(tau, th) / (s * s);
        };
        const double smeared = quad::tensor2d(smear, fs.support_lo(), fs.support_hi(), 0.0,
                                              2.0 * M_PI, 32, 32);
        const complexd direct = complexd(smeared, 0.0)
                                + complexd(0.0, beta / (4.0 * M_PI))
                                      * (cone_term(pts[0], 1.0) - cone_term(pts[1], -1.0));
        const double kpm_gap = std::abs(lib - direct);

        // per-order bound summable at a coupling amplitude small enough that
        // the term ratio is below one from the start
        const TestFunction gs = TestFunction::indicator(M_PI_4, 3.0 * M_PI_4, 2e-4);
        const double cg = smatrix_constant_C(gs, c, hub);
        std::vector<double> terms;
        for (int k = 0; terms.empty() || terms.back() > 1e-18; ++k)
            terms.push_back(field_order_bound(k, c, cg, 1.0));
        double tail = 0.0;
        int k_star = -1;
        double suffix = 0.0;
        for (int k = static_cast<int>(terms.size()) - 1; k >= 0; --k) {
            suffix += terms[k];
            if (suffix < 1e-6) {
                k_star = k;
                tail = suffix;
            }
        }
        detail = "constants rel " + fmt(ct_gap) + ", kernel " + fmt(kpm_gap) + ", tail "
                 + fmt(tail) + " at k* = " + std::to_string(k_star);
        return ct_gap < 1e-10 && kpm_gap < 1e-6 && k_star >= 0 && tail < 1e-6;
    });

    run(14, "retarded kernel inverts the wave operator", [](std::string& detail) {
        auto profile = [](double u) {
            return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
        };
        const double s = 1e-3;
        auto d2 = [&](auto&& f, double x) {
            return (-f(x + 2.0 * s) + 16.0 * f(x + s) - 30.0 * f(x) + 16.0 * f(x - s)
                    - f(x - 2.0 * s))
                   / (12.0 * s * s);
        };
        double worst = 0.0;
        const double centers[5][4] = {{1.3, 0.40, 3.0, 0.40},
                                      {1.2, 0.30, 2.6, 0.50},
                                      {1.4, 0.35, 3.4, 0.45},
                                      {1.1, 0.25, 2.9, 0.35},
                                      {1.3, 0.45, 3.1, 0.55}};
        const double xs[5][2] = {{2.0, 3.0}, {2.3, 2.8}, {2.6, 3.3}, {1.6, 3.1}, {1.5, 2.9}};
        for (const auto& cc : centers) {
            auto h = [&](double tau, double th) {
                return profile((tau - cc[0]) / cc[1]) * profile((th - cc[2]) / cc[3]);
            };
            auto box_h = [&](double tau, double th) {
                return -d2([&](double t) { return h(t, th); }, tau)
                       + d2([&](double u) { return h(tau, u); }, th);
            };
            const double lo = cc[0] - cc[1], hi = cc[0] + cc[1];
            for (const auto& xp : xs) {
                const double taup = xp[0], thp = xp[1];
                auto inner = [&](double tau) {
                    const double d = taup - tau;
                    if (d <= 0.0) return 0.0;
                    return -0.5 * quad::panels([&](double th) { return box_h(tau, th); },
                                               thp - d, thp + d, 24);
                };
                const double lhs = quad::panels(inner, lo, std::min(hi, taup), 32);
                worst = std::max(worst, std::abs(lhs - h(taup, thp)));
            }
        }
        detail = "residual " + fmt(worst);
        return worst < 1e-3;
    });

    run(15, "determinism and full-suite runtime", [](std::string& detail) {
        const Coupling c(2.0 * M_PI);
        const TestFunction g = TestFunction::indicator(M_PI_4, 3.0 * M_PI_4);
        const Estimate a = smatrix_norm2_estimate(1, c, g, Scheme::McSubstituted, 64000, 99);
        const Estimate b = smatrix_norm2_estimate(1, c, g, Scheme::McSubstituted, 64000, 99);
        const bool bitwise = a.value == b.value && a.std_error == b.std_error
                             && a.n_samples == b.n_samples;
        const std::string cli = SGDS_CLI_PATH;
        const std::string out1 = "acceptance_check_all_1.jsonl";
        const std::string out2 = "acceptance_check_all_2.jsonl";
        const auto t0 = std::chrono::steady_clock::now();
        const int rc1 = std::system((cli + " check all --out " + out1).c_str());
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                .count();
        const int rc2 = std::system((cli + " check all --out " + out2).c_str());
        auto slurp = [](const std::string& path) {
            std::ifstream f(path, std::ios::binary);
            std::ostringstream ss;
            ss << f.rdbuf();
            return ss.str();
        };
        const std::string r1 = slurp(out1), r2 = slurp(out2);
        std::remove(out1.c_str());
        std::remove(out2.c_str());
        const bool suite_ok = rc1 == 0 && rc2 == 0 && !r1.empty() && r1 == r2;
        detail = std::string("estimator ") + (bitwise ? "bit-identical" : "MISMATCH")
                 + ", full suite " + fmt(secs) + " s, reports "
                 + (r1 == r2 ? "identical" : "differ");
        return bitwise && suite_ok && secs < 900.0;
    });

    std::printf("%d of 15 criteria passed\n", 15 - failures);
    return failures == 0 ? 0 : 1;
}
