#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace sgds::quad {

// Gauss-Legendre nodes/weights on [-1,1], computed once per order via
// Newton iteration on the Legendre polynomial.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussRule(std::size_t order)
    {
        if (order == 0) throw std::invalid_argument("GaussRule: order must be positive");
        nodes.resize(order);
        weights.resize(order);
        const std::size_t m = (order + 1) / 2;
        for (std::size_t i = 0; i < m; ++i) {
            double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) / (static_cast<double>(order) + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (std::size_t j = 0; j < order; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * static_cast<double>(j) + 1.0) * x * p1 - static_cast<double>(j) * p2)
                         / (static_cast<double>(j) + 1.0);
                }
                pp = static_cast<double>(order) * (x * p0 - p1) / (x * x - 1.0);
                const double dx = p0 / pp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
            weights[order - 1 - i] = weights[i];
        }
    }
};

inline const GaussRule& rule16()
{
    static const GaussRule r(16);
    return r;
}

// Single Gauss panel on [a,b].
template <typename F>
auto panel(F&& f, double a, double b, const GaussRule& r = rule16()) -> decltype(f(0.0))
{
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    decltype(f(0.0)) sum{};
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
        sum += r.weights[i] * f(c + h * r.nodes[i]);
    return h * sum;
}

// Composite fixed-panel integration on [a,b].
template <typename F>
auto panels(F&& f, double a, double b, std::size_t n, const GaussRule& r = rule16()) -> decltype(f(0.0))
{
    decltype(f(0.0)) sum{};
    const double h = (b - a) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        sum += panel(f, a + h * static_cast<double>(i), a + h * static_cast<double>(i + 1), r);
    return sum;
}

// Adaptive bisection with a panel-vs-split error estimate. Handles integrable
// endpoint singularities by geometric refinement toward them.
template <typename F>
double adaptive(F&& f, double a, double b, double tol, int max_depth = 48)
{
    struct Impl {
        const std::remove_reference_t<F>& fn;
        int max_depth;
        double run(double a, double b, double whole, double tol, int depth) const
        {
            const double m = 0.5 * (a + b);
            const double left = panel(fn, a, m);
            const double right = panel(fn, m, b);
            const double err = std::abs(left + right - whole);
            // the round-off floor keeps tolerance halving from forcing a full
            // binary tree next to integrable singularities
            if (depth >= max_depth || err < tol || err < 1e-14 * std::abs(left + right))
                return left + right;
            return run(a, m, left, 0.5 * tol, depth + 1) + run(m, b, right, 0.5 * tol, depth + 1);
        }
    };
    Impl impl{f, max_depth};
    return impl.run(a, b, panel(f, a, b), tol, 0);
}

// Adaptive integration with a list of interior points where the integrand is
// singular (but integrable); the interval is split there first.
template <typename F>
double adaptive_split(F&& f, double a, double b, const std::vector<double>& singular, double tol)
{
    std::vector<double> cuts{a};
    for (double s : singular)
        if (s > a + 1e-14 && s < b - 1e-14) cuts.push_back(s);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i], hi = cuts[i + 1];
        // keep a hair away from the singular endpoints
        const double eps = 1e-13 * (hi - lo);
        total += adaptive(f, lo + eps, hi - eps, tol / static_cast<double>(cuts.size()));
    }
    return total;
}

// Tensor-product rectangle rule on [ax,bx] x [ay,by] with fixed panels.
template <typename F>
auto tensor2d(F&& f, double ax, double bx, double ay, double by, std::size_t nx, std::size_t ny,
              const GaussRule& r = rule16()) -> decltype(f(0.0, 0.0))
{
    decltype(f(0.0, 0.0)) total{};
    const double hx = (bx - ax) / static_cast<double>(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        const double x0 = ax + hx * static_cast<double>(i);
        const double cx = x0 + 0.5 * hx;
        for (std::size_t k = 0; k < r.nodes.size(); ++k) {
            const double x = cx + 0.5 * hx * r.nodes[k];
            auto row = panels([&](double y) { return f(x, y); }, ay, by, ny, r);
            total += 0.5 * hx * r.weights[k] * row;
        }
    }
    return total;
}

}  // namespace sgds::quad
