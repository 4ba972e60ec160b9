#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

#include "sgds/modes.hpp"
#include "sgds/vertex.hpp"

namespace sgds {

// Finite truncation of the bosonic Fock space: modes n in [-n_max, n_max],
// per-mode occupation cap occ_max, optional total-quanta cap total_max
// (negative disables it).
struct Truncation {
    int n_max = 12;
    int occ_max = 4;
    int total_max = 6;

    int mode_count() const { return 2 * n_max + 1; }
    int index_of(int n) const
    {
        if (n < -n_max || n > n_max) throw std::out_of_range("Truncation: mode out of range");
        return n + n_max;
    }
};

// Sparse vector: occupation tuple -> amplitude, with deterministic
// (lexicographic) iteration order.
using OccKey = std::vector<int>;
using FockVector = std::map<OccKey, complexd>;

inline FockVector fock_vacuum(const Truncation& tr)
{
    return {{OccKey(static_cast<std::size_t>(tr.mode_count()), 0), complexd(1.0, 0.0)}};
}

inline void fock_add_scaled(FockVector& dest, const FockVector& src, complexd factor)
{
    for (const auto& [key, amp] : src) {
        auto& slot = dest[key];
        slot += factor * amp;
        if (slot == complexd{}) dest.erase(key);
    }
}

inline complexd fock_inner(const FockVector& u, const FockVector& v)
{
    // iterate over the smaller map
    const FockVector& a = (u.size() <= v.size()) ? u : v;
    const FockVector& b = (u.size() <= v.size()) ? v : u;
    complexd sum{};
    for (const auto& [key, amp] : a) {
        auto it = b.find(key);
        if (it == b.end()) continue;
        sum += (&a == &u) ? std::conj(amp) * it->second : std::conj(it->second) * amp;
    }
    return sum;
}

inline double fock_norm(const FockVector& v) { return std::sqrt(std::abs(fock_inner(v, v))); }

inline void fock_prune(FockVector& v, double tol)
{
    for (auto it = v.begin(); it != v.end();)
        it = (std::abs(it->second) < tol) ? v.erase(it) : std::next(it);
}

// Ladder operator application; creation amplitudes beyond the occupation
// caps are dropped (the truncation error of the model space).
inline FockVector apply_ladder(const FockVector& v, int mode, bool dagger, const Truncation& tr)
{
    const int idx = tr.index_of(mode);
    FockVector out;
    for (const auto& [key, amp] : v) {
        OccKey k = key;
        if (dagger) {
            int total = 0;
            if (tr.total_max >= 0)
                for (int o : k) total += o;
            if (k[idx] + 1 > tr.occ_max) continue;
            if (tr.total_max >= 0 && total + 1 > tr.total_max) continue;
            k[idx] += 1;
            out[k] += amp * std::sqrt(static_cast<double>(k[idx]));
        } else {
            if (k[idx] == 0) continue;
            const double root = std::sqrt(static_cast<double>(k[idx]));
            k[idx] -= 1;
            out[k] += amp * root;
        }
    }
    return out;
}

// A field-type operator sum_n [coeff(n) a_n + conj(coeff(n)) a_n^dagger]
// applied to a vector; coeff is indexed by the signed mode number.
template <typename CoeffFn>
FockVector apply_field_operator(const FockVector& v, const Truncation& tr, CoeffFn&& coeff)
{
    FockVector out;
    for (int n = -tr.n_max; n <= tr.n_max; ++n) {
        const complexd c = coeff(n);
        if (c == complexd{}) continue;
        fock_add_scaled(out, apply_ladder(v, n, false, tr), c);
        fock_add_scaled(out, apply_ladder(v, n, true, tr), std::conj(c));
    }
    return out;
}

// phi-hat at a point: coefficients are the mode functions there.
inline FockVector apply_phi(const FockVector& v, const StateAlpha& st, const Truncation& tr,
                            const Point& p)
{
    return apply_field_operator(v, tr, [&](int n) { return mode_fn(n, st, p); });
}

enum class ChargeKind { Rotation, Boost1, Boost2 };

// Noether charges truncated to the model space. The rotation charge is the
// mode-weighted number operator; the boosts couple neighbouring modes and
// the zero mode to n = +-1 with weight 1/(2 alpha sqrt(4 pi)).
inline FockVector apply_charge(const FockVector& v, ChargeKind kind, const StateAlpha& st,
                               const Truncation& tr)
{
    FockVector out;
    if (kind == ChargeKind::Rotation) {
        for (const auto& [key, amp] : v) {
            double w = 0.0;
            for (int n = 1; n <= tr.n_max; ++n)
                w += n * (key[tr.index_of(n)] - key[tr.index_of(-n)]);
            if (w != 0.0) out[key] += amp * w;
        }
        return out;
    }

    const double zc = 1.0 / (2.0 * st.alpha * std::sqrt(4.0 * M_PI));
    // combo = a_1 +- a_1^dag -+ a_-1 + a_-1^dag per boost direction
    auto combo = [&](const FockVector& w) {
        FockVector r;
        if (kind == ChargeKind::Boost1) {
            fock_add_scaled(r, apply_ladder(w, 1, false, tr), 1.0);
            fock_add_scaled(r, apply_ladder(w, 1, true, tr), 1.0);
            fock_add_scaled(r, apply_ladder(w, -1, false, tr), 1.0);
            fock_add_scaled(r, apply_ladder(w, -1, true, tr), 1.0);
        } else {
            fock_add_scaled(r, apply_ladder(w, 1, false, tr), 1.0);
            fock_add_scaled(r, apply_ladder(w, 1, true, tr), -1.0);
            fock_add_scaled(r, apply_ladder(w, -1, false, tr), -1.0);
            fock_add_scaled(r, apply_ladder(w, -1, true, tr), 1.0);
        }
        return r;
    };

    const complexd zpref = (kind == ChargeKind::Boost1) ? complexd(0.0, zc) : complexd(-zc, 0.0);
    // -pref * combo * a_0 + pref * a_0^dag * combo
    fock_add_scaled(out, combo(apply_ladder(v, 0, false, tr)), -zpref);
    fock_add_scaled(out, apply_ladder(combo(v), 0, true, tr), zpref);

    const complexd bpref = (kind == ChargeKind::Boost1) ? complexd(0.0, 0.5) : complexd(-0.5, 0.0);
    const double s2 = (kind == ChargeKind::Boost1) ? -1.0 : 1.0;  // sign of a_{n+1}^dag a_n term
    for (int n = 1; n < tr.n_max; ++n) {
        const double w = std::sqrt(static_cast<double>(n) * (n + 1));
        // a_n^dag a_{n+1}
        fock_add_scaled(out, apply_ladder(apply_ladder(v, n + 1, false, tr), n, true, tr), bpref * w);
        // s2 * a_{n+1}^dag a_n
        fock_add_scaled(out, apply_ladder(apply_ladder(v, n, false, tr), n + 1, true, tr),
                        bpref * (s2 * w));
        // negative-mode pair; boost1: -a_{-n-1}^dag a_{-n} + a_{-n}^dag a_{-n-1},
        // boost2: -a_{-n}^dag a_{-n-1} - a_{-n-1}^dag a_{-n} (inside the -1/2 prefactor)
        if (kind == ChargeKind::Boost1) {
            fock_add_scaled(out, apply_ladder(apply_ladder(v, -n, false, tr), -n - 1, true, tr),
                            bpref * (-w));
            fock_add_scaled(out, apply_ladder(apply_ladder(v, -n - 1, false, tr), -n, true, tr),
                            bpref * w);
        } else {
            fock_add_scaled(out, apply_ladder(apply_ladder(v, -n - 1, false, tr), -n, true, tr),
                            bpref * (-w));
            fock_add_scaled(out, apply_ladder(apply_ladder(v, -n, false, tr), -n - 1, true, tr),
                            bpref * (-w));
        }
    }
    return out;
}

// Action of the Killing field on phi-hat, i xi^mu d_mu phi, as a field-type
// operator with analytically differentiated mode functions.
inline FockVector apply_xi_phi(const FockVector& v, const StateAlpha& st, const Truncation& tr,
                               const Point& p, KillingField xi)
{
    const auto vec = killing_vector(xi, p);
    return apply_field_operator(v, tr, [&](int n) {
        const complexd dt = mode_fn_dtau(n, st, p.tau, p.theta);
        const complexd dh = complexd(0.0, static_cast<double>(n)) * mode_fn(n, st, p);
        return vec[0] * dt + vec[1] * dh;
    });
}

// Pointwise check of [Q, phi-hat(p)] = i xi phi-hat(p): the largest matrix
// element of the residual between probe states occupying only interior modes
// |n| <= probe_mode with at most probe_occ quanta. Interior probes see no
// boundary terms, so the identity is exact up to round-off there.
inline double charge_field_commutator_check(ChargeKind kind, const StateAlpha& st,
                                            const Truncation& tr, const Point& p,
                                            int probe_mode = 2, int probe_occ = 2)
{
    const KillingField xi = (kind == ChargeKind::Rotation) ? KillingField::Rotation
                            : (kind == ChargeKind::Boost1) ? KillingField::Boost1
                                                           : KillingField::Boost2;
    if (probe_mode > tr.n_max - 2) throw std::invalid_argument("probe modes must be interior");

    // enumerate probe basis states
    std::vector<FockVector> probes;
    std::vector<OccKey> keys{OccKey(static_cast<std::size_t>(tr.mode_count()), 0)};
    for (int q = 0; q < probe_occ; ++q) {
        std::vector<OccKey> next;
        for (const auto& k : keys)
            for (int n = -probe_mode; n <= probe_mode; ++n) {
                OccKey kk = k;
                kk[tr.index_of(n)] += 1;
                next.push_back(kk);
            }
        keys.insert(keys.end(), next.begin(), next.end());
    }
    for (const auto& k : keys) probes.push_back(FockVector{{k, complexd(1.0, 0.0)}});

    double worst = 0.0;
    for (const auto& v : probes) {
        FockVector resid = apply_charge(apply_phi(v, st, tr, p), kind, st, tr);
        fock_add_scaled(resid, apply_phi(apply_charge(v, kind, st, tr), st, tr, p), -1.0);
        fock_add_scaled(resid, apply_xi_phi(v, st, tr, p, xi), complexd(0.0, -1.0));
        for (const auto& u : probes) {
            const double norm_uv = fock_norm(u) * fock_norm(v);
            worst = std::max(worst, std::abs(fock_inner(u, resid)) / norm_uv);
        }
    }
    return worst;
}

// Residual of the smeared commutator identity [Q, phi-hat(f)] = -i phi-hat(xi f)
// on the vacuum; for smooth f the smeared mode coefficients decay fast, so
// this residual decreases rapidly as n_max grows.
inline double charge_smeared_commutator_residual(ChargeKind kind, const StateAlpha& st,
                                                 const Truncation& tr, const TestFunction& f,
                                                 double hubble = 1.0)
{
    const KillingField xi = (kind == ChargeKind::Rotation) ? KillingField::Rotation
                            : (kind == ChargeKind::Boost1) ? KillingField::Boost1
                                                           : KillingField::Boost2;
    // smeared coefficients phi_n(f) and (xi phi_n)(f)
    std::vector<complexd> cf(static_cast<std::size_t>(tr.mode_count()));
    std::vector<complexd> ce(static_cast<std::size_t>(tr.mode_count()));
    const double lo = f.support_lo(), hi = f.support_hi();
    for (int n = -tr.n_max; n <= tr.n_max; ++n) {
        cf[static_cast<std::size_t>(tr.index_of(n))] = smeared_mode(n, st, f, hubble);
        auto integrand = [&](double tau, double th) {
            const auto vec = killing_vector(xi, Point(tau, th));
            const complexd dmode = vec[0] * mode_fn_dtau(n, st, tau, th)
                                   + vec[1] * complexd(0.0, static_cast<double>(n))
                                         * mode_fn(n, st, tau, th);
            const double s = std::sin(tau);
            return dmode * (f(tau, th) / (hubble * hubble * s * s));
        };
        ce[static_cast<std::size_t>(tr.index_of(n))] =
            quad::tensor2d(integrand, lo, hi, 0.0, 2.0 * M_PI, 12, 12);
    }

    const FockVector vac = fock_vacuum(tr);
    auto phi_f = [&](const FockVector& v) {
        return apply_field_operator(v, tr,
                                    [&](int n) { return cf[static_cast<std::size_t>(tr.index_of(n))]; });
    };
    FockVector resid = apply_charge(phi_f(vac), kind, st, tr);
    fock_add_scaled(resid, phi_f(apply_charge(vac, kind, st, tr)), -1.0);
    // [Q, phi(f)] = i (xi phi)(f), with the xi-differentiated modes smeared
    FockVector xi_part = apply_field_operator(
        vac, tr, [&](int n) { return ce[static_cast<std::size_t>(tr.index_of(n))]; });
    fock_add_scaled(resid, xi_part, complexd(0.0, -1.0));
    return fock_norm(resid);
}

// Truncated vertex operator applied to a vector: the normal-ordered
// exponential e^{i gamma sum a_n^dag phi_n^*} e^{i gamma sum a_n phi_n}
// restricted to |n| <= n_max, with the exact renormalized scalar prefactor
// exp[-gamma^2/2 (alpha^2/4 + (tau - pi/2)^2 / (4 pi^2 alpha^2))].
// Returns the result and accumulates a truncation-tail estimate (norm of the
// last series term plus dropped creation amplitudes).
inline FockVector apply_vertex_operator(const FockVector& v, double gamma, const Point& p,
                                        const StateAlpha& st, const Truncation& tr, int series_order,
                                        double* tail_estimate = nullptr)
{
    auto lower = [&](const FockVector& w) {
        FockVector out;
        for (int n = -tr.n_max; n <= tr.n_max; ++n)
            fock_add_scaled(out, apply_ladder(w, n, false, tr), mode_fn(n, st, p));
        return out;
    };
    auto raise = [&](const FockVector& w) {
        FockVector out;
        for (int n = -tr.n_max; n <= tr.n_max; ++n)
            fock_add_scaled(out, apply_ladder(w, n, true, tr), std::conj(mode_fn(n, st, p)));
        return out;
    };

    double tail = 0.0;
    auto exp_series = [&](const FockVector& w, auto&& op) {
        FockVector sum = w;
        FockVector term = w;
        for (int k = 1; k <= series_order; ++k) {
            term = op(term);
            for (auto& [key, amp] : term) amp *= complexd(0.0, gamma) / static_cast<double>(k);
            fock_prune(term, 1e-16);
            if (term.empty()) return sum;
            fock_add_scaled(sum, term, 1.0);
        }
        tail += fock_norm(term);  // series cut off while terms remain
        return sum;
    };

    FockVector out = exp_series(v, lower);
    out = exp_series(out, raise);
    const double a2 = st.alpha * st.alpha;
    const double pref = std::exp(
        -gamma * gamma / 2.0
        * (a2 / 4.0 + std::pow(p.tau - M_PI_2, 2) / (4.0 * M_PI * M_PI * a2)));
    for (auto& [key, amp] : out) amp *= pref;
    if (tail_estimate) *tail_estimate += tail * pref;
    return out;
}

struct VertexExpectation {
    complexd value;
    double tail_estimate;
};

// Vacuum expectation of a product of truncated vertex operators, the
// operator-level oracle for the closed-form correlators.
inline VertexExpectation truncated_vertex_expectation(const VertexConfiguration& cfg,
                                                      const Truncation& tr, int series_order)
{
    if (cfg.ordering != Ordering::Wightman)
        throw std::invalid_argument("truncated_vertex_expectation: Wightman ordering only");
    if (cfg.alpha_infinity)
        throw std::invalid_argument("truncated_vertex_expectation: finite alpha required");
    const StateAlpha st(cfg.alpha);
    FockVector v = fock_vacuum(tr);
    double tail = 0.0;
    for (auto it = cfg.insertions.rbegin(); it != cfg.insertions.rend(); ++it)
        v = apply_vertex_operator(v, it->gamma, it->point, st, tr, series_order, &tail);
    const FockVector vac = fock_vacuum(tr);
    return {fock_inner(vac, v), tail};
}

// Closed-form correlator with the pairwise kernel truncated to the same mode
// window |n| <= n_max (no regulator): at matched truncation the BCH algebra
// of the truncated operators reproduces exactly this expression, up to
// occupation/series truncation of the oracle.
inline complexd matched_truncation_correlator(const VertexConfiguration& cfg, int n_max)
{
    const StateAlpha st(cfg.alpha);
    const auto& ins = cfg.insertions;
    complexd exponent{};
    for (std::size_t j = 0; j < ins.size(); ++j) {
        for (std::size_t k = j + 1; k < ins.size(); ++k) {
            const Point& p = ins[j].point;
            const Point& q = ins[k].point;
            complexd kernel = mode_fn(0, st, p) * std::conj(mode_fn(0, st, q));
            const double dtau = p.tau - q.tau, dth = p.theta - q.theta;
            for (int n = 1; n <= n_max; ++n)
                kernel += std::polar(1.0, -n * dtau) * std::cos(n * dth) / (2.0 * M_PI * n);
            exponent -= ins[j].gamma * ins[k].gamma * kernel;
        }
    }
    const double a2 = cfg.alpha * cfg.alpha;
    for (const auto& v : ins)
        exponent -= v.gamma * v.gamma / 2.0
                    * (a2 / 4.0 + std::pow(v.point.tau - M_PI_2, 2) / (4.0 * M_PI * M_PI * a2));
    return std::exp(exponent);
}

}  // namespace sgds
