#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hardy/error.hpp"
#include "hardy/ess_sup.hpp"
#include "hardy/ext_real.hpp"
#include "hardy/interval.hpp"
#include "hardy/measure_core.hpp"
#include "hardy/mesh.hpp"
#include "hardy/weight.hpp"

namespace hardy {

/// Points x_k with W*(x_k) = 2^-k for k = first()+1 .. trunc(), bracketed by
/// x_first() = a and a closing point x_{trunc()+1} = b.
///
/// When W*(a) is finite, first() = N = ceil(-log2 W*(a)). When W*(a) = inf the
/// ladder is cut at -trunc and a is appended below it, so first() = -trunc-1
/// and n_infinite is set.
class DiscretizingSequence {
public:
    Interval domain;
    Weight w;
    int N = 0;
    int trunc = 0;
    bool n_infinite = false;
    bool resolution_limited = false;
    std::vector<Pos> points;    // x_first .. x_{trunc+1}
    std::vector<double> wstars; // W*(x_k) as computed during construction

    int first() const { return N; }
    int last() const { return trunc + 1; }
    Pos at(int k) const { return points.at(std::size_t(k - N)); }
    double x(int k) const { return domain.x(at(k)); }
    double wstar_at(int k) const { return wstars.at(std::size_t(k - N)); }
    std::size_t size() const { return points.size(); }
};

struct DiscretizeOptions {
    double tol = 1e-10;     // relative tolerance in W*
    double quad_tol = 1e-12;
    int max_iter = 200;
};

namespace detail {

/// Midpoint used by the bisection: geometric in the distance to the end the
/// bracket hugs, arithmetic otherwise.
inline Pos bisect_mid(Pos lo, Pos hi)
{
    if (lo.upper() && hi.upper()) {
        if (hi.sc == 0.0) return Pos::from_sc(std::min(lo.sc * 0.5, lo.sc * lo.sc));
        if (lo.sc > 4.0 * hi.sc) return Pos::from_sc(std::sqrt(lo.sc) * std::sqrt(hi.sc));
        return Pos::from_sc(0.5 * (lo.sc + hi.sc));
    }
    if (!lo.upper() && !hi.upper()) {
        if (lo.s == 0.0) return Pos::from_s(std::min(hi.s * 0.5, hi.s * hi.s));
        if (hi.s > 4.0 * lo.s) return Pos::from_s(std::sqrt(lo.s) * std::sqrt(hi.s));
        return Pos::from_s(0.5 * (lo.s + hi.s));
    }
    return midpoint(lo, hi);
}

} // namespace detail

inline DiscretizingSequence build_discretizing_sequence(const Weight& w, const Interval& dom, int K_max,
                                                        const DiscretizeOptions& opt = {})
{
    auto W = [&](Pos t) { return wstar(w, dom, t, opt.quad_tol).value(); };
    double total = W(Pos::lo());
    if (total == 0.0) throw Error(ErrorKind::degenerate_weight, "W* vanishes identically");

    DiscretizingSequence ds;
    ds.domain = dom;
    ds.w = w;
    ds.trunc = K_max;

    int start = 0;
    if (std::isinf(total)) {
        ds.n_infinite = true;
        start = -K_max;
        ds.N = -K_max - 1;
    } else {
        ds.N = int(std::ceil(-std::log2(total) - 1e-9));
        start = ds.N + 1;
        if (K_max < ds.N) throw Error(ErrorKind::invalid_argument, "trunc depth below the first index");
    }
    ds.points.push_back(Pos::lo());
    ds.wstars.push_back(total);

    Pos lo = Pos::lo();
    for (int k = start; k <= K_max; ++k) {
        double target = std::ldexp(1.0, -k);
        Pos hi = Pos::hi();
        Pos best = lo;
        double best_err = inf, best_val = 0.0;
        bool found = false;
        for (int it = 0; it < opt.max_iter; ++it) {
            Pos mid = detail::bisect_mid(lo, hi);
            if (!(lo < mid && mid < hi)) {
                ds.resolution_limited = true;
                break;
            }
            double v = W(mid);
            double err = std::abs(v / target - 1.0);
            if (err < best_err) {
                best_err = err;
                best = mid;
                best_val = v;
            }
            if (err <= opt.tol) {
                found = true;
                break;
            }
            if (v > target) lo = mid;
            else hi = mid;
        }
        if (!found && best_err > opt.tol) ds.resolution_limited = true;
        ds.points.push_back(best);
        ds.wstars.push_back(best_val);
        lo = best;
    }
    ds.points.push_back(Pos::hi());
    ds.wstars.push_back(0.0);
    return ds;
}

// ---------------------------------------------------------------------------
// Equivalences of the preliminary lemmas

enum class LemmaKind {
    sup_sum,
    sum_sum,
    sum_sup,
    dec_sup_sum,
    dec_sum_sum,
    dec_sum_sup,
    three_sup,
    three_sum,
    int_equiv,
    sup_equiv,
};

inline const char* to_string(LemmaKind k)
{
    switch (k) {
    case LemmaKind::sup_sum: return "sup-sum";
    case LemmaKind::sum_sum: return "sum-sum";
    case LemmaKind::sum_sup: return "sum-sup";
    case LemmaKind::dec_sup_sum: return "dec-sup-sum";
    case LemmaKind::dec_sum_sum: return "dec-sum-sum";
    case LemmaKind::dec_sum_sup: return "dec-sum-sup";
    case LemmaKind::three_sup: return "3-sup";
    case LemmaKind::three_sum: return "3-sum";
    case LemmaKind::int_equiv: return "int-equiv";
    case LemmaKind::sup_equiv: return "sup-equiv";
    }
    return "?";
}

inline LemmaKind parse_lemma_kind(const std::string& s)
{
    for (int i = 0; i <= int(LemmaKind::sup_equiv); ++i)
        if (s == to_string(LemmaKind(i))) return LemmaKind(i);
    throw Error(ErrorKind::parse_error, "unknown lemma kind '" + s + "'");
}

inline std::vector<LemmaKind> all_lemma_kinds()
{
    std::vector<LemmaKind> out;
    for (int i = 0; i <= int(LemmaKind::sup_equiv); ++i) out.push_back(LemmaKind(i));
    return out;
}

/// Everything a lemma may quantify over. Sequences are indexed from the start
/// index n: tau[0] is tau_n. For the dec-* and 3-* kinds, points[0] is x_{n-1}
/// and points[j] is x_{n-1+j}. The int/sup equivalences read seq, h and n.
struct LemmaInputs {
    double alpha = 1.0;
    int n = 0;
    std::vector<double> tau;
    std::vector<double> a;
    std::vector<double> sigma;
    Interval domain;
    std::vector<Pos> points;
    Weight g;
    const DiscretizingSequence* seq = nullptr;
    std::function<double(Pos)> h;
    int trunc = -1; // number of sequence terms used; -1 = all
};

struct LemmaPair {
    ExtReal lhs;
    ExtReal rhs;
    double tail_ratio = 0.0; // last term over partial sum, for truncated sums

    double ratio() const { return xr::div(lhs.value(), rhs.value()); }
};

namespace detail {

inline void check_geometric(const std::vector<double>& tau)
{
    if (tau.empty()) throw Error(ErrorKind::invalid_argument, "empty tau");
    double worst = 0.0;
    for (std::size_t k = 0; k < tau.size(); ++k) {
        if (!(tau[k] > 0.0) || std::isinf(tau[k])) throw Error(ErrorKind::not_geometric, "tau must be positive and finite");
        if (k) worst = std::max(worst, tau[k] / tau[k - 1]);
    }
    if (worst >= 1.0) throw Error(ErrorKind::not_geometric, "sup tau_{k+1}/tau_k >= 1");
}

inline void check_nonneg(const std::vector<double>& a)
{
    for (double v : a)
        if (!(v >= 0.0)) throw Error(ErrorKind::invalid_argument, "sequence entries must be >= 0");
}

inline double tail_of(double last, double sum) { return sum > 0.0 ? last / sum : 0.0; }

} // namespace detail

inline LemmaPair lemma_pair(LemmaKind kind, const LemmaInputs& in)
{
    using detail::tail_of;
    const double alpha = in.alpha;
    LemmaPair out;
    auto limit = [&](std::size_t n) { return in.trunc < 0 ? n : std::min(n, std::size_t(in.trunc)); };

    switch (kind) {
    case LemmaKind::sup_sum:
    case LemmaKind::sum_sum:
    case LemmaKind::sum_sup: {
        detail::check_geometric(in.tau);
        detail::check_nonneg(in.a);
        if (kind == LemmaKind::sum_sum && !(alpha > 0.0)) throw Error(ErrorKind::hypothesis_violated, "alpha must be > 0");
        std::size_t K = limit(std::min(in.tau.size(), in.a.size()));
        double lhs = 0.0, rhs = 0.0, run = 0.0, runmax = 0.0, last = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            run += in.a[k];
            runmax = std::max(runmax, in.a[k]);
            if (kind == LemmaKind::sup_sum) {
                lhs = std::max(lhs, in.tau[k] * run);
                rhs = std::max(rhs, in.tau[k] * in.a[k]);
            } else if (kind == LemmaKind::sum_sum) {
                last = in.tau[k] * xr::pow(run, alpha);
                lhs += last;
                rhs += in.tau[k] * xr::pow(in.a[k], alpha);
            } else {
                last = in.tau[k] * runmax;
                lhs += last;
                rhs += in.tau[k] * in.a[k];
            }
        }
        out = {lhs, rhs, kind == LemmaKind::sup_sum ? 0.0 : tail_of(last, lhs)};
        return out;
    }
    case LemmaKind::dec_sup_sum:
    case LemmaKind::dec_sum_sum:
    case LemmaKind::dec_sum_sup:
    case LemmaKind::three_sup:
    case LemmaKind::three_sum: {
        detail::check_geometric(in.tau);
        if (!(alpha > 0.0)) throw Error(ErrorKind::hypothesis_violated, "alpha must be > 0");
        if (in.points.size() < 2) throw Error(ErrorKind::invalid_argument, "need at least two points");
        for (std::size_t i = 1; i < in.points.size(); ++i)
            if (!(in.points[i - 1] < in.points[i]))
                throw Error(ErrorKind::hypothesis_violated, "points must be strictly increasing");
        const auto& x = in.points;
        // local masses G[j] = int_{x[j]}^{x[j+1]} g, where x[j] = x_{n-1+j}
        std::size_t cells = x.size() - 1;
        bool three = kind == LemmaKind::three_sup || kind == LemmaKind::three_sum;
        if (three) {
            if (in.sigma.size() < in.tau.size()) throw Error(ErrorKind::invalid_argument, "sigma too short");
            for (std::size_t i = 0; i < in.sigma.size(); ++i) {
                if (!(in.sigma[i] > 0.0)) throw Error(ErrorKind::hypothesis_violated, "sigma must be positive");
                if (i && in.sigma[i] < in.sigma[i - 1])
                    throw Error(ErrorKind::hypothesis_violated, "sigma must be non-decreasing");
            }
        }
        if (kind == LemmaKind::dec_sum_sup) {
            std::size_t K = limit(std::min(in.tau.size(), cells));
            double lhs = 0.0, rhs = 0.0, last = 0.0;
            auto gfun = [&](Pos p) { return in.g.at(in.domain, p); };
            for (std::size_t k = 0; k < K; ++k) {
                double big = ess_sup_pos(gfun, x[0], x[k + 1]).value;
                double small = ess_sup_pos(gfun, x[k], x[k + 1]).value;
                last = xr::mul(in.tau[k], big);
                lhs += last;
                rhs += xr::mul(in.tau[k], small);
            }
            return {lhs, rhs, tail_of(last, lhs)};
        }
        std::vector<double> G(cells);
        for (std::size_t j = 0; j < cells; ++j) G[j] = integrate(in.g, in.domain, x[j], x[j + 1], 1e-10).value();
        if (!three) {
            // k runs over n, n+1, ...; tau[k-n] pairs with the cell (x_{k-1}, x_k) = G[k-n]
            std::size_t K = limit(std::min(in.tau.size(), cells));
            double lhs = 0.0, rhs = 0.0, last = 0.0;
            double whole = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                whole += G[k];
                if (kind == LemmaKind::dec_sup_sum) {
                    lhs = std::max(lhs, xr::mul(in.tau[k], whole));
                    rhs = std::max(rhs, xr::mul(in.tau[k], G[k]));
                } else {
                    last = xr::mul(in.tau[k], xr::pow(whole, alpha));
                    lhs += last;
                    rhs += xr::mul(in.tau[k], xr::pow(G[k], alpha));
                }
            }
            return {lhs, rhs, kind == LemmaKind::dec_sup_sum ? 0.0 : tail_of(last, lhs)};
        }
        // 3-*: k runs over n+1, ...; the sequences tau, sigma are indexed from n and
        // x_i = x[i - n + 1].
        std::size_t K = limit(std::min(in.tau.size(), cells));
        double lhs = 0.0, rhs = 0.0, last = 0.0;
        for (std::size_t k = 1; k < K; ++k) {
            double inner = 0.0, I = 0.0;
            for (std::size_t i = k; i-- > 0;) {
                I += G[i + 1]; // int_{x_i}^{x_k} g, growing leftwards
                inner = std::max(inner, xr::mul(xr::pow(I, alpha), in.sigma[i]));
            }
            double l = xr::mul(in.tau[k], inner);
            double r = xr::mul(in.tau[k], xr::mul(xr::pow(G[k], alpha), in.sigma[k - 1]));
            if (kind == LemmaKind::three_sup) {
                lhs = std::max(lhs, l);
                rhs = std::max(rhs, r);
            } else {
                last = l;
                lhs += l;
                rhs += r;
            }
        }
        return {lhs, rhs, kind == LemmaKind::three_sup ? 0.0 : tail_of(last, lhs)};
    }
    case LemmaKind::int_equiv:
    case LemmaKind::sup_equiv: {
        if (!in.seq) throw Error(ErrorKind::invalid_argument, "discretizing sequence required");
        if (!(alpha >= 0.0)) throw Error(ErrorKind::hypothesis_violated, "alpha must be >= 0");
        if (!in.h) throw Error(ErrorKind::invalid_argument, "function h required");
        const auto& ds = *in.seq;
        int n = in.n;
        if (n < ds.first() || n > ds.trunc) throw Error(ErrorKind::invalid_argument, "start index outside the sequence");
        int K = in.trunc < 0 ? ds.trunc : std::min(ds.trunc, n + in.trunc);
        const Interval& dom = ds.domain;
        Pos xn = ds.at(n);
        // W* on (x_n, b) through one cumulative table
        MeshOptions mo;
        mo.cells = 1024;
        mo.order = 4;
        Mesh mesh(dom, xn, Pos::hi(), mo, ds.w.breakpoints(dom));
        std::vector<double> wv(mesh.size());
        for (std::size_t i = 0; i < mesh.size(); ++i) wv[i] = ds.w.at(dom, mesh.node(i));
        auto cum = mesh.cumulate(wv);
        double rhs = 0.0, last = 0.0;
        if (kind == LemmaKind::int_equiv) {
            std::vector<double> f(mesh.size());
            for (std::size_t i = 0; i < mesh.size(); ++i)
                f[i] = xr::mul(xr::mul(xr::pow(cum.node_to_hi[i], alpha), wv[i]), in.h(mesh.node(i)));
            double lhs = mesh.integral(f);
            for (int k = n + 1; k <= K; ++k) {
                last = xr::mul(std::pow(2.0, -k * (alpha + 1.0)), in.h(ds.at(k)));
                rhs += last;
            }
            return {lhs, rhs, tail_of(last, rhs)};
        }
        double lhs = 0.0;
        for (std::size_t i = 0; i < mesh.size(); ++i)
            lhs = std::max(lhs, xr::mul(xr::pow(cum.node_to_hi[i], alpha), in.h(mesh.node(i))));
        for (int k = n + 1; k <= K; ++k) rhs = std::max(rhs, xr::mul(std::pow(2.0, -k * alpha), in.h(ds.at(k))));
        return {lhs, rhs, 0.0};
    }
    }
    throw Error(ErrorKind::invalid_argument, "unknown lemma kind");
}

} // namespace hardy
