#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hardy/discretization.hpp"
#include "hardy/error.hpp"
#include "hardy/ess_sup.hpp"
#include "hardy/ext_real.hpp"
#include "hardy/interval.hpp"
#include "hardy/measure_core.hpp"
#include "hardy/mesh.hpp"
#include "hardy/weight.hpp"

namespace hardy {

enum class Regime { I, II, III, IV };

inline const char* to_string(Regime r)
{
    switch (r) {
    case Regime::I: return "I";
    case Regime::II: return "II";
    case Regime::III: return "III";
    case Regime::IV: return "IV";
    }
    return "?";
}

/// Case split of the iterated inequality; ties go to the <= side.
inline Regime classify(double p, double q, double r)
{
    bool p_le_q = p <= q, p_le_r = p <= r;
    if (p_le_r && p_le_q) return Regime::I;
    if (!p_le_r && p_le_q) return Regime::II;
    if (p_le_r) return Regime::III;
    return Regime::IV;
}

inline Regime classify(const Exponents& e) { return classify(e.p, e.q, e.r); }

/// Case split of the monotone inequality (p, q only).
inline Regime classify_monotone(double p, double q)
{
    if (p <= q && p <= 1.0) return Regime::I;
    if (q < p && p <= 1.0) return Regime::II;
    if (1.0 < p && p <= q) return Regime::III;
    return Regime::IV;
}

struct ConditionReport {
    Regime regime = Regime::I;
    std::string family; // "continuous", "monotone" or "discrete"
    std::map<std::string, ExtReal> constants;
    ExtReal combined;
    bool finite = true;
    double tail_ratio = 0.0;

    ExtReal at(const std::string& name) const
    {
        auto it = constants.find(name);
        if (it == constants.end()) throw Error(ErrorKind::invalid_argument, "constant " + name + " not in report");
        return it->second;
    }
};

struct CharacterizationOptions {
    int cells = 512;
    int order = 8;
    int grading = 40;
    int local_cells = 64;
    int local_order = 8;
    bool allow_degenerate = false;
    int refine_points = 32;
    double max_tail = 0.1; // largest last-term share accepted in a truncated sum
};

namespace detail {

inline double lg(double x) { return x > 0.0 ? std::log(x) : -inf; }

inline double xexp(double l) { return l == -inf ? 0.0 : std::exp(l); }

// Log of a product under the 0 * inf = 0 convention.
inline double lmul(std::initializer_list<double> logs)
{
    double s = 0.0;
    for (double l : logs) {
        if (l == -inf) return -inf;
        s += l;
    }
    return s;
}

// (int exp(L))^e over a mesh, evaluated relative to max L so that large
// exponents neither underflow nor overflow before the outer power is taken.
inline double pow_integral(const Mesh& m, const std::vector<double>& L, double e)
{
    double M = -inf;
    for (double l : L) {
        if (l == inf) return inf;
        M = std::max(M, l);
    }
    if (M == -inf) return 0.0;
    std::vector<double> f(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) f[i] = xexp(L[i] - M);
    double I = m.integral(f);
    if (!(I > 0.0)) return 0.0;
    if (std::isinf(I)) return inf;
    return std::exp(e * (M + std::log(I)));
}

// (sum exp(L))^e, with the last term's share of the sum in *tail.
inline double pow_sum(const std::vector<double>& L, double e, double* tail)
{
    *tail = 0.0;
    double M = -inf;
    for (double l : L) {
        if (l == inf) return inf;
        M = std::max(M, l);
    }
    if (M == -inf) return 0.0;
    double s = 0.0;
    for (double l : L) s += xexp(l - M);
    *tail = xexp(L.back() - M) / s;
    return std::exp(e * (M + std::log(s)));
}

/// V(t) sampled on a mesh, with pointwise evaluation for refinement.
struct VProfile {
    std::vector<double> node;
    std::function<double(Pos, std::size_t)> at; // (point, containing cell)
    double near_lo = 0.0;                       // value just right of the tail cell at lo
};

inline void require_weight(const Weight& w, const char* name, const CharacterizationOptions& opt)
{
    if (opt.allow_degenerate || w.identically_zero()) return;
    if (!w.strictly_positive())
        throw Error(ErrorKind::invalid_weight, std::string("weight ") + name + " is not positive on the interval");
}

/// Samples a density on the mesh and keeps its cumulative table.
struct Field {
    const Mesh* mesh = nullptr;
    std::function<double(Pos)> f;
    std::vector<double> val;
    Mesh::Cumulative cum;

    Field() = default;
    Field(const Mesh& m, std::function<double(Pos)> fn) : mesh(&m), f(std::move(fn))
    {
        val.resize(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) val[i] = f(m.node(i));
        cum = m.cumulate(val);
    }

    /// Integral of f from the left boundary of cell c up to x (x inside c).
    double from_cell_lo(std::size_t c, Pos x) const
    {
        return gauss_segment(f, mesh->domain(), mesh->cells()[c].lo, x, mesh->rule());
    }
    double to_cell_hi(std::size_t c, Pos x) const
    {
        return gauss_segment(f, mesh->domain(), x, mesh->cells()[c].hi, mesh->rule());
    }
    double from_lo(std::size_t c, Pos x) const { return cum.cell_from_lo[c] + from_cell_lo(c, x); }
    double to_hi(std::size_t c, Pos x) const { return cum.cell_to_hi[c + 1] + to_cell_hi(c, x); }

    /// Integral between cell boundary b (= cells[b].lo) and a later node j.
    double boundary_to_node(std::size_t b, std::size_t j) const
    {
        double via_lo = cum.node_from_lo[j], via_hi = cum.cell_to_hi[b];
        double d = via_lo <= via_hi ? via_lo - cum.cell_from_lo[b] : via_hi - cum.node_to_hi[j];
        return d > 0.0 ? d : 0.0;
    }
    /// Integral between node j and a later cell boundary b.
    double node_to_boundary(std::size_t j, std::size_t b) const
    {
        double via_lo = cum.cell_from_lo[b], via_hi = cum.node_to_hi[j];
        double d = via_lo <= via_hi ? via_lo - cum.node_from_lo[j] : via_hi - cum.cell_to_hi[b];
        return d > 0.0 ? d : 0.0;
    }
};

/// Evaluates the five constants for exponents (p, q, r), weights u, w and a
/// non-decreasing profile V on one mesh:
///   C1 = sup G^{1/r} V,         G(x) = int_x^b w(s) U(x,s)^{r/q} ds
///   C2 = (int W*^{r/(p-r)} w S1^{pr/(p-r)})^{(p-r)/(pr)},  S1(x) = sup_{t<x} U(t,x)^{1/q} V(t)
///   C3 = (int G^{r/(p-r)} w S2)^{(p-r)/(pr)},              S2(x) = sup_{t<x} U(t,x)^{r/q} V(t)^{pr/(p-r)}
///   C4 = sup W*^{1/r} H^{(p-q)/(pq)}, H(x) = int_a^x U(t,x)^{q/(p-q)} u(t) V(t)^{pq/(p-q)} dt
///   C5 = (int W*^{r/(p-r)} w H^{r(p-q)/(q(p-r))})^{(p-r)/(pr)}
class Engine {
public:
    Engine(const Mesh& mesh, double p, double q, double r, const Weight& u, const Weight& w, VProfile V,
           int refine_points)
        : m_(mesh), p_(p), q_(q), r_(r), V_(std::move(V)), refine_(refine_points)
    {
        const Interval& dom = mesh.domain();
        U_ = Field(mesh, [&u, dom](Pos x) { return u.at(dom, x); });
        W_ = Field(mesh, [&w, dom](Pos x) { return w.at(dom, x); });
    }

    double C1()
    {
        const auto& G = G_nodes();
        std::vector<double> val(m_.size());
        for (std::size_t i = 0; i < m_.size(); ++i) val[i] = xr::mul(xr::pow(G[i], 1.0 / r_), V_.node[i]);
        return refine_sup(val, [&](Pos x, std::size_t c) { return xr::mul(xr::pow(G_at(x, c), 1.0 / r_), V_.at(x, c)); });
    }

    double C4()
    {
        const auto& H = H_nodes();
        double e = (p_ - q_) / (p_ * q_);
        std::vector<double> val(m_.size());
        for (std::size_t i = 0; i < m_.size(); ++i)
            val[i] = xexp(lmul({lg(W_.cum.node_to_hi[i]) / r_, e * H[i]}));
        return refine_sup(val, [&](Pos x, std::size_t c) {
            return xexp(lmul({lg(W_.to_hi(c, x)) / r_, e * H_at(x, c)}));
        });
    }

    double C2()
    {
        const auto& S = S_nodes();
        double a = r_ / (p_ - r_), b = p_ * r_ / (p_ - r_);
        std::vector<double> L(m_.size());
        for (std::size_t i = 0; i < m_.size(); ++i)
            L[i] = lmul({a * lg(W_.cum.node_to_hi[i]), lg(W_.val[i]), b * S.first[i]});
        return pow_integral(m_, L, (p_ - r_) / (p_ * r_));
    }

    double C3()
    {
        const auto& G = G_nodes();
        const auto& S = S_nodes();
        double a = r_ / (p_ - r_);
        std::vector<double> L(m_.size());
        for (std::size_t i = 0; i < m_.size(); ++i) L[i] = lmul({a * lg(G[i]), lg(W_.val[i]), S.second[i]});
        return pow_integral(m_, L, (p_ - r_) / (p_ * r_));
    }

    double C5()
    {
        const auto& H = H_nodes();
        double a = r_ / (p_ - r_), e = r_ * (p_ - q_) / (q_ * (p_ - r_));
        std::vector<double> L(m_.size());
        for (std::size_t i = 0; i < m_.size(); ++i)
            L[i] = lmul({a * lg(W_.cum.node_to_hi[i]), lg(W_.val[i]), e * H[i]});
        return pow_integral(m_, L, (p_ - r_) / (p_ * r_));
    }

private:
    // G at node i: the node's own cell by a sub-rule, later cells by their nodes, the
    // tail cell at hi by the extrapolated mass of w.
    const std::vector<double>& G_nodes()
    {
        if (!G_.empty()) return G_;
        G_.assign(m_.size(), 0.0);
        double e = r_ / q_;
        std::vector<double> ww(m_.size());
        for (std::size_t j = 0; j < m_.size(); ++j) ww[j] = W_.val[j] * m_.weight(j);
        for (std::size_t i = 0; i < m_.size(); ++i) {
            std::size_t c = std::size_t(m_.cell_of(i));
            double g = own_cell_right(m_.node(i), c, e);
            std::size_t start = std::size_t(m_.cells()[c].first + m_.order());
            for (std::size_t j = start; j < m_.size(); ++j) {
                if (ww[j] == 0.0) continue;
                double U = U_.cum.between(i, j);
                if (U > 0.0) g += ww[j] * std::exp(e * std::log(U));
            }
            g += xr::mul(W_.cum.tail_hi, xr::pow(U_.cum.node_to_hi[i], e));
            G_[i] = g;
        }
        return G_;
    }

    double G_at(Pos x, std::size_t c) const
    {
        double e = r_ / q_;
        double g = own_cell_right(x, c, e);
        double to_edge = U_.to_cell_hi(c, x);
        std::size_t start = std::size_t(m_.cells()[c].first + m_.order());
        for (std::size_t j = start; j < m_.size(); ++j) {
            double wj = W_.val[j] * m_.weight(j);
            if (wj == 0.0) continue;
            double U = to_edge + U_.boundary_to_node(c + 1, j);
            if (U > 0.0) g += wj * std::exp(e * std::log(U));
        }
        g += xr::mul(W_.cum.tail_hi, xr::pow(U_.to_hi(c, x), e));
        return g;
    }

    // int_x^{hi of c} w(s) U(x,s)^e ds with U by a nested rule
    double own_cell_right(Pos x, std::size_t c, double e) const
    {
        const auto& dom = m_.domain();
        Pos hi = m_.cells()[c].hi;
        return gauss_segment(
            [&](Pos s) {
                double wv = W_.f(s);
                if (wv == 0.0) return 0.0;
                double U = gauss_segment(U_.f, dom, x, s, m_.rule());
                return xr::mul(wv, xr::pow(U, e));
            },
            dom, x, hi, m_.rule());
    }

    // log of int_{lo of c}^x U(t,x)^{e1} u(t) V(t)^{e2} dt, scaled by the bound
    // U(lo,x)^{e1} V(x)^{e2} of the integrand's power factors before integrating
    double own_cell_left(Pos x, std::size_t c, double e1, double e2) const
    {
        const auto& dom = m_.domain();
        Pos lo = m_.cells()[c].lo;
        double shift = lmul({e1 * lg(U_.from_cell_lo(c, x)), e2 * lg(V_.at(x, c))});
        if (shift == -inf || shift == inf) return shift;
        double I = gauss_segment(
            [&](Pos t) {
                double uv = U_.f(t);
                if (uv == 0.0) return 0.0;
                double U = gauss_segment(U_.f, dom, t, x, m_.rule());
                return xr::mul(uv, xexp(lmul({e1 * lg(U), e2 * lg(V_.at(t, c))}) - shift));
            },
            dom, lo, x, m_.rule());
        return lmul({lg(I), shift});
    }

    // Running log-sum-exp.
    struct LogSum {
        double M = -inf, S = 0.0;
        void add(double l)
        {
            if (l == -inf || M == inf) return;
            if (l == inf) {
                M = inf;
                return;
            }
            if (l > M) {
                S = S * std::exp(M - l) + 1.0;
                M = l;
            } else {
                S += std::exp(l - M);
            }
        }
        double value() const { return M == -inf || M == inf ? M : M + std::log(S); }
    };

    // log H at every node.
    const std::vector<double>& H_nodes()
    {
        if (!H_.empty()) return H_;
        double e1 = q_ / (p_ - q_), e2 = p_ * q_ / (p_ - q_);
        std::size_t n = m_.size();
        H_.assign(n, -inf);
        luv_.assign(n, -inf);
        std::vector<double> lw(n);
        double M = -inf;
        for (std::size_t j = 0; j < n; ++j) {
            lw[j] = lmul({lg(U_.val[j]), e2 * lg(V_.node[j])});
            luv_[j] = lmul({lw[j], lg(m_.weight(j))});
            if (std::isfinite(lw[j])) M = std::max(M, lw[j]);
        }
        H_tail_ = -inf;
        if (M > -inf) {
            std::vector<double> f(n);
            for (std::size_t j = 0; j < n; ++j) f[j] = std::isfinite(lw[j]) ? std::exp(lw[j] - M) : (lw[j] == inf ? inf : 0.0);
            H_tail_ = lmul({lg(m_.tails(f).first), M});
        }
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t c = std::size_t(m_.cell_of(i));
            LogSum h;
            h.add(own_cell_left(m_.node(i), c, e1, e2));
            std::size_t stop = std::size_t(m_.cells()[c].first);
            for (std::size_t j = 0; j < stop; ++j) {
                if (luv_[j] == -inf) continue;
                double U = U_.cum.between(j, i);
                if (U > 0.0) h.add(luv_[j] + e1 * std::log(U));
            }
            h.add(lmul({H_tail_, e1 * lg(U_.cum.node_from_lo[i])}));
            H_[i] = h.value();
        }
        return H_;
    }

    double H_at(Pos x, std::size_t c)
    {
        H_nodes();
        double e1 = q_ / (p_ - q_), e2 = p_ * q_ / (p_ - q_);
        LogSum h;
        h.add(own_cell_left(x, c, e1, e2));
        double from_edge = U_.from_cell_lo(c, x);
        std::size_t stop = std::size_t(m_.cells()[c].first);
        for (std::size_t j = 0; j < stop; ++j) {
            if (luv_[j] == -inf) continue;
            double U = U_.node_to_boundary(j, c) + from_edge;
            if (U > 0.0) h.add(luv_[j] + e1 * std::log(U));
        }
        h.add(lmul({H_tail_, e1 * lg(U_.from_lo(c, x))}));
        return h.value();
    }

    // log S1 and log S2 at every node, by maximizing over all earlier nodes.
    const std::pair<std::vector<double>, std::vector<double>>& S_nodes()
    {
        if (!S_.first.empty()) return S_;
        std::size_t n = m_.size();
        S_.first.assign(n, -inf);
        S_.second.assign(n, -inf);
        double a1 = 1.0 / q_, a2 = r_ / q_, b2 = p_ * r_ / (p_ - r_);
        std::vector<double> lv(n);
        for (std::size_t j = 0; j < n; ++j) lv[j] = lg(V_.node[j]);
        double lv_lo = lg(V_.near_lo);
        for (std::size_t i = 0; i < n; ++i) {
            double m1 = -inf, m2 = -inf;
            // t just inside the tail cell at lo
            double Ua = U_.cum.node_from_lo[i] - U_.cum.tail_lo;
            if (Ua > 0.0 && lv_lo > -inf) {
                double lu = std::log(Ua);
                m1 = a1 * lu + lv_lo;
                m2 = a2 * lu + b2 * lv_lo;
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (lv[j] == -inf) continue;
                double U = U_.cum.between(j, i);
                if (!(U > 0.0)) continue;
                double lu = std::log(U);
                m1 = std::max(m1, a1 * lu + lv[j]);
                m2 = std::max(m2, a2 * lu + b2 * lv[j]);
            }
            S_.first[i] = m1;
            S_.second[i] = m2;
        }
        return S_;
    }

    /// Max over the node values, refined between the neighbours of the best
    /// node and checked for growth into either end of the mesh.
    template <class Point>
    double refine_sup(const std::vector<double>& val, const Point& at)
    {
        std::size_t best = 0;
        for (std::size_t i = 0; i < val.size(); ++i) {
            if (std::isinf(val[i])) return inf;
            if (val[i] > val[best]) best = i;
        }
        double top = val.empty() ? 0.0 : val[best];
        if (end_growth(val, true) || end_growth(val, false)) return inf;
        if (top == 0.0) return 0.0;
        Pos lo = best > 0 ? m_.node(best - 1) : m_.node(best);
        Pos hi = best + 1 < val.size() ? m_.node(best + 1) : m_.node(best);
        if (lo < hi) {
            for (int k = 1; k < refine_; ++k) {
                Pos x = lerp(lo, hi, double(k) / refine_, double(refine_ - k) / refine_);
                std::size_t c = m_.locate(x);
                if (m_.cells()[c].tail) continue;
                double v = at(x, c);
                if (v > top) top = v;
            }
        }
        return top;
    }

    // True when the values at the graded cells next to an end keep rising toward it.
    bool end_growth(const std::vector<double>& val, bool left) const
    {
        const auto& cells = m_.cells();
        std::vector<double> seq; // from the end inward
        std::size_t nc = cells.size();
        for (std::size_t k = 1; k <= 6 && k + 1 < nc; ++k) {
            const Cell& c = left ? cells[k] : cells[nc - 1 - k];
            if (c.tail) break;
            std::size_t i = std::size_t(c.first) + (left ? 0 : std::size_t(m_.order() - 1));
            seq.push_back(val[i]);
        }
        if (seq.size() < 6) return false;
        for (std::size_t k = 0; k + 1 < seq.size(); ++k)
            if (!(seq[k + 1] > 0.0 && seq[k] >= 1.01 * seq[k + 1])) return false;
        return true;
    }

    const Mesh& m_;
    double p_, q_, r_;
    VProfile V_;
    int refine_;
    Field U_, W_;
    std::vector<double> G_, H_, luv_; // H_ and luv_ hold logs
    double H_tail_ = -inf;
    std::pair<std::vector<double>, std::vector<double>> S_;
};

/// V_p(lo, t) along a mesh: the cumulative L^{p'} norm of v^{-1/(p-1)} for p > 1,
/// the running ess sup of 1/v for p = 1.
inline VProfile vp_profile(const Mesh& mesh, const Weight& v, double p)
{
    const Interval& dom = mesh.domain();
    VProfile V;
    std::size_t n = mesh.size();
    V.node.resize(n);
    if (p > 1.0) {
        double e = -1.0 / (p - 1.0), o = (p - 1.0) / p;
        auto field = std::make_shared<Field>(mesh, [&v, dom, e](Pos x) { return xr::pow(v.at(dom, x), e); });
        for (std::size_t i = 0; i < n; ++i) V.node[i] = xr::pow(field->cum.node_from_lo[i], o);
        V.near_lo = xr::pow(field->cum.tail_lo, o);
        V.at = [field, o](Pos x, std::size_t c) { return xr::pow(field->from_lo(c, x), o); };
        return V;
    }
    auto inv = [&v, dom](Pos x) { return xr::div(1.0, v.at(dom, x)); };
    const auto& cells = mesh.cells();
    EssSupOptions eo;
    eo.grid = 64;
    double run = ess_sup_pos(inv, cells.front().lo, cells.front().hi, eo).value;
    V.near_lo = run;
    auto cell_start = std::make_shared<std::vector<double>>(cells.size() + 1, 0.0);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        (*cell_start)[c] = run;
        if (cells[c].tail) {
            if (c > 0) run = std::max(run, ess_sup_pos(inv, cells[c].lo, cells[c].hi, eo).value);
            continue;
        }
        double local = std::max(run, inv(cells[c].lo));
        for (int k = 0; k < mesh.order(); ++k) {
            std::size_t i = std::size_t(cells[c].first + k);
            local = std::max(local, inv(mesh.node(i)));
            V.node[i] = local;
        }
        run = std::max(local, inv(cells[c].hi));
    }
    (*cell_start)[cells.size()] = run;
    const Mesh* mp = &mesh;
    V.at = [cell_start, mp, inv](Pos x, std::size_t c) {
        double best = (*cell_start)[c];
        Pos lo = mp->cells()[c].lo;
        for (int k = 0; k <= 8; ++k) best = std::max(best, inv(lerp(lo, x, k / 8.0, (8 - k) / 8.0)));
        return best;
    };
    return V;
}

/// (int_t^hi v)^{-1} along a mesh.
inline VProfile inverse_tail_profile(const Mesh& mesh, const Weight& v)
{
    const Interval& dom = mesh.domain();
    VProfile V;
    auto field = std::make_shared<Field>(mesh, [&v, dom](Pos x) { return v.at(dom, x); });
    V.node.resize(mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i) V.node[i] = xr::div(1.0, field->cum.node_to_hi[i]);
    V.near_lo = xr::div(1.0, field->cum.total - field->cum.tail_lo);
    V.at = [field](Pos x, std::size_t c) { return xr::div(1.0, field->to_hi(c, x)); };
    return V;
}

inline void finish(ConditionReport& rep, std::initializer_list<const char*> names)
{
    double sum = 0.0;
    for (const char* n : names) sum += rep.constants.at(n).value();
    rep.combined = ExtReal(sum);
    rep.finite = rep.combined.is_finite();
}

} // namespace detail

/// The constants characterizing the iterated inequality for the regime of e.
inline ConditionReport continuous_constants(const Exponents& e, const Weight& u, const Weight& v, const Weight& w,
                                            const Interval& dom, const CharacterizationOptions& opt = {})
{
    e.validate();
    detail::require_weight(u, "u", opt);
    detail::require_weight(v, "v", opt);
    detail::require_weight(w, "w", opt);
    std::vector<Pos> breaks = u.breakpoints(dom);
    for (auto* x : {&v, &w})
        for (Pos b : x->breakpoints(dom)) breaks.push_back(b);
    Mesh mesh(dom, Pos::lo(), Pos::hi(), MeshOptions{opt.cells, opt.order, opt.grading}, breaks);
    detail::Engine eng(mesh, e.p, e.q, e.r, u, w, detail::vp_profile(mesh, v, e.p), opt.refine_points);

    ConditionReport rep;
    rep.family = "continuous";
    rep.regime = classify(e);
    auto& c = rep.constants;
    switch (rep.regime) {
    case Regime::I:
        c["C1"] = eng.C1();
        detail::finish(rep, {"C1"});
        break;
    case Regime::II:
        c["C2"] = eng.C2();
        c["C3"] = eng.C3();
        detail::finish(rep, {"C2", "C3"});
        break;
    case Regime::III:
        c["C1"] = eng.C1();
        c["C4"] = eng.C4();
        detail::finish(rep, {"C1", "C4"});
        break;
    case Regime::IV:
        c["C3"] = eng.C3();
        c["C5"] = eng.C5();
        detail::finish(rep, {"C3", "C5"});
        break;
    }
    return rep;
}

/// The constants characterizing the inequality restricted to non-decreasing f
/// (0 < p, q < inf). They coincide with the continuous family evaluated at the
/// exponents (1, 1/p, q/p) with V replaced by (int_t^b v)^{-1}, raised to 1/p.
inline ConditionReport monotone_constants(double p, double q, const Weight& u, const Weight& v, const Weight& w,
                                          const Interval& dom, const CharacterizationOptions& opt = {})
{
    Exponents{p, q, 1.0}.validate_monotone();
    detail::require_weight(u, "u", opt);
    detail::require_weight(v, "v", opt);
    detail::require_weight(w, "w", opt);
    std::vector<Pos> breaks = u.breakpoints(dom);
    for (auto* x : {&v, &w})
        for (Pos b : x->breakpoints(dom)) breaks.push_back(b);
    Mesh mesh(dom, Pos::lo(), Pos::hi(), MeshOptions{opt.cells, opt.order, opt.grading}, breaks);
    detail::Engine eng(mesh, 1.0, 1.0 / p, q / p, u, w, detail::inverse_tail_profile(mesh, v), opt.refine_points);
    ConditionReport rep;
    rep.family = "monotone";
    rep.regime = classify_monotone(p, q);
    auto& c = rep.constants;
    auto root = [p](double x) { return xr::pow(x, 1.0 / p); };
    switch (rep.regime) {
    case Regime::I:
        c["calC1"] = root(eng.C1());
        detail::finish(rep, {"calC1"});
        break;
    case Regime::II:
        c["calC2"] = root(eng.C2());
        c["calC3"] = root(eng.C3());
        detail::finish(rep, {"calC2", "calC3"});
        break;
    case Regime::III:
        c["calC1"] = root(eng.C1());
        c["calC4"] = root(eng.C4());
        detail::finish(rep, {"calC1", "calC4"});
        break;
    case Regime::IV:
        c["calC3"] = root(eng.C3());
        c["calC5"] = root(eng.C5());
        detail::finish(rep, {"calC3", "calC5"});
        break;
    }
    return rep;
}

/// Two-sided estimate of the best constant of the Hardy inequality
/// (int_{x0}^{x1} (int_{x0}^t h)^q u)^{1/q} <= B (int_{x0}^{x1} h^p v)^{1/p}.
inline ExtReal local_hardy_constant(double p, double q, const Weight& u, const Weight& v, const Interval& dom, Pos x0,
                                    Pos x1, const CharacterizationOptions& opt = {})
{
    if (!(p >= 1.0) || !(q > 0.0)) throw Error(ErrorKind::invalid_exponents, "need p >= 1, q > 0");
    if (!(x0 < x1)) throw Error(ErrorKind::invalid_range, "need x0 < x1");
    if (u.identically_zero()) return ExtReal(0.0);
    std::vector<Pos> breaks = u.breakpoints(dom);
    for (Pos b : v.breakpoints(dom)) breaks.push_back(b);
    Mesh mesh(dom, x0, x1, MeshOptions{opt.local_cells, opt.local_order, opt.grading}, breaks);
    detail::Field U(mesh, [&u, &dom](Pos x) { return u.at(dom, x); });
    detail::VProfile V = detail::vp_profile(mesh, v, p);
    std::size_t n = mesh.size();
    if (p <= q) {
        std::vector<double> val(n);
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            val[i] = xr::mul(xr::pow(U.cum.node_to_hi[i], 1.0 / q), V.node[i]);
            if (std::isinf(val[i])) return ExtReal::infinity();
            best = std::max(best, val[i]);
        }
        // growth into either end
        const auto& cells = mesh.cells();
        for (bool left : {true, false}) {
            std::vector<double> seq;
            for (std::size_t k = 1; k <= 6; ++k) {
                const Cell& c = left ? cells[k] : cells[cells.size() - 1 - k];
                seq.push_back(val[std::size_t(c.first) + (left ? 0 : std::size_t(mesh.order() - 1))]);
            }
            bool grow = true;
            for (std::size_t k = 0; k + 1 < seq.size(); ++k) grow = grow && seq[k + 1] > 0.0 && seq[k] >= 1.01 * seq[k + 1];
            if (grow) return ExtReal::infinity();
        }
        return ExtReal(best);
    }
    double e1 = q / (p - q), e2 = p * q / (p - q);
    std::vector<double> L(n);
    for (std::size_t i = 0; i < n; ++i)
        L[i] = detail::lmul({e1 * detail::lg(U.cum.node_to_hi[i]), detail::lg(U.val[i]), e2 * detail::lg(V.node[i])});
    return ExtReal(detail::pow_integral(mesh, L, (p - q) / (p * q)));
}

/// Local data of a discretizing sequence: for k = first+1 .. last,
/// B_k = B(x_{k-1}, x_k), U_k = int_{x_k}^{x_{k+1}} u (0 for k = last),
/// Va_k = V_p(a, x_k) and Vloc_k = V_p(x_{k-1}, x_k).
struct DiscreteData {
    int first = 0; // index of the first entry (N+1)
    std::vector<double> B, U, Va, Vloc;
};

inline DiscreteData discrete_data(const Exponents& e, const Weight& u, const Weight& v, const DiscretizingSequence& ds,
                                  const CharacterizationOptions& opt = {})
{
    DiscreteData d;
    d.first = ds.first() + 1;
    const Interval& dom = ds.domain;
    for (int k = d.first; k <= ds.last(); ++k) {
        Pos lo = ds.at(k - 1), hi = ds.at(k);
        d.B.push_back(local_hardy_constant(e.p, e.q, u, v, dom, lo, hi, opt).value());
        d.U.push_back(k < ds.last() ? integrate(u, dom, hi, ds.at(k + 1), 1e-10).value() : 0.0);
        d.Va.push_back(vp(v, e.p, dom, Pos::lo(), hi, 1e-10).value());
        d.Vloc.push_back(vp(v, e.p, dom, lo, hi, 1e-10).value());
    }
    return d;
}

/// The discrete constants A_i (regime of e) and B_1 (p <= r) or B_2 (r < p).
inline ConditionReport discrete_constants(const Exponents& e, const Weight& u, const Weight& v,
                                          const DiscretizingSequence& ds, const CharacterizationOptions& opt = {},
                                          const DiscreteData* precomputed = nullptr)
{
    e.validate();
    DiscreteData local;
    const DiscreteData& d = precomputed ? *precomputed : (local = discrete_data(e, u, v, ds, opt));
    const double p = e.p, q = e.q, r = e.r;
    ConditionReport rep;
    rep.family = "discrete";
    rep.regime = classify(e);
    std::size_t n = d.B.size();
    auto two = [&](std::size_t i) { return d.first + int(i); };
    double tail = 0.0;

    // A: c_k = 2^{-k/r} B_k, sup for p <= r, l^{pr/(p-r)} norm for r < p
    double A = 0.0;
    if (p <= r) {
        for (std::size_t i = 0; i < n; ++i) A = std::max(A, xr::mul(std::exp2(-two(i) / r), d.B[i]));
    } else {
        double ex = p * r / (p - r), t = 0.0;
        std::vector<double> L(n);
        for (std::size_t i = 0; i < n; ++i) L[i] = detail::lmul({ex * (-two(i) / r * std::log(2.0)), ex * detail::lg(d.B[i])});
        A = detail::pow_sum(L, (p - r) / (p * r), &t);
        tail = std::max(tail, t);
    }
    const char* aname = rep.regime == Regime::I ? "A1" : rep.regime == Regime::II ? "A2" : rep.regime == Regime::III ? "A3" : "A4";
    rep.constants[aname] = A;

    // B: suffix sums T_k = sum_{i>=k} 2^{-i} U_i^{r/q}
    std::vector<double> term(n), T(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) term[i] = xr::mul(std::exp2(-two(i)), xr::pow(d.U[i], r / q));
    for (std::size_t i = n; i-- > 0;) T[i] = T[i + 1] + term[i];
    // the closing entry has U = 0; drop it from the ranges of k
    std::size_t nk = n > 0 ? n - 1 : 0;
    if (p <= r) {
        double B = 0.0;
        for (std::size_t i = 0; i < nk; ++i) B = std::max(B, xr::mul(xr::pow(T[i], 1.0 / r), d.Va[i]));
        rep.constants["B1"] = B;
        detail::finish(rep, {aname, "B1"});
    } else {
        std::vector<double> L(nk);
        for (std::size_t i = 0; i < nk; ++i)
            L[i] = detail::lmul({detail::lg(term[i]), r / (p - r) * detail::lg(T[i]), p * r / (p - r) * detail::lg(d.Va[i])});
        double t = 0.0;
        rep.constants["B2"] = nk ? detail::pow_sum(L, (p - r) / (p * r), &t) : 0.0;
        tail = std::max(tail, t);
        detail::finish(rep, {aname, "B2"});
    }
    rep.tail_ratio = tail;
    if (tail > opt.max_tail)
        throw Error(ErrorKind::truncation_dominated,
                    "last term is " + std::to_string(tail) + " of the partial sum; increase the truncation depth");
    return rep;
}

} // namespace hardy
