#pragma once

// Graded product-Gauss mesh on a parameter range [A, B] of a domain.
//
// Layout: M uniform cells; the first and the last are replaced by J cells
// of geometric size toward the end, plus a node-free tail cell of size
// h 2^-J touching the end. Integrals over a tail cell are extrapolated from
// the two adjacent graded cells, which is exact for pure power behaviour.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "hardy/error.hpp"
#include "hardy/ext_real.hpp"
#include "hardy/interval.hpp"

namespace hardy {

struct GaussRule {
    std::vector<double> tau;   // nodes on [0,1]
    std::vector<double> tau_c; // 1 - tau, computed without cancellation
    std::vector<double> w;     // weights, summing to 1
};

namespace detail {

template <unsigned N>
GaussRule make_rule()
{
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& x = G::abscissa();
    const auto& wt = G::weights();
    std::vector<std::pair<double, double>> nodes;
    for (std::size_t i = 0; i < x.size(); ++i) {
        nodes.emplace_back(x[i], wt[i]);
        if (x[i] != 0.0) nodes.emplace_back(-x[i], wt[i]);
    }
    std::sort(nodes.begin(), nodes.end());
    GaussRule r;
    for (auto [xi, wi] : nodes) {
        r.tau.push_back(0.5 * (1.0 + xi));
        r.tau_c.push_back(0.5 * (1.0 - xi));
        r.w.push_back(0.5 * wi);
    }
    return r;
}

} // namespace detail

inline const GaussRule& gauss_rule(int n)
{
    static const std::array<GaussRule, 11> rules = {GaussRule{},
                                                    detail::make_rule<1>(),
                                                    detail::make_rule<2>(),
                                                    detail::make_rule<3>(),
                                                    detail::make_rule<4>(),
                                                    detail::make_rule<5>(),
                                                    detail::make_rule<6>(),
                                                    detail::make_rule<7>(),
                                                    detail::make_rule<8>(),
                                                    detail::make_rule<9>(),
                                                    detail::make_rule<10>()};
    if (n < 1 || n > 10) throw Error(ErrorKind::invalid_argument, "gauss rule order must be 1..10");
    return rules[std::size_t(n)];
}

/// Integral of density dx over [lo, hi] by one application of a Gauss rule.
template <class F>
double gauss_segment(const F& density, const Interval& dom, Pos lo, Pos hi, const GaussRule& r)
{
    double len = span(lo, hi);
    if (!(len > 0.0)) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k < r.tau.size(); ++k) {
        Pos p = lerp(lo, hi, r.tau[k], r.tau_c[k]);
        double v = density(p);
        if (v != 0.0) s += r.w[k] * v * dom.jacobian(p);
    }
    return s * len;
}

struct MeshOptions {
    int cells = 512;
    int order = 4;
    int grading = 40;
};

struct Cell {
    Pos lo;
    Pos hi;
    int first = 0; // index of the first node; tail cells own none
    bool tail = false;
};

/// Extrapolated mass of a node-free tail cell from the two neighbouring
/// graded masses (inner, outer), assuming a geometric pattern.
inline double tail_mass(double inner, double outer)
{
    if (inner == 0.0) return 0.0;
    if (!std::isfinite(inner) || !std::isfinite(outer)) return inf;
    if (outer <= 0.0) return inf;
    double rho = inner / outer;
    if (rho >= 1.0 - 1e-9) return inf;
    return inner * rho / (1.0 - rho);
}

class Mesh {
public:
    Mesh() = default;

    Mesh(const Interval& dom, Pos A, Pos B, const MeshOptions& opt = {}, const std::vector<Pos>& breaks = {})
        : dom_(dom), A_(A), B_(B), order_(opt.order), rule_(&gauss_rule(opt.order))
    {
        if (!(A < B)) throw Error(ErrorKind::invalid_range, "mesh needs A < B");
        int M = std::max(2, opt.cells);
        int J = std::max(2, opt.grading);
        std::vector<std::pair<Pos, Pos>> raw;
        double len = span(A, B);
        double h = len / M;
        // left graded block
        raw.emplace_back(A, plus(A, std::ldexp(h, -J)));
        for (int j = J - 1; j >= 0; --j) raw.emplace_back(plus(A, std::ldexp(h, -j - 1)), plus(A, std::ldexp(h, -j)));
        for (int i = 1; i < M - 1; ++i)
            raw.emplace_back(lerp(A, B, double(i) / M, double(M - i) / M),
                             lerp(A, B, double(i + 1) / M, double(M - i - 1) / M));
        for (int j = 0; j < J; ++j) raw.emplace_back(minus(B, std::ldexp(h, -j)), minus(B, std::ldexp(h, -j - 1)));
        raw.emplace_back(minus(B, std::ldexp(h, -J)), B);
        // glue: make consecutive cells share endpoints exactly
        for (std::size_t i = 1; i < raw.size(); ++i) raw[i].first = raw[i - 1].second;

        std::vector<Pos> cuts;
        for (Pos p : breaks)
            if (A < p && p < B) cuts.push_back(p);
        std::sort(cuts.begin(), cuts.end(), [](Pos x, Pos y) { return x < y; });

        std::size_t ci = 0;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            bool is_tail = i == 0 || i + 1 == raw.size();
            Pos lo = raw[i].first, hi = raw[i].second;
            while (!is_tail && ci < cuts.size() && cuts[ci] <= lo) ++ci;
            while (!is_tail && ci < cuts.size() && cuts[ci] < hi) {
                push_cell(lo, cuts[ci], false);
                lo = cuts[ci++];
            }
            push_cell(lo, hi, is_tail);
        }
    }

    const Interval& domain() const { return dom_; }
    Pos lo() const { return A_; }
    Pos hi() const { return B_; }
    int order() const { return order_; }
    const GaussRule& rule() const { return *rule_; }
    const std::vector<Cell>& cells() const { return cells_; }
    std::size_t size() const { return pos_.size(); }
    const std::vector<Pos>& nodes() const { return pos_; }
    Pos node(std::size_t i) const { return pos_[i]; }
    double weight(std::size_t i) const { return wt_[i]; }
    /// Jacobian times cell span: dx = dfac * dtau on the node's cell.
    double dfac(std::size_t i) const { return dfac_[i]; }
    int cell_of(std::size_t i) const { return cell_of_[i]; }

    /// Index of the cell containing p (p in [lo, hi]).
    std::size_t locate(Pos p) const
    {
        std::size_t lo = 0, hi = cells_.size();
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (p < cells_[mid].lo) hi = mid;
            else lo = mid;
        }
        return lo;
    }

    /// Mass of the two tail cells for node values f (density in x).
    std::pair<double, double> tails(const std::vector<double>& f) const
    {
        auto cell_sum = [&](std::size_t c) {
            double s = 0.0;
            for (int k = 0; k < order_; ++k) {
                std::size_t i = std::size_t(cells_[c].first + k);
                s += f[i] * wt_[i];
            }
            return s;
        };
        std::size_t n = cells_.size();
        double left = tail_mass(cell_sum(1), cell_sum(2));
        double right = tail_mass(cell_sum(n - 2), cell_sum(n - 3));
        return {left, right};
    }

    /// Integral over [lo, hi] of a density given at the nodes.
    double integral(const std::vector<double>& f) const
    {
        auto [l, r] = tails(f);
        double s = l + r;
        for (std::size_t i = 0; i < pos_.size(); ++i) s += f[i] * wt_[i];
        return s;
    }

    /// Cumulative integrals of a density: from lo up to each node and each cell boundary,
    /// and from each node / boundary up to hi.
    struct Cumulative {
        std::vector<double> node_from_lo, node_to_hi;
        std::vector<double> cell_from_lo, cell_to_hi; // at cells[c].lo
        double total = 0.0;
        double tail_lo = 0.0, tail_hi = 0.0;

        /// Integral between node i and node k (i before k), choosing the accurate side.
        double between(std::size_t i, std::size_t k) const
        {
            double via_lo = node_from_lo[k], via_hi = node_to_hi[i];
            double d = via_lo <= via_hi ? via_lo - node_from_lo[i] : via_hi - node_to_hi[k];
            return d > 0.0 ? d : 0.0;
        }
    };

    Cumulative cumulate(const std::vector<double>& f) const
    {
        Cumulative c;
        std::size_t nc = cells_.size();
        auto [tl, th] = tails(f);
        c.tail_lo = tl;
        c.tail_hi = th;
        std::vector<double> cell_mass(nc, 0.0);
        for (std::size_t k = 0; k < nc; ++k) {
            if (cells_[k].tail) continue;
            double s = 0.0;
            for (int j = 0; j < order_; ++j) {
                std::size_t i = std::size_t(cells_[k].first + j);
                s += f[i] * wt_[i];
            }
            cell_mass[k] = s;
        }
        cell_mass.front() = tl;
        cell_mass.back() = th;
        c.cell_from_lo.assign(nc + 1, 0.0);
        for (std::size_t k = 0; k < nc; ++k) c.cell_from_lo[k + 1] = c.cell_from_lo[k] + cell_mass[k];
        c.cell_to_hi.assign(nc + 1, 0.0);
        for (std::size_t k = nc; k-- > 0;) c.cell_to_hi[k] = c.cell_to_hi[k + 1] + cell_mass[k];
        c.total = c.cell_from_lo[nc];
        c.node_from_lo.assign(pos_.size(), 0.0);
        c.node_to_hi.assign(pos_.size(), 0.0);
        for (std::size_t k = 0; k < nc; ++k) {
            if (cells_[k].tail) continue;
            std::size_t f0 = std::size_t(cells_[k].first);
            for (int a = 0; a < order_; ++a) {
                double left = 0.0, right = 0.0;
                for (int b = 0; b < order_; ++b) {
                    double v = f[f0 + b] * dfac_[f0 + b];
                    left += Q_[a * order_ + b] * v;
                    right += R_[a * order_ + b] * v;
                }
                c.node_from_lo[f0 + a] = std::max(0.0, c.cell_from_lo[k] + left);
                c.node_to_hi[f0 + a] = std::max(0.0, c.cell_to_hi[k + 1] + right);
            }
        }
        if (!std::isfinite(c.total)) {
            // a divergent tail leaves everything on its side infinite
            if (std::isinf(tl)) {
                std::fill(c.node_from_lo.begin(), c.node_from_lo.end(), inf);
                std::fill(c.cell_from_lo.begin() + 1, c.cell_from_lo.end(), inf);
            }
            if (std::isinf(th)) {
                std::fill(c.node_to_hi.begin(), c.node_to_hi.end(), inf);
                std::fill(c.cell_to_hi.begin(), c.cell_to_hi.end() - 1, inf);
            }
        }
        return c;
    }

private:
    void push_cell(Pos lo, Pos hi, bool tail)
    {
        Cell c{lo, hi, int(pos_.size()), tail};
        if (!tail) {
            double len = span(lo, hi);
            const auto& r = *rule_;
            for (int k = 0; k < order_; ++k) {
                Pos p = lerp(lo, hi, r.tau[k], r.tau_c[k]);
                double df = len * dom_.jacobian(p);
                pos_.push_back(p);
                dfac_.push_back(df);
                wt_.push_back(df * r.w[k]);
                cell_of_.push_back(int(cells_.size()));
            }
        }
        cells_.push_back(c);
        if (Q_.empty()) build_matrices();
    }

    void build_matrices()
    {
        const auto& r = *rule_;
        int n = order_;
        auto lagrange = [&](int j, double t) {
            double v = 1.0;
            for (int m = 0; m < n; ++m)
                if (m != j) v *= (t - r.tau[m]) / (r.tau[j] - r.tau[m]);
            return v;
        };
        Q_.assign(std::size_t(n * n), 0.0);
        R_.assign(std::size_t(n * n), 0.0);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double q = 0.0;
                for (int m = 0; m < n; ++m) q += r.w[m] * lagrange(b, r.tau[a] * r.tau[m]);
                Q_[a * n + b] = r.tau[a] * q;
                R_[a * n + b] = r.w[b] - Q_[a * n + b];
            }
    }

    Interval dom_;
    Pos A_, B_;
    int order_ = 4;
    const GaussRule* rule_ = nullptr;
    std::vector<Cell> cells_;
    std::vector<Pos> pos_;
    std::vector<double> wt_, dfac_;
    std::vector<int> cell_of_;
    std::vector<double> Q_, R_;
};

} // namespace hardy
