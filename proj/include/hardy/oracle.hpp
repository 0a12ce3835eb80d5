#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hardy/characterization.hpp"
#include "hardy/discretization.hpp"
#include "hardy/error.hpp"
#include "hardy/ext_real.hpp"
#include "hardy/interval.hpp"
#include "hardy/measure_core.hpp"
#include "hardy/mesh.hpp"
#include "hardy/quadrature.hpp"
#include "hardy/weight.hpp"

namespace hardy {

/// A non-negative test function on an interval.
struct TestFunction {
    enum class Kind { piecewise_constant, spike, power_profile, dual_candidate };

    Kind kind = Kind::piecewise_constant;
    // piecewise_constant: values[i] on [grid[i], grid[i+1]), 0 outside
    std::vector<Pos> grid;
    std::vector<double> values;
    // spike: height on the parameter range [center - width/2, center + width/2]
    Pos center;
    double width = 0.0;
    double height = 0.0;
    // power_profile: (x - a)^exponent, or (1 + |x|)^exponent when a = -inf
    double exponent = 0.0;
    // dual_candidate: v^{-1/(p-1)} on (cut_lo, cut_hi)
    Pos cut_lo = Pos::lo();
    Pos cut_hi = Pos::hi();
    double p = 2.0;
    Weight v;

    static TestFunction piecewise(std::vector<Pos> grid, std::vector<double> values)
    {
        if (grid.size() != values.size() + 1) throw Error(ErrorKind::invalid_argument, "piecewise needs n+1 breaks for n values");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(grid[i] < grid[i + 1])) throw Error(ErrorKind::invalid_argument, "piecewise breaks must increase");
            if (!(values[i] >= 0.0)) throw Error(ErrorKind::invalid_argument, "test function values must be >= 0");
        }
        TestFunction f;
        f.grid = std::move(grid);
        f.values = std::move(values);
        return f;
    }

    static TestFunction piecewise(const Interval& dom, const std::vector<double>& xs, std::vector<double> values)
    {
        std::vector<Pos> g;
        for (double x : xs) g.push_back(dom.pos(x));
        return piecewise(std::move(g), std::move(values));
    }

    static TestFunction constant(double c) { return piecewise({Pos::lo(), Pos::hi()}, {c}); }

    static TestFunction spike(Pos center, double width, double height)
    {
        if (!(width > 0.0) || !(height >= 0.0)) throw Error(ErrorKind::invalid_argument, "spike needs width > 0, height >= 0");
        TestFunction f;
        f.kind = Kind::spike;
        f.center = center;
        f.width = width;
        f.height = height;
        return f;
    }

    static TestFunction power_profile(double exponent)
    {
        TestFunction f;
        f.kind = Kind::power_profile;
        f.exponent = exponent;
        return f;
    }

    static TestFunction dual(const Weight& v, double p, Pos cut_hi, Pos cut_lo = Pos::lo())
    {
        if (!(p > 1.0)) throw Error(ErrorKind::invalid_argument, "dual candidate needs p > 1; use a spike for p = 1");
        TestFunction f;
        f.kind = Kind::dual_candidate;
        f.v = v;
        f.p = p;
        f.cut_lo = cut_lo;
        f.cut_hi = cut_hi;
        return f;
    }

    Pos spike_lo() const { return span(Pos::lo(), center) > 0.5 * width ? minus(center, 0.5 * width) : Pos::lo(); }
    Pos spike_hi() const { return span(center, Pos::hi()) > 0.5 * width ? plus(center, 0.5 * width) : Pos::hi(); }

    double at(const Interval& dom, Pos x) const
    {
        switch (kind) {
        case Kind::piecewise_constant: {
            if (x < grid.front() || !(x < grid.back())) return 0.0;
            auto it = std::upper_bound(grid.begin(), grid.end(), x, [](Pos a, Pos b) { return a < b; });
            return values[std::size_t(it - grid.begin()) - 1];
        }
        case Kind::spike:
            return (spike_lo() <= x && x < spike_hi()) ? height : 0.0;
        case Kind::power_profile: {
            double d = dom.finite_lo() ? dom.from_lo(x) : 1.0 + std::abs(dom.x(x));
            return xr::pow(d, exponent);
        }
        case Kind::dual_candidate:
            if (x < cut_lo || !(x < cut_hi)) return 0.0;
            return xr::pow(v.at(dom, x), -1.0 / (p - 1.0));
        }
        return 0.0;
    }

    std::vector<Pos> breaks(const Interval& dom) const
    {
        switch (kind) {
        case Kind::piecewise_constant: return grid;
        case Kind::spike: return {spike_lo(), spike_hi()};
        case Kind::power_profile: return {};
        case Kind::dual_candidate: {
            std::vector<Pos> b = v.breakpoints(dom);
            b.push_back(cut_lo);
            b.push_back(cut_hi);
            return b;
        }
        }
        return {};
    }

    std::string describe(const Interval& dom) const
    {
        char buf[160];
        switch (kind) {
        case Kind::piecewise_constant:
            std::snprintf(buf, sizeof buf, "piecewise(%zu cells)", values.size());
            return buf;
        case Kind::spike:
            std::snprintf(buf, sizeof buf, "spike(x=%.6g, width=%.3g)", dom.x(center), width);
            return buf;
        case Kind::power_profile:
            std::snprintf(buf, sizeof buf, "power(%.6g)", exponent);
            return buf;
        case Kind::dual_candidate:
            std::snprintf(buf, sizeof buf, "dual(%.6g, %.6g)", dom.x(cut_lo), dom.x(cut_hi));
            return buf;
        }
        return "?";
    }
};

struct OracleOptions {
    int grid_size = 256;    // cells of the search mesh
    int search_order = 2;
    int fine_cells = 2048;  // cells of the mesh used for reported values
    int fine_order = 4;
    int search_cells = 64;  // pieces of the piecewise constant candidates
    int starts = 20;
    long budget = 20000;
    std::uint64_t seed = 20240917;
    double blowup = 1e12;
};

struct OracleEstimate {
    ExtReal value;
    TestFunction argmax;
    long evaluations = 0;
    int grid_size = 0;
};

namespace detail {

inline std::vector<Pos> gather_breaks(const Interval& dom, std::initializer_list<const Weight*> ws,
                                      const std::vector<Pos>& extra = {})
{
    std::vector<Pos> b = extra;
    for (const Weight* w : ws)
        for (Pos x : w->breakpoints(dom)) b.push_back(x);
    return b;
}

/// (int (int_a^x (int_a^t f)^q u dt)^{r/q} w dx)^{1/r} for f given at the mesh nodes.
inline double iterated_on_mesh(const Mesh& m, const std::vector<double>& f, const std::vector<double>& u,
                               const std::vector<double>& w, double q, double r)
{
    std::size_t n = m.size();
    auto F = m.cumulate(f);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = xr::mul(xr::pow(F.node_from_lo[i], q), u[i]);
    auto Phi = m.cumulate(g);
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = xr::mul(xr::pow(Phi.node_from_lo[i], r / q), w[i]);
    return xr::pow(m.integral(h), 1.0 / r);
}

inline double pnorm_on_mesh(const Mesh& m, const std::vector<double>& f, const std::vector<double>& v, double p)
{
    std::vector<double> g(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) g[i] = xr::mul(xr::pow(f[i], p), v[i]);
    return xr::pow(m.integral(g), 1.0 / p);
}

inline std::vector<double> sample(const Mesh& m, const std::function<double(Pos)>& f)
{
    std::vector<double> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = f(m.node(i));
    return out;
}

/// Search cells: `graded` cells shrinking geometrically into each end plus a uniform core.
inline std::vector<Pos> search_grid(int cells)
{
    int graded = std::max(1, cells / 8);
    int core = std::max(1, cells - 2 * graded);
    const double edge = 1.0 / 16.0;
    std::vector<Pos> g{Pos::lo()};
    for (int j = graded - 1; j >= 1; --j) g.push_back(Pos::from_s(std::ldexp(edge, -j)));
    g.push_back(Pos::from_s(edge));
    for (int i = 1; i < core; ++i) g.push_back(lerp(Pos::from_s(edge), Pos::from_sc(edge), double(i) / core, double(core - i) / core));
    g.push_back(Pos::from_sc(edge));
    for (int j = 1; j <= graded - 1; ++j) g.push_back(Pos::from_sc(std::ldexp(edge, -j)));
    g.push_back(Pos::hi());
    return g;
}

} // namespace detail

/// Left-hand side of the iterated inequality for f.
inline ExtReal lhs_iterated(const TestFunction& f, const Exponents& e, const Weight& u, const Weight& w,
                            const Interval& dom, const OracleOptions& opt = {})
{
    Mesh m(dom, Pos::lo(), Pos::hi(), MeshOptions{opt.fine_cells, opt.fine_order, 40},
           detail::gather_breaks(dom, {&u, &w}, f.breaks(dom)));
    auto fv = detail::sample(m, [&](Pos x) { return f.at(dom, x); });
    auto uv = detail::sample(m, [&](Pos x) { return u.at(dom, x); });
    auto wv = detail::sample(m, [&](Pos x) { return w.at(dom, x); });
    return ExtReal(detail::iterated_on_mesh(m, fv, uv, wv, e.q, e.r));
}

/// (int f^p v)^{1/p}.
inline ExtReal rhs_norm(const TestFunction& f, double p, const Weight& v, const Interval& dom, double tol = 1e-10)
{
    QuadratureOptions qo;
    qo.tol = tol;
    auto br = f.breaks(dom);
    for (Pos b : v.breakpoints(dom)) br.push_back(b);
    double I = integrate_density([&](Pos x) { return xr::mul(xr::pow(f.at(dom, x), p), v.at(dom, x)); }, dom,
                                 Pos::lo(), Pos::hi(), br, qo);
    return ExtReal(xr::pow(I, 1.0 / p));
}

/// (int (int_a^x (int_s^x u) f(s) ds)^r w dx)^{1/r}, summing the kernel directly
/// at every outer node.
inline ExtReal lhs_kernel_q1(const TestFunction& f, const Weight& u, const Weight& w, double r, const Interval& dom,
                             int cells = 512, int order = 8)
{
    Mesh m(dom, Pos::lo(), Pos::hi(), MeshOptions{cells, order, 40}, detail::gather_breaks(dom, {&u, &w}, f.breaks(dom)));
    std::size_t n = m.size();
    auto fv = detail::sample(m, [&](Pos x) { return f.at(dom, x); });
    auto uv = detail::sample(m, [&](Pos x) { return u.at(dom, x); });
    auto wv = detail::sample(m, [&](Pos x) { return w.at(dom, x); });
    auto U = m.cumulate(uv);
    double ftail = m.tails(fv).first;
    std::vector<double> fw(n);
    for (std::size_t j = 0; j < n; ++j) fw[j] = fv[j] * m.weight(j);
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c = std::size_t(m.cell_of(i));
        Pos x = m.node(i);
        double k = gauss_segment(
            [&](Pos s) {
                double fs = f.at(dom, s);
                if (fs == 0.0) return 0.0;
                return fs * gauss_segment([&](Pos t) { return u.at(dom, t); }, dom, s, x, m.rule());
            },
            dom, m.cells()[c].lo, x, m.rule());
        std::size_t stop = std::size_t(m.cells()[c].first);
        for (std::size_t j = 0; j < stop; ++j)
            if (fw[j] != 0.0) k += fw[j] * U.between(j, i);
        k += xr::mul(ftail, U.node_from_lo[i]);
        h[i] = xr::mul(xr::pow(k, r), wv[i]);
    }
    return ExtReal(xr::pow(m.integral(h), 1.0 / r));
}

struct MonotonePair {
    ExtReal ratio_monotone;
    ExtReal ratio_substituted;
};

/// Ratio of the monotone inequality at f = (int_a^x h)^{1/p} and ratio of the
/// substituted inequality at h, whose right side is int h(x) (int_x^b v) dx.
inline MonotonePair monotone_pair_check(const TestFunction& h, double p, double q, const Weight& u, const Weight& v,
                                        const Weight& w, const Interval& dom, const OracleOptions& opt = {})
{
    Exponents{p, q, 1.0}.validate_monotone();
    auto hb = h.breaks(dom);
    Mesh m(dom, Pos::lo(), Pos::hi(), MeshOptions{opt.fine_cells, opt.fine_order, 40},
           detail::gather_breaks(dom, {&u, &w}, hb));
    std::size_t n = m.size();
    auto hv = detail::sample(m, [&](Pos x) { return h.at(dom, x); });
    auto H = m.cumulate(hv);
    std::vector<double> fu(n);
    for (std::size_t i = 0; i < n; ++i) fu[i] = xr::mul(xr::pow(H.node_from_lo[i], 1.0 / p), u.at(dom, m.node(i)));
    auto I = m.cumulate(fu);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = xr::mul(xr::pow(I.node_from_lo[i], q), w.at(dom, m.node(i)));
    double lhs = xr::pow(m.integral(g), 1.0 / q);

    QuadratureOptions qo;
    qo.tol = 1e-11;
    auto vb = v.breakpoints(dom);
    std::vector<Pos> all = hb;
    all.insert(all.end(), vb.begin(), vb.end());
    double rhs_m = integrate_density(
        [&](Pos x) {
            double vx = v.at(dom, x);
            if (vx == 0.0) return 0.0;
            double Hx = integrate_density([&](Pos t) { return h.at(dom, t); }, dom, Pos::lo(), x, hb, qo);
            return xr::mul(Hx, vx);
        },
        dom, Pos::lo(), Pos::hi(), all, qo);
    double rhs_s = integrate_density(
        [&](Pos x) {
            double hx = h.at(dom, x);
            if (hx == 0.0) return 0.0;
            return xr::mul(hx, integrate_density([&](Pos t) { return v.at(dom, t); }, dom, x, Pos::hi(), vb, qo));
        },
        dom, Pos::lo(), Pos::hi(), all, qo);
    return {ExtReal(xr::div(lhs, xr::pow(rhs_m, 1.0 / p))), ExtReal(xr::div(lhs, xr::pow(rhs_s, 1.0 / p)))};
}

namespace detail {

/// Evaluates lhs/rhs ratios on one search mesh.
class SearchEvaluator {
public:
    SearchEvaluator(const Exponents& e, const Weight& u, const Weight& v, const Weight& w, const Interval& dom,
                    const std::vector<Pos>& grid, const OracleOptions& opt)
        : e_(e), dom_(dom),
          mesh_(dom, Pos::lo(), Pos::hi(), MeshOptions{opt.grid_size, opt.search_order, 40},
                gather_breaks(dom, {&u, &v, &w}, grid))
    {
        u_ = sample(mesh_, [&](Pos x) { return u.at(dom, x); });
        v_ = sample(mesh_, [&](Pos x) { return v.at(dom, x); });
        w_ = sample(mesh_, [&](Pos x) { return w.at(dom, x); });
        piece_.resize(mesh_.size());
        for (std::size_t i = 0; i < mesh_.size(); ++i) {
            auto it = std::upper_bound(grid.begin(), grid.end(), mesh_.node(i), [](Pos a, Pos b) { return a < b; });
            piece_[i] = std::size_t(it - grid.begin()) - 1;
        }
    }

    const Mesh& mesh() const { return mesh_; }

    double ratio_nodes(const std::vector<double>& f)
    {
        ++evals_;
        double l = iterated_on_mesh(mesh_, f, u_, w_, e_.q, e_.r);
        double rr = pnorm_on_mesh(mesh_, f, v_, e_.p);
        double x = xr::div(l, rr);
        return std::isnan(x) ? 0.0 : x;
    }

    double ratio_pieces(const std::vector<double>& vals)
    {
        std::vector<double> f(mesh_.size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = vals[piece_[i]];
        return ratio_nodes(f);
    }

    double ratio(const TestFunction& t) { return ratio_nodes(sample(mesh_, [&](Pos x) { return t.at(dom_, x); })); }

    long evaluations() const { return evals_; }

private:
    Exponents e_;
    Interval dom_;
    Mesh mesh_;
    std::vector<double> u_, v_, w_;
    std::vector<std::size_t> piece_;
    long evals_ = 0;
};

struct Candidate {
    double ratio = 0.0;
    TestFunction f;
};

inline void keep_best(std::vector<Candidate>& top, Candidate c, std::size_t k = 4)
{
    top.push_back(std::move(c));
    std::sort(top.begin(), top.end(), [](const Candidate& a, const Candidate& b) { return a.ratio > b.ratio; });
    if (top.size() > k) top.resize(k);
}

/// Multi-start coordinate ascent with multipliers {0, 1/2, 2}. Start 0 is all
/// ones, start 1 the best single piece, the rest random; `done` receives the
/// final ratio and values of every start.
template <class Ratio, class Count, class Done>
void coordinate_ascent(const Ratio& ratio, const Count& evaluations, const std::vector<double>& piece_ratio,
                       const OracleOptions& opt, const Done& done)
{
    const std::size_t nc = piece_ratio.size();
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal(0.0, 2.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double mult[] = {0.0, 0.5, 2.0};
    for (int s = 0; s < opt.starts && evaluations() < opt.budget; ++s) {
        std::vector<double> x(nc, 1.0);
        if (s == 1) {
            std::fill(x.begin(), x.end(), 0.0);
            x[std::size_t(std::max_element(piece_ratio.begin(), piece_ratio.end()) - piece_ratio.begin())] = 1.0;
        } else if (s >= 2) {
            for (auto& xi : x) xi = unit(rng) < 0.3 ? 0.0 : std::exp(normal(rng));
            if (std::all_of(x.begin(), x.end(), [](double t) { return t == 0.0; })) x[0] = 1.0;
        }
        double cur = ratio(x);
        bool improved = true;
        while (improved && evaluations() < opt.budget && cur <= opt.blowup) {
            improved = false;
            for (std::size_t j = 0; j < nc && evaluations() < opt.budget; ++j) {
                double mean = 0.0;
                int cnt = 0;
                for (double t : x)
                    if (t > 0.0) mean += t, ++cnt;
                mean = cnt ? mean / cnt : 1.0;
                for (double m : mult) {
                    std::vector<double> y = x;
                    y[j] = x[j] == 0.0 ? m * mean : m * x[j];
                    if (y[j] == x[j] || std::all_of(y.begin(), y.end(), [](double t) { return t == 0.0; })) continue;
                    double r = ratio(y);
                    if (r > cur * (1.0 + 1e-12)) {
                        x = std::move(y);
                        cur = r;
                        improved = true;
                    }
                }
            }
        }
        done(cur, x);
        if (cur > opt.blowup) return;
    }
}

} // namespace detail

/// Lower estimate of the best constant of the iterated inequality by direct search.
inline OracleEstimate best_constant_search(const Exponents& e, const Weight& u, const Weight& v, const Weight& w,
                                           const Interval& dom, const OracleOptions& opt = {})
{
    e.validate();
    if (opt.budget < 1) throw Error(ErrorKind::invalid_argument, "budget must be >= 1");
    OracleEstimate est;
    est.grid_size = opt.grid_size;
    if (u.identically_zero() || w.identically_zero()) {
        est.argmax = TestFunction::constant(1.0);
        return est;
    }
    const std::vector<Pos> grid = detail::search_grid(opt.search_cells);
    const std::size_t nc = grid.size() - 1;
    detail::SearchEvaluator ev(e, u, v, w, dom, grid, opt);
    std::vector<detail::Candidate> top;
    bool blown = false;
    auto consider = [&](const TestFunction& f) {
        double r = ev.ratio(f);
        if (r > opt.blowup) blown = true;
        if (r > 0.0) detail::keep_best(top, {r, f});
        return r;
    };

    // (a) dual candidates
    if (e.p > 1.0) {
        for (std::size_t i = 0; i < nc; ++i)
            for (std::size_t j = i + 1; j <= nc; ++j) consider(TestFunction::dual(v, e.p, grid[j], grid[i]));
    } else {
        auto inv = [&](Pos x) { return xr::div(1.0, v.at(dom, x)); };
        EssSupOptions eo;
        eo.grid = 256;
        for (std::size_t i = 0; i < nc; ++i) {
            Pos c = ess_sup_pos(inv, grid[i], grid[i + 1], eo).argmax;
            for (int k = 1; k <= 20; ++k) {
                double width = std::ldexp(span(grid[i], grid[i + 1]), -k);
                consider(TestFunction::spike(c, width, 1.0 / width));
            }
        }
    }
    // (b) single-piece spikes
    std::vector<double> piece_ratio(nc);
    for (std::size_t i = 0; i < nc; ++i) {
        std::vector<double> vals(nc, 0.0);
        vals[i] = 1.0;
        piece_ratio[i] = ev.ratio_pieces(vals);
        if (piece_ratio[i] > opt.blowup) blown = true;
        if (piece_ratio[i] > 0.0)
            detail::keep_best(top, {piece_ratio[i], TestFunction::piecewise(grid, vals)});
    }
    // (c) multi-start coordinate ascent on piecewise constant values
    if (!blown)
        detail::coordinate_ascent([&](const std::vector<double>& x) { return ev.ratio_pieces(x); },
                                  [&] { return ev.evaluations(); }, piece_ratio, opt,
                                  [&](double r, const std::vector<double>& x) {
                                      if (r > opt.blowup) blown = true;
                                      if (r > 0.0) detail::keep_best(top, {r, TestFunction::piecewise(grid, x)});
                                  });
    est.evaluations = ev.evaluations();
    if (blown) {
        est.value = ExtReal::infinity();
        est.argmax = top.empty() ? TestFunction::constant(1.0) : top.front().f;
        return est;
    }
    // report values evaluated on the fine mesh
    est.argmax = TestFunction::constant(1.0);
    for (const auto& c : top) {
        double l = lhs_iterated(c.f, e, u, w, dom, opt).value();
        double rr = rhs_norm(c.f, e.p, v, dom).value();
        double r = xr::div(l, rr);
        ++est.evaluations;
        if (std::isnan(r)) continue;
        if (r > opt.blowup) r = inf;
        if (r > est.value.value()) {
            est.value = ExtReal(r);
            est.argmax = c.f;
        }
    }
    return est;
}

/// Lower estimate of the best constant of the monotone inequality: searches h >= 0
/// for the substituted ratio, f = (int_a^x h)^{1/p}.
inline OracleEstimate monotone_best_constant_search(double p, double q, const Weight& u, const Weight& v,
                                                    const Weight& w, const Interval& dom, const OracleOptions& opt = {})
{
    Exponents{p, q, 1.0}.validate_monotone();
    OracleEstimate est;
    est.grid_size = opt.grid_size;
    est.argmax = TestFunction::constant(1.0);
    if (u.identically_zero() || w.identically_zero()) return est;
    const std::vector<Pos> grid = detail::search_grid(opt.search_cells);
    const std::size_t nc = grid.size() - 1;
    Mesh m(dom, Pos::lo(), Pos::hi(), MeshOptions{opt.grid_size, opt.search_order, 40},
           detail::gather_breaks(dom, {&u, &v, &w}, grid));
    std::size_t n = m.size();
    auto uv = detail::sample(m, [&](Pos x) { return u.at(dom, x); });
    auto wv = detail::sample(m, [&](Pos x) { return w.at(dom, x); });
    auto vt = m.cumulate(detail::sample(m, [&](Pos x) { return v.at(dom, x); })).node_to_hi;
    std::vector<std::size_t> piece(n);
    for (std::size_t i = 0; i < n; ++i)
        piece[i] = std::size_t(std::upper_bound(grid.begin(), grid.end(), m.node(i), [](Pos a, Pos b) { return a < b; }) -
                               grid.begin()) - 1;
    long evals = 0;
    auto ratio = [&](const std::vector<double>& vals) {
        ++evals;
        std::vector<double> h(n), g(n);
        for (std::size_t i = 0; i < n; ++i) h[i] = vals[piece[i]];
        auto H = m.cumulate(h);
        for (std::size_t i = 0; i < n; ++i) g[i] = xr::mul(xr::pow(H.node_from_lo[i], 1.0 / p), uv[i]);
        auto I = m.cumulate(g);
        std::vector<double> l(n), rr(n);
        for (std::size_t i = 0; i < n; ++i) {
            l[i] = xr::mul(xr::pow(I.node_from_lo[i], q), wv[i]);
            rr[i] = xr::mul(h[i], vt[i]);
        }
        double x = xr::div(xr::pow(m.integral(l), 1.0 / q), xr::pow(m.integral(rr), 1.0 / p));
        return std::isnan(x) ? 0.0 : x;
    };
    std::vector<detail::Candidate> top;
    bool blown = false;
    std::vector<double> piece_ratio(nc);
    for (std::size_t i = 0; i < nc; ++i) {
        std::vector<double> vals(nc, 0.0);
        vals[i] = 1.0;
        piece_ratio[i] = ratio(vals);
        if (piece_ratio[i] > opt.blowup) blown = true;
        if (piece_ratio[i] > 0.0) detail::keep_best(top, {piece_ratio[i], TestFunction::piecewise(grid, vals)});
    }
    if (!blown)
        detail::coordinate_ascent(ratio, [&] { return evals; }, piece_ratio, opt,
                                  [&](double r, const std::vector<double>& x) {
                                      if (r > opt.blowup) blown = true;
                                      if (r > 0.0) detail::keep_best(top, {r, TestFunction::piecewise(grid, x)});
                                  });
    est.evaluations = evals;
    if (blown) {
        est.value = ExtReal::infinity();
        if (!top.empty()) est.argmax = top.front().f;
        return est;
    }
    OracleOptions fine = opt;
    for (const auto& c : top) {
        auto pr = monotone_pair_check(c.f, p, q, u, v, w, dom, fine);
        ++est.evaluations;
        double r = pr.ratio_substituted.value();
        if (r > est.value.value()) {
            est.value = ExtReal(r);
            est.argmax = c.f;
        }
    }
    return est;
}

enum class DiscreteKind { Bk, Vp };

inline const char* to_string(DiscreteKind k) { return k == DiscreteKind::Bk ? "Bk" : "Vp"; }

/// Ratio of the two discrete inequalities at a sequence a (indexed like d).
inline double discrete_ratio(DiscreteKind kind, const Exponents& e, const DiscreteData& d, const std::vector<double>& a)
{
    const double p = e.p, q = e.q, r = e.r;
    double lhs = 0.0, rhs = 0.0;
    for (double ak : a) rhs += xr::pow(ak, p);
    if (kind == DiscreteKind::Bk) {
        for (std::size_t i = 0; i < a.size(); ++i)
            lhs += xr::mul(std::exp2(-(d.first + int(i))), xr::pow(xr::mul(a[i], d.B[i]), r));
    } else {
        double run = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            run += xr::mul(a[i], d.Vloc[i]);
            lhs += xr::mul(xr::mul(std::exp2(-(d.first + int(i))), xr::pow(d.U[i], r / q)), xr::pow(run, r));
        }
    }
    double x = xr::div(xr::pow(lhs, 1.0 / r), xr::pow(rhs, 1.0 / p));
    return std::isnan(x) ? 0.0 : x;
}

/// Coordinate ascent over non-negative sequences for a discrete inequality.
inline OracleEstimate discrete_best_constant(DiscreteKind kind, const Exponents& e, const DiscreteData& d,
                                             const DiscretizingSequence& ds, long budget = 20000)
{
    e.validate();
    if (budget < 1) throw Error(ErrorKind::invalid_argument, "budget must be >= 1");
    std::size_t n = d.B.size();
    OracleEstimate est;
    est.grid_size = int(n);
    std::vector<double> best(n, 0.0);
    double best_r = 0.0;
    long evals = 0;
    auto eval = [&](const std::vector<double>& a) {
        ++evals;
        return discrete_ratio(kind, e, d, a);
    };
    std::vector<std::vector<double>> starts;
    for (std::size_t m = 0; m < n; ++m) {
        std::vector<double> a(n, 0.0);
        a[m] = 1.0;
        starts.push_back(a);
    }
    for (double rho : {0.5, 0.8, 1.0, 1.25, 2.0}) {
        std::vector<double> a(n);
        for (std::size_t k = 0; k < n; ++k) a[k] = std::pow(rho, double(k) - double(n) / 2.0);
        starts.push_back(a);
    }
    // rank the starts and ascend from the best few
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t s = 0; s < starts.size(); ++s) ranked.emplace_back(eval(starts[s]), s);
    std::sort(ranked.begin(), ranked.end(), [](auto& x, auto& y) { return x.first > y.first; });
    for (std::size_t s = 0; s < std::min<std::size_t>(6, ranked.size()) && evals < budget; ++s) {
        std::vector<double> a = starts[ranked[s].second];
        double cur = ranked[s].first;
        for (double step = 2.0; step > 1.0005 && evals < budget; step = std::sqrt(step)) {
            bool improved = true;
            while (improved && evals < budget) {
                improved = false;
                double mean = 0.0;
                for (double t : a) mean = std::max(mean, t);
                for (std::size_t j = 0; j < n && evals < budget; ++j) {
                    for (double m : {step, 1.0 / step, 0.0}) {
                        std::vector<double> b = a;
                        b[j] = a[j] == 0.0 ? (m > 1.0 ? mean * 1e-3 : 0.0) : a[j] * m;
                        if (b[j] == a[j]) continue;
                        double r = eval(b);
                        if (r > cur * (1.0 + 1e-13)) {
                            a = std::move(b);
                            cur = r;
                            improved = true;
                        }
                    }
                }
            }
        }
        if (cur > best_r) {
            best_r = cur;
            best = a;
        }
    }
    est.value = ExtReal(best_r > 1e12 ? inf : best_r);
    est.evaluations = evals;
    std::vector<Pos> g(ds.points.begin(), ds.points.begin() + std::ptrdiff_t(n + 1));
    bool ok = true;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) ok = ok && g[i] < g[i + 1];
    if (ok && n > 0) est.argmax = TestFunction::piecewise(g, best);
    return est;
}

inline OracleEstimate discrete_best_constant(DiscreteKind kind, const Exponents& e, const Weight& u, const Weight& v,
                                             const DiscretizingSequence& ds, long budget = 20000)
{
    DiscreteData d = discrete_data(e, u, v, ds);
    return discrete_best_constant(kind, e, d, ds, budget);
}

} // namespace hardy
