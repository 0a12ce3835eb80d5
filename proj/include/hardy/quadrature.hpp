#pragma once

// Adaptive quadrature over a piece of an Interval. Each smooth piece is split
// into a core, integrated by adaptive Gauss-Kronrod, and two end zones cut
// into geometric panels [e + d 2^-(j+1), e + d 2^-j]. The panel sums of a
// power-type endpoint behave geometrically, which gives both the tail
// extrapolation and the divergence test.

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hardy/error.hpp"
#include "hardy/ext_real.hpp"
#include "hardy/interval.hpp"
#include "hardy/weight.hpp"

namespace hardy {

struct QuadratureOptions {
    double tol = 1e-8;
    double divergence_threshold = 1e12;
    int max_panels = 1100;
};

namespace detail {

/// Sum of the geometric panels of one end zone.
/// panel(j) integrates the panel at distance [d 2^-(j+1), d 2^-j] from the end.
/// end_gap is the parameter distance from that end to the domain boundary.
template <class Panel>
double zone_sum(const Panel& panel, double d, double reference, const QuadratureOptions& opt, double end_gap = 0.0)
{
    double total = 0.0;
    std::vector<double> parts;
    std::vector<double> rho;
    for (int j = 0; j < opt.max_panels; ++j) {
        double lo = std::ldexp(d, -j - 1);
        if (lo < 1e-300 && (end_gap == 0.0 || lo < 1e-3 * end_gap)) break;
        double pj = panel(j);
        if (!(pj >= 0.0) || std::isinf(pj)) return inf;
        total += pj;
        parts.push_back(pj);
        std::size_t n = parts.size();
        if (n >= 2) rho.push_back(parts[n - 2] > 0.0 ? pj / parts[n - 2] : (pj > 0.0 ? inf : 0.0));
        double ref = reference + total;

        if (n >= 2 && pj == 0.0 && parts[n - 2] == 0.0) return total;
        if (ref > opt.divergence_threshold && pj > 0.05 * (ref - pj)) return inf;
        if (rho.size() >= 8 && (end_gap == 0.0 || lo <= 1e-3 * end_gap)) {
            bool stuck = true;
            for (std::size_t i = rho.size() - 8; i < rho.size(); ++i) stuck = stuck && rho[i] >= 1.0 - 1e-6;
            if (stuck) return inf;
        }
        if (n >= 3 && pj <= 0.1 * opt.tol * ref && parts[n - 2] <= 0.1 * opt.tol * ref) {
            double r = rho.back();
            return r < 1.0 ? total + pj * r / (1.0 - r) : total;
        }
        if (rho.size() >= 5) {
            bool stable = true;
            for (std::size_t i = rho.size() - 4; i < rho.size(); ++i)
                stable = stable && std::abs(rho[i] - rho[i - 1]) <= 1e-7 * rho[i];
            double r = rho.back();
            if (stable && r < 1.0 - 1e-6) return total + pj * r / (1.0 - r);
        }
    }
    if (parts.empty()) return total;
    double r = rho.empty() ? 0.0 : rho.back();
    if (r >= 1.0 - 1e-6 && end_gap == 0.0) return inf;
    return total + parts.back() * r / (1.0 - r);
}

/// Integral over [A, B] of density(pos) dx with no breakpoint inside.
template <class Density>
double integrate_piece(const Density& density, const Interval& dom, Pos A, Pos B, const QuadratureOptions& opt)
{
    using boost::math::quadrature::gauss;
    using boost::math::quadrature::gauss_kronrod;
    double len = span(A, B);
    if (!(len > 0.0)) return 0.0;
    auto g = [&](Pos p) {
        double v = density(p);
        return v == 0.0 ? 0.0 : v * dom.jacobian(p);
    };
    double h = len / 8.0;

    double core = 0.0;
    bool bad = false;
    auto fcore = [&](double t) {
        double v = g(lerp(A, B, t, 1.0 - t));
        if (!std::isfinite(v)) bad = true;
        return std::isfinite(v) ? v : 0.0;
    };
    core = len * gauss_kronrod<double, 15>::integrate(fcore, 0.125, 0.875, 18, std::max(opt.tol * 0.1, 1e-13));
    if (bad || !std::isfinite(core)) return inf;

    auto left = [&](int j) {
        double lo = std::ldexp(h, -j - 1), hi = std::ldexp(h, -j);
        bool inf_seen = false;
        double v = gauss<double, 10>::integrate(
            [&](double t) {
                double y = g(plus(A, t));
                if (!std::isfinite(y)) inf_seen = true;
                return std::isfinite(y) ? y : 0.0;
            },
            lo, hi);
        return inf_seen ? inf : v;
    };
    auto right = [&](int j) {
        double lo = std::ldexp(h, -j - 1), hi = std::ldexp(h, -j);
        bool inf_seen = false;
        double v = gauss<double, 10>::integrate(
            [&](double t) {
                double y = g(minus(B, t));
                if (!std::isfinite(y)) inf_seen = true;
                return std::isfinite(y) ? y : 0.0;
            },
            lo, hi);
        return inf_seen ? inf : v;
    };
    double zl = zone_sum(left, h, core, opt, A.s);
    if (std::isinf(zl)) return inf;
    double zr = zone_sum(right, h, core + zl, opt, B.sc);
    if (std::isinf(zr)) return inf;
    return core + zl + zr;
}

} // namespace detail

/// Integral of density(pos) dx over the part [A, B] of dom, split at breaks.
template <class Density>
double integrate_density(const Density& density, const Interval& dom, Pos A, Pos B, const std::vector<Pos>& breaks,
                         const QuadratureOptions& opt = {})
{
    if (B < A) throw Error(ErrorKind::invalid_range, "integration bounds reversed");
    std::vector<Pos> cuts{A};
    for (Pos p : breaks)
        if (A < p && p < B) cuts.push_back(p);
    std::sort(cuts.begin(), cuts.end(), [](Pos x, Pos y) { return x < y; });
    cuts.push_back(B);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double part = detail::integrate_piece(density, dom, cuts[i], cuts[i + 1], opt);
        if (std::isinf(part)) return inf;
        total += part;
    }
    return total;
}

inline ExtReal integrate(const Weight& w, const Interval& dom, Pos x, Pos y, double tol = 1e-8)
{
    if (y < x) throw Error(ErrorKind::invalid_range, "integrate requires x <= y");
    QuadratureOptions opt;
    opt.tol = tol;
    return integrate_density([&](Pos p) { return w.at(dom, p); }, dom, x, y, w.breakpoints(dom), opt);
}

/// The integral of w over (x, y) within the domain dom, to relative accuracy tol.
inline ExtReal integrate(const Weight& w, const Interval& dom, double x, double y, double tol = 1e-8)
{
    if (x > y) throw Error(ErrorKind::invalid_range, "integrate requires x <= y");
    return integrate(w, dom, dom.pos(x), dom.pos(y), tol);
}

} // namespace hardy
