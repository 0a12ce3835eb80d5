#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "hardy/error.hpp"
#include "hardy/ext_real.hpp"
#include "hardy/interval.hpp"

namespace hardy {

struct EssSupOptions {
    int grid = 4096;
    int refine_rounds = 2;
    int refine_points = 64;
    int probe_depth = 40;
};

struct EssSupResult {
    double value = 0.0;
    Pos argmax;
};

/// Supremum of g over the parameter range (A, B) of some domain. g is taken
/// piecewise continuous; a run of steadily rising endpoint probes is read as
/// blow-up and reported as +inf.
template <class G>
EssSupResult ess_sup_pos(const G& g, Pos A, Pos B, const EssSupOptions& opt = {})
{
    EssSupResult best{0.0, midpoint(A, B)};
    double len = span(A, B);
    if (!(len > 0.0)) return best;
    auto consider = [&](Pos p) {
        double v = g(p);
        if (std::isnan(v)) return;
        if (v > best.value || (std::isinf(v) && !std::isinf(best.value))) best = {v, p};
    };
    for (int i = 0; i < opt.grid; ++i) {
        double tau = (i + 0.5) / opt.grid;
        consider(lerp(A, B, tau, (opt.grid - i - 0.5) / opt.grid));
    }

    auto probe_side = [&](bool left) {
        std::vector<double> seen;
        for (int j = 1; j <= opt.probe_depth; ++j) {
            double d = std::ldexp(len, -j);
            Pos p = left ? plus(A, d) : minus(B, d);
            double v = g(p);
            if (std::isnan(v)) continue;
            if (v > best.value || (std::isinf(v) && !std::isinf(best.value))) best = {v, p};
            seen.push_back(v);
        }
        if (seen.size() < 6) return false;
        for (std::size_t i = seen.size() - 5; i < seen.size(); ++i)
            if (!(seen[i - 1] > 0.0 && seen[i] >= 1.01 * seen[i - 1])) return false;
        return true;
    };
    bool blow_left = probe_side(true);
    bool blow_right = probe_side(false);
    if (std::isinf(best.value)) return best;
    if (blow_left) return {inf, A};
    if (blow_right) return {inf, B};

    double width = len / opt.grid;
    for (int round = 0; round < opt.refine_rounds; ++round) {
        Pos c = best.argmax;
        double left_room = span(A, c), right_room = span(c, B);
        Pos lo = plus(A, std::max(0.0, left_room - width));
        Pos hi = minus(B, std::max(0.0, right_room - width));
        for (int i = 0; i <= opt.refine_points; ++i) {
            double tau = double(i) / opt.refine_points;
            Pos p = lerp(lo, hi, tau, double(opt.refine_points - i) / opt.refine_points);
            if (A < p && p < B) consider(p);
        }
        width /= opt.refine_points / 2.0;
    }
    return best;
}

/// Essential supremum of a piecewise continuous g on (x, y).
inline ExtReal ess_sup(const std::function<double(double)>& g, double x, double y, const EssSupOptions& opt = {})
{
    if (!(x < y)) throw Error(ErrorKind::invalid_range, "ess_sup requires x < y");
    Interval dom(x, y);
    auto r = ess_sup_pos([&](Pos p) { return g(dom.x(p)); }, Pos::lo(), Pos::hi(), opt);
    return ExtReal(std::max(0.0, r.value));
}

} // namespace hardy
