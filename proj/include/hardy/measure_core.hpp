#pragma once

#include <cmath>
#include <string>

#include "hardy/error.hpp"
#include "hardy/ess_sup.hpp"
#include "hardy/ext_real.hpp"
#include "hardy/interval.hpp"
#include "hardy/quadrature.hpp"
#include "hardy/weight.hpp"

namespace hardy {

struct Exponents {
    double p = 1.0;
    double q = 1.0;
    double r = 1.0;

    /// Checks 1 <= p < inf and 0 < q, r < inf.
    void validate() const
    {
        if (!(q > 0.0) || !(r > 0.0) || std::isinf(q) || std::isinf(r) || std::isinf(p) || std::isnan(p))
            throw Error(ErrorKind::invalid_exponents, "need 0 < q, r < inf");
        if (!(p >= 1.0))
            throw Error(ErrorKind::invalid_exponents,
                        "p < 1: the iterated inequality only holds for trivial functions");
    }

    /// The monotone inequality needs only 0 < p, q < inf.
    void validate_monotone() const
    {
        if (!(p > 0.0) || !(q > 0.0) || std::isinf(p) || std::isinf(q))
            throw Error(ErrorKind::invalid_exponents, "need 0 < p, q < inf");
    }
};

/// W*(t), the mass of w on (t, b).
inline ExtReal wstar(const Weight& w, const Interval& dom, Pos t, double tol = 1e-8)
{
    return integrate(w, dom, t, Pos::hi(), tol);
}

inline ExtReal wstar(const Weight& w, const Interval& dom, double t, double tol = 1e-8)
{
    return wstar(w, dom, dom.pos(t), tol);
}

/// V_p(x, y): the L^{p'} norm of 1/v on (x, y), or ess sup 1/v when p = 1.
inline ExtReal vp(const Weight& v, double p, const Interval& dom, Pos x, Pos y, double tol = 1e-8)
{
    if (!(p >= 1.0)) throw Error(ErrorKind::invalid_exponents, "V_p needs p >= 1");
    if (y < x) throw Error(ErrorKind::invalid_range, "V_p requires x <= y");
    if (!(x < y)) return ExtReal(0.0);
    if (p == 1.0) {
        auto r = ess_sup_pos([&](Pos s) { return xr::div(1.0, v.at(dom, s)); }, x, y);
        return ExtReal(r.value);
    }
    double e = -1.0 / (p - 1.0);
    QuadratureOptions opt;
    opt.tol = tol;
    double I = integrate_density([&](Pos s) { return xr::pow(v.at(dom, s), e); }, dom, x, y, v.breakpoints(dom), opt);
    return ExtReal(xr::pow(I, (p - 1.0) / p));
}

inline ExtReal vp(const Weight& v, double p, const Interval& dom, double x, double y, double tol = 1e-8)
{
    if (x > y) throw Error(ErrorKind::invalid_range, "V_p requires x <= y");
    return vp(v, p, dom, dom.pos(x), dom.pos(y), tol);
}

} // namespace hardy
