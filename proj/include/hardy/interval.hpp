#pragma once

// Points of an interval are carried as a parameter s in [0,1] together with
// its complement 1-s. Whichever of the two is <= 1/2 is stored exactly, so a
// point 1e-200 away from b keeps its full relative distance to b.

#include <cmath>
#include <cstdio>
#include <string>

#include "hardy/error.hpp"
#include "hardy/ext_real.hpp"

namespace hardy {

struct Pos {
    double s = 0.0;
    double sc = 1.0;

    static Pos from_s(double s) { return Pos{s, 1.0 - s}; }
    static Pos from_sc(double sc) { return Pos{1.0 - sc, sc}; }
    static Pos lo() { return Pos{0.0, 1.0}; }
    static Pos hi() { return Pos{1.0, 0.0}; }

    bool upper() const { return sc <= 0.5; }
};

inline bool operator<(Pos p, Pos q)
{
    if (p.upper() && q.upper()) return p.sc > q.sc;
    return p.s < q.s;
}
inline bool operator<=(Pos p, Pos q) { return !(q < p); }
inline bool operator==(Pos p, Pos q) { return !(p < q) && !(q < p); }

/// Parameter distance from p to q (q >= p).
inline double span(Pos p, Pos q)
{
    if (p.upper()) return p.sc - q.sc;
    return q.s - p.s;
}

/// The point at parameter distance d to the right of p.
inline Pos plus(Pos p, double d)
{
    if (p.upper()) return Pos::from_sc(p.sc - d);
    double s = p.s + d;
    return s <= 0.5 ? Pos::from_s(s) : Pos{s, (0.5 - p.s) + (0.5 - d)};
}

/// The point at parameter distance d to the left of q.
inline Pos minus(Pos q, double d)
{
    if (!q.upper()) return Pos::from_s(q.s - d);
    double sc = q.sc + d;
    return sc <= 0.5 ? Pos::from_sc(sc) : Pos{(0.5 - q.sc) + (0.5 - d), sc};
}

/// Point at fraction tau of [p, q]; tau_c = 1 - tau must be passed exactly.
inline Pos lerp(Pos p, Pos q, double tau, double tau_c)
{
    double l = span(p, q);
    return tau <= 0.5 ? plus(p, tau * l) : minus(q, tau_c * l);
}

inline Pos lerp(Pos p, Pos q, double tau) { return lerp(p, q, tau, 1.0 - tau); }

inline Pos midpoint(Pos p, Pos q) { return lerp(p, q, 0.5, 0.5); }

/// Interval (a, b) with -inf <= a < b <= +inf and its map onto s in [0,1].
class Interval {
public:
    Interval() = default;
    Interval(double a, double b) : a_(a), b_(b)
    {
        if (!(a < b) || std::isnan(a) || std::isnan(b) || a == inf || b == -inf)
            throw Error(ErrorKind::invalid_range, "interval requires a < b");
    }

    double a() const { return a_; }
    double b() const { return b_; }
    bool finite_lo() const { return std::isfinite(a_); }
    bool finite_hi() const { return std::isfinite(b_); }
    bool finite() const { return finite_lo() && finite_hi(); }
    double length() const { return b_ - a_; }

    double x(Pos p) const
    {
        if (finite()) return p.s <= 0.5 ? a_ + length() * p.s : b_ - length() * p.sc;
        if (finite_lo()) return a_ + p.s / p.sc;
        if (finite_hi()) return b_ - p.sc / p.s;
        return 1.0 / p.sc - 1.0 / p.s;
    }

    /// x - a, exact as far as the parameter is.
    double from_lo(Pos p) const
    {
        if (!finite_lo()) return inf;
        if (finite_hi()) return length() * p.s;
        return p.s / p.sc;
    }

    /// b - x.
    double to_hi(Pos p) const
    {
        if (!finite_hi()) return inf;
        if (finite_lo()) return length() * p.sc;
        return p.sc / p.s;
    }

    double jacobian(Pos p) const
    {
        if (finite()) return length();
        if (finite_lo()) return 1.0 / (p.sc * p.sc);
        if (finite_hi()) return 1.0 / (p.s * p.s);
        return 1.0 / (p.s * p.s) + 1.0 / (p.sc * p.sc);
    }

    Pos pos(double x) const
    {
        if (!(x >= a_ && x <= b_)) throw Error(ErrorKind::invalid_range, "point outside interval");
        if (finite()) {
            double l = length();
            if (x - a_ <= 0.5 * l) return Pos::from_s((x - a_) / l);
            return Pos::from_sc((b_ - x) / l);
        }
        if (std::isinf(x)) return x < 0 ? Pos::lo() : Pos::hi();
        if (finite_lo()) {
            double d = x - a_;
            return Pos{d / (1.0 + d), 1.0 / (1.0 + d)};
        }
        if (finite_hi()) {
            double d = b_ - x;
            return Pos{1.0 / (1.0 + d), d / (1.0 + d)};
        }
        double root = std::sqrt(x * x + 4.0);
        return Pos{2.0 / (root - x + 2.0), 2.0 / (root + x + 2.0)};
    }

    bool contains(double x) const { return x >= a_ && x <= b_; }

    std::string to_string() const;

private:
    double a_ = 0.0;
    double b_ = 1.0;
};

inline std::string format_real(double x)
{
    if (x == inf) return "inf";
    if (x == -inf) return "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string Interval::to_string() const { return format_real(a_) + " " + format_real(b_); }

} // namespace hardy
