#pragma once

// Non-negative extended reals [0, +inf] with the conventions
//     0 * inf = inf / inf = 0 / 0 = 0.
// The free functions in namespace xr apply the same rules to raw doubles and
// are what the inner loops use; ExtReal is the value type exposed in reports.

#include <cmath>
#include <limits>
#include <ostream>

#include "hardy/error.hpp"

namespace hardy {

inline constexpr double inf = std::numeric_limits<double>::infinity();

namespace xr {

inline double mul(double x, double y)
{
    if (x == 0.0 || y == 0.0) return 0.0;
    return x * y;
}

inline double div(double x, double y)
{
    if (x == 0.0) return 0.0;
    if (std::isinf(x) && std::isinf(y)) return 0.0;
    if (y == 0.0) return inf;
    return x / y;
}

/// x^e for x in [0, inf]; 0^(-e) = inf, inf^(-e) = 0.
inline double pow(double x, double e)
{
    if (e == 0.0) return 1.0;
    if (x == 0.0) return e > 0.0 ? 0.0 : inf;
    if (std::isinf(x)) return e > 0.0 ? inf : 0.0;
    if (e == 1.0) return x;
    return std::pow(x, e);
}

} // namespace xr

class ExtReal {
public:
    constexpr ExtReal() = default;

    ExtReal(double v) : v_(v) // NOLINT(google-explicit-constructor)
    {
        if (!(v >= 0.0)) throw Error(ErrorKind::invalid_argument, "ExtReal must be non-negative");
    }

    static constexpr ExtReal infinity()
    {
        ExtReal r;
        r.v_ = inf;
        return r;
    }

    double value() const { return v_; }
    bool is_finite() const { return std::isfinite(v_); }
    bool is_infinite() const { return std::isinf(v_); }
    bool is_zero() const { return v_ == 0.0; }

    friend ExtReal operator+(ExtReal x, ExtReal y) { return ExtReal(x.v_ + y.v_); }
    friend ExtReal operator*(ExtReal x, ExtReal y) { return ExtReal(xr::mul(x.v_, y.v_)); }
    friend ExtReal operator/(ExtReal x, ExtReal y) { return ExtReal(xr::div(x.v_, y.v_)); }
    ExtReal& operator+=(ExtReal o) { return *this = *this + o; }
    ExtReal& operator*=(ExtReal o) { return *this = *this * o; }

    friend auto operator<=>(ExtReal x, ExtReal y) = default;
    friend bool operator==(ExtReal x, ExtReal y) = default;

    friend std::ostream& operator<<(std::ostream& os, ExtReal x)
    {
        if (x.is_infinite()) return os << "inf";
        return os << x.v_;
    }

private:
    double v_ = 0.0;
};

inline ExtReal pow(ExtReal x, double e) { return ExtReal(xr::pow(x.value(), e)); }
inline ExtReal max(ExtReal x, ExtReal y) { return x < y ? y : x; }

} // namespace hardy
