#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hardy/error.hpp"
#include "hardy/ext_real.hpp"
#include "hardy/interval.hpp"

namespace hardy {

/// c (x-a)^alpha (b-x)^beta; a factor whose endpoint is infinite is dropped.
struct PowerLaw {
    double c = 1.0;
    double alpha = 0.0;
    double beta = 0.0;
};

/// values[i] on [breaks[i], breaks[i+1]); zero outside [breaks.front(), breaks.back()].
struct PiecewiseConstant {
    std::vector<double> breaks;
    std::vector<double> values;
};

/// Interpolates (grid[i], values[i]); log-linear when every value is positive.
struct Tabulated {
    std::vector<double> grid;
    std::vector<double> values;
};

struct Custom {
    std::function<double(double)> fn;
    std::string label = "custom";
};

class Weight {
public:
    using Descriptor = std::variant<PowerLaw, PiecewiseConstant, Tabulated, Custom>;

    Weight() : desc_(PowerLaw{}) {}
    Weight(Descriptor d) : desc_(std::move(d)) { validate(); } // NOLINT(google-explicit-constructor)

    static Weight constant(double c) { return Weight(PowerLaw{c, 0.0, 0.0}); }
    static Weight power(double c, double alpha, double beta = 0.0) { return Weight(PowerLaw{c, alpha, beta}); }
    static Weight custom(std::function<double(double)> fn, std::string label = "custom")
    {
        return Weight(Custom{std::move(fn), std::move(label)});
    }

    const Descriptor& descriptor() const { return desc_; }
    double scale() const { return scale_; }

    Weight scaled(double lambda) const
    {
        if (!(lambda >= 0.0) || std::isinf(lambda)) throw Error(ErrorKind::invalid_argument, "scale must be finite and >= 0");
        Weight w = *this;
        w.scale_ *= lambda;
        return w;
    }

    /// Value at the point p of the domain dom.
    double at(const Interval& dom, Pos p) const
    {
        return xr::mul(scale_, std::visit([&](const auto& d) { return eval(d, dom, p); }, desc_));
    }

    double operator()(const Interval& dom, double x) const { return at(dom, dom.pos(x)); }

    /// Points of dom where the weight may fail to be smooth.
    std::vector<Pos> breakpoints(const Interval& dom) const
    {
        std::vector<double> xs;
        if (auto* pc = std::get_if<PiecewiseConstant>(&desc_)) xs = pc->breaks;
        if (auto* tb = std::get_if<Tabulated>(&desc_)) xs = tb->grid;
        std::vector<Pos> out;
        for (double x : xs)
            if (x > dom.a() && x < dom.b()) out.push_back(dom.pos(x));
        return out;
    }

    bool possibly_nonintegrable() const
    {
        if (auto* pl = std::get_if<PowerLaw>(&desc_)) return pl->alpha <= -1.0 || pl->beta <= -1.0;
        return false;
    }

    bool identically_zero() const
    {
        if (scale_ == 0.0) return true;
        return std::visit(
            [](const auto& d) -> bool {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, PowerLaw>) return d.c == 0.0;
                else if constexpr (std::is_same_v<T, Custom>) return false;
                else return std::all_of(d.values.begin(), d.values.end(), [](double v) { return v == 0.0; });
            },
            desc_);
    }

    /// True unless some part of the descriptor is zero or negative.
    bool strictly_positive() const
    {
        if (scale_ <= 0.0) return false;
        return std::visit(
            [](const auto& d) -> bool {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, PowerLaw>) return d.c > 0.0;
                else if constexpr (std::is_same_v<T, Custom>) return true;
                else return std::all_of(d.values.begin(), d.values.end(), [](double v) { return v > 0.0; });
            },
            desc_);
    }

    std::string to_string() const;
    static Weight parse(const std::string& text);

private:
    void validate() const;

    static double eval(const PowerLaw& d, const Interval& dom, Pos p)
    {
        double v = d.c;
        if (d.alpha != 0.0 && dom.finite_lo()) v = xr::mul(v, xr::pow(dom.from_lo(p), d.alpha));
        if (d.beta != 0.0 && dom.finite_hi()) v = xr::mul(v, xr::pow(dom.to_hi(p), d.beta));
        return v;
    }

    static double eval(const PiecewiseConstant& d, const Interval& dom, Pos p)
    {
        double x = dom.x(p);
        if (x < d.breaks.front() || x > d.breaks.back()) return 0.0;
        auto it = std::upper_bound(d.breaks.begin(), d.breaks.end(), x);
        std::size_t i = it == d.breaks.begin() ? 0 : std::size_t(it - d.breaks.begin()) - 1;
        return d.values[std::min(i, d.values.size() - 1)];
    }

    static double eval(const Tabulated& d, const Interval& dom, Pos p)
    {
        double x = dom.x(p);
        const auto& g = d.grid;
        if (x <= g.front()) return d.values.front();
        if (x >= g.back()) return d.values.back();
        std::size_t i = std::size_t(std::upper_bound(g.begin(), g.end(), x) - g.begin()) - 1;
        double t = (x - g[i]) / (g[i + 1] - g[i]);
        double y0 = d.values[i], y1 = d.values[i + 1];
        bool logspace = std::all_of(d.values.begin(), d.values.end(), [](double v) { return v > 0.0; });
        if (logspace) return std::exp((1.0 - t) * std::log(y0) + t * std::log(y1));
        return (1.0 - t) * y0 + t * y1;
    }

    static double eval(const Custom& d, const Interval& dom, Pos p) { return d.fn(dom.x(p)); }

    Descriptor desc_;
    double scale_ = 1.0;
};

inline void Weight::validate() const
{
    auto sorted_strict = [](const std::vector<double>& xs) {
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i - 1] < xs[i])) return false;
        return true;
    };
    auto nonneg = [](const std::vector<double>& xs) {
        return std::all_of(xs.begin(), xs.end(), [](double v) { return v >= 0.0 && std::isfinite(v); });
    };
    if (auto* pl = std::get_if<PowerLaw>(&desc_)) {
        if (!(pl->c >= 0.0) || !std::isfinite(pl->c) || std::isnan(pl->alpha) || std::isnan(pl->beta))
            throw Error(ErrorKind::invalid_weight, "power law needs c >= 0 and real exponents");
    } else if (auto* pc = std::get_if<PiecewiseConstant>(&desc_)) {
        if (pc->breaks.size() < 2 || pc->values.size() + 1 != pc->breaks.size() || !sorted_strict(pc->breaks) ||
            !nonneg(pc->values))
            throw Error(ErrorKind::invalid_weight, "piecewise weight needs n+1 increasing breaks and n values >= 0");
    } else if (auto* tb = std::get_if<Tabulated>(&desc_)) {
        if (tb->grid.size() < 2 || tb->values.size() != tb->grid.size() || !sorted_strict(tb->grid) ||
            !nonneg(tb->values))
            throw Error(ErrorKind::invalid_weight, "tabulated weight needs matching increasing grid and values >= 0");
    } else if (auto* cu = std::get_if<Custom>(&desc_)) {
        if (!cu->fn) throw Error(ErrorKind::invalid_weight, "custom weight without a function");
    }
}

namespace detail {

inline std::string join(const std::vector<double>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        out += format_real(xs[i]);
    }
    return out;
}

inline double parse_real(const std::string& tok)
{
    std::string t = tok;
    t.erase(0, t.find_first_not_of(" \t"));
    t.erase(t.find_last_not_of(" \t") + 1);
    if (t == "inf" || t == "+inf") return inf;
    if (t == "-inf") return -inf;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (t.empty() || used != t.size()) throw Error(ErrorKind::parse_error, "not a number: '" + tok + "'");
    return v;
}

inline std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_real(tok));
    return out;
}

} // namespace detail

inline std::string Weight::to_string() const
{
    std::string body = std::visit(
        [](const auto& d) -> std::string {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, PowerLaw>)
                return "power " + format_real(d.c) + " " + format_real(d.alpha) + " " + format_real(d.beta);
            else if constexpr (std::is_same_v<T, PiecewiseConstant>)
                return "piecewise " + detail::join(d.breaks) + " ; " + detail::join(d.values);
            else if constexpr (std::is_same_v<T, Tabulated>)
                return "tabulated " + detail::join(d.grid) + " ; " + detail::join(d.values);
            else
                return "custom " + d.label;
        },
        desc_);
    if (scale_ != 1.0) body += " * " + format_real(scale_);
    return body;
}

/// Accepts "const C", "power C ALPHA [BETA]", "piecewise X0,..,Xn ; V1,..,Vn",
/// "tabulated X0,..,Xn ; Y0,..,Yn", each optionally followed by "* LAMBDA".
inline Weight Weight::parse(const std::string& text)
{
    std::string body = text;
    double lambda = 1.0;
    if (auto star = body.find('*'); star != std::string::npos) {
        lambda = detail::parse_real(body.substr(star + 1));
        body = body.substr(0, star);
    }
    std::stringstream ss(body);
    std::string kind;
    ss >> kind;
    std::string rest;
    std::getline(ss, rest);
    Weight w;
    if (kind == "const" || kind == "power") {
        std::stringstream rs(rest);
        std::vector<double> nums;
        std::string tok;
        while (rs >> tok) nums.push_back(detail::parse_real(tok));
        if (kind == "const" && nums.size() == 1) w = Weight::constant(nums[0]);
        else if (kind == "power" && (nums.size() == 2 || nums.size() == 3))
            w = Weight::power(nums[0], nums[1], nums.size() == 3 ? nums[2] : 0.0);
        else throw Error(ErrorKind::parse_error, "bad argument count in weight '" + text + "'");
    } else if (kind == "piecewise" || kind == "tabulated") {
        auto semi = rest.find(';');
        if (semi == std::string::npos) throw Error(ErrorKind::parse_error, "missing ';' in weight '" + text + "'");
        auto xs = detail::parse_list(rest.substr(0, semi));
        auto ys = detail::parse_list(rest.substr(semi + 1));
        try {
            if (kind == "piecewise") w = Weight(PiecewiseConstant{xs, ys});
            else w = Weight(Tabulated{xs, ys});
        } catch (const Error& e) {
            throw Error(ErrorKind::parse_error, e.what());
        }
    } else {
        throw Error(ErrorKind::parse_error, "unknown weight kind '" + kind + "'");
    }
    return w.scaled(lambda);
}

} // namespace hardy
