#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hardy/characterization.hpp"
#include "hardy/discretization.hpp"
#include "hardy/error.hpp"
#include "hardy/oracle.hpp"
#include "hardy/weight.hpp"

namespace hardy {

enum class Mode { iterated, monotone, discrete, lemmas };

inline const char* to_string(Mode m)
{
    switch (m) {
    case Mode::iterated: return "iterated";
    case Mode::monotone: return "monotone";
    case Mode::discrete: return "discrete";
    case Mode::lemmas: return "lemmas";
    }
    return "?";
}

struct ExperimentConfig {
    std::string id;
    int line = 0;
    Mode mode = Mode::iterated;
    double p = 2.0, q = 2.0, r = 2.0;
    double a = 0.0, b = 1.0;
    std::string u = "const 1", v = "const 1", w = "const 1";
    double u_scale = 1.0, v_scale = 1.0, w_scale = 1.0;
    int grid_size = 256;
    int char_cells = 512;
    int trunc_depth = 40;
    long search_budget = 20000;
    std::uint64_t seed = 1;
    double tol = 1e-10;
    // declared bounds
    double bound_upper = 16.0;  // oracle <= bound_upper * combined
    double bound_lower = 256.0; // oracle >= combined / bound_lower
    std::map<std::string, double> expect;
    double expect_tol = 1e-4;
    std::optional<bool> expect_finite;
    std::optional<double> oracle_min;
    // lemmas mode
    std::string lemma = "all";
    int count = 20;
    double drift_bound = 0.1;

    Weight weight(const std::string& text, double scale) const { return Weight::parse(text).scaled(scale); }
    Weight U() const { return weight(u, u_scale); }
    Weight V() const { return weight(v, v_scale); }
    Weight W() const { return weight(w, w_scale); }
    Interval interval() const { return Interval(a, b); }
    Exponents exponents() const { return {p, q, r}; }

    void validate() const
    {
        interval();
        U();
        V();
        W();
        if (mode == Mode::monotone) Exponents{p, q, 1.0}.validate_monotone();
        else if (mode != Mode::lemmas) exponents().validate();
        if (mode == Mode::lemmas && lemma != "all") parse_lemma_kind(lemma);
        if (grid_size < 4 || char_cells < 4) throw Error(ErrorKind::invalid_argument, "grid sizes must be >= 4");
        if (search_budget < 1) throw Error(ErrorKind::invalid_argument, "search_budget must be >= 1");
        if (trunc_depth < 1) throw Error(ErrorKind::invalid_argument, "trunc_depth must be >= 1");
    }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double to_real(const std::string& key, const std::string& v)
{
    try {
        return parse_real(v);
    } catch (const Error&) {
        throw Error(ErrorKind::parse_error, "'" + key + "' expects a number, got '" + v + "'");
    }
}

inline long to_long(const std::string& key, const std::string& v)
{
    double d = to_real(key, v);
    if (d != std::floor(d) || std::abs(d) > 9e15) throw Error(ErrorKind::parse_error, "'" + key + "' expects an integer");
    return long(d);
}

inline bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(ErrorKind::parse_error, "'" + key + "' expects true or false");
}

} // namespace detail

/// Sets one field from its key=value form; throws unknown_parameter for unknown keys.
inline void set_field(ExperimentConfig& c, const std::string& key, const std::string& value)
{
    using namespace detail;
    if (key == "id") c.id = value;
    else if (key == "mode") {
        if (value == "iterated") c.mode = Mode::iterated;
        else if (value == "monotone") c.mode = Mode::monotone;
        else if (value == "discrete") c.mode = Mode::discrete;
        else if (value == "lemmas") c.mode = Mode::lemmas;
        else throw Error(ErrorKind::parse_error, "unknown mode '" + value + "'");
    } else if (key == "p") c.p = to_real(key, value);
    else if (key == "q") c.q = to_real(key, value);
    else if (key == "r") c.r = to_real(key, value);
    else if (key == "a") c.a = to_real(key, value);
    else if (key == "b") c.b = to_real(key, value);
    else if (key == "u") c.u = value;
    else if (key == "v") c.v = value;
    else if (key == "w") c.w = value;
    else if (key == "u_scale") c.u_scale = to_real(key, value);
    else if (key == "v_scale") c.v_scale = to_real(key, value);
    else if (key == "w_scale") c.w_scale = to_real(key, value);
    else if (key == "grid_size") c.grid_size = int(to_long(key, value));
    else if (key == "char_cells") c.char_cells = int(to_long(key, value));
    else if (key == "trunc_depth") c.trunc_depth = int(to_long(key, value));
    else if (key == "search_budget") c.search_budget = to_long(key, value);
    else if (key == "seed") c.seed = std::uint64_t(to_long(key, value));
    else if (key == "tol") c.tol = to_real(key, value);
    else if (key == "bound_upper") c.bound_upper = to_real(key, value);
    else if (key == "bound_lower") c.bound_lower = to_real(key, value);
    else if (key == "expect_tol") c.expect_tol = to_real(key, value);
    else if (key == "expect_finite") c.expect_finite = to_bool(key, value);
    else if (key == "oracle_min") c.oracle_min = to_real(key, value);
    else if (key.rfind("expect.", 0) == 0) c.expect[key.substr(7)] = to_real(key, value);
    else if (key == "lemma") c.lemma = value;
    else if (key == "count") c.count = int(to_long(key, value));
    else if (key == "drift_bound") c.drift_bound = to_real(key, value);
    else throw Error(ErrorKind::unknown_parameter, "unknown parameter '" + key + "'");
}

/// Parses key=value blocks, each opened by an [experiment] line. '#' starts a comment.
inline std::vector<ExperimentConfig> parse_config(const std::string& text)
{
    std::vector<ExperimentConfig> out;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    auto fail = [&](int at, const std::string& msg) {
        throw Error(ErrorKind::parse_error, "line " + std::to_string(at) + ": " + msg);
    };
    auto close = [&] {
        if (out.empty()) return;
        auto& c = out.back();
        if (c.id.empty()) c.id = "exp" + std::to_string(out.size());
        try {
            c.validate();
        } catch (const Error& e) {
            fail(c.line, std::string("experiment '") + c.id + "': " + e.what());
        }
    };
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        auto hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        if (s == "[experiment]") {
            close();
            out.emplace_back();
            out.back().line = line;
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected key=value or [experiment], got '" + s + "'");
        if (out.empty()) fail(line, "key before the first [experiment] header");
        std::string key = detail::trim(s.substr(0, eq)), value = detail::trim(s.substr(eq + 1));
        try {
            set_field(out.back(), key, value);
        } catch (const Error& e) {
            fail(line, e.what());
        }
    }
    close();
    return out;
}

inline std::vector<ExperimentConfig> load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::parse_error, "cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Random families shared by the CLI and the tests

namespace family {

struct PowerConfig {
    Exponents e;
    Weight u, v, w;
    std::string describe() const
    {
        char buf[96];
        std::snprintf(buf, sizeof buf, "p=%.6g q=%.6g r=%.6g", e.p, e.q, e.r);
        return std::string(buf) + " u=[" + u.to_string() + "] v=[" + v.to_string() + "] w=[" + w.to_string() + "]";
    }
};

/// Power weights on (0,1) with exponents for the requested regime. v keeps
/// v^{-1/(p-1)} integrable at both ends (1/v bounded when p = 1).
inline PowerConfig random_power_config(Regime reg, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto un = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    PowerConfig c;
    double p = 1, q = 1, r = 1;
    switch (reg) {
    case Regime::I:
        p = unit(rng) < 0.25 ? 1.0 : un(1.0, 2.0);
        q = un(p, p + 2.0);
        r = un(p, p + 2.0);
        break;
    case Regime::II:
        p = un(1.2, 3.0);
        r = un(0.5, p);
        q = un(p, p + 2.0);
        break;
    case Regime::III:
        p = un(1.2, 3.0);
        q = un(0.5, p);
        r = un(p, p + 2.0);
        break;
    case Regime::IV:
        p = un(1.2, 3.0);
        q = un(0.5, p);
        r = un(0.5, p);
        break;
    }
    c.e = {p, q, r};
    double vmax = p > 1.0 ? 0.8 * (p - 1.0) : 0.0;
    c.u = Weight::power(1.0, un(-0.5, 1.0), un(-0.5, 1.0));
    c.v = Weight::power(1.0, un(-0.5, vmax), un(-0.5, vmax));
    c.w = Weight::power(1.0, un(-0.5, 1.0), un(-0.5, 1.0));
    return c;
}

/// Draws until the regime's combined constant is finite and positive.
inline PowerConfig random_finite_power_config(Regime reg, std::mt19937_64& rng, const CharacterizationOptions& opt = {})
{
    for (int attempt = 0; attempt < 100; ++attempt) {
        PowerConfig c = random_power_config(reg, rng);
        auto rep = continuous_constants(c.e, c.u, c.v, c.w, Interval(0.0, 1.0), opt);
        double x = rep.combined.value();
        if (std::isfinite(x) && x > 0.0) return c;
    }
    throw Error(ErrorKind::invalid_argument, "no finite configuration drawn");
}

/// A randomized input satisfying the hypotheses of one equivalence, with
/// `terms` sequence entries (and a discretizing sequence deep enough for them).
struct LemmaCase {
    LemmaKind kind = LemmaKind::sup_sum;
    LemmaInputs in;
    std::shared_ptr<DiscretizingSequence> seq;
    std::string describe;
};

inline LemmaCase random_lemma_case(LemmaKind kind, std::mt19937_64& rng, int terms)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto un = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    LemmaCase c;
    c.kind = kind;
    auto& in = c.in;
    in.domain = Interval(0.0, 1.0);
    char buf[160];

    auto geometric = [&](std::size_t n) {
        std::vector<double> t(n);
        t[0] = std::exp(normal(rng));
        for (std::size_t k = 1; k < n; ++k) t[k] = t[k - 1] * un(0.25, 0.75);
        return t;
    };
    switch (kind) {
    case LemmaKind::sup_sum:
    case LemmaKind::sum_sum:
    case LemmaKind::sum_sup: {
        in.alpha = un(0.25, 3.0);
        in.tau = geometric(std::size_t(terms));
        in.a.resize(std::size_t(terms));
        for (auto& x : in.a) x = unit(rng) < 0.2 ? 0.0 : unit(rng);
        if (std::all_of(in.a.begin(), in.a.end(), [](double x) { return x == 0.0; })) in.a[0] = 1.0;
        std::snprintf(buf, sizeof buf, "alpha=%.4g", in.alpha);
        break;
    }
    case LemmaKind::dec_sup_sum:
    case LemmaKind::dec_sum_sum:
    case LemmaKind::dec_sum_sup:
    case LemmaKind::three_sup:
    case LemmaKind::three_sum: {
        in.alpha = un(0.25, 3.0);
        in.tau = geometric(std::size_t(terms));
        bool sup_g = kind == LemmaKind::dec_sum_sup;
        double lo = sup_g ? 0.0 : -0.5;
        double ga = un(lo, 1.5), gb = un(lo, 1.5);
        in.g = Weight::power(1.0, ga, gb);
        // x_{n-1} = 0 and 1 - x_k shrinking by factors in [0.3, 0.9]
        in.points.push_back(Pos::lo());
        double sc = 1.0;
        for (int k = 0; k < terms; ++k) {
            sc *= un(0.3, 0.9);
            in.points.push_back(Pos::from_sc(sc));
        }
        if (kind == LemmaKind::three_sup || kind == LemmaKind::three_sum) {
            in.sigma.resize(std::size_t(terms));
            in.sigma[0] = std::exp(normal(rng));
            for (std::size_t k = 1; k < in.sigma.size(); ++k) in.sigma[k] = in.sigma[k - 1] * un(1.0, 1.2);
        }
        std::snprintf(buf, sizeof buf, "alpha=%.4g g=power 1 %.4g %.4g", in.alpha, ga, gb);
        break;
    }
    case LemmaKind::int_equiv:
    case LemmaKind::sup_equiv: {
        bool integral = kind == LemmaKind::int_equiv;
        in.alpha = un(0.0, 2.0);
        double wa = un(-0.5, 1.0), wb = un(-0.5, 1.0);
        Weight w = Weight::power(1.0, wa, wb);
        Interval dom(0.0, 1.0);
        double total = wstar(w, dom, Pos::lo(), 1e-12).value();
        int N = int(std::ceil(-std::log2(total) - 1e-9));
        c.seq = std::make_shared<DiscretizingSequence>(build_discretizing_sequence(w, dom, N + terms + 2));
        in.seq = c.seq.get();
        in.n = c.seq->first() + int(unit(rng) * 3.0);
        // h non-decreasing: W*^{-gamma} or 1 + c x^m
        if (unit(rng) < 0.5) {
            double gamma = integral ? un(0.0, 0.5 * (in.alpha + 1.0)) : un(0.0, in.alpha);
            auto seq = c.seq;
            in.h = [seq, gamma](Pos x) {
                double W = wstar(seq->w, seq->domain, x, 1e-12).value();
                return xr::pow(W, -gamma);
            };
            std::snprintf(buf, sizeof buf, "alpha=%.4g w=power 1 %.4g %.4g h=W*^-%.4g n=%d", in.alpha, wa, wb, gamma, in.n);
        } else {
            double cc = un(0.0, 3.0), m = un(0.2, 3.0);
            in.h = [cc, m, dom](Pos x) { return 1.0 + cc * std::pow(dom.x(x), m); };
            std::snprintf(buf, sizeof buf, "alpha=%.4g w=power 1 %.4g %.4g h=1+%.4g x^%.4g n=%d", in.alpha, wa, wb, cc, m, in.n);
        }
        break;
    }
    }
    c.describe = buf;
    return c;
}

} // namespace family

// ---------------------------------------------------------------------------
// Running experiments

inline const std::vector<std::string>& constant_columns()
{
    static const std::vector<std::string> cols = {"C1",    "C2",    "C3",    "C4", "C5", "calC1", "calC2", "calC3",
                                                  "calC4", "calC5", "A1",    "A2", "A3", "A4",    "B1",    "B2"};
    return cols;
}

struct ReportRow {
    std::string id;
    std::string mode;
    std::string param;
    std::string param_value;
    std::string status = "ok"; // ok | error
    std::string regime;
    Exponents e;
    std::map<std::string, ExtReal> constants;
    std::optional<ExtReal> combined;
    std::optional<bool> finite;
    std::optional<ExtReal> reference; // the quantity combined or oracle is compared with
    std::optional<ExtReal> oracle;
    std::optional<double> ratio;
    double bound_upper = 0.0, bound_lower = 0.0;
    bool pass = false;
    double tail_ratio = 0.0;
    int grid_size = 0;
    int trunc_depth = 0;
    std::uint64_t seed = 0;
    std::string note;
    double seconds = 0.0; // summary only; the CSV stays deterministic
};

namespace detail {

inline std::string fmt(double x)
{
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

inline bool rel_close(double x, double y, double tol)
{
    if (std::isinf(x) || std::isinf(y)) return x == y;
    return std::abs(x - y) <= tol * std::max(std::abs(y), 1e-300);
}

inline void check_expectations(const ExperimentConfig& c, ReportRow& row, bool& pass)
{
    for (const auto& [name, value] : c.expect) {
        auto it = row.constants.find(name);
        double got = it != row.constants.end() ? it->second.value()
                     : name == "combined" && row.combined ? row.combined->value()
                                                          : std::nan("");
        if (!rel_close(got, value, c.expect_tol)) {
            pass = false;
            row.note += "expect." + name + "=" + fmt(value) + " got " + fmt(got) + "; ";
        }
    }
    if (c.expect_finite && row.finite && *c.expect_finite != *row.finite) {
        pass = false;
        row.note += std::string("expected finite=") + (*c.expect_finite ? "true" : "false") + "; ";
    }
    if (c.oracle_min && row.oracle && !(row.oracle->value() >= *c.oracle_min)) {
        pass = false;
        row.note += "oracle below " + fmt(*c.oracle_min) + "; ";
    }
}

inline bool within(double ratio, double upper, double lower)
{
    return ratio <= upper * (1.0 + 1e-12) && ratio >= (1.0 / lower) * (1.0 - 1e-12);
}

inline void run_iterated(const ExperimentConfig& c, ReportRow& row)
{
    Interval dom = c.interval();
    Weight u = c.U(), v = c.V(), w = c.W();
    CharacterizationOptions co;
    co.cells = c.char_cells;
    auto rep = continuous_constants(c.exponents(), u, v, w, dom, co);
    row.regime = to_string(rep.regime);
    row.constants = rep.constants;
    row.combined = rep.combined;
    row.finite = rep.finite;
    row.reference = rep.combined;
    OracleOptions oo;
    oo.grid_size = c.grid_size;
    oo.budget = c.search_budget;
    oo.seed = c.seed;
    auto est = best_constant_search(c.exponents(), u, v, w, dom, oo);
    row.oracle = est.value;
    row.ratio = xr::div(est.value.value(), rep.combined.value());
    row.note += "argmax " + est.argmax.describe(dom) + "; ";
    bool pass = !rep.finite || within(*row.ratio, c.bound_upper, c.bound_lower);
    check_expectations(c, row, pass);
    row.pass = pass;
}

inline void run_monotone(const ExperimentConfig& c, ReportRow& row)
{
    Interval dom = c.interval();
    Weight u = c.U(), v = c.V(), w = c.W();
    CharacterizationOptions co;
    co.cells = c.char_cells;
    auto rep = monotone_constants(c.p, c.q, u, v, w, dom, co);
    row.regime = to_string(rep.regime);
    row.constants = rep.constants;
    row.combined = rep.combined;
    row.finite = rep.finite;
    row.reference = rep.combined;
    OracleOptions oo;
    oo.grid_size = c.grid_size;
    oo.budget = c.search_budget;
    oo.seed = c.seed;
    auto est = monotone_best_constant_search(c.p, c.q, u, v, w, dom, oo);
    row.oracle = est.value;
    row.ratio = xr::div(est.value.value(), rep.combined.value());
    bool pass = !rep.finite || within(*row.ratio, c.bound_upper, c.bound_lower);
    check_expectations(c, row, pass);
    row.pass = pass;
}

inline void run_discrete(const ExperimentConfig& c, ReportRow& row)
{
    Interval dom = c.interval();
    Weight u = c.U(), v = c.V(), w = c.W();
    CharacterizationOptions co;
    co.cells = c.char_cells;
    DiscretizeOptions dopt;
    dopt.tol = std::max(c.tol, 1e-14);
    auto ds = build_discretizing_sequence(w, dom, c.trunc_depth, dopt);
    auto data = discrete_data(c.exponents(), u, v, ds, co);
    auto rep = discrete_constants(c.exponents(), u, v, ds, co, &data);
    auto cont = continuous_constants(c.exponents(), u, v, w, dom, co);
    row.regime = to_string(rep.regime);
    row.constants = rep.constants;
    row.combined = rep.combined;
    row.finite = rep.finite;
    row.tail_ratio = rep.tail_ratio;
    row.reference = cont.combined;
    row.ratio = xr::div(rep.combined.value(), cont.combined.value());
    auto bk = discrete_best_constant(DiscreteKind::Bk, c.exponents(), data, ds, c.search_budget);
    auto vpk = discrete_best_constant(DiscreteKind::Vp, c.exponents(), data, ds, c.search_budget);
    row.oracle = bk.value + vpk.value;
    if (ds.resolution_limited) row.note += "discretization resolution-limited; ";
    bool pass = (!rep.finite && !cont.finite) || within(*row.ratio, c.bound_upper, c.bound_lower);
    check_expectations(c, row, pass);
    row.pass = pass;
}

inline void run_lemmas(const ExperimentConfig& c, ReportRow& row)
{
    std::vector<LemmaKind> kinds;
    if (c.lemma == "all") kinds = all_lemma_kinds();
    else kinds = {parse_lemma_kind(c.lemma)};
    std::mt19937_64 rng(c.seed);
    double worst = 1.0, drift = 0.0;
    int T = c.trunc_depth;
    for (LemmaKind k : kinds)
        for (int i = 0; i < c.count; ++i) {
            auto lc = family::random_lemma_case(k, rng, 2 * T);
            lc.in.trunc = T;
            double r1 = lemma_pair(k, lc.in).ratio();
            lc.in.trunc = 2 * T;
            double r2 = lemma_pair(k, lc.in).ratio();
            if (std::abs(std::log(r2)) > std::abs(std::log(worst))) worst = r2;
            if (!(r1 > 0.0) || !(r2 > 0.0) || std::isinf(r1) || std::isinf(r2)) {
                drift = inf;
                row.note += std::string(to_string(k)) + " degenerate ratio on " + lc.describe + "; ";
            } else {
                drift = std::max(drift, std::abs(r2 / r1 - 1.0));
            }
        }
    row.ratio = worst;
    row.tail_ratio = drift;
    row.pass = within(worst, c.bound_upper, c.bound_lower) && drift < c.drift_bound;
}

} // namespace detail

inline ReportRow run_experiment(const ExperimentConfig& c)
{
    ReportRow row;
    row.id = c.id;
    row.mode = to_string(c.mode);
    row.e = c.exponents();
    row.bound_upper = c.bound_upper;
    row.bound_lower = c.bound_lower;
    row.grid_size = c.grid_size;
    row.trunc_depth = c.trunc_depth;
    row.seed = c.seed;
    auto t0 = std::chrono::steady_clock::now();
    try {
        switch (c.mode) {
        case Mode::iterated: detail::run_iterated(c, row); break;
        case Mode::monotone: detail::run_monotone(c, row); break;
        case Mode::discrete: detail::run_discrete(c, row); break;
        case Mode::lemmas: detail::run_lemmas(c, row); break;
        }
    } catch (const std::exception& e) {
        row.status = "error";
        row.pass = false;
        row.note += e.what();
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

struct RunOptions {
    int jobs = 1;
    bool fail_fast = false;
};

/// Runs the experiments; rows follow config order whatever the completion order.
inline std::vector<ReportRow> run_campaign(const std::vector<ExperimentConfig>& cfgs, const RunOptions& opt = {})
{
    std::vector<std::optional<ReportRow>> rows(cfgs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    auto worker = [&] {
        for (;;) {
            if (stop) return;
            std::size_t i = next++;
            if (i >= cfgs.size()) return;
            rows[i] = run_experiment(cfgs[i]);
            if (opt.fail_fast && !rows[i]->pass) stop = true;
        }
    };
    int jobs = std::max(1, opt.jobs);
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    std::vector<ReportRow> out;
    for (auto& r : rows)
        if (r) out.push_back(std::move(*r));
    return out;
}

/// Applies `name=value` to every experiment (sweeps).
inline std::vector<ExperimentConfig> with_param(std::vector<ExperimentConfig> cfgs, const std::string& name,
                                                const std::string& value)
{
    static const std::vector<std::string> numeric = {
        "p",           "q",         "r",           "a",           "b",          "u_scale",     "v_scale",
        "w_scale",     "grid_size", "char_cells",  "trunc_depth", "search_budget", "seed",     "tol",
        "bound_upper", "bound_lower", "expect_tol", "count",      "drift_bound", "oracle_min"};
    if (std::find(numeric.begin(), numeric.end(), name) == numeric.end())
        throw Error(ErrorKind::unknown_parameter, "'" + name + "' is not a numeric config field");
    for (auto& c : cfgs) {
        set_field(c, name, value);
        c.validate();
    }
    return cfgs;
}

inline std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

/// index,x_k,W*(x_k) for every point of a discretizing sequence.
inline void write_sequence_csv(std::ostream& os, const DiscretizingSequence& ds)
{
    os << "index,x,wstar\n";
    for (int k = ds.first(); k <= ds.last(); ++k) {
        char buf[80];
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", k, ds.x(k), ds.wstar_at(k));
        os << buf;
    }
}

inline void write_csv(std::ostream& os, const std::vector<ReportRow>& rows)
{
    using detail::fmt;
    os << "# hardy-lab report v1\n";
    os << "id,mode,param,param_value,status,regime,p,q,r";
    for (const auto& c : constant_columns()) os << ',' << c;
    os << ",combined,finite,reference,oracle,ratio,bound_upper,bound_lower,pass,tail_ratio,grid_size,trunc_depth,seed,note\n";
    for (const auto& r : rows) {
        os << csv_escape(r.id) << ',' << r.mode << ',' << csv_escape(r.param) << ',' << csv_escape(r.param_value) << ','
           << r.status << ',' << r.regime << ',' << fmt(r.e.p) << ',' << fmt(r.e.q) << ',' << fmt(r.e.r);
        for (const auto& c : constant_columns()) {
            os << ',';
            auto it = r.constants.find(c);
            if (it != r.constants.end()) os << fmt(it->second.value());
        }
        os << ',' << (r.combined ? fmt(r.combined->value()) : "") << ','
           << (r.finite ? (*r.finite ? "true" : "false") : "") << ','
           << (r.reference ? fmt(r.reference->value()) : "") << ',' << (r.oracle ? fmt(r.oracle->value()) : "") << ','
           << (r.ratio ? fmt(*r.ratio) : "") << ',' << fmt(r.bound_upper) << ',' << fmt(r.bound_lower) << ','
           << (r.pass ? "true" : "false") << ',' << fmt(r.tail_ratio) << ',' << r.grid_size << ',' << r.trunc_depth
           << ',' << r.seed << ',' << csv_escape(r.note) << '\n';
    }
}

inline void write_summary(std::ostream& os, const std::vector<ReportRow>& rows)
{
    using detail::fmt;
    int passed = 0;
    double total = 0.0;
    for (const auto& r : rows) {
        passed += r.pass ? 1 : 0;
        total += r.seconds;
        os << (r.pass ? "PASS " : "FAIL ") << r.id;
        if (!r.param.empty()) os << " [" << r.param << "=" << r.param_value << "]";
        os << "  mode=" << r.mode;
        if (!r.regime.empty()) os << " regime=" << r.regime;
        if (r.combined) os << " combined=" << fmt(r.combined->value());
        if (r.oracle) os << " oracle=" << fmt(r.oracle->value());
        if (r.ratio) os << " ratio=" << fmt(*r.ratio);
        char t[32];
        std::snprintf(t, sizeof t, "%.2fs", r.seconds);
        os << "  time=" << t;
        if (!r.note.empty()) os << "  (" << r.note << ")";
        os << '\n';
    }
    char t[32];
    std::snprintf(t, sizeof t, "%.2fs", total);
    os << passed << "/" << rows.size() << " experiments passed in " << t << '\n';
}

} // namespace hardy
