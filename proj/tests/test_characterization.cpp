#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "hardy/characterization.hpp"
#include "hardy/harness.hpp"
#include "oracles.hpp"

using namespace hardy;

namespace {

const Interval unit(0.0, 1.0);
const Weight one = Weight::constant(1.0);

/// Unit weights on (0,1): U(t,x) = x - t, V_p(0,t) = t^{(p-1)/p}, W*(x) = 1 - x.
/// Powers are formed in logs so that near-tie exponents stay representable.
struct UnitOracle {
    double p, q, r;

    double beta() const { return (p - 1.0) / p; }
    double logG(double x) const { return (r / q + 1.0) * std::log(1.0 - x) - std::log(r / q + 1.0); }
    // log sup_{0<t<x} (x-t)^A t^B, maximizer t = x B / (A + B)
    static double log_supt(double x, double A, double B)
    {
        if (B == 0.0) return A * std::log(x);
        double t = x * B / (A + B);
        return A * std::log(x - t) + B * std::log(t);
    }
    double logH(double x) const
    {
        double a = q / (p - q), b = beta() * p * q / (p - q);
        return (a + b + 1.0) * std::log(x) + std::lgamma(b + 1.0) + std::lgamma(a + 1.0) - std::lgamma(a + b + 2.0);
    }
    // (int_0^1 exp(L))^e with the integrand scaled by exp(-shift)
    static double pow_int(const std::function<double(double)>& L, double shift, double e)
    {
        return std::exp(e * (shift + std::log(oracle::integral([&](double x) { return std::exp(L(x) - shift); }, 0, 1))));
    }
    static double max_of(const std::function<double(double)>& L) { return oracle::grid_max(L, 0, 1, 20000); }

    double C1() const
    {
        return oracle::grid_max([&](double x) { return std::exp(logG(x) / r) * std::pow(x, beta()); }, 0, 1);
    }
    double C2() const
    {
        double k = p * r / (p - r);
        auto L = [&](double x) { return r / (p - r) * std::log(1.0 - x) + k * log_supt(x, 1.0 / q, beta()); };
        return pow_int(L, max_of(L), (p - r) / (p * r));
    }
    double C3() const
    {
        double k = p * r / (p - r);
        auto L = [&](double x) { return r / (p - r) * logG(x) + log_supt(x, r / q, beta() * k); };
        return pow_int(L, max_of(L), (p - r) / (p * r));
    }
    double C4() const
    {
        double e = (p - q) / (p * q);
        return oracle::grid_max([&](double x) { return std::pow(1.0 - x, 1.0 / r) * std::exp(e * logH(x)); }, 0, 1);
    }
    double C5() const
    {
        double e = r * (p - q) / (q * (p - r));
        auto L = [&](double x) { return r / (p - r) * std::log(1.0 - x) + e * logH(x); };
        return pow_int(L, max_of(L), (p - r) / (p * r));
    }
};

} // namespace

TEST(Classify, Examples)
{
    EXPECT_EQ(classify(1, 2, 3), Regime::I);
    EXPECT_EQ(classify(2, 3, 1), Regime::II);
    EXPECT_EQ(classify(3, 2, 4), Regime::III);
    EXPECT_EQ(classify(3, 2, 1), Regime::IV);
    EXPECT_EQ(classify(2, 2, 2), Regime::I);
    EXPECT_EQ(classify_monotone(0.5, 1), Regime::I);
    EXPECT_EQ(classify_monotone(0.9, 0.5), Regime::II);
    EXPECT_EQ(classify_monotone(2, 3), Regime::III);
    EXPECT_EQ(classify_monotone(2, 1), Regime::IV);
}

TEST(Classify, IsAPartition)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(1.0, 4.0);
    std::vector<double> ties = {1.0, 1.5, 2.0, 3.0};
    for (int i = 0; i < 2000; ++i) {
        double p = i % 3 ? d(rng) : ties[i % 4], q = i % 5 ? d(rng) : p, r = i % 7 ? d(rng) : p;
        int fired = int(p <= r && p <= q) + int(r < p && p <= q) + int(q < p && p <= r) + int(r < p && q < p);
        ASSERT_EQ(fired, 1);
        Regime want = p <= r && p <= q ? Regime::I : r < p && p <= q ? Regime::II : q < p && p <= r ? Regime::III : Regime::IV;
        EXPECT_EQ(classify(p, q, r), want);
    }
}

TEST(Continuous, UnitWeightsAnchor)
{
    auto rep = continuous_constants({2, 2, 2}, one, one, one, unit);
    double want = UnitOracle{2, 2, 2}.C1();
    EXPECT_NEAR(want, std::sqrt(2.0 / 27.0), 1e-9);
    EXPECT_EQ(rep.regime, Regime::I);
    EXPECT_LE(oracle::rel(rep.at("C1").value(), want), 1e-4);
    EXPECT_EQ(rep.combined.value(), rep.at("C1").value());
    EXPECT_TRUE(rep.finite);
    EXPECT_EQ(rep.constants.size(), 1u);
}

TEST(Continuous, UnitWeightsAllRegimes)
{
    struct Case {
        double p, q, r;
    };
    for (Case c : {Case{1, 1, 1}, Case{1.5, 3, 2}, Case{3, 4, 2}, Case{2, 4, 1.5}, Case{2, 1, 3}, Case{3, 2, 4}, Case{3, 2, 2},
                   Case{2.5, 1.5, 1}, Case{2, 1.999, 3}, Case{2, 3, 1.995}, Case{2, 1.5, 1.995}}) {
        UnitOracle o{c.p, c.q, c.r};
        auto rep = continuous_constants({c.p, c.q, c.r}, one, one, one, unit);
        std::string tag = "p=" + std::to_string(c.p) + " q=" + std::to_string(c.q) + " r=" + std::to_string(c.r);
        std::map<std::string, double> want;
        switch (classify(c.p, c.q, c.r)) {
        case Regime::I: want = {{"C1", o.C1()}}; break;
        case Regime::II: want = {{"C2", o.C2()}, {"C3", o.C3()}}; break;
        case Regime::III: want = {{"C1", o.C1()}, {"C4", o.C4()}}; break;
        case Regime::IV: want = {{"C3", o.C3()}, {"C5", o.C5()}}; break;
        }
        ASSERT_EQ(rep.constants.size(), want.size()) << tag;
        double sum = 0.0;
        for (auto& [name, v] : want) {
            EXPECT_LE(oracle::rel(rep.at(name).value(), v), 1e-5) << tag << " " << name;
            sum += v;
        }
        EXPECT_LE(oracle::rel(rep.combined.value(), sum), 1e-5) << tag;
    }
}

TEST(Continuous, VanishingU)
{
    for (Exponents e : {Exponents{2, 2, 2}, Exponents{3, 4, 2}, Exponents{2, 1, 3}, Exponents{3, 2, 1}}) {
        auto rep = continuous_constants(e, Weight::constant(0), one, one, unit);
        for (auto& [name, v] : rep.constants) EXPECT_EQ(v.value(), 0.0) << name;
        EXPECT_TRUE(rep.finite);
    }
}

TEST(Continuous, NonIntegrableDualWeight)
{
    auto rep = continuous_constants({2, 2, 2}, one, Weight::power(1, 1, 0), one, unit);
    EXPECT_TRUE(rep.at("C1").is_infinite());
    EXPECT_FALSE(rep.finite);
}

TEST(Continuous, RejectsPartlyVanishingWeight)
{
    Weight half = Weight::parse("piecewise 0,0.5,1 ; 1,0");
    try {
        continuous_constants({2, 2, 2}, one, one, half, unit);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_weight);
    }
    CharacterizationOptions opt;
    opt.allow_degenerate = true;
    EXPECT_NO_THROW(continuous_constants({2, 2, 2}, one, one, half, unit, opt));
}

TEST(Monotone, UnitWeightsAnchor)
{
    auto rep = monotone_constants(1, 1, one, one, one, unit);
    double want = oracle::grid_max([](double x) { return (1 - x) * (1 - x) / 2 / (1 - x); }, 0, 1);
    EXPECT_NEAR(want, 0.5, 1e-5);
    EXPECT_LE(oracle::rel(rep.at("calC1").value(), 0.5), 1e-6);
}

TEST(Monotone, AcceptsSmallP)
{
    auto rep = monotone_constants(0.5, 0.25, one, one, one, unit);
    EXPECT_EQ(rep.regime, Regime::II);
    EXPECT_TRUE(rep.finite);
    EXPECT_GT(rep.combined.value(), 0.0);
}

TEST(Monotone, VanishingW)
{
    for (auto [p, q] : {std::pair{1.0, 2.0}, {0.8, 0.5}, {2.0, 3.0}, {3.0, 2.0}}) {
        auto rep = monotone_constants(p, q, one, one, Weight::constant(0), unit);
        for (auto& [name, v] : rep.constants) EXPECT_EQ(v.value(), 0.0) << name;
    }
}

TEST(Monotone, VanishingVNearRightEnd)
{
    CharacterizationOptions opt;
    opt.allow_degenerate = true;
    auto rep = monotone_constants(1, 1, one, Weight::parse("piecewise 0,0.7,1 ; 1,0"), one, unit, opt);
    EXPECT_TRUE(rep.at("calC1").is_infinite());
    EXPECT_FALSE(rep.finite);
}

TEST(Local, Examples)
{
    double want = oracle::grid_max([](double t) { return std::sqrt((1 - t) * t); }, 0, 1);
    EXPECT_NEAR(want, 0.5, 1e-9);
    EXPECT_LE(oracle::rel(local_hardy_constant(2, 2, one, one, unit, Pos::lo(), Pos::hi()).value(), want), 1e-6);
    EXPECT_EQ(local_hardy_constant(2, 2, Weight::constant(0), one, unit, Pos::lo(), Pos::hi()).value(), 0.0);
    double i = oracle::integral([](double t) { return (1 - t) * t; }, 0, 1);
    EXPECT_LE(oracle::rel(local_hardy_constant(2, 1, one, one, unit, Pos::lo(), Pos::hi()).value(), std::sqrt(i)), 1e-8);
}

TEST(Local, ScalesWithInterval)
{
    // on an interval of length L with unit weights, p = q = 2 gives L/2
    for (double L : {0.5, 0.125, 1.0 / 1024}) {
        double got = local_hardy_constant(2, 2, one, one, unit, Pos::from_sc(L), Pos::hi()).value();
        EXPECT_LE(oracle::rel(got, L / 2), 1e-6) << L;
    }
}

TEST(Discrete, VanishingU)
{
    auto ds = build_discretizing_sequence(one, unit, 30);
    for (Exponents e : {Exponents{2, 2, 2}, Exponents{3, 4, 2}}) {
        auto rep = discrete_constants(e, Weight::constant(0), one, ds);
        for (auto& [name, v] : rep.constants) EXPECT_EQ(v.value(), 0.0) << name;
    }
}

TEST(Discrete, UnitWeightsDirectSummation)
{
    auto ds = build_discretizing_sequence(one, unit, 40);
    auto rep = discrete_constants({2, 2, 2}, one, one, ds);
    // x_k = 1 - 2^-k; B_k = (x_k - x_{k-1})/2 = 2^-(k+1)
    double A1 = 0.0, B1 = 0.0;
    for (int k = 1; k <= 200; ++k) A1 = std::max(A1, std::pow(2.0, -k / 2.0) * std::ldexp(1.0, -k - 1));
    for (int k = 0; k <= 200; ++k) {
        double T = 0.0;
        for (int i = k; i <= 400; ++i) T += std::ldexp(1.0, -i) * std::ldexp(1.0, -i - 1);
        B1 = std::max(B1, std::sqrt(T) * std::sqrt(1.0 - std::ldexp(1.0, -k)));
    }
    EXPECT_LE(oracle::rel(rep.at("A1").value(), A1), 1e-6);
    EXPECT_LE(oracle::rel(rep.at("B1").value(), B1), 1e-8);
    double ratio = rep.combined.value() / std::sqrt(2.0 / 27.0);
    EXPECT_GE(ratio, 1.0 / 256);
    EXPECT_LE(ratio, 256.0);
}

TEST(Discrete, SingleInterval)
{
    // the one-term sums are complete, so the tail share of 1 is expected
    CharacterizationOptions opt;
    opt.max_tail = 1.0;
    auto ds = build_discretizing_sequence(one, unit, 0);
    auto rep = discrete_constants({2, 2, 2}, one, one, ds, opt);
    double B = local_hardy_constant(2, 2, one, one, unit, Pos::lo(), Pos::hi()).value();
    EXPECT_LE(oracle::rel(rep.at("A1").value(), std::pow(2.0, -0.5) * B), 1e-12);
    EXPECT_EQ(rep.at("B1").value(), 0.0);
    auto rep2 = discrete_constants({3, 2, 2}, one, one, ds, opt);
    EXPECT_LE(oracle::rel(rep2.at("A4").value(), std::pow(2.0, -0.5) * local_hardy_constant(3, 2, one, one, unit, Pos::lo(), Pos::hi()).value()),
              1e-12);
}

TEST(Discrete, TruncationDominated)
{
    // shallow truncation with slowly decaying terms
    auto ds = build_discretizing_sequence(one, unit, 2);
    try {
        discrete_constants({3, 2, 1}, one, one, ds);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::truncation_dominated);
    }
}

namespace {

struct Scaling {
    double u, v, w;
};

// exponent of lambda picked up by the constants when one weight is scaled
Scaling continuous_scaling(const Exponents& e) { return {1.0 / e.q, -1.0 / e.p, 1.0 / e.r}; }

void expect_scaled(const ConditionReport& base, const ConditionReport& got, double factor, const std::string& tag)
{
    for (auto& [name, v] : base.constants) {
        double b = v.value();
        if (b == 0.0 || std::isinf(b)) {
            EXPECT_EQ(got.at(name).value(), b) << tag << " " << name;
            continue;
        }
        EXPECT_LE(oracle::rel(got.at(name).value(), b * factor), 1e-10) << tag << " " << name;
    }
}

} // namespace

TEST(Homogeneity, ContinuousFamily)
{
    std::mt19937_64 rng(41);
    for (Regime reg : {Regime::I, Regime::II, Regime::III, Regime::IV}) {
        auto c = family::random_power_config(reg, rng);
        auto base = continuous_constants(c.e, c.u, c.v, c.w, unit);
        Scaling s = continuous_scaling(c.e);
        for (double lam : {10.0, 1000.0}) {
            std::string tag = c.describe() + " lambda=" + std::to_string(lam);
            expect_scaled(base, continuous_constants(c.e, c.u.scaled(lam), c.v, c.w, unit), std::pow(lam, s.u), tag + " u");
            expect_scaled(base, continuous_constants(c.e, c.u, c.v.scaled(lam), c.w, unit), std::pow(lam, s.v), tag + " v");
            expect_scaled(base, continuous_constants(c.e, c.u, c.v, c.w.scaled(lam), unit), std::pow(lam, s.w), tag + " w");
        }
    }
}

TEST(Homogeneity, MonotoneFamily)
{
    Weight u = Weight::power(1, 0.3, -0.2), v = Weight::power(1, 0.1, 0.4), w = Weight::power(1, -0.4, 0.5);
    for (auto [p, q] : {std::pair{0.7, 1.5}, {0.9, 0.5}, {2.0, 3.0}, {3.0, 1.5}}) {
        auto base = monotone_constants(p, q, u, v, w, unit);
        for (double lam : {10.0, 1000.0}) {
            std::string tag = "p=" + std::to_string(p) + " q=" + std::to_string(q);
            expect_scaled(base, monotone_constants(p, q, u.scaled(lam), v, w, unit), lam, tag + " u");
            expect_scaled(base, monotone_constants(p, q, u, v.scaled(lam), w, unit), std::pow(lam, -1.0 / p), tag + " v");
            expect_scaled(base, monotone_constants(p, q, u, v, w.scaled(lam), unit), std::pow(lam, 1.0 / q), tag + " w");
        }
    }
}

TEST(Homogeneity, DiscreteFamily)
{
    Weight u = Weight::power(1, 0.3, -0.2), v = Weight::power(1, 0.1, 0.4), w = Weight::power(1, -0.4, 0.5);
    for (Exponents e : {Exponents{2, 2, 2}, Exponents{3, 4, 2}, Exponents{2, 1, 3}, Exponents{3, 2, 1.5}}) {
        auto ds = build_discretizing_sequence(w, unit, 40);
        auto base = discrete_constants(e, u, v, ds);
        for (double lam : {10.0, 1000.0}) {
            expect_scaled(base, discrete_constants(e, u.scaled(lam), v, ds), std::pow(lam, 1.0 / e.q), "u");
            expect_scaled(base, discrete_constants(e, u, v.scaled(lam), ds), std::pow(lam, -1.0 / e.p), "v");
        }
        // scaling w by 2^m shifts the ladder by m indices
        for (int m : {2, 5}) {
            auto ds2 = build_discretizing_sequence(w.scaled(std::ldexp(1.0, m)), unit, 40 + m);
            auto got = discrete_constants(e, u, v, ds2);
            for (auto& [name, b] : base.constants)
                EXPECT_LE(oracle::rel(got.at(name).value(), b.value() * std::pow(2.0, m / e.r)), 1e-6) << name << " m=" << m;
        }
    }
}

TEST(Monotonicity, EnlargingWeights)
{
    Weight u = Weight::power(1, 0.3, -0.2), v = Weight::power(1, 0.1, 0.4), w = Weight::power(1, -0.4, 0.5);
    auto bumped = [](const Weight& base) {
        return Weight::custom([base](double x) { return base(unit, x) * (1.0 + 2.0 * std::exp(-50.0 * (x - 0.4) * (x - 0.4))); });
    };
    for (Exponents e : {Exponents{2, 2, 2}, Exponents{3, 4, 2}, Exponents{2, 1, 3}, Exponents{3, 2, 1.5}}) {
        auto base = continuous_constants(e, u, v, w, unit);
        auto bu = continuous_constants(e, bumped(u), v, w, unit);
        auto bv = continuous_constants(e, u, bumped(v), w, unit);
        auto bw = continuous_constants(e, u, v, bumped(w), unit);
        for (auto& [name, c] : base.constants) {
            double x = c.value();
            EXPECT_GE(bu.at(name).value(), x * (1 - 1e-9)) << name;
            EXPECT_LE(bv.at(name).value(), x * (1 + 1e-9)) << name;
            EXPECT_GE(bw.at(name).value(), x * (1 - 1e-9)) << name;
        }
    }
}

TEST(Consistency, DiscreteAgreesWithContinuous)
{
    std::mt19937_64 rng(43);
    for (Regime reg : {Regime::I, Regime::II, Regime::III, Regime::IV}) {
        for (int i = 0; i < 2; ++i) {
            auto c = family::random_finite_power_config(reg, rng);
            double cont = continuous_constants(c.e, c.u, c.v, c.w, unit).combined.value();
            auto ds = build_discretizing_sequence(c.w, unit, 40);
            double disc = discrete_constants(c.e, c.u, c.v, ds).combined.value();
            double ratio = disc / cont;
            EXPECT_GE(ratio, 1.0 / 256) << c.describe();
            EXPECT_LE(ratio, 256.0) << c.describe();
        }
    }
}
