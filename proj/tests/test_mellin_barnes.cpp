#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fsomm/mellin_barnes.hpp"
#include "fsomm/specfun.hpp"

using namespace fsomm;

namespace {

FoxHSpec exp_spec() {
    FoxHSpec s;
    s.m = 1; s.n = 0; s.p = 0; s.q = 1;
    s.lower = {{0.0, 1.0}};
    return s;
}

FoxHSpec cauchy_spec() {
    FoxHSpec s;
    s.m = 1; s.n = 1; s.p = 1; s.q = 1;
    s.upper = {{0.0, 1.0}};
    s.lower = {{0.0, 1.0}};
    return s;
}

// CDF-type kernel of the optical hop, the workhorse shape of the library
FoxHSpec gg_cdf_spec(double alpha, double beta, double xi2, double r) {
    FoxHSpec s;
    s.m = 3; s.n = 1; s.p = 2; s.q = 4;
    s.upper = {{1.0, 1.0}, {xi2 + 1.0, r}};
    s.lower = {{xi2, r}, {alpha, r}, {beta, r}, {0.0, 1.0}};
    return s;
}

} // namespace

TEST_CASE("fox_h exponential reduction") {
    for (double z : {0.3, 1.0, 2.5}) {
        auto res = fox_h(exp_spec(), z);
        CHECK(res.value == doctest::Approx(std::exp(-z)).epsilon(1e-10));
        CHECK(res.err_estimate < 1e-8);
    }
}

TEST_CASE("fox_h Cauchy-kernel reduction") {
    auto res = fox_h(cauchy_spec(), 3.0);
    CHECK(res.value == doctest::Approx(0.25).epsilon(1e-10));
    for (double z : {0.1, 0.9, 7.0})
        CHECK(fox_h(cauchy_spec(), z).value ==
              doctest::Approx(1.0 / (1.0 + z)).epsilon(1e-10));
}

TEST_CASE("meijer_g reductions") {
    CHECK(meijer_g(exp_spec(), 2.0).value ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
    // per-term mmWave CDF complement at the first mixture index
    FoxHSpec g;
    g.m = 2; g.n = 0; g.p = 1; g.q = 2;
    g.upper = {{1.0, 1.0}};
    g.lower = {{0.0, 1.0}, {1.0, 1.0}};
    CHECK(meijer_g(g, 1.0).value ==
          doctest::Approx(0.367879441171442321596).epsilon(1e-9));
}

TEST_CASE("fox_h equals meijer_g for unit exponents") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> zd(0.05, 5.0);
    for (int i = 0; i < 50; ++i) {
        double z = zd(rng);
        const FoxHSpec s = i % 2 ? exp_spec() : cauchy_spec();
        double a = fox_h(s, z).value;
        double b = meijer_g(s, z).value;
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("feasibility checks") {
    FoxHSpec s = cauchy_spec();
    s.upper = {{2.0, 1.0}}; // poles of G(1 - a + s) start at s = 1
    s.lower = {{3.0, 1.0}}; // poles of G(b - s) start at s = 3
    CHECK_NOTHROW(fox_h(s, 1.0));
    FoxHSpec bad = cauchy_spec();
    bad.upper = {{4.0, 1.0}}; // right poles now start at s = 3: no window
    bad.lower = {{1.0, 1.0}};
    CHECK_THROWS(fox_h(bad, 1.0));
    FoxHSpec neg = exp_spec();
    neg.lower = {{0.0, -1.0}};
    CHECK_THROWS(fox_h(neg, 1.0));
}

TEST_CASE("node doubling stays inside the reported error") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ad(1.2, 6.0), bd(0.9, 4.0),
        xd(0.8, 26.0), zd(-3.0, 2.0);
    for (int i = 0; i < 40; ++i) {
        FoxHSpec s = gg_cdf_spec(ad(rng), bd(rng), xd(rng),
                                 i % 2 ? 2.0 : 1.0);
        double z = std::pow(10.0, zd(rng));
        ContourSpec coarse, fine;
        coarse.nodes_per_unit = 16;
        fine.nodes_per_unit = 32;
        auto r1 = fox_h(s, z, coarse);
        auto r2 = fox_h(s, z, fine);
        CHECK(std::abs(r1.value - r2.value) <=
              std::max(2.0 * r1.err_estimate, 1e-13 * std::abs(r1.value)));
    }
}

TEST_CASE("separable bivariate evaluation equals the univariate product") {
    BivariateFoxHSpec s;
    s.joint = {};
    // e^{-x} kernel in s, 1/(1+y) kernel in t
    s.s_kernel = {{0.0, -1.0, 0.0, true}};
    s.t_kernel = {{0.0, 0.0, -1.0, true}, {1.0, 0.0, 1.0, true}};
    for (double x : {0.4, 1.3}) {
        for (double y : {0.2, 2.0}) {
            auto r = fox_h2(s, x, y);
            double expect = std::exp(-x) * (1.0 / (1.0 + y));
            CHECK(r.value == doctest::Approx(expect).epsilon(1e-8));
        }
    }
}

TEST_CASE("bivariate value continuous and monotone in y") {
    // AF CDF integrand family: fixed s-kernel, y-kernel of the optical hop
    BivariateFoxHSpec s;
    double alpha = 5.42, beta = 3.8, xi2 = 5.0263 * 5.0263, r = 1.0;
    s.joint = {{0.0, 1.0, 1.0 / r, true}};
    s.s_kernel = {{0.0, -1.0, 0.0, true}, {1.0, 1.0, 0.0, true},
                  {2.0, 1.0, 0.0, false}};
    s.t_kernel = {{xi2, 0.0, 1.0, true},    {alpha, 0.0, 1.0, true},
                  {beta, 0.0, 1.0, true},   {xi2 + 1.0, 0.0, 1.0, false},
                  {1.0, 0.0, 1.0 / r, false}};
    std::vector<double> vals;
    double x = 1.7 / 2.0;
    for (int i = 0; i <= 20; ++i) {
        double y = 0.05 * std::pow(10.0, i / 20.0);
        auto res = fox_h2(s, x, y);
        CHECK(std::isfinite(res.value));
        vals.push_back(res.value);
    }
    bool up = true, down = true;
    double span = std::abs(vals.back() - vals.front());
    for (size_t i = 1; i < vals.size(); ++i) {
        if (vals[i] < vals[i - 1] - 1e-9 * span) up = false;
        if (vals[i] > vals[i - 1] + 1e-9 * span) down = false;
    }
    CHECK((up || down));
}

TEST_CASE("fox_h2_series matches term-by-term evaluation") {
    BivariateFoxHSpec base;
    double alpha = 5.42, beta = 3.8, r = 1.0;
    base.joint = {{0.0, 1.0, 1.0 / r, true}};
    base.s_kernel = {{0.0, -1.0, 0.0, true}};
    base.t_kernel = {{alpha, 0.0, 1.0, true},
                     {beta, 0.0, 1.0, true},
                     {1.0, 0.0, 1.0 / r, false}};
    GammaFactor per_j{1.0, -1.0, 0.0, true};
    std::vector<double> log_pref{-0.3, -1.1, -2.4};
    double x = 0.8, y = 0.35;
    auto series = fox_h2_series(base, per_j, log_pref, x, y);
    double manual = 0.0;
    for (size_t j = 0; j < log_pref.size(); ++j) {
        BivariateFoxHSpec one = base;
        one.s_kernel.push_back({1.0 + double(j), -1.0, 0.0, true});
        manual += std::exp(log_pref[j]) * fox_h2(one, x, y).value;
    }
    CHECK(series.value == doctest::Approx(manual).epsilon(1e-7));
    CHECK(series.series_terms_used == 3);
}

TEST_CASE("scaled evaluation consistency") {
    FoxHSpec s = gg_cdf_spec(5.42, 3.8, 25.26, 1.0);
    for (double z : {0.01, 1.0, 40.0}) {
        auto plain = fox_h(s, z);
        auto sc = fox_h_scaled(s, z);
        CHECK(sc.mantissa * std::exp(sc.log_scale) ==
              doctest::Approx(plain.value).epsilon(1e-10));
    }
}
