#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "fsomm/channels.hpp"
#include "fsomm/specfun.hpp"

using namespace fsomm;

namespace {

// empirical-vs-analytic KS statistic on a log grid covering the sample range
template <typename Cdf>
double ks_grid(std::vector<double>& samples, Cdf&& cdf, int grid = 2000) {
    std::sort(samples.begin(), samples.end());
    double lo = std::log(samples[samples.size() / 1000 + 1]);
    double hi = std::log(samples[samples.size() - samples.size() / 1000 - 2]);
    double d = 0.0;
    for (int i = 0; i <= grid; ++i) {
        double g = std::exp(lo + (hi - lo) * i / grid);
        auto it = std::upper_bound(samples.begin(), samples.end(), g);
        double emp = double(it - samples.begin()) / double(samples.size());
        d = std::max(d, std::abs(emp - cdf(g)));
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

} // namespace

TEST_CASE("rytov variance and alpha/beta fit") {
    RytovInputs in;
    in.cn2 = 5e-14;
    in.path_m = 2000.0;
    in.wavelength_m = 1550e-9;
    double s2 = rytov_variance(in);
    double expect = 1.23 * std::pow(2.0 * M_PI / in.wavelength_m, 7.0 / 6.0) *
                    in.cn2 * std::pow(in.path_m, 11.0 / 6.0);
    CHECK(s2 == doctest::Approx(expect).epsilon(1e-12));

    // frozen high-precision values at sigma_R^2 = 1
    in.cn2 = expect > 0 ? in.cn2 / s2 : in.cn2; // rescale so variance = 1
    CHECK(rytov_variance(in) == doctest::Approx(1.0).epsilon(1e-12));
    auto [a1, b1] = rytov_to_alpha_beta(in);
    CHECK(a1 == doctest::Approx(4.393859025392146786952).epsilon(1e-12));
    CHECK(b1 == doctest::Approx(2.563631979503694950581).epsilon(1e-12));

    // alpha, beta positive everywhere, growing as turbulence weakens
    double prev_a = 0.0, prev_b = 0.0;
    for (double scale : {100.0, 1.0, 0.01, 1e-4}) {
        RytovInputs w = in;
        w.cn2 = in.cn2 * scale;
        auto [a, b] = rytov_to_alpha_beta(w);
        CHECK(a > 0.0);
        CHECK(b > 0.0);
        if (scale < 2.0) { // the fit is non-monotone deep in saturation
            CHECK(a > prev_a);
            CHECK(b > prev_b);
            prev_a = a;
            prev_b = b;
        }
    }
}

TEST_CASE("gamma-gamma electrical SNR mapping") {
    double gb = 250.0;
    auto p1 = make_gamma_gamma(5.42, 3.8, 5.0263, 1, gb);
    CHECK(p1.mu_r == doctest::Approx(gb));
    auto p2 = make_gamma_gamma(5.42, 3.8, 5.0263, 2, gb);
    double x2 = 5.0263 * 5.0263;
    double expect = gb * 5.42 * 3.8 * x2 * (x2 + 2.0) /
                    (6.42 * 4.8 * (x2 + 1.0) * (x2 + 1.0));
    CHECK(p2.mu_r == doctest::Approx(expect).epsilon(1e-12));
    CHECK_THROWS(make_gamma_gamma(-1.0, 3.8, 5.0, 1, gb));
    CHECK_THROWS(make_gamma_gamma(5.42, 3.8, 5.0, 3, gb));
}

TEST_CASE("gg pdf/cdf consistency") {
    auto p = make_gamma_gamma(5.42, 3.8, 5.0263, 1, 10.0);
    CHECK(gg_cdf(p, 0.0) == 0.0);
    boost::math::quadrature::exp_sinh<double> integrator;
    double mass = integrator.integrate([&](double g) { return gg_pdf(p, g); },
                                       1e-9);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

    double g0 = p.mu_r, h = 1e-4 * g0;
    double fd = (gg_cdf(p, g0 + h) - gg_cdf(p, g0 - h)) / (2.0 * h);
    CHECK(fd == doctest::Approx(gg_pdf(p, g0)).epsilon(1e-5));

    double prev = 0.0;
    for (double db = -30.0; db <= 30.0; db += 2.0) {
        double F = gg_cdf(p, p.mu_r * std::pow(10.0, db / 10.0));
        CHECK(F >= prev - 1e-9);
        CHECK(gg_pdf(p, p.mu_r * std::pow(10.0, db / 10.0)) >= 0.0);
        prev = F;
    }
    CHECK(prev > 1.0 - 1e-6);
}

TEST_CASE("gg sampler matches the analytic CDF") {
    auto p = make_gamma_gamma(5.42, 3.8, 5.0263, 1, 4.0);
    std::mt19937_64 rng(2024);
    std::vector<double> s(1000000);
    for (auto& v : s) {
        v = gg_sample(p, rng);
        CHECK(v > 0.0);
    }
    double d = ks_grid(s, [&](double g) { return gg_cdf(p, g); });
    CHECK(d < 0.002);
}

TEST_CASE("canonical vs product-form sampler") {
    auto p = make_gamma_gamma(5.42, 3.8, 5.0263, 1, 1.0);
    std::mt19937_64 rng(7);
    std::vector<double> a(100000), b(100000);
    for (auto& v : a) v = gg_sample(p, rng);
    for (auto& v : b) v = gg_sample_product(p, rng);
    // 1.63 sqrt(2/n): two-sample rejection level near alpha = 0.01
    CHECK(ks_two_sample(a, b) < 0.0075);
}

TEST_CASE("pointing sentinel matches product-form sampler") {
    auto p = make_gamma_gamma(4.0, 2.2, 0.0, 2, 3.0); // xi <= 0: no pointing
    CHECK(!p.has_pointing());
    std::mt19937_64 rng(8);
    std::vector<double> a(100000), b(100000);
    for (auto& v : a) v = gg_sample(p, rng);
    for (auto& v : b) v = gg_sample_product(p, rng);
    CHECK(ks_two_sample(a, b) < 0.0075);
}

TEST_CASE("ftr d_j closed cases and frozen value") {
    // m = 1 collapses the Legendre sum: d_0 = ((1+K)^2 - (K Delta)^2)^(-1/2)
    for (double K : {0.5, 4.0, 12.0}) {
        double expect = 1.0 / std::sqrt((1.0 + K) * (1.0 + K) -
                                        K * 0.6 * K * 0.6);
        CHECK(ftr_d_j(1.0, K, 0.6, 0) == doctest::Approx(expect).epsilon(1e-11));
    }
    // K = 0: d_0 = Gamma(m) m^{-m}
    for (double m : {0.3, 2.0, 8.5})
        CHECK(ftr_d_j(m, 0.0, 0.4, 0) ==
              doctest::Approx(std::tgamma(m) * std::pow(m, -m)).epsilon(1e-11));
    // frozen arbitrary-precision value of the finite double sum
    CHECK(ftr_d_j(2.0, 10.0, 0.5, 5) ==
          doctest::Approx(2.037611996707753475717e-5).epsilon(1e-10));
    // large-j integral path consistent with the double sum at the boundary
    for (int j : {20, 23, 25}) {
        double lo = ftr_log_d_j(2.0, 10.0, 0.5, j);
        CHECK(std::isfinite(lo));
    }
}

TEST_CASE("ftr weight normalization identities") {
    FtrParams p = make_ftr(2.0, 10.0, 0.5, 1.0);
    TruncationPolicy tp;
    tp.target_deficit = 1e-10;
    tp.hard_cap = 2000;
    auto lw = ftr_log_weights(p, tp);
    double sum = 0.0, first_moment = 0.0, prev_sum = 0.0;
    for (size_t j = 0; j < lw.size(); ++j) {
        double w = std::exp(lw[j]);
        CHECK(w >= 0.0);
        sum += w;
        CHECK(sum >= prev_sum);
        prev_sum = sum;
        first_moment += w * (j + 1.0);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(first_moment == doctest::Approx(1.0 + p.K).epsilon(1e-5));
}

TEST_CASE("ftr required terms") {
    FtrParams p = make_ftr(2.0, 10.0, 0.5, 1.0);
    auto [n3, e3] = ftr_required_terms(p, 1e-3);
    CHECK(n3 == 61);
    CHECK(e3 == doctest::Approx(9.142e-4).epsilon(1e-3));
    auto [n5, e5] = ftr_required_terms(p, 1e-5);
    CHECK(n5 == 99);
    CHECK(e5 < 1e-5);
    CHECK(n5 > n3);

    auto [na, ea] = ftr_required_terms(make_ftr(0.3, 10.0, 0.5, 1.0), 1e-3);
    CHECK(na == 183);
    auto [nb, eb] = ftr_required_terms(make_ftr(8.5, 5.0, 0.35, 1.0), 1e-3);
    CHECK(nb == 19);
    CHECK_THROWS(ftr_required_terms(p, 0.0));
}

TEST_CASE("ftr pdf/cdf basics") {
    FtrParams p = make_ftr(2.0, 10.0, 0.5, 5.0);
    CHECK(ftr_cdf(p, 0.0) == 0.0);
    // K = 0 reduces to the exponential density exactly
    FtrParams e = make_ftr(1.7, 0.0, 0.3, 5.0);
    for (double g : {0.1, 1.0, 4.0, 20.0}) {
        double expect = std::exp(-g / (2.0 * e.sigma2)) / (2.0 * e.sigma2);
        CHECK(std::abs(ftr_pdf(e, g) - expect) < 1e-10);
    }

    boost::math::quadrature::exp_sinh<double> integrator;
    TruncationPolicy tp;
    double mass = integrator.integrate([&](double g) { return ftr_pdf(p, g); },
                                       1e-9);
    auto [n, deficit] = ftr_required_terms(p, tp.target_deficit);
    CHECK(std::abs(mass - 1.0) <= std::max(deficit, 1e-6) * 1.5);

    double prev = 0.0;
    for (double db = -30.0; db <= 30.0; db += 2.0) {
        double g = p.gamma_bar() * std::pow(10.0, db / 10.0);
        double F = ftr_cdf(p, g);
        CHECK(F >= prev);
        CHECK(ftr_pdf(p, g) >= 0.0);
        prev = F;
    }
    CHECK(prev > 1.0 - 1e-4);
}

TEST_CASE("ftr sampler matches the analytic CDF") {
    FtrParams p = make_ftr(2.0, 10.0, 0.5, 3.0);
    std::mt19937_64 rng(5150);
    std::vector<double> s(1000000);
    double mean = 0.0;
    for (auto& v : s) {
        v = ftr_sample(p, rng);
        mean += v;
    }
    mean /= double(s.size());
    // mean against the declared average SNR, 3 standard errors
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    double se = std::sqrt(var / (double(s.size()) - 1.0) / double(s.size()));
    CHECK(std::abs(mean - p.gamma_bar()) < 3.0 * se);

    double d = ks_grid(s, [&](double g) { return ftr_cdf(p, g); });
    CHECK(d < 0.002);
}

TEST_CASE("ftr near-Nakagami trend at large K, Delta = 0") {
    FtrParams p = make_ftr(2.0, 50.0, 0.0, 2.0);
    TruncationPolicy tp;
    tp.hard_cap = 400;
    std::mt19937_64 rng(99);
    std::vector<double> s(200000);
    for (auto& v : s) v = ftr_sample(p, rng);
    double d = ks_grid(s, [&](double g) { return ftr_cdf(p, g, tp); }, 800);
    CHECK(d < 0.01);
}
