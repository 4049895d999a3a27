#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fsomm/channels.hpp"
#include "fsomm/link_metrics.hpp"
#include "fsomm/monte_carlo.hpp"

using namespace fsomm;

namespace {

const RelayConfig kAf{RelayMode::af_fixed_gain, 1.7};
const RelayConfig kDf{RelayMode::df, 0.0};

GammaGammaParams gg10() { return make_gamma_gamma(5.42, 3.8, 5.0263, 1, 10.0); }
FtrParams ftr10() { return make_ftr(2.0, 10.0, 0.5, 10.0); }

} // namespace

TEST_CASE("substreams are decorrelated and reproducible") {
    auto a = mc_substream(1, 0);
    auto b = mc_substream(1, 0);
    CHECK(a() == b());
    auto c = mc_substream(1, 1);
    auto d = mc_substream(2, 0);
    CHECK(a() != c());
    CHECK(b() != d());
}

TEST_CASE("end-to-end sample respects the relaying bounds") {
    auto gg = gg10();
    auto ftr = ftr10();
    auto rng = mc_substream(7, 0);
    const GgSampler& fso = gg_sampler_cached(gg);
    for (int i = 0; i < 2000; ++i) {
        auto af_rng = rng, df_rng = rng;
        double gf = gg.mu_r * fso.draw(rng);
        double gr = ftr_sample(ftr, rng);
        double g_af = sample_end_to_end(gg, ftr, kAf, af_rng);
        double g_df = sample_end_to_end(gg, ftr, kDf, df_rng);
        CHECK(g_af == doctest::Approx(gf * gr / (gr + kAf.c_r)).epsilon(1e-12));
        CHECK(g_df == doctest::Approx(std::min(gf, gr)).epsilon(1e-12));
        CHECK(g_af <= gf * (1.0 + 1e-12));
    }
}

TEST_CASE("estimates are bit-identical for a fixed seed") {
    McConfig cfg;
    cfg.samples = 50000;
    cfg.seed = 11;
    auto e1 = estimate_outage(cfg, gg10(), ftr10(), kAf, 1.0);
    auto e2 = estimate_outage(cfg, gg10(), ftr10(), kAf, 1.0);
    CHECK(e1.mean == e2.mean);
    CHECK(e1.std_error == e2.std_error);
    CHECK(e1.samples_used == cfg.samples);

    cfg.seed = 12;
    auto e3 = estimate_outage(cfg, gg10(), ftr10(), kAf, 1.0);
    CHECK(e1.mean != e3.mean);
}

TEST_CASE("worker split is deterministic and statistically consistent") {
    McConfig one;
    one.samples = 40000;
    one.seed = 3;
    one.workers = 1;
    McConfig four = one;
    four.workers = 4;
    auto a = estimate_ber(one, gg10(), ftr10(), kDf, ModulationScheme::dbpsk());
    auto b = estimate_ber(four, gg10(), ftr10(), kDf, ModulationScheme::dbpsk());
    auto b2 = estimate_ber(four, gg10(), ftr10(), kDf, ModulationScheme::dbpsk());
    CHECK(b.mean == b2.mean);
    CHECK(b.std_error == b2.std_error);
    // different substream layout, same distribution
    CHECK(std::abs(a.mean - b.mean) <
          4.0 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("standard error scales with the sample count") {
    McConfig small;
    small.samples = 20000;
    small.seed = 21;
    McConfig big = small;
    big.samples = 80000;
    auto es = estimate_capacity(small, gg10(), ftr10(), kAf,
                                CapacityMode::for_detection(1));
    auto eb = estimate_capacity(big, gg10(), ftr10(), kAf,
                                CapacityMode::for_detection(1));
    double ratio = es.std_error / eb.std_error;
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.4);
}

TEST_CASE("estimates agree with the analytic values within 3 sigma") {
    McConfig cfg;
    cfg.samples = 200000;
    cfg.seed = 5;
    auto gg = gg10();
    auto ftr = ftr10();

    for (const auto& relay : {kAf, kDf}) {
        auto mo = estimate_outage(cfg, gg, ftr, relay, 1.0);
        double oo = outage(gg, ftr, relay, 1.0).value;
        CHECK(std::abs(mo.mean - oo) < 3.0 * mo.std_error);
        CHECK(mo.ci95_low < oo);
        CHECK(mo.ci95_high > oo);

        auto mb = estimate_ber(cfg, gg, ftr, relay, ModulationScheme::dbpsk());
        double ob = avg_ber(gg, ftr, relay, ModulationScheme::dbpsk()).value;
        CHECK(std::abs(mb.mean - ob) < 3.0 * mb.std_error);

        auto mc = estimate_capacity(cfg, gg, ftr, relay,
                                    CapacityMode::for_detection(1));
        double oc = ergodic_capacity_oracle(gg, ftr, relay,
                                            CapacityMode::for_detection(1))
                        .value;
        CHECK(std::abs(mc.mean - oc) < 3.0 * mc.std_error);

        auto me = estimate_effective_capacity(cfg, gg, ftr, relay, {1.0});
        double oe = effective_capacity(gg, ftr, relay, {1.0}).value;
        CHECK(std::abs(me.mean - oe) < 3.0 * me.std_error);
    }
}

TEST_CASE("configuration validation") {
    McConfig bad;
    bad.samples = 0;
    CHECK_THROWS_AS(estimate_outage(bad, gg10(), ftr10(), kAf, 1.0),
                    std::domain_error);
    McConfig neg;
    neg.workers = 0;
    CHECK_THROWS_AS(estimate_outage(neg, gg10(), ftr10(), kAf, 1.0),
                    std::domain_error);
}
