#include "fsomm/monte_carlo.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "fsomm/specfun.hpp"

namespace fsomm {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void check_config(const McConfig& cfg) {
    if (cfg.samples == 0)
        throw std::domain_error("monte_carlo: samples must be positive");
    if (cfg.workers <= 0)
        throw std::domain_error("monte_carlo: workers must be positive");
}

struct WorkerSums {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::uint64_t n = 0;
};

// Runs cfg.samples draws of fn split across cfg.workers substreams and
// merges the per-worker sums in stream order.
template <class Fn>
WorkerSums accumulate(const McConfig& cfg, const GammaGammaParams& gg,
                      const FtrParams& ftr, const RelayConfig& relay,
                      Fn&& fn) {
    check_config(cfg);
    // warm the shared inverse-CDF table before the threads race for it
    const GgSampler& fso = gg_sampler_cached(gg);
    int workers = int(std::min<std::uint64_t>(cfg.workers, cfg.samples));
    std::vector<WorkerSums> parts(workers);
    auto run = [&](int w) {
        std::uint64_t n = cfg.samples / workers +
                          (std::uint64_t(w) < cfg.samples % workers ? 1 : 0);
        std::mt19937_64 rng = mc_substream(cfg.seed, std::uint64_t(w));
        double s = 0.0, s2 = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) {
            double gf = gg.mu_r * fso.draw(rng);
            double gr = ftr_sample(ftr, rng);
            double g = relay.mode == RelayMode::af_fixed_gain
                           ? gf * gr / (gr + relay.c_r)
                           : std::min(gf, gr);
            double v = fn(g);
            s += v;
            s2 += v * v;
        }
        parts[w] = {s, s2, n};
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }
    WorkerSums total;
    for (const auto& p : parts) {
        total.sum += p.sum;
        total.sum_sq += p.sum_sq;
        total.n += p.n;
    }
    return total;
}

Estimate from_sums(const WorkerSums& t) {
    Estimate e;
    e.samples_used = t.n;
    e.mean = t.sum / double(t.n);
    double var = 0.0;
    if (t.n > 1) {
        var = (t.sum_sq - t.sum * t.sum / double(t.n)) / double(t.n - 1);
        var = std::max(var, 0.0);
    }
    e.std_error = std::sqrt(var / double(t.n));
    e.ci95_low = e.mean - 1.96 * e.std_error;
    e.ci95_high = e.mean + 1.96 * e.std_error;
    return e;
}

} // namespace

std::mt19937_64 mc_substream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t state = seed;
    std::uint64_t a = splitmix64(state);
    state ^= 0xd1342543de82ef95ULL * (stream_id + 1);
    std::uint64_t b = splitmix64(state);
    return std::mt19937_64(a ^ b);
}

double sample_end_to_end(const GammaGammaParams& gg, const FtrParams& ftr,
                         const RelayConfig& relay, std::mt19937_64& rng) {
    double gf = gg_sample(gg, rng);
    double gr = ftr_sample(ftr, rng);
    if (relay.mode == RelayMode::af_fixed_gain)
        return gf * gr / (gr + relay.c_r);
    return std::min(gf, gr);
}

Estimate estimate_outage(const McConfig& cfg, const GammaGammaParams& gg,
                         const FtrParams& ftr, const RelayConfig& relay,
                         double gamma_th) {
    if (gamma_th <= 0.0)
        throw std::domain_error("estimate_outage: gamma_th must be positive");
    WorkerSums t = accumulate(cfg, gg, ftr, relay, [gamma_th](double g) {
        return g < gamma_th ? 1.0 : 0.0;
    });
    Estimate e;
    e.samples_used = t.n;
    e.mean = t.sum / double(t.n);
    e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / double(t.n));
    e.ci95_low = e.mean - 1.96 * e.std_error;
    e.ci95_high = e.mean + 1.96 * e.std_error;
    return e;
}

Estimate estimate_ber(const McConfig& cfg, const GammaGammaParams& gg,
                      const FtrParams& ftr, const RelayConfig& relay,
                      const ModulationScheme& mod) {
    mod.validate();
    double half_delta = 0.5 * mod.delta;
    WorkerSums t = accumulate(cfg, gg, ftr, relay, [&](double g) {
        double pe = 0.0;
        for (double qk : mod.q) pe += reg_gamma_q(mod.p, qk * g);
        return half_delta * pe;
    });
    return from_sums(t);
}

Estimate estimate_capacity(const McConfig& cfg, const GammaGammaParams& gg,
                           const FtrParams& ftr, const RelayConfig& relay,
                           const CapacityMode& cap) {
    double c = cap.c;
    if (c <= 0.0)
        throw std::domain_error("estimate_capacity: c must be positive");
    WorkerSums t = accumulate(cfg, gg, ftr, relay, [c](double g) {
        return std::log2(1.0 + c * g);
    });
    return from_sums(t);
}

Estimate estimate_effective_capacity(const McConfig& cfg,
                                     const GammaGammaParams& gg,
                                     const FtrParams& ftr,
                                     const RelayConfig& relay,
                                     const EffectiveCapacityParams& ec) {
    double A = ec.A;
    if (A <= 0.0)
        throw std::domain_error(
            "estimate_effective_capacity: A must be positive");
    WorkerSums t = accumulate(cfg, gg, ftr, relay, [A](double g) {
        return std::pow(1.0 + g, -A);
    });
    Estimate raw = from_sums(t);
    Estimate e;
    e.samples_used = raw.samples_used;
    e.mean = -std::log2(raw.mean) / A;
    e.std_error = raw.std_error / (raw.mean * A * std::log(2.0));
    e.ci95_low = e.mean - 1.96 * e.std_error;
    e.ci95_high = e.mean + 1.96 * e.std_error;
    return e;
}

} // namespace fsomm
