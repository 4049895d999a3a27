#ifndef FSOMM_MONTE_CARLO_HPP
#define FSOMM_MONTE_CARLO_HPP

#include <cstdint>
#include <random>

#include "fsomm/channels.hpp"
#include "fsomm/link_metrics.hpp"

namespace fsomm {

struct McConfig {
    std::uint64_t samples = 1000000;
    std::uint64_t seed = 1;
    int workers = 1;
};

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    std::uint64_t samples_used = 0;
};

// Deterministic substream generator for worker `stream_id` of a run
// keyed by `seed`; identical (seed, workers) reproduces every estimate
// bit for bit regardless of scheduling.
std::mt19937_64 mc_substream(std::uint64_t seed, std::uint64_t stream_id);

// One end-to-end SNR draw: AF fixed gain combines the two hop SNRs as
// gF*gR/(gR + c_r), DF takes the minimum.
double sample_end_to_end(const GammaGammaParams& gg, const FtrParams& ftr,
                         const RelayConfig& relay, std::mt19937_64& rng);

Estimate estimate_outage(const McConfig& cfg, const GammaGammaParams& gg,
                         const FtrParams& ftr, const RelayConfig& relay,
                         double gamma_th);

// Averages the conditional error rate delta/(2 Gamma(p)) sum_k Gamma(p, q_k g)
// instead of counting bit flips; same mean, far lower variance.
Estimate estimate_ber(const McConfig& cfg, const GammaGammaParams& gg,
                      const FtrParams& ftr, const RelayConfig& relay,
                      const ModulationScheme& mod);

Estimate estimate_capacity(const McConfig& cfg, const GammaGammaParams& gg,
                           const FtrParams& ftr, const RelayConfig& relay,
                           const CapacityMode& cap);

// Averages (1+g)^(-A) and transforms after averaging; the reported
// std_error is the delta-method propagation through -log2(.)/A.
Estimate estimate_effective_capacity(const McConfig& cfg,
                                     const GammaGammaParams& gg,
                                     const FtrParams& ftr,
                                     const RelayConfig& relay,
                                     const EffectiveCapacityParams& ec);

} // namespace fsomm

#endif
