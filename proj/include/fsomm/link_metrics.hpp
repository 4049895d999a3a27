#ifndef FSOMM_LINK_METRICS_HPP
#define FSOMM_LINK_METRICS_HPP

#include <functional>
#include <string>
#include <vector>

#include "fsomm/channels.hpp"
#include "fsomm/types.hpp"

namespace fsomm {

enum class RelayMode { af_fixed_gain, df };

struct RelayConfig {
    RelayMode mode = RelayMode::af_fixed_gain;
    double c_r = 1.7; // fixed relay gain, AF only
};

// Conditional bit error rate delta/(2 Gamma(p)) sum_k Gamma(p, q_k gamma).
struct ModulationScheme {
    double delta = 1.0;
    double p = 0.5;
    std::vector<double> q{1.0};
    int n = 1;

    static ModulationScheme cbpsk() { return {1.0, 0.5, {1.0}, 1}; }
    static ModulationScheme dbpsk() { return {1.0, 1.0, {1.0}, 1}; }
    void validate() const;
};

struct CapacityMode {
    double c = 1.0;
    // 1 for coherent detection, e/(2 pi) for intensity detection
    static CapacityMode for_detection(int r);
};

struct EffectiveCapacityParams {
    double A = 1.0; // normalized QoS exponent
};
EffectiveCapacityParams effective_capacity_params(double theta, double T,
                                                  double B);

struct AsymptoticTerm {
    double exponent = 0.0;    // decay exponent in the average SNR
    double coefficient = 0.0; // evaluated at the supplied threshold/scheme
};

struct AsymptoticExpansion {
    std::string domain;
    std::vector<AsymptoticTerm> terms;
};

// RF-hop CCDF hook for cross-checking the oracles against substitute
// second-hop models.
using RfCcdf = std::function<double(double)>;

// ---- end-to-end CDF ------------------------------------------------------

MetricResult af_cdf(const GammaGammaParams& gg, const FtrParams& ftr,
                    const RelayConfig& relay, double gamma,
                    const TruncationPolicy& trunc = {});
MetricResult af_cdf_oracle(const GammaGammaParams& gg, const FtrParams& ftr,
                           const RelayConfig& relay, double gamma,
                           const TruncationPolicy& trunc = {});
MetricResult af_cdf_oracle(const GammaGammaParams& gg, const RfCcdf& rf,
                           double c_r, double gamma);
MetricResult af_cdf_asymptotic(const GammaGammaParams& gg, const FtrParams& ftr,
                               const RelayConfig& relay, double gamma,
                               const TruncationPolicy& trunc = {},
                               AsymptoticExpansion* expansion = nullptr);

MetricResult df_cdf(const GammaGammaParams& gg, const FtrParams& ftr,
                    double gamma, const TruncationPolicy& trunc = {});
MetricResult df_cdf_oracle(const GammaGammaParams& gg, const FtrParams& ftr,
                           double gamma, const TruncationPolicy& trunc = {});
MetricResult df_cdf_asymptotic(const GammaGammaParams& gg, const FtrParams& ftr,
                               double gamma, const TruncationPolicy& trunc = {},
                               AsymptoticExpansion* expansion = nullptr);

// ---- metrics -------------------------------------------------------------

MetricResult outage(const GammaGammaParams& gg, const FtrParams& ftr,
                    const RelayConfig& relay, double gamma_th,
                    const TruncationPolicy& trunc = {});

MetricResult avg_ber(const GammaGammaParams& gg, const FtrParams& ftr,
                     const RelayConfig& relay, const ModulationScheme& mod,
                     const TruncationPolicy& trunc = {});
MetricResult avg_ber_oracle(const GammaGammaParams& gg, const FtrParams& ftr,
                            const RelayConfig& relay,
                            const ModulationScheme& mod,
                            const TruncationPolicy& trunc = {});
MetricResult avg_ber_asymptotic(const GammaGammaParams& gg,
                                const FtrParams& ftr, const RelayConfig& relay,
                                const ModulationScheme& mod,
                                const TruncationPolicy& trunc = {},
                                AsymptoticExpansion* expansion = nullptr);

double diversity_order(const GammaGammaParams& gg, const RelayConfig& relay);

MetricResult ergodic_capacity(const GammaGammaParams& gg, const FtrParams& ftr,
                              const RelayConfig& relay, const CapacityMode& cap,
                              const TruncationPolicy& trunc = {});
MetricResult ergodic_capacity_oracle(const GammaGammaParams& gg,
                                     const FtrParams& ftr,
                                     const RelayConfig& relay,
                                     const CapacityMode& cap,
                                     const TruncationPolicy& trunc = {});

MetricResult effective_capacity(const GammaGammaParams& gg,
                                const FtrParams& ftr, const RelayConfig& relay,
                                const EffectiveCapacityParams& ec,
                                const TruncationPolicy& trunc = {});
MetricResult effective_capacity_oracle(const GammaGammaParams& gg,
                                       const FtrParams& ftr,
                                       const RelayConfig& relay,
                                       const EffectiveCapacityParams& ec,
                                       const TruncationPolicy& trunc = {});

// RF-pluggable AF oracle variants (reduction cross-checks)
MetricResult avg_ber_oracle(const GammaGammaParams& gg, const RfCcdf& rf,
                            double c_r, const ModulationScheme& mod);
MetricResult ergodic_capacity_oracle(const GammaGammaParams& gg,
                                     const RfCcdf& rf, double c_r,
                                     const CapacityMode& cap);
MetricResult effective_capacity_oracle(const GammaGammaParams& gg,
                                       const RfCcdf& rf, double c_r,
                                       const EffectiveCapacityParams& ec);

} // namespace fsomm

#endif
