#ifndef FSOMM_CHANNELS_HPP
#define FSOMM_CHANNELS_HPP

#include <cmath>
#include <random>
#include <utility>
#include <vector>

namespace fsomm {

// Optical hop: Gamma-Gamma turbulence with zero-boresight pointing error.
// xi2 = infinity disables the pointing-error factor entirely.
struct GammaGammaParams {
    double alpha = 0.0;
    double beta = 0.0;
    double xi2 = std::numeric_limits<double>::infinity();
    int r = 1;          // 1 = coherent detection, 2 = intensity detection
    double mu_r = 0.0;  // SNR scale of the r-th power of the irradiance

    bool has_pointing() const { return std::isfinite(xi2); }
};

// Builds parameters from the average-SNR knob; xi <= 0 or infinite xi
// selects the no-pointing-error model.
GammaGammaParams make_gamma_gamma(double alpha, double beta, double xi, int r,
                                  double gamma_bar);

struct RytovInputs {
    double cn2 = 0.0;          // refractive-index structure constant, m^(-2/3)
    double path_m = 0.0;       // link distance, m
    double wavelength_m = 0.0; // optical wavelength, m
};

double rytov_variance(const RytovInputs& in);
// Plane-wave scintillation fit mapping Rytov variance to (alpha, beta).
std::pair<double, double> rytov_to_alpha_beta(const RytovInputs& in);

double gg_pdf(const GammaGammaParams& p, double gamma);
double gg_cdf(const GammaGammaParams& p, double gamma);

// Canonical sampler: inverse-CDF lookup through a precomputed monotone
// table over the normalized variable u = gamma / mu_r, with power-law
// extrapolation below the table and clamping above it.
class GgSampler {
  public:
    explicit GgSampler(const GammaGammaParams& p);
    double draw(std::mt19937_64& rng) const;

  private:
    double mu_r_;
    double low_exp_;
    std::vector<double> log_u_;
    std::vector<double> cdf_;
};

// Convenience wrapper over GgSampler with an internal table cache.
double gg_sample(const GammaGammaParams& p, std::mt19937_64& rng);
// Shared unit-scale sampler from the same cache; draw() is const and safe
// to call concurrently, results must be scaled by mu_r.
const GgSampler& gg_sampler_cached(const GammaGammaParams& p);
// Independent generative sampler: product of unit-mean Gamma variates
// and a pointing-loss factor, power-mapped by r. Cross-validation only.
double gg_sample_product(const GammaGammaParams& p, std::mt19937_64& rng);

// Millimeter-wave hop: fluctuating two-ray fading.
struct FtrParams {
    double m = 0.0;      // shadowing severity
    double K = 0.0;      // specular-to-diffuse power ratio
    double Delta = 0.0;  // specular amplitude similarity, in [0, 1]
    double sigma2 = 0.0; // diffuse per-component variance (SNR units)

    double gamma_bar() const { return 2.0 * sigma2 * (1.0 + K); }
};

FtrParams make_ftr(double m, double K, double Delta, double gamma_bar);

// log d_j: coefficient of the Gamma-mixture expansion of the FTR SNR
// density. Finite double sum for small j, equivalent positive-integrand
// quadrature form for large j where the sum cancels catastrophically.
double ftr_log_d_j(double m, double K, double Delta, int j);
double ftr_d_j(double m, double K, double Delta, int j);

// log of mixture weight w_j; sum_j w_j = 1 and sum_j w_j (j+1) = 1 + K.
double ftr_log_weight(const FtrParams& p, int j);

// Smallest index N such that the truncated-mixture normalization
// deficit 1 - sum_{j<=N} w_j drops below epsilon; returns (N, achieved).
std::pair<int, double> ftr_required_terms(const FtrParams& p, double epsilon,
                                          int scan_cap = 100000);

struct TruncationPolicy {
    int fixed_terms = 0;          // > 0 forces this many terms exactly
    double target_deficit = 1e-6; // otherwise stop once tail mass is below this
    int hard_cap = 200;
};

// Truncated log weights per policy (size = number of retained terms).
std::vector<double> ftr_log_weights(const FtrParams& p,
                                    const TruncationPolicy& policy = {});

double ftr_pdf(const FtrParams& p, double gamma,
               const TruncationPolicy& policy = {});
double ftr_cdf(const FtrParams& p, double gamma,
               const TruncationPolicy& policy = {});
double ftr_sample(const FtrParams& p, std::mt19937_64& rng);

} // namespace fsomm

#endif
