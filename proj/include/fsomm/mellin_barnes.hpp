#ifndef FSOMM_MELLIN_BARNES_HPP
#define FSOMM_MELLIN_BARNES_HPP

#include <utility>
#include <vector>

#include "fsomm/types.hpp"

namespace fsomm {

// One Gamma(c0 + cs*s + ct*t) factor of a Mellin-Barnes integrand.
// numerator = false puts the factor in the denominator.
struct GammaFactor {
    double c0 = 0.0;
    double cs = 0.0;
    double ct = 0.0;
    bool numerator = true;
};

struct ContourSpec {
    double abscissa = 0.0;
    double half_height = 0.0;   // 0 selects automatically from decay rate
    int nodes_per_unit = 16;
    bool adaptive = true;       // abscissa chosen automatically when set
    int max_refinements = 3;
    double rel_tol = 1e-7;      // refinement target, relative to the result
};

// H^{m,n}_{p,q}[z | (a,A)_p ; (b,B)_q] in the chi(s) z^{-s} convention.
struct FoxHSpec {
    int m = 0, n = 0, p = 0, q = 0;
    std::vector<std::pair<double, double>> upper; // (a, A), length p
    std::vector<std::pair<double, double>> lower; // (b, B), length q

    void validate() const;
    // chi(s) as explicit gamma factors over the integration variable s
    std::vector<GammaFactor> factors() const;
    // admissible abscissa window (lo, hi); +-inf when unbounded
    std::pair<double, double> abscissa_window() const;
};

// Two-variable integrand: product of joint, s-only and t-only gamma
// factors, integrated against x^s y^t over two vertical contours.
struct BivariateFoxHSpec {
    std::vector<GammaFactor> joint;
    std::vector<GammaFactor> s_kernel;
    std::vector<GammaFactor> t_kernel;
};

// H-notation triple (a; A, B) for the joint group (numerator,
// Gamma(1 - a + A s + B t) under the x^s y^t convention).
struct JointParam {
    double a = 0.0, A = 1.0, B = 1.0;
};

// Builds the integrand of the two-variable H-function
// H[x, y] with joint upper group ju (all of n-type), x-group xg and
// y-group yg interpreted as theta kernels: numerator Gamma(b - B s) for
// the first m lower params, Gamma(1 - a + A s) for the first n upper
// params, mirrored factors in the denominator.
BivariateFoxHSpec bivariate_from_notation(const std::vector<JointParam>& ju,
                                          const FoxHSpec& xg,
                                          const FoxHSpec& yg);

MetricResult fox_h(const FoxHSpec& spec, double z, ContourSpec contour = {});
MetricResult meijer_g(const FoxHSpec& spec, double z, ContourSpec contour = {});

MetricResult fox_h2(const BivariateFoxHSpec& spec, double x, double y,
                    ContourSpec contour_s = {}, ContourSpec contour_t = {});

// Scaled evaluations for callers that fold in large log prefactors.
// value = mantissa * exp(log_scale).
struct ScaledValue {
    double mantissa = 0.0;
    double log_scale = 0.0;
    double err = 0.0;
    double im_resid = 0.0;
};

ScaledValue fox_h_scaled(const FoxHSpec& spec, double z, ContourSpec contour = {});
ScaledValue fox_h2_scaled(const BivariateFoxHSpec& spec, double x, double y,
                          ContourSpec contour_s = {}, ContourSpec contour_t = {});

// Evaluates sum_j exp(log_pref[j]) * H2_j[x, y] where every term shares
// the base integrand and term j multiplies one extra numerator factor
// Gamma(per_j.c0 + j + per_j.cs * s) into the s kernel. The shared inner
// (t) integrals are computed once, so the cost of each extra term is one
// pass over the outer contour nodes.
MetricResult fox_h2_series(const BivariateFoxHSpec& base, GammaFactor per_j,
                           const std::vector<double>& log_pref, double x,
                           double y, ContourSpec contour_s = {},
                           ContourSpec contour_t = {});

} // namespace fsomm

#endif
