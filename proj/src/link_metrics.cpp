#include "fsomm/link_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>

#include "fsomm/mellin_barnes.hpp"
#include "fsomm/specfun.hpp"

namespace fsomm {

namespace {

constexpr double kLn2 = 0.693147180559945309417;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_af(const RelayConfig& relay) {
    if (relay.mode != RelayMode::af_fixed_gain)
        throw std::invalid_argument("link_metrics: AF relay mode required");
    if (!(relay.c_r > 0.0))
        throw std::domain_error("link_metrics: relay gain must be positive");
}

// ---- truncated RF mixture ------------------------------------------------

struct RfSeries {
    std::vector<double> lw;
    double deficit = 0.0;
};

RfSeries rf_series(const FtrParams& ftr, const TruncationPolicy& trunc) {
    RfSeries s;
    s.lw = ftr_log_weights(ftr, trunc);
    double sum = 0.0, comp = 0.0;
    for (double l : s.lw) {
        double y = std::exp(l) - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    s.deficit = std::max(0.0, 1.0 - sum);
    return s;
}

// Truncation-consistent RF CCDF: retained terms plus the full tail mass,
// so that ccdf + ftr_cdf under the same policy is exactly one.
double rf_ccdf_trunc(const RfSeries& rf, const FtrParams& ftr, double gamma) {
    if (gamma <= 0.0) return 1.0;
    double z = gamma / (2.0 * ftr.sigma2);
    if (!std::isfinite(z) || z > 1e7) return std::clamp(rf.deficit, 0.0, 1.0);
    double s = rf.deficit;
    for (size_t j = 0; j < rf.lw.size(); ++j)
        s += std::exp(rf.lw[j]) * reg_gamma_q(j + 1.0, z);
    return std::clamp(s, 0.0, 1.0);
}

double rf_cdf_trunc(const RfSeries& rf, const FtrParams& ftr, double gamma) {
    if (gamma <= 0.0) return 0.0;
    double z = gamma / (2.0 * ftr.sigma2);
    if (!std::isfinite(z) || z > 1e7)
        return std::clamp(1.0 - rf.deficit, 0.0, 1.0);
    double s = 0.0;
    for (size_t j = 0; j < rf.lw.size(); ++j)
        s += std::exp(rf.lw[j]) * reg_gamma_p(j + 1.0, z);
    return std::clamp(s, 0.0, 1.0);
}

// ---- shared series machinery ---------------------------------------------

struct SeriesEval {
    double value = 0.0;
    double err = 0.0;
    double phi_last = 0.0; // last retained per-component contribution
    int terms = 0;
};

ContourSpec tight_contour() {
    ContourSpec cs;
    cs.rel_tol = 1e-12;
    cs.max_refinements = 5;
    return cs;
}

// AF closed forms share the double-contour structure of the end-to-end
// CDF: joint Gamma(s + t/r), RF factor Gamma(-s) Gamma(j+1-s), and the
// optical kernel in t; each metric multiplies extra t factors in.
SeriesEval af_series(const GammaGammaParams& gg, const RfSeries& rf,
                     const std::vector<GammaFactor>& extra_t, double log_extra,
                     double x, double y) {
    BivariateFoxHSpec sp;
    double rr = gg.r;
    sp.joint.push_back({0.0, 1.0, 1.0 / rr, true});
    sp.s_kernel.push_back({0.0, -1.0, 0.0, true});
    if (gg.has_pointing()) {
        sp.t_kernel.push_back({gg.xi2, 0.0, 1.0, true});
        sp.t_kernel.push_back({gg.xi2 + 1.0, 0.0, 1.0, false});
        log_extra += std::log(gg.xi2);
    }
    sp.t_kernel.push_back({gg.alpha, 0.0, 1.0, true});
    sp.t_kernel.push_back({gg.beta, 0.0, 1.0, true});
    sp.t_kernel.push_back({1.0, 0.0, 1.0 / rr, false});
    for (const auto& f : extra_t) sp.t_kernel.push_back(f);
    log_extra -=
        std::log(rr) + std::lgamma(gg.alpha) + std::lgamma(gg.beta);

    std::vector<double> lp(rf.lw.size());
    for (size_t j = 0; j < rf.lw.size(); ++j)
        lp[j] = rf.lw[j] - std::lgamma(j + 1.0) + log_extra;
    ContourSpec cs = tight_contour();
    MetricResult h =
        fox_h2_series(sp, {1.0, -1.0, 0.0, true}, lp, x, y, cs, cs);
    SeriesEval ev;
    ev.value = h.value;
    ev.err = h.err_estimate;
    ev.phi_last = h.diagnostics["last_term"] * std::exp(-rf.lw.back());
    ev.terms = int(rf.lw.size());
    return ev;
}

// DF metrics integrate the product of the two hop CCDFs against a metric
// weight, giving joint Gamma factors in s+t, the regularized upper
// incomplete gamma transform in s, and the optical CCDF transform in t.
SeriesEval df_series(const GammaGammaParams& gg, const RfSeries& rf,
                     const std::vector<GammaFactor>& joint, double log_extra,
                     double x, double y) {
    BivariateFoxHSpec sp;
    sp.joint = joint;
    sp.s_kernel.push_back({0.0, 1.0, 0.0, true});
    sp.s_kernel.push_back({1.0, 1.0, 0.0, false});
    double rr = gg.r;
    sp.t_kernel.push_back({0.0, 0.0, 1.0, true});
    sp.t_kernel.push_back({1.0, 0.0, 1.0, false});
    if (gg.has_pointing()) {
        sp.t_kernel.push_back({gg.xi2, 0.0, rr, true});
        sp.t_kernel.push_back({gg.xi2 + 1.0, 0.0, rr, false});
        log_extra += std::log(gg.xi2);
    }
    sp.t_kernel.push_back({gg.alpha, 0.0, rr, true});
    sp.t_kernel.push_back({gg.beta, 0.0, rr, true});
    log_extra -= std::lgamma(gg.alpha) + std::lgamma(gg.beta);

    std::vector<double> lp(rf.lw.size());
    for (size_t j = 0; j < rf.lw.size(); ++j)
        lp[j] = rf.lw[j] - std::lgamma(j + 1.0) + log_extra;
    ContourSpec cs = tight_contour();
    MetricResult h = fox_h2_series(sp, {1.0, 1.0, 0.0, true}, lp, x, y, cs, cs);
    SeriesEval ev;
    ev.value = h.value;
    ev.err = h.err_estimate;
    ev.phi_last = h.diagnostics["last_term"] * std::exp(-rf.lw.back());
    ev.terms = int(rf.lw.size());
    return ev;
}

// Optical-hop CCDF in the exact DF path (single Fox-H form).
struct CcdfEval {
    double value = 0.0;
    double err = 0.0;
};

CcdfEval df_fso_ccdf(const GammaGammaParams& gg, double gamma) {
    if (gamma <= 0.0) return {1.0, 0.0};
    double rr = gg.r;
    if (gg.alpha * gg.beta * std::pow(gamma / gg.mu_r, 1.0 / rr) > 1e4)
        return {0.0, 0.0};
    double z = std::pow(gg.alpha * gg.beta, rr) * gamma / gg.mu_r;
    FoxHSpec h;
    double pref;
    if (gg.has_pointing()) {
        h.m = 4; h.n = 0; h.p = 2; h.q = 4;
        h.upper = {{gg.xi2 + 1.0, rr}, {1.0, 1.0}};
        h.lower = {{0.0, 1.0}, {gg.xi2, rr}, {gg.alpha, rr}, {gg.beta, rr}};
        pref = gg.xi2;
    } else {
        h.m = 3; h.n = 0; h.p = 1; h.q = 3;
        h.upper = {{1.0, 1.0}};
        h.lower = {{0.0, 1.0}, {gg.alpha, rr}, {gg.beta, rr}};
        pref = 1.0;
    }
    ContourSpec cs = tight_contour();
    cs.nodes_per_unit = 64;
    ScaledValue sv = fox_h_scaled(h, z, cs);
    double scale = pref / (real_gamma(gg.alpha) * real_gamma(gg.beta));
    double v = scale * sv.mantissa * std::exp(sv.log_scale);
    return {std::clamp(v, 0.0, 1.0), scale * sv.err * std::exp(sv.log_scale)};
}

// ---- cached unit-scale optical pdf for the quadrature oracles ------------

class FsoPdfCache {
  public:
    explicit FsoPdfCache(const GammaGammaParams& p) {
        GammaGammaParams unit = p;
        unit.mu_r = 1.0;
        lo_ = std::log(1e-9);
        hi_ = std::log(2e4);
        step_ = (hi_ - lo_) / (kNodes - 1);
        lf_.resize(kNodes);
        for (int i = 0; i < kNodes; ++i)
            lf_[i] = std::log(
                std::max(gg_pdf(unit, std::exp(lo_ + i * step_)), 1e-300));
        slope_lo_ = (lf_[1] - lf_[0]) / step_;
    }

    // unit-scale pdf via a monotone-grid cubic in log-log coordinates
    double operator()(double u) const {
        if (!(u > 0.0)) return 0.0;
        double lu = std::log(u);
        if (lu >= hi_) return 0.0;
        if (lu <= lo_) return std::exp(lf_[0] + slope_lo_ * (lu - lo_));
        double s = (lu - lo_) / step_;
        int i = std::min(int(s), kNodes - 2);
        double f = s - i;
        double y0 = lf_[i], y1 = lf_[i + 1];
        double m0 = i > 0 ? 0.5 * (lf_[i + 1] - lf_[i - 1]) : y1 - y0;
        double m1 = i + 2 < kNodes ? 0.5 * (lf_[i + 2] - lf_[i]) : y1 - y0;
        double f2 = f * f, f3 = f2 * f;
        double h = (2 * f3 - 3 * f2 + 1) * y0 + (f3 - 2 * f2 + f) * m0 +
                   (-2 * f3 + 3 * f2) * y1 + (f3 - f2) * m1;
        return std::exp(h);
    }

  private:
    static constexpr int kNodes = 1200;
    double lo_, hi_, step_, slope_lo_;
    std::vector<double> lf_;
};

const FsoPdfCache& fso_pdf_cache(const GammaGammaParams& p) {
    struct Key {
        double a, b, x2;
        int r;
        bool operator<(const Key& o) const {
            return std::tie(a, b, x2, r) < std::tie(o.a, o.b, o.x2, o.r);
        }
    };
    static std::map<Key, FsoPdfCache> cache;
    static std::mutex mu;
    Key k{p.alpha, p.beta, p.xi2, p.r};
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(k);
    if (it == cache.end()) it = cache.emplace(k, FsoPdfCache(p)).first;
    return it->second;
}

using RealFn = std::function<double(double)>;

// End-to-end AF CDF in the additive form
//   F(g) = F_FSO(g) + \int_0^inf f_FSO(x+g) F_RF(C_R g / x) dx,
// which stays accurate when F is small.
MetricResult af_cdf_oracle_core(const GammaGammaParams& gg, const RealFn& rf_cdf,
                                double c_r, double gamma) {
    MetricResult out;
    out.method = Method::oracle_integral;
    if (gamma <= 0.0) return out;
    const FsoPdfCache& pdf = fso_pdf_cache(gg);
    auto integrand = [&](double x) {
        double w = rf_cdf(c_r * gamma / x);
        if (w <= 0.0) return 0.0;
        return pdf((x + gamma) / gg.mu_r) / gg.mu_r * w;
    };
    boost::math::quadrature::exp_sinh<double> quad;
    double err = 0.0, l1 = 0.0;
    double I = quad.integrate(integrand, 1e-10, &err, &l1);
    double F = gg_cdf(gg, gamma) + I;
    out.value = std::clamp(F, 0.0, 1.0);
    out.err_estimate = err * l1 + 3e-7 * I;
    return out;
}

MetricResult df_cdf_oracle_core(const GammaGammaParams& gg, const RealFn& rf_cdf,
                                double gamma) {
    MetricResult out;
    out.method = Method::oracle_integral;
    if (gamma <= 0.0) return out;
    double ff = gg_cdf(gg, gamma);
    double fr = rf_cdf(gamma);
    out.value = std::clamp(ff + (1.0 - ff) * fr, 0.0, 1.0);
    out.err_estimate = 1e-12;
    return out;
}

// ---- generic metric quadratures over an end-to-end CDF -------------------

struct GlRule {
    std::vector<double> x, w;
};

const GlRule& gauss_laguerre(int n, double a) {
    struct Key {
        int n;
        double a;
        bool operator<(const Key& o) const {
            return std::tie(n, a) < std::tie(o.n, o.a);
        }
    };
    static std::map<Key, GlRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({n, a});
    if (it != cache.end()) return it->second;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        J(i, i) = 2.0 * i + a + 1.0;
        if (i + 1 < n) {
            double off = std::sqrt((i + 1.0) * (i + 1.0 + a));
            J(i, i + 1) = J(i + 1, i) = off;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GlRule rule;
    double g = std::tgamma(a + 1.0);
    for (int i = 0; i < n; ++i) {
        rule.x.push_back(es.eigenvalues()(i));
        double v0 = es.eigenvectors()(0, i);
        rule.w.push_back(g * v0 * v0);
    }
    return cache.emplace(Key{n, a}, std::move(rule)).first->second;
}

MetricResult ber_from_cdf(const RealFn& cdf, const ModulationScheme& mod) {
    const GlRule& rule = gauss_laguerre(96, mod.p - 1.0);
    double total = 0.0;
    for (double qk : mod.q) {
        double s = 0.0;
        for (size_t i = 0; i < rule.x.size(); ++i)
            s += rule.w[i] * cdf(rule.x[i] / qk);
        total += s;
    }
    MetricResult out;
    out.value = mod.delta / (2.0 * std::tgamma(mod.p)) * total;
    out.err_estimate = 1e-6 * std::abs(out.value);
    out.method = Method::oracle_integral;
    return out;
}

MetricResult capacity_from_cdf(const RealFn& cdf, const CapacityMode& cap) {
    auto integrand = [&](double g) {
        return cap.c * (1.0 - cdf(g)) / (1.0 + cap.c * g);
    };
    boost::math::quadrature::exp_sinh<double> quad;
    double err = 0.0, l1 = 0.0;
    double I = quad.integrate(integrand, 1e-9, &err, &l1);
    MetricResult out;
    out.value = I / kLn2;
    out.err_estimate = (err * l1 + 1e-9 * l1) / kLn2;
    out.method = Method::oracle_integral;
    return out;
}

MetricResult effcap_from_cdf(const RealFn& cdf, double A) {
    // substituting v = A log(1 + gamma) keeps the decay exponential even
    // for very small QoS exponents
    auto integrand = [&](double v) {
        double u = v / A;
        double F = u < 700.0 ? cdf(std::expm1(u)) : 1.0;
        return std::exp(-v) * F;
    };
    boost::math::quadrature::exp_sinh<double> quad;
    double err = 0.0, l1 = 0.0;
    double E = quad.integrate(integrand, 1e-10, &err, &l1);
    MetricResult out;
    E = std::clamp(E, 1e-300, 1.0);
    out.value = -std::log2(E) / A;
    out.err_estimate = (err * l1 + 1e-9) / (E * A * kLn2);
    out.method = Method::oracle_integral;
    return out;
}

RealFn end_to_end_cdf_oracle(const GammaGammaParams& gg, const FtrParams& ftr,
                             const RelayConfig& relay,
                             const TruncationPolicy& trunc) {
    RfSeries rf = rf_series(ftr, trunc);
    auto rf_cdf = [rf, ftr](double g) { return rf_cdf_trunc(rf, ftr, g); };
    if (relay.mode == RelayMode::af_fixed_gain) {
        require_af(relay);
        double c_r = relay.c_r;
        return [gg, rf_cdf, c_r](double g) {
            return af_cdf_oracle_core(gg, rf_cdf, c_r, g).value;
        };
    }
    return [gg, rf_cdf](double g) {
        return df_cdf_oracle_core(gg, rf_cdf, g).value;
    };
}

// ---- asymptotic helpers --------------------------------------------------

struct AsyShape {
    double alpha, beta, xi2;
    bool pointing;
    double r;
    bool perturbed = false;
};

// The expansions assume distinct pole families; near-collisions are
// nudged apart and flagged.
AsyShape asy_shape(const GammaGammaParams& gg) {
    AsyShape s{gg.alpha, gg.beta, gg.xi2, gg.has_pointing(), double(gg.r),
               false};
    auto near_int = [&](double x) {
        return std::abs(x / s.r - std::round(x / s.r)) < 1e-6;
    };
    auto nudge = [&](double& x) {
        x += 1e-4 * s.r;
        s.perturbed = true;
    };
    if (near_int(s.alpha)) nudge(s.alpha);
    if (near_int(s.beta)) nudge(s.beta);
    if (s.pointing && near_int(s.xi2)) nudge(s.xi2);
    if (std::abs(s.alpha - s.beta) < 1e-6) nudge(s.beta);
    if (s.pointing && std::abs(s.alpha - s.xi2) < 1e-6) nudge(s.xi2);
    if (s.pointing && std::abs(s.beta - s.xi2) < 1e-6) nudge(s.xi2);
    return s;
}

// xi^2/(xi^2 - c); 1 without pointing error (the factor cancels in the
// no-pointing limit)
double point_ratio(const AsyShape& s, double c) {
    return s.pointing ? s.xi2 / (s.xi2 - c) : 1.0;
}

double gamma_ratio(double top, double bottom_lgamma_arg) {
    int sg = 1;
    double lt = log_gamma_signed(top, sg);
    return sg * std::exp(lt - std::lgamma(bottom_lgamma_arg));
}

// Shared structure of the AF power-law families with exponent th in
// {xi^2, alpha, beta}: base^th * [G(j+1-th/r)/G(j+1) * X^(th/r) + 1]
// summed with weights w_j, times a th-dependent front factor.
double af_family_sum(const AsyShape& s, const RfSeries& rf, double th,
                     double base, double X) {
    double xp = std::pow(X, th / s.r);
    double acc = 0.0;
    for (size_t j = 0; j < rf.lw.size(); ++j) {
        double ratio = gamma_ratio(j + 1.0 - th / s.r, j + 1.0);
        acc += std::exp(rf.lw[j]) * (ratio * xp + 1.0);
    }
    return std::pow(base, th) * acc;
}

double signed_gamma(double x) { return real_gamma(x); }

} // namespace

// ---- small types ---------------------------------------------------------

void ModulationScheme::validate() const {
    if (n <= 0 || int(q.size()) != n || !(delta > 0.0) || !(p > 0.0))
        throw std::invalid_argument("ModulationScheme: inconsistent fields");
    for (double qk : q)
        if (!(qk > 0.0))
            throw std::invalid_argument("ModulationScheme: q must be positive");
}

CapacityMode CapacityMode::for_detection(int r) {
    if (r == 1) return {1.0};
    if (r == 2) return {std::exp(1.0) / (2.0 * 3.14159265358979323846)};
    throw std::domain_error("CapacityMode: detection order must be 1 or 2");
}

EffectiveCapacityParams effective_capacity_params(double theta, double T,
                                                  double B) {
    if (!(theta > 0.0) || !(T > 0.0) || !(B > 0.0))
        throw std::domain_error("effective_capacity_params: bad inputs");
    return {theta * T * B / kLn2};
}

// ---- AF CDF --------------------------------------------------------------

MetricResult af_cdf(const GammaGammaParams& gg, const FtrParams& ftr,
                    const RelayConfig& relay, double gamma,
                    const TruncationPolicy& trunc) {
    require_af(relay);
    MetricResult out;
    if (gamma <= 0.0) return out;
    RfSeries rf = rf_series(ftr, trunc);
    double x = relay.c_r / (2.0 * ftr.sigma2);
    double y = std::pow(gg.mu_r / gamma, 1.0 / gg.r) / (gg.alpha * gg.beta);
    SeriesEval ev = af_series(gg, rf, {}, 0.0, x, y);
    double phi = std::clamp(ev.phi_last, 0.0, 1.0);
    out.value = std::clamp(1.0 - ev.value - rf.deficit * phi, 0.0, 1.0);
    out.err_estimate = ev.err + rf.deficit * (1.0 - phi);
    out.series_terms_used = ev.terms;
    out.diagnostics["tail_deficit"] = rf.deficit;
    return out;
}

MetricResult af_cdf_oracle(const GammaGammaParams& gg, const FtrParams& ftr,
                           const RelayConfig& relay, double gamma,
                           const TruncationPolicy& trunc) {
    require_af(relay);
    RfSeries rf = rf_series(ftr, trunc);
    auto rf_cdf = [&](double g) { return rf_cdf_trunc(rf, ftr, g); };
    MetricResult out = af_cdf_oracle_core(gg, rf_cdf, relay.c_r, gamma);
    out.series_terms_used = int(rf.lw.size());
    return out;
}

MetricResult af_cdf_oracle(const GammaGammaParams& gg, const RfCcdf& rf,
                           double c_r, double gamma) {
    auto rf_cdf = [&](double g) {
        return std::clamp(1.0 - rf(g), 0.0, 1.0);
    };
    return af_cdf_oracle_core(gg, rf_cdf, c_r, gamma);
}

MetricResult af_cdf_asymptotic(const GammaGammaParams& gg, const FtrParams& ftr,
                               const RelayConfig& relay, double gamma,
                               const TruncationPolicy& trunc,
                               AsymptoticExpansion* expansion) {
    require_af(relay);
    MetricResult out;
    out.method = Method::asymptotic;
    if (gamma <= 0.0) return out;
    AsyShape s = asy_shape(gg);
    RfSeries rf = rf_series(ftr, trunc);
    double gb = 1.0 / (real_gamma(s.alpha) * real_gamma(s.beta));
    double two_sigma2 = 2.0 * ftr.sigma2;
    double Z = gamma * relay.c_r * std::pow(s.alpha * s.beta, s.r) /
               (two_sigma2 * gg.mu_r);
    double X = relay.c_r / two_sigma2;
    double base = s.alpha * s.beta * std::pow(gamma / gg.mu_r, 1.0 / s.r);

    AsymptoticExpansion exp_out;
    exp_out.domain = "af_cdf";
    double total = 0.0;
    // RF-limited family, one exponent per retained mixture component
    for (size_t j = 0; j < rf.lw.size(); ++j) {
        double jp = j + 1.0;
        double t = gb * point_ratio(s, s.r * jp) / jp *
                   signed_gamma(s.alpha - s.r * jp) *
                   signed_gamma(s.beta - s.r * jp) *
                   std::exp(rf.lw[j] - std::lgamma(jp) + jp * std::log(Z));
        if (std::isfinite(t)) {
            total += t;
            // both hop scales enter through Z, so the decay exponent in a
            // common average SNR is twice the mixture index
            exp_out.terms.push_back(
                {2.0 * jp, t * std::pow(gg.mu_r, 2.0 * jp)});
        }
    }
    // optical families
    if (s.pointing) {
        double c = gb * signed_gamma(s.alpha - s.xi2) *
                   signed_gamma(s.beta - s.xi2) *
                   af_family_sum(s, rf, s.xi2, base, X);
        total += c;
        exp_out.terms.push_back({s.xi2 / s.r, c * std::pow(gg.mu_r, s.xi2 / s.r)});
    }
    double ca = gb * point_ratio(s, s.alpha) * signed_gamma(s.beta - s.alpha) /
                s.alpha * af_family_sum(s, rf, s.alpha, base, X);
    total += ca;
    exp_out.terms.push_back({s.alpha / s.r, ca * std::pow(gg.mu_r, s.alpha / s.r)});
    double cb = gb * point_ratio(s, s.beta) * signed_gamma(s.alpha - s.beta) /
                s.beta * af_family_sum(s, rf, s.beta, base, X);
    total += cb;
    exp_out.terms.push_back({s.beta / s.r, cb * std::pow(gg.mu_r, s.beta / s.r)});

    out.value = std::max(total, 0.0);
    out.err_estimate = std::abs(total) * 1e-2;
    out.series_terms_used = int(rf.lw.size());
    if (s.perturbed) out.diagnostics["pole_collision_perturbed"] = 1.0;
    if (expansion) *expansion = std::move(exp_out);
    return out;
}

// ---- DF CDF --------------------------------------------------------------

MetricResult df_cdf(const GammaGammaParams& gg, const FtrParams& ftr,
                    double gamma, const TruncationPolicy& trunc) {
    MetricResult out;
    if (gamma <= 0.0) return out;
    RfSeries rf = rf_series(ftr, trunc);
    CcdfEval cf = df_fso_ccdf(gg, gamma);
    double cr = rf_ccdf_trunc(rf, ftr, gamma);
    out.value = std::clamp(1.0 - cf.value * cr, 0.0, 1.0);
    out.err_estimate = cf.err * cr + 1e-15;
    out.series_terms_used = int(rf.lw.size());
    out.diagnostics["tail_deficit"] = rf.deficit;
    return out;
}

MetricResult df_cdf_oracle(const GammaGammaParams& gg, const FtrParams& ftr,
                           double gamma, const TruncationPolicy& trunc) {
    RfSeries rf = rf_series(ftr, trunc);
    auto rf_cdf = [&](double g) { return rf_cdf_trunc(rf, ftr, g); };
    MetricResult out = df_cdf_oracle_core(gg, rf_cdf, gamma);
    out.series_terms_used = int(rf.lw.size());
    return out;
}

MetricResult df_cdf_asymptotic(const GammaGammaParams& gg, const FtrParams& ftr,
                               double gamma, const TruncationPolicy& trunc,
                               AsymptoticExpansion* expansion) {
    MetricResult out;
    out.method = Method::asymptotic;
    if (gamma <= 0.0) return out;
    AsyShape s = asy_shape(gg);
    RfSeries rf = rf_series(ftr, trunc);
    double gb = 1.0 / (real_gamma(s.alpha) * real_gamma(s.beta));
    double z = std::pow(s.alpha * s.beta, s.r) * gamma / gg.mu_r;

    AsymptoticExpansion exp_out;
    exp_out.domain = "df_cdf";
    double fso = 0.0;
    if (s.pointing) {
        double c = s.r * gb * signed_gamma(s.alpha - s.xi2) *
                   signed_gamma(s.beta - s.xi2) * std::pow(z, s.xi2 / s.r);
        fso += c;
        exp_out.terms.push_back({s.xi2 / s.r, c * std::pow(gg.mu_r, s.xi2 / s.r)});
    }
    double ca = s.r * point_ratio(s, s.alpha) * gb *
                signed_gamma(s.beta - s.alpha) / s.alpha *
                std::pow(z, s.alpha / s.r);
    fso += ca;
    exp_out.terms.push_back({s.alpha / s.r, ca * std::pow(gg.mu_r, s.alpha / s.r)});
    double cb = s.r * point_ratio(s, s.beta) * gb *
                signed_gamma(s.alpha - s.beta) / s.beta *
                std::pow(z, s.beta / s.r);
    fso += cb;
    exp_out.terms.push_back({s.beta / s.r, cb * std::pow(gg.mu_r, s.beta / s.r)});

    double rfp = 0.0;
    double lz = std::log(gamma / (2.0 * ftr.sigma2));
    for (size_t j = 0; j < rf.lw.size(); ++j) {
        double jp = j + 1.0;
        double t = std::exp(rf.lw[j] - std::log(jp) - std::lgamma(jp) + jp * lz);
        rfp += t;
        exp_out.terms.push_back({jp, t * std::pow(gg.mu_r, jp)});
    }
    double total = fso + rfp - fso * rfp;
    out.value = std::max(total, 0.0);
    out.err_estimate = std::abs(total) * 1e-2;
    out.series_terms_used = int(rf.lw.size());
    if (s.perturbed) out.diagnostics["pole_collision_perturbed"] = 1.0;
    if (expansion) *expansion = std::move(exp_out);
    return out;
}

// ---- outage --------------------------------------------------------------

MetricResult outage(const GammaGammaParams& gg, const FtrParams& ftr,
                    const RelayConfig& relay, double gamma_th,
                    const TruncationPolicy& trunc) {
    if (relay.mode == RelayMode::af_fixed_gain)
        return af_cdf(gg, ftr, relay, gamma_th, trunc);
    return df_cdf(gg, ftr, gamma_th, trunc);
}

// ---- average BER ---------------------------------------------------------

MetricResult avg_ber(const GammaGammaParams& gg, const FtrParams& ftr,
                     const RelayConfig& relay, const ModulationScheme& mod,
                     const TruncationPolicy& trunc) {
    mod.validate();
    RfSeries rf = rf_series(ftr, trunc);
    MetricResult out;
    double s = 0.0, err = 0.0;
    int terms = 0;
    if (relay.mode == RelayMode::af_fixed_gain) {
        require_af(relay);
        double x = relay.c_r / (2.0 * ftr.sigma2);
        double log_extra =
            std::log(mod.delta) - std::log(2.0) - std::lgamma(mod.p);
        std::vector<GammaFactor> extra{{mod.p, 0.0, -1.0 / gg.r, true}};
        for (double qk : mod.q) {
            double y =
                std::pow(gg.mu_r * qk, 1.0 / gg.r) / (gg.alpha * gg.beta);
            SeriesEval ev = af_series(gg, rf, extra, log_extra, x, y);
            double phi = std::max(ev.phi_last, 0.0);
            s += ev.value + rf.deficit * phi;
            err += ev.err + rf.deficit * std::max(0.5 * mod.delta - phi, 0.0);
            terms = ev.terms;
        }
    } else {
        double log_extra =
            std::log(mod.delta) - std::log(2.0) - std::lgamma(mod.p);
        for (double qk : mod.q) {
            std::vector<GammaFactor> joint{{mod.p, -1.0, -1.0, true}};
            double x = 2.0 * ftr.sigma2 * qk;
            double y =
                qk * gg.mu_r / std::pow(gg.alpha * gg.beta, double(gg.r));
            SeriesEval ev = df_series(gg, rf, joint, log_extra, x, y);
            double phi = std::max(ev.phi_last, 0.0);
            s += ev.value + rf.deficit * phi;
            err += ev.err + rf.deficit * std::max(0.5 * mod.delta - phi, 0.0);
            terms = ev.terms;
        }
    }
    double cap = mod.n * mod.delta / 2.0;
    out.value = std::clamp(cap - s, 0.0, cap);
    out.err_estimate = err;
    out.series_terms_used = terms;
    out.diagnostics["tail_deficit"] = rf.deficit;
    return out;
}

MetricResult avg_ber_oracle(const GammaGammaParams& gg, const FtrParams& ftr,
                            const RelayConfig& relay,
                            const ModulationScheme& mod,
                            const TruncationPolicy& trunc) {
    mod.validate();
    return ber_from_cdf(end_to_end_cdf_oracle(gg, ftr, relay, trunc), mod);
}

MetricResult avg_ber_oracle(const GammaGammaParams& gg, const RfCcdf& rf,
                            double c_r, const ModulationScheme& mod) {
    mod.validate();
    auto cdf = [&](double g) { return af_cdf_oracle(gg, rf, c_r, g).value; };
    return ber_from_cdf(cdf, mod);
}

MetricResult avg_ber_asymptotic(const GammaGammaParams& gg,
                                const FtrParams& ftr, const RelayConfig& relay,
                                const ModulationScheme& mod,
                                const TruncationPolicy& trunc,
                                AsymptoticExpansion* expansion) {
    mod.validate();
    MetricResult out;
    out.method = Method::asymptotic;
    AsyShape s = asy_shape(gg);
    RfSeries rf = rf_series(ftr, trunc);
    double gb = 1.0 / (real_gamma(s.alpha) * real_gamma(s.beta));
    double front = mod.delta / (2.0 * std::tgamma(mod.p));
    double two_sigma2 = 2.0 * ftr.sigma2;

    AsymptoticExpansion exp_out;
    exp_out.domain = relay.mode == RelayMode::af_fixed_gain ? "af_ber" : "df_ber";
    double total = 0.0;
    std::vector<double> partial_by_j(rf.lw.size(), 0.0);
    std::vector<double> rf_by_j(rf.lw.size(), 0.0);

    if (relay.mode == RelayMode::af_fixed_gain) {
        require_af(relay);
        double X = relay.c_r / two_sigma2;
        double cxi = 0.0, ca = 0.0, cb = 0.0;
        // every family is itself a mixture sum, so the per-component
        // contributions are tracked across all of them at once
        auto add_family = [&](double coeff, double th, double base) {
            double xp = std::pow(X, th / s.r);
            double bp = std::pow(base, th);
            double acc = 0.0;
            for (size_t j = 0; j < rf.lw.size(); ++j) {
                double ratio = gamma_ratio(j + 1.0 - th / s.r, j + 1.0);
                double t =
                    bp * std::exp(rf.lw[j]) * (ratio * xp + 1.0) * coeff;
                acc += t;
                partial_by_j[j] += t;
            }
            return acc;
        };
        for (double qk : mod.q) {
            double Z = relay.c_r * std::pow(s.alpha * s.beta, s.r) /
                       (two_sigma2 * gg.mu_r * qk);
            double base =
                s.alpha * s.beta * std::pow(1.0 / (gg.mu_r * qk), 1.0 / s.r);
            for (size_t j = 0; j < rf.lw.size(); ++j) {
                double jp = j + 1.0;
                double t1 = front * gb * point_ratio(s, s.r * jp) / jp *
                            signed_gamma(s.alpha - s.r * jp) *
                            signed_gamma(s.beta - s.r * jp) *
                            std::exp(rf.lw[j] + std::lgamma(mod.p + jp) -
                                     std::lgamma(jp) + jp * std::log(Z));
                if (std::isfinite(t1)) {
                    rf_by_j[j] += t1;
                    partial_by_j[j] += t1;
                }
            }
            if (s.pointing)
                cxi += add_family(front * gb * std::tgamma(mod.p + s.xi2 / s.r) *
                                      signed_gamma(s.alpha - s.xi2) *
                                      signed_gamma(s.beta - s.xi2),
                                  s.xi2, base);
            ca += add_family(front * gb * std::tgamma(mod.p + s.alpha / s.r) *
                                 point_ratio(s, s.alpha) *
                                 signed_gamma(s.beta - s.alpha) / s.alpha,
                             s.alpha, base);
            cb += add_family(front * gb * std::tgamma(mod.p + s.beta / s.r) *
                                 point_ratio(s, s.beta) *
                                 signed_gamma(s.alpha - s.beta) / s.beta,
                             s.beta, base);
        }
        if (s.pointing) {
            total += cxi;
            exp_out.terms.push_back({s.xi2 / s.r, cxi * std::pow(gg.mu_r, s.xi2 / s.r)});
        }
        total += ca + cb;
        exp_out.terms.push_back({s.alpha / s.r, ca * std::pow(gg.mu_r, s.alpha / s.r)});
        exp_out.terms.push_back({s.beta / s.r, cb * std::pow(gg.mu_r, s.beta / s.r)});
        for (size_t j = 0; j < rf_by_j.size(); ++j) {
            total += rf_by_j[j];
            exp_out.terms.push_back(
                {2.0 * (j + 1.0),
                 rf_by_j[j] * std::pow(gg.mu_r, 2.0 * (j + 1.0))});
        }
    } else {
        double cxi = 0.0, ca = 0.0, cb = 0.0;
        for (double qk : mod.q) {
            double z = std::pow(s.alpha * s.beta, s.r) / (gg.mu_r * qk);
            if (s.pointing)
                cxi += front * s.r * gb * signed_gamma(s.alpha - s.xi2) *
                       signed_gamma(s.beta - s.xi2) *
                       std::tgamma(mod.p + s.xi2 / s.r) *
                       std::pow(z, s.xi2 / s.r);
            ca += front * s.r * point_ratio(s, s.alpha) * gb *
                  signed_gamma(s.beta - s.alpha) / s.alpha *
                  std::tgamma(mod.p + s.alpha / s.r) * std::pow(z, s.alpha / s.r);
            cb += front * s.r * point_ratio(s, s.beta) * gb *
                  signed_gamma(s.alpha - s.beta) / s.beta *
                  std::tgamma(mod.p + s.beta / s.r) * std::pow(z, s.beta / s.r);
            double lz = -std::log(two_sigma2 * qk);
            for (size_t j = 0; j < rf.lw.size(); ++j) {
                double jp = j + 1.0;
                double t = front *
                           std::exp(rf.lw[j] + std::lgamma(mod.p + jp) -
                                    std::log(jp) - std::lgamma(jp) + jp * lz);
                partial_by_j[j] += t;
            }
        }
        if (s.pointing) {
            total += cxi;
            exp_out.terms.push_back({s.xi2 / s.r, cxi * std::pow(gg.mu_r, s.xi2 / s.r)});
        }
        total += ca + cb;
        exp_out.terms.push_back({s.alpha / s.r, ca * std::pow(gg.mu_r, s.alpha / s.r)});
        exp_out.terms.push_back({s.beta / s.r, cb * std::pow(gg.mu_r, s.beta / s.r)});
        for (size_t j = 0; j < partial_by_j.size(); ++j) {
            total += partial_by_j[j];
            exp_out.terms.push_back(
                {j + 1.0, partial_by_j[j] * std::pow(gg.mu_r, j + 1.0)});
        }
    }

    // smallest number of mixture components whose partial sum is within
    // the truncation target (relative) of the full expansion
    double fixed = total;
    for (double t : partial_by_j) fixed -= t;
    double run = fixed;
    int n2 = int(partial_by_j.size());
    double achieved = 0.0;
    double scale = std::max(std::abs(total), 1e-300);
    for (size_t j = 0; j < partial_by_j.size(); ++j) {
        run += partial_by_j[j];
        double rem = std::abs(total - run) / scale;
        if (rem < trunc.target_deficit) {
            n2 = int(j) + 1;
            achieved = rem;
            break;
        }
    }
    out.value = std::max(total, 0.0);
    out.err_estimate = std::abs(total) * 1e-2;
    out.series_terms_used = int(rf.lw.size());
    out.diagnostics["n2"] = double(n2);
    out.diagnostics["eps2"] = achieved;
    if (s.perturbed) out.diagnostics["pole_collision_perturbed"] = 1.0;
    if (expansion) *expansion = std::move(exp_out);
    return out;
}

// ---- diversity order -----------------------------------------------------

double diversity_order(const GammaGammaParams& gg, const RelayConfig& relay) {
    double cap = relay.mode == RelayMode::af_fixed_gain ? 2.0 : 1.0;
    double d = std::min(cap, std::min(gg.alpha, gg.beta) / gg.r);
    if (gg.has_pointing()) d = std::min(d, gg.xi2 / gg.r);
    return d;
}

// ---- ergodic capacity ----------------------------------------------------

MetricResult ergodic_capacity(const GammaGammaParams& gg, const FtrParams& ftr,
                              const RelayConfig& relay, const CapacityMode& cap,
                              const TruncationPolicy& trunc) {
    if (!(cap.c > 0.0))
        throw std::domain_error("ergodic_capacity: capacity constant must be positive");
    RfSeries rf = rf_series(ftr, trunc);
    MetricResult out;
    SeriesEval ev;
    if (relay.mode == RelayMode::af_fixed_gain) {
        require_af(relay);
        double x = relay.c_r / (2.0 * ftr.sigma2);
        double y = std::pow(cap.c * gg.mu_r, 1.0 / gg.r) / (gg.alpha * gg.beta);
        std::vector<GammaFactor> extra{{0.0, 0.0, 1.0 / gg.r, true},
                                       {1.0, 0.0, -1.0 / gg.r, true}};
        ev = af_series(gg, rf, extra, -std::log(kLn2), x, y);
    } else {
        std::vector<GammaFactor> joint{{1.0, -1.0, -1.0, true},
                                       {0.0, 1.0, 1.0, true}};
        double x = 2.0 * ftr.sigma2 * cap.c;
        double y = cap.c * gg.mu_r / std::pow(gg.alpha * gg.beta, double(gg.r));
        ev = df_series(gg, rf, joint, -std::log(kLn2), x, y);
    }
    double phi = std::max(ev.phi_last, 0.0);
    out.value = std::max(ev.value + rf.deficit * phi, 0.0);
    out.err_estimate = ev.err + rf.deficit * phi;
    out.series_terms_used = ev.terms;
    out.diagnostics["tail_deficit"] = rf.deficit;
    if (gg.r == 2) out.diagnostics["lower_bound"] = 1.0;
    return out;
}

MetricResult ergodic_capacity_oracle(const GammaGammaParams& gg,
                                     const FtrParams& ftr,
                                     const RelayConfig& relay,
                                     const CapacityMode& cap,
                                     const TruncationPolicy& trunc) {
    return capacity_from_cdf(end_to_end_cdf_oracle(gg, ftr, relay, trunc), cap);
}

MetricResult ergodic_capacity_oracle(const GammaGammaParams& gg,
                                     const RfCcdf& rf, double c_r,
                                     const CapacityMode& cap) {
    auto cdf = [&](double g) { return af_cdf_oracle(gg, rf, c_r, g).value; };
    return capacity_from_cdf(cdf, cap);
}

// ---- effective capacity --------------------------------------------------

MetricResult effective_capacity(const GammaGammaParams& gg,
                                const FtrParams& ftr, const RelayConfig& relay,
                                const EffectiveCapacityParams& ec,
                                const TruncationPolicy& trunc) {
    if (!(ec.A > 0.0))
        throw std::domain_error("effective_capacity: QoS exponent must be positive");
    RfSeries rf = rf_series(ftr, trunc);
    MetricResult out;
    SeriesEval ev;
    if (relay.mode == RelayMode::af_fixed_gain) {
        require_af(relay);
        double x = relay.c_r / (2.0 * ftr.sigma2);
        double y = std::pow(gg.mu_r, 1.0 / gg.r) / (gg.alpha * gg.beta);
        std::vector<GammaFactor> extra{{ec.A, 0.0, 1.0 / gg.r, true},
                                       {1.0, 0.0, -1.0 / gg.r, true}};
        ev = af_series(gg, rf, extra, -std::lgamma(ec.A), x, y);
    } else {
        std::vector<GammaFactor> joint{{1.0, -1.0, -1.0, true},
                                       {ec.A, 1.0, 1.0, true}};
        double x = 2.0 * ftr.sigma2;
        double y = gg.mu_r / std::pow(gg.alpha * gg.beta, double(gg.r));
        ev = df_series(gg, rf, joint, -std::lgamma(ec.A), x, y);
    }
    double phi = std::clamp(ev.phi_last, 0.0, 1.0);
    double E = std::clamp(1.0 - ev.value - rf.deficit * phi, 1e-300, 1.0);
    out.value = -std::log2(E) / ec.A;
    out.err_estimate =
        (ev.err + rf.deficit * (1.0 - phi)) / (E * ec.A * kLn2);
    out.series_terms_used = ev.terms;
    out.diagnostics["tail_deficit"] = rf.deficit;
    return out;
}

MetricResult effective_capacity_oracle(const GammaGammaParams& gg,
                                       const FtrParams& ftr,
                                       const RelayConfig& relay,
                                       const EffectiveCapacityParams& ec,
                                       const TruncationPolicy& trunc) {
    if (!(ec.A > 0.0))
        throw std::domain_error("effective_capacity: QoS exponent must be positive");
    return effcap_from_cdf(end_to_end_cdf_oracle(gg, ftr, relay, trunc), ec.A);
}

MetricResult effective_capacity_oracle(const GammaGammaParams& gg,
                                       const RfCcdf& rf, double c_r,
                                       const EffectiveCapacityParams& ec) {
    if (!(ec.A > 0.0))
        throw std::domain_error("effective_capacity: QoS exponent must be positive");
    auto cdf = [&](double g) { return af_cdf_oracle(gg, rf, c_r, g).value; };
    return effcap_from_cdf(cdf, ec.A);
}

} // namespace fsomm
