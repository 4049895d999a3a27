#include "fsomm/channels.hpp"

#include <algorithm>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "fsomm/mellin_barnes.hpp"
#include "fsomm/specfun.hpp"

namespace fsomm {

namespace {

constexpr double kPi = 3.14159265358979323846;

double binom(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b *= double(n - k + i) / double(i);
    return b;
}

// finite double sum; cancels catastrophically in float64 beyond j ~ 40
double d_j_sum(double m, double K, double Delta, int j) {
    double R = (m + K) * (m + K) - (K * Delta) * (K * Delta);
    double x = (m + K) / std::sqrt(R);
    std::complex<double> tot(0.0, 0.0), comp(0.0, 0.0);
    for (int k = 0; k <= j; ++k) {
        double inner = 0.0;
        for (int l = 0; l <= k; ++l)
            inner += binom(k, l) * real_gamma(j + m + 2.0 * l - k) *
                     legendre_p(j + m - 1.0, k - 2 * l, x);
        // phase exp(i*pi*(2l - k)) is exactly (-1)^k for every l
        std::complex<double> term(binom(j, k) * std::pow(0.5 * Delta, k) *
                                      (k % 2 == 0 ? 1.0 : -1.0) * inner,
                                  0.0);
        std::complex<double> y = term - comp;
        std::complex<double> t = tot + y;
        comp = (t - tot) - y;
        tot = t;
    }
    if (std::abs(tot.imag()) > 1e-8 * std::abs(tot.real()) + 1e-12)
        throw numerical_error("ftr_log_d_j: imaginary residual too large");
    return std::pow(R, -0.5 * (j + m)) * tot.real();
}

// equivalent positive-integrand form, stable for all j
double log_d_j_integral(double m, double K, double Delta, int j) {
    const double nodes[8] = {0.0950125098376374, 0.2816035507792589,
                             0.4580167776572274, 0.6178762444026438,
                             0.7554044083550030, 0.8656312023878318,
                             0.9445750230732326, 0.9894009349916499};
    const double wts[8] = {0.1894506104550685, 0.1826034150449236,
                           0.1691565193950025, 0.1495959888165767,
                           0.1246289712555339, 0.0951585116824928,
                           0.0622535239386479, 0.0271524594117541};
    const int panels = 16;
    double g[panels * 16];
    double w[panels * 16];
    double mx = -std::numeric_limits<double>::infinity();
    int idx = 0;
    for (int p = 0; p < panels; ++p) {
        double mid = (p + 0.5) * kPi / panels;
        double h = 0.5 * kPi / panels;
        for (int k = 0; k < 16; ++k) {
            double phi = mid + (k < 8 ? -h * nodes[k] : h * nodes[k - 8]);
            double c = std::cos(phi);
            double lg = j * std::log1p(Delta * c) -
                        (j + m) * std::log(m + K + K * Delta * c);
            g[idx] = lg;
            w[idx] = h * wts[k % 8];
            mx = std::max(mx, lg);
            ++idx;
        }
    }
    double s = 0.0;
    for (int i = 0; i < idx; ++i) s += w[i] * std::exp(g[i] - mx);
    return std::lgamma(j + m) + mx + std::log(s / kPi);
}

} // namespace

double ftr_log_d_j(double m, double K, double Delta, int j) {
    if (m <= 0.0 || K < 0.0 || Delta < 0.0 || Delta > 1.0 || j < 0)
        throw std::domain_error("ftr_log_d_j: bad parameters");
    if (j <= 25) {
        double d = d_j_sum(m, K, Delta, j);
        if (!(d > 0.0))
            throw numerical_error("ftr_log_d_j: nonpositive coefficient");
        return std::log(d);
    }
    return log_d_j_integral(m, K, Delta, j);
}

double ftr_d_j(double m, double K, double Delta, int j) {
    return std::exp(ftr_log_d_j(m, K, Delta, j));
}

FtrParams make_ftr(double m, double K, double Delta, double gamma_bar) {
    if (m <= 0.0 || K < 0.0 || Delta < 0.0 || Delta > 1.0 || gamma_bar <= 0.0)
        throw std::domain_error("make_ftr: bad parameters");
    FtrParams p;
    p.m = m;
    p.K = K;
    p.Delta = Delta;
    p.sigma2 = gamma_bar / (2.0 * (1.0 + K));
    return p;
}

double ftr_log_weight(const FtrParams& p, int j) {
    if (p.K == 0.0)
        return j == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return p.m * std::log(p.m) - std::lgamma(p.m) + j * std::log(p.K) -
           std::lgamma(j + 1.0) + ftr_log_d_j(p.m, p.K, p.Delta, j);
}

std::pair<int, double> ftr_required_terms(const FtrParams& p, double epsilon,
                                          int scan_cap) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::domain_error("ftr_required_terms: epsilon must be in (0, 1)");
    double s = 0.0, comp = 0.0;
    for (int j = 0; j <= scan_cap; ++j) {
        double y = std::exp(ftr_log_weight(p, j)) - comp;
        double t = s + y;
        comp = (t - s) - y;
        s = t;
        if (1.0 - s < epsilon) return {j, 1.0 - s};
    }
    throw numerical_error("ftr_required_terms: scan cap reached");
}

std::vector<double> ftr_log_weights(const FtrParams& p,
                                    const TruncationPolicy& policy) {
    std::vector<double> lw;
    if (policy.fixed_terms > 0) {
        for (int j = 0; j < policy.fixed_terms; ++j)
            lw.push_back(ftr_log_weight(p, j));
        return lw;
    }
    double s = 0.0, comp = 0.0;
    for (int j = 0; j < policy.hard_cap; ++j) {
        lw.push_back(ftr_log_weight(p, j));
        double y = std::exp(lw.back()) - comp;
        double t = s + y;
        comp = (t - s) - y;
        s = t;
        if (1.0 - s < policy.target_deficit) break;
    }
    return lw;
}

double ftr_pdf(const FtrParams& p, double gamma, const TruncationPolicy& policy) {
    if (gamma < 0.0) return 0.0;
    auto lw = ftr_log_weights(p, policy);
    double g2 = 2.0 * p.sigma2;
    if (gamma == 0.0) return std::exp(lw[0]) / g2;
    double s = 0.0;
    for (size_t j = 0; j < lw.size(); ++j)
        s += std::exp(lw[j] + j * std::log(gamma) - gamma / g2 -
                      (j + 1.0) * std::log(g2) - std::lgamma(j + 1.0));
    return s;
}

double ftr_cdf(const FtrParams& p, double gamma, const TruncationPolicy& policy) {
    if (gamma <= 0.0) return 0.0;
    auto lw = ftr_log_weights(p, policy);
    double z = gamma / (2.0 * p.sigma2);
    double s = 0.0;
    for (size_t j = 0; j < lw.size(); ++j)
        s += std::exp(lw[j]) * reg_gamma_p(j + 1.0, z);
    return s;
}

double ftr_sample(const FtrParams& p, std::mt19937_64& rng) {
    std::gamma_distribution<double> shadow(p.m, 1.0 / p.m);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    std::normal_distribution<double> diffuse(0.0, std::sqrt(p.sigma2));
    double root = std::sqrt(std::max(0.0, 1.0 - p.Delta * p.Delta));
    double v1 = std::sqrt(p.sigma2 * p.K * (1.0 + root));
    double v2 = std::sqrt(p.sigma2 * p.K * (1.0 - root));
    double zr = std::sqrt(shadow(rng));
    double p1 = phase(rng), p2 = phase(rng);
    double re = zr * (v1 * std::cos(p1) + v2 * std::cos(p2)) + diffuse(rng);
    double im = zr * (v1 * std::sin(p1) + v2 * std::sin(p2)) + diffuse(rng);
    return re * re + im * im;
}

// ---- optical hop ---------------------------------------------------------

GammaGammaParams make_gamma_gamma(double alpha, double beta, double xi, int r,
                                  double gamma_bar) {
    if (alpha <= 0.0 || beta <= 0.0 || gamma_bar <= 0.0)
        throw std::domain_error("make_gamma_gamma: bad parameters");
    if (r != 1 && r != 2)
        throw std::domain_error("make_gamma_gamma: detection order must be 1 or 2");
    GammaGammaParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.r = r;
    bool pointing = std::isfinite(xi) && xi > 0.0;
    p.xi2 = pointing ? xi * xi : std::numeric_limits<double>::infinity();
    if (r == 1) {
        p.mu_r = gamma_bar;
    } else {
        double ab = alpha * beta / ((alpha + 1.0) * (beta + 1.0));
        if (pointing) {
            double x2 = p.xi2;
            p.mu_r = gamma_bar * ab * x2 * (x2 + 2.0) / ((x2 + 1.0) * (x2 + 1.0));
        } else {
            p.mu_r = gamma_bar * ab;
        }
    }
    return p;
}

double rytov_variance(const RytovInputs& in) {
    if (in.cn2 <= 0.0 || in.path_m <= 0.0 || in.wavelength_m <= 0.0)
        throw std::domain_error("rytov_variance: bad inputs");
    double k = 2.0 * kPi / in.wavelength_m;
    return 1.23 * in.cn2 * std::pow(k, 7.0 / 6.0) * std::pow(in.path_m, 11.0 / 6.0);
}

std::pair<double, double> rytov_to_alpha_beta(const RytovInputs& in) {
    double s2 = rytov_variance(in);
    double s125 = std::pow(s2, 12.0 / 5.0);
    double a = 1.0 / std::expm1(0.49 * s2 / std::pow(1.0 + 1.11 * s125, 7.0 / 6.0));
    double b = 1.0 / std::expm1(0.51 * s2 / std::pow(1.0 + 0.69 * s125, 5.0 / 6.0));
    return {a, b};
}

double gg_pdf(const GammaGammaParams& p, double gamma) {
    if (gamma <= 0.0) return 0.0;
    double z = p.alpha * p.beta * std::pow(gamma / p.mu_r, 1.0 / p.r);
    FoxHSpec g;
    double pref;
    if (p.has_pointing()) {
        g.m = 3; g.n = 0; g.p = 1; g.q = 3;
        g.upper = {{p.xi2 + 1.0, 1.0}};
        g.lower = {{p.xi2, 1.0}, {p.alpha, 1.0}, {p.beta, 1.0}};
        pref = p.xi2;
    } else {
        g.m = 2; g.n = 0; g.p = 0; g.q = 2;
        g.lower = {{p.alpha, 1.0}, {p.beta, 1.0}};
        pref = 1.0;
    }
    double v = fox_h(g, z).value;
    return std::max(0.0, pref * v / (p.r * gamma * real_gamma(p.alpha) *
                                     real_gamma(p.beta)));
}

double gg_cdf(const GammaGammaParams& p, double gamma) {
    if (gamma <= 0.0) return 0.0;
    double z = p.alpha * p.beta * std::pow(gamma / p.mu_r, 1.0 / p.r);
    // far tail: complement below 1e-50, contour quadrature cannot resolve it
    if (z > 1e4) return 1.0;
    FoxHSpec g;
    double pref;
    if (p.has_pointing()) {
        g.m = 3; g.n = 1; g.p = 2; g.q = 4;
        g.upper = {{1.0, 1.0}, {p.xi2 + 1.0, 1.0}};
        g.lower = {{p.xi2, 1.0}, {p.alpha, 1.0}, {p.beta, 1.0}, {0.0, 1.0}};
        pref = p.xi2;
    } else {
        g.m = 2; g.n = 1; g.p = 1; g.q = 3;
        g.upper = {{1.0, 1.0}};
        g.lower = {{p.alpha, 1.0}, {p.beta, 1.0}, {0.0, 1.0}};
        pref = 1.0;
    }
    ScaledValue sv = fox_h_scaled(g, z);
    double v = pref * sv.mantissa /
               (real_gamma(p.alpha) * real_gamma(p.beta)) *
               std::exp(sv.log_scale);
    return std::clamp(v, 0.0, 1.0);
}

GgSampler::GgSampler(const GammaGammaParams& p) : mu_r_(p.mu_r) {
    GammaGammaParams unit = p;
    unit.mu_r = 1.0;
    const int n = 2048;
    const double lo = std::log(1e-10), hi = std::log(1e4);
    double prev = -1.0;
    for (int i = 0; i < n; ++i) {
        double lu = lo + (hi - lo) * i / (n - 1);
        double F = gg_cdf(unit, std::exp(lu));
        if (F > prev) { // keep the table strictly monotone
            log_u_.push_back(lu);
            cdf_.push_back(F);
            prev = F;
        }
    }
    if (cdf_.size() < 16 || cdf_.front() <= 0.0)
        throw numerical_error("GgSampler: degenerate inverse-CDF table");
    low_exp_ = (std::log(cdf_[1]) - std::log(cdf_[0])) / (log_u_[1] - log_u_[0]);
}

double GgSampler::draw(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double U = uni(rng);
    double lu;
    if (U <= cdf_.front()) {
        lu = log_u_.front() +
             std::log(std::max(U, 1e-300) / cdf_.front()) / low_exp_;
    } else if (U >= cdf_.back()) {
        lu = log_u_.back();
    } else {
        auto it = std::lower_bound(cdf_.begin(), cdf_.end(), U);
        size_t k = it - cdf_.begin();
        double f = (U - cdf_[k - 1]) / (cdf_[k] - cdf_[k - 1]);
        lu = log_u_[k - 1] + f * (log_u_[k] - log_u_[k - 1]);
    }
    return mu_r_ * std::exp(lu);
}

const GgSampler& gg_sampler_cached(const GammaGammaParams& p) {
    // the inverse-CDF table depends only on the shape parameters, so the
    // cache is keyed without mu_r and scaled by callers
    struct Key {
        double a, b, x2;
        int r;
        bool operator<(const Key& o) const {
            return std::tie(a, b, x2, r) < std::tie(o.a, o.b, o.x2, o.r);
        }
    };
    static std::map<Key, GgSampler> cache;
    static std::mutex mu;
    Key k{p.alpha, p.beta, p.xi2, p.r};
    GammaGammaParams unit = p;
    unit.mu_r = 1.0;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(k);
    if (it == cache.end()) it = cache.emplace(k, GgSampler(unit)).first;
    return it->second;
}

double gg_sample(const GammaGammaParams& p, std::mt19937_64& rng) {
    return p.mu_r * gg_sampler_cached(p).draw(rng);
}

double gg_sample_product(const GammaGammaParams& p, std::mt19937_64& rng) {
    std::gamma_distribution<double> ga(p.alpha, 1.0 / p.alpha);
    std::gamma_distribution<double> gb(p.beta, 1.0 / p.beta);
    double h = ga(rng) * gb(rng);
    if (p.has_pointing()) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        h *= std::pow(u(rng), 1.0 / p.xi2);
    }
    return p.mu_r * std::pow(h, double(p.r));
}

} // namespace fsomm
