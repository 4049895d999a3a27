#include "fsomm/mellin_barnes.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "fsomm/specfun.hpp"

namespace fsomm {

namespace {

using cplx = std::complex<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

const double kGlNode[8] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
const double kGlWeight[8] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

struct Nodes {
    std::vector<double> v; // imaginary offsets
    std::vector<double> w; // quadrature weights
};

Nodes build_nodes(double T, double width) {
    Nodes nd;
    int panels = std::max(1, int(std::ceil(2.0 * T / width)));
    double pw = 2.0 * T / panels;
    for (int p = 0; p < panels; ++p) {
        double mid = -T + (p + 0.5) * pw;
        double h = 0.5 * pw;
        for (int k = 0; k < 8; ++k) {
            nd.v.push_back(mid - h * kGlNode[k]);
            nd.w.push_back(h * kGlWeight[k]);
            nd.v.push_back(mid + h * kGlNode[k]);
            nd.w.push_back(h * kGlWeight[k]);
        }
    }
    return nd;
}

double decay_rate(const std::vector<const std::vector<GammaFactor>*>& groups,
                  bool s_dir) {
    double lam = 0.0;
    for (auto* g : groups)
        for (const auto& f : *g) {
            double c = s_dir ? f.cs : f.ct;
            lam += (f.numerator ? 1.0 : -1.0) * std::abs(c);
        }
    return 1.5707963267948966 * lam;
}

double panel_width(double z) {
    double lz = std::abs(std::log(z));
    return std::clamp(4.7 / std::max(1.0, lz), 0.25, 1.0);
}

// log of the product of gamma factors at a point, restricted to factors
// that pass the given predicate
template <typename Pred>
cplx log_factors(const std::vector<GammaFactor>& fs, cplx s, cplx t, Pred use) {
    cplx acc(0.0, 0.0);
    for (const auto& f : fs) {
        if (!use(f)) continue;
        cplx arg = f.c0 + f.cs * s + f.ct * t;
        cplx lg = log_gamma(arg);
        acc += f.numerator ? lg : -lg;
    }
    return acc;
}

cplx log_all(const std::vector<GammaFactor>& fs, cplx s, cplx t) {
    return log_factors(fs, s, t, [](const GammaFactor&) { return true; });
}

void check_im(double re, double im, double inv_scale) {
    if (std::abs(im) > 1e-8 * std::max(inv_scale, std::abs(re)))
        throw numerical_error("mellin-barnes: imaginary residual too large");
}

// ---- contour feasibility -------------------------------------------------

struct Constraint {
    double c0, cs, ct, norm;
};

std::vector<Constraint> gather_constraints(
    const std::vector<const std::vector<GammaFactor>*>& groups) {
    std::vector<Constraint> cs;
    for (auto* g : groups)
        for (const auto& f : *g)
            if (f.numerator)
                cs.push_back({f.c0, f.cs, f.ct,
                              std::hypot(f.cs, f.ct) > 0 ? std::hypot(f.cs, f.ct)
                                                         : 1.0});
    return cs;
}

double margin_at(const std::vector<Constraint>& cs, double sig, double tau) {
    double m = kInf;
    for (const auto& c : cs)
        m = std::min(m, (c.c0 + c.cs * sig + c.ct * tau) / c.norm);
    return m;
}

// Log magnitude of the integrand at the contour crossing point; the
// abscissae are placed near its minimum (saddle) to limit cancellation.
double center_height(const std::vector<const std::vector<GammaFactor>*>& groups,
                     double sig, double tau, double lnx, double lny) {
    double h = sig * lnx + tau * lny;
    for (auto* g : groups)
        for (const auto& f : *g) {
            double arg = f.c0 + f.cs * sig + f.ct * tau;
            double lg;
            if (arg > 0.0) {
                lg = std::lgamma(arg);
            } else {
                double n = std::round(arg);
                if (std::abs(arg - n) < 1e-6) return kInf; // denominator pole
                lg = std::lgamma(arg); // ln|Gamma|
            }
            h += f.numerator ? lg : -lg;
        }
    return h;
}

std::pair<double, double> pick_bivariate_contours(
    const std::vector<Constraint>& cs,
    const std::vector<const std::vector<GammaFactor>*>& groups, double lnx,
    double lny) {
    // widest-margin point first, to calibrate the feasibility threshold
    double mm = -kInf, mm_s = 0.0, mm_t = 0.0;
    {
        double ms = 0.0, mt = 0.0, sp = 30.0;
        for (int round = 0; round < 4; ++round) {
            double bs = ms, bt = mt;
            for (int i = 0; i <= 48; ++i)
                for (int k = 0; k <= 48; ++k) {
                    double sig = ms - sp + 2.0 * sp * i / 48;
                    double tau = mt - sp + 2.0 * sp * k / 48;
                    double m = std::min(margin_at(cs, sig, tau), 1.5) -
                               1e-3 * (std::abs(sig) + std::abs(tau));
                    if (m > mm) { mm = m; bs = sig; bt = tau; }
                }
            ms = bs; mt = bt; sp *= 0.08;
        }
        mm_s = ms; mm_t = mt;
        mm = margin_at(cs, mm_s, mm_t);
    }
    if (mm <= 1e-9)
        throw numerical_error("mellin-barnes: no feasible separating contour");
    const double kMinMargin = std::min(0.25, 0.5 * mm);
    double best_s = mm_s, best_t = mm_t, best_obj = kInf;
    bool found = false;
    double cx = mm_s, cy = mm_t, span = 30.0;
    for (int round = 0; round < 4; ++round) {
        int n = 48;
        double bs = best_s, bt = best_t;
        for (int i = 0; i <= n; ++i)
            for (int k = 0; k <= n; ++k) {
                double sig = cx - span + 2.0 * span * i / n;
                double tau = cy - span + 2.0 * span * k / n;
                if (margin_at(cs, sig, tau) < kMinMargin) continue;
                double obj = center_height(groups, sig, tau, lnx, lny);
                if (obj < best_obj) {
                    best_obj = obj;
                    bs = sig;
                    bt = tau;
                    found = true;
                }
            }
        if (!found) break;
        best_s = bs;
        best_t = bt;
        cx = best_s;
        cy = best_t;
        span *= 0.08;
    }
    if (!found || margin_at(cs, best_s, best_t) <= 1e-9)
        throw numerical_error("mellin-barnes: no feasible separating contour");
    return {best_s, best_t};
}

// ---- core evaluations ----------------------------------------------------

struct EvalResult {
    cplx mantissa;
    double log_scale;
};

EvalResult eval_univariate(const std::vector<GammaFactor>& fac, double z,
                           double c, double T, double width) {
    Nodes nd = build_nodes(T, width);
    double lnz = std::log(z);
    std::vector<cplx> L(nd.v.size());
    double maxre = -kInf;
    for (size_t i = 0; i < nd.v.size(); ++i) {
        cplx s(c, nd.v[i]);
        L[i] = log_all(fac, s, 0.0) - s * lnz;
        maxre = std::max(maxre, L[i].real());
    }
    cplx acc(0.0, 0.0);
    for (size_t i = 0; i < nd.v.size(); ++i)
        acc += nd.w[i] * std::exp(L[i] - maxre);
    return {acc / (2.0 * 3.141592653589793238), maxre};
}

} // namespace

// ---- FoxHSpec ------------------------------------------------------------

void FoxHSpec::validate() const {
    if (n > p || m > q || int(upper.size()) != p || int(lower.size()) != q)
        throw std::invalid_argument("FoxHSpec: inconsistent orders");
    for (const auto& [a, A] : upper)
        if (A <= 0.0) throw std::invalid_argument("FoxHSpec: exponent A <= 0");
    for (const auto& [b, B] : lower)
        if (B <= 0.0) throw std::invalid_argument("FoxHSpec: exponent B <= 0");
}

std::vector<GammaFactor> FoxHSpec::factors() const {
    std::vector<GammaFactor> fs;
    for (int j = 0; j < q; ++j)
        fs.push_back({lower[j].first * (j < m ? 1.0 : -1.0) + (j < m ? 0.0 : 1.0),
                      (j < m ? 1.0 : -1.0) * lower[j].second, 0.0, j < m});
    for (int j = 0; j < p; ++j)
        fs.push_back({j < n ? 1.0 - upper[j].first : upper[j].first,
                      (j < n ? -1.0 : 1.0) * upper[j].second, 0.0, j < n});
    return fs;
}

std::pair<double, double> FoxHSpec::abscissa_window() const {
    double lo = -kInf, hi = kInf;
    for (const auto& f : factors()) {
        if (!f.numerator) continue;
        if (f.cs > 0.0) lo = std::max(lo, -f.c0 / f.cs);
        if (f.cs < 0.0) hi = std::min(hi, f.c0 / -f.cs);
    }
    return {lo, hi};
}

// ---- public univariate ---------------------------------------------------

ScaledValue fox_h_scaled(const FoxHSpec& spec, double z, ContourSpec contour) {
    spec.validate();
    if (!(z > 0.0)) throw std::domain_error("fox_h: requires z > 0");
    auto fac = spec.factors();
    std::vector<const std::vector<GammaFactor>*> groups{&fac};
    double lam = decay_rate(groups, true);
    if (lam < 0.3)
        throw numerical_error("fox_h: integrand does not decay on the contour");
    double c = contour.abscissa;
    if (contour.adaptive) {
        auto [lo, hi] = spec.abscissa_window();
        if (lo >= hi) throw numerical_error("fox_h: no feasible separating contour");
        double a = std::isinf(lo) ? (std::isinf(hi) ? -20.0 : hi - 40.0) : lo;
        double b = std::isinf(hi) ? (std::isinf(lo) ? 20.0 : lo + 40.0) : hi;
        double margin = std::min(0.25, 0.2 * (b - a));
        a += margin;
        b -= margin;
        // place the contour near the saddle of the integrand on the real axis
        double lnz = std::log(z), best = kInf;
        c = 0.5 * (a + b);
        for (int i = 0; i <= 400; ++i) {
            double sig = a + (b - a) * i / 400.0;
            double h = center_height({&fac}, sig, 0.0, -lnz, 0.0);
            if (h < best) { best = h; c = sig; }
        }
    }
    double T = contour.half_height > 0.0 ? contour.half_height : 50.0 / lam;
    double w0 = panel_width(z) * 16.0 / contour.nodes_per_unit;

    EvalResult prev = eval_univariate(fac, z, c, T, 2.0 * w0);
    EvalResult cur = eval_univariate(fac, z, c, T, w0);
    double err = std::abs(cur.mantissa - prev.mantissa * std::exp(prev.log_scale - cur.log_scale));
    int refs = 1;
    while (err > 1e-8 * std::max(std::exp(-cur.log_scale), std::abs(cur.mantissa.real())) &&
           refs < contour.max_refinements) {
        prev = cur;
        w0 *= 0.5;
        cur = eval_univariate(fac, z, c, T, w0);
        err = std::abs(cur.mantissa - prev.mantissa * std::exp(prev.log_scale - cur.log_scale));
        ++refs;
    }
    if (err > 1e-6 * std::max(std::exp(-cur.log_scale), std::abs(cur.mantissa.real())))
        throw numerical_error("fox_h: refinements failed to converge");
    check_im(cur.mantissa.real(), cur.mantissa.imag(), std::exp(-cur.log_scale));
    return {cur.mantissa.real(), cur.log_scale, err,
            std::abs(cur.mantissa.imag())};
}

MetricResult fox_h(const FoxHSpec& spec, double z, ContourSpec contour) {
    ScaledValue sv = fox_h_scaled(spec, z, contour);
    MetricResult r;
    r.value = sv.mantissa * std::exp(sv.log_scale);
    r.err_estimate = std::max(sv.err, sv.im_resid) * std::exp(sv.log_scale);
    r.method = Method::exact_foxh;
    return r;
}

MetricResult meijer_g(const FoxHSpec& spec, double z, ContourSpec contour) {
    for (const auto& [a, A] : spec.upper)
        if (A != 1.0) throw std::invalid_argument("meijer_g: all exponents must be 1");
    for (const auto& [b, B] : spec.lower)
        if (B != 1.0) throw std::invalid_argument("meijer_g: all exponents must be 1");
    return fox_h(spec, z, contour);
}

// ---- bivariate -----------------------------------------------------------

BivariateFoxHSpec bivariate_from_notation(const std::vector<JointParam>& ju,
                                          const FoxHSpec& xg, const FoxHSpec& yg) {
    xg.validate();
    yg.validate();
    BivariateFoxHSpec sp;
    for (const auto& j : ju) sp.joint.push_back({1.0 - j.a, j.A, j.B, true});
    // theta kernels: the x^s y^t convention flips the sign of the
    // integration variable relative to chi(s) z^{-s}
    for (auto f : xg.factors()) {
        f.cs = -f.cs;
        sp.s_kernel.push_back(f);
    }
    for (auto f : yg.factors()) {
        f.ct = -f.cs;
        f.cs = 0.0;
        sp.t_kernel.push_back(f);
    }
    return sp;
}

namespace {

struct BivarPlan {
    double sig, tau, Ts, Tt, ws, wt;
};

BivarPlan plan_bivariate(const BivariateFoxHSpec& spec, const GammaFactor* per_j,
                         double x, double y, const ContourSpec& cs,
                         const ContourSpec& ct) {
    std::vector<const std::vector<GammaFactor>*> groups{&spec.joint,
                                                        &spec.s_kernel,
                                                        &spec.t_kernel};
    std::vector<GammaFactor> extra;
    if (per_j) {
        extra.push_back({per_j->c0, per_j->cs, 0.0, true});
        groups.push_back(&extra);
    }
    double lam_s = decay_rate(groups, true);
    double lam_t = decay_rate(groups, false);
    if (lam_s < 0.3 || lam_t < 0.3)
        throw numerical_error("fox_h2: integrand does not decay on the contours");
    BivarPlan pl;
    if (cs.adaptive || ct.adaptive) {
        auto cons = gather_constraints(groups);
        auto [s0, t0] =
            pick_bivariate_contours(cons, groups, std::log(x), std::log(y));
        pl.sig = cs.adaptive ? s0 : cs.abscissa;
        pl.tau = ct.adaptive ? t0 : ct.abscissa;
    } else {
        pl.sig = cs.abscissa;
        pl.tau = ct.abscissa;
    }
    pl.Ts = cs.half_height > 0.0 ? cs.half_height : 50.0 / lam_s;
    pl.Tt = ct.half_height > 0.0 ? ct.half_height : 50.0 / lam_t;
    pl.ws = 0.5 * panel_width(x) * 16.0 / cs.nodes_per_unit;
    pl.wt = 0.5 * panel_width(y) * 16.0 / ct.nodes_per_unit;
    return pl;
}

// Inner (t) integrals for every outer (s) node: J_i with a per-node log
// scale, so callers can attach per-term s factors cheaply.
struct OuterState {
    std::vector<cplx> s;        // outer contour points
    std::vector<double> w;      // outer weights
    std::vector<cplx> base;     // w_i * exp(Ls_i + log J_i - scale)
    double log_scale;
};

OuterState outer_state(const BivariateFoxHSpec& spec, double x, double y,
                       const BivarPlan& pl, double width_mult) {
    Nodes os = build_nodes(pl.Ts, pl.ws * width_mult);
    Nodes is = build_nodes(pl.Tt, pl.wt * width_mult);
    double lnx = std::log(x), lny = std::log(y);

    std::vector<cplx> Lt(is.v.size());
    for (size_t m = 0; m < is.v.size(); ++m) {
        cplx t(pl.tau, is.v[m]);
        Lt[m] = log_all(spec.t_kernel, 0.0, t) + t * lny;
    }

    OuterState st;
    st.s.resize(os.v.size());
    st.w = os.w;
    st.base.resize(os.v.size());
    std::vector<cplx> scratch(is.v.size());
    std::vector<double> logJ(os.v.size());
    std::vector<cplx> J(os.v.size());
    double max_total = -kInf;
    std::vector<double> Ls_re(os.v.size());
    std::vector<cplx> Ls(os.v.size());
    for (size_t i = 0; i < os.v.size(); ++i) {
        cplx s(pl.sig, os.v[i]);
        st.s[i] = s;
        Ls[i] = log_all(spec.s_kernel, s, 0.0) + s * lnx;
        double mx = -kInf;
        for (size_t m = 0; m < is.v.size(); ++m) {
            cplx t(pl.tau, is.v[m]);
            scratch[m] = Lt[m] + log_all(spec.joint, s, t);
            mx = std::max(mx, scratch[m].real());
        }
        cplx acc(0.0, 0.0);
        for (size_t m = 0; m < is.v.size(); ++m)
            acc += is.w[m] * std::exp(scratch[m] - mx);
        J[i] = acc;
        logJ[i] = mx;
        double tot = Ls[i].real() + mx + std::log(std::max(std::abs(acc), 1e-300));
        max_total = std::max(max_total, tot);
    }
    st.log_scale = max_total;
    for (size_t i = 0; i < os.v.size(); ++i) {
        if (std::abs(J[i]) == 0.0) {
            st.base[i] = 0.0;
            continue;
        }
        cplx logb = Ls[i] + logJ[i] + std::log(J[i]) - max_total;
        st.base[i] = st.w[i] * std::exp(logb);
    }
    return st;
}

constexpr double kInv4Pi2 = 1.0 / (4.0 * 9.869604401089358);

cplx series_sum(const OuterState& st, const GammaFactor* per_j,
                const std::vector<double>& log_pref, double* scale_out,
                double* last_term = nullptr) {
    if (!per_j) {
        cplx acc(0.0, 0.0);
        for (const auto& b : st.base) acc += b;
        *scale_out = st.log_scale;
        return acc * kInv4Pi2;
    }
    cplx total(0.0, 0.0);
    for (size_t j = 0; j < log_pref.size(); ++j) {
        if (std::isinf(log_pref[j]) && log_pref[j] < 0.0) {
            if (last_term && j + 1 == log_pref.size()) *last_term = 0.0;
            continue;
        }
        double center = log_gamma(cplx(per_j->c0 + double(j) + per_j->cs * st.s[0].real(), 0.0)).real();
        cplx acc(0.0, 0.0);
        for (size_t i = 0; i < st.s.size(); ++i) {
            cplx lg = log_gamma(per_j->c0 + double(j) + per_j->cs * st.s[i]);
            acc += st.base[i] * std::exp(lg - center);
        }
        cplx term = acc * std::exp(log_pref[j] + center + st.log_scale);
        if (last_term && j + 1 == log_pref.size())
            *last_term = term.real() * kInv4Pi2;
        total += term;
    }
    *scale_out = 0.0;
    return total * kInv4Pi2;
}

} // namespace

ScaledValue fox_h2_scaled(const BivariateFoxHSpec& spec, double x, double y,
                          ContourSpec contour_s, ContourSpec contour_t) {
    if (!(x > 0.0) || !(y > 0.0))
        throw std::domain_error("fox_h2: requires x, y > 0");
    BivarPlan pl = plan_bivariate(spec, nullptr, x, y, contour_s, contour_t);
    double sc_f = 0.0, sc_c = 0.0, err = 0.0;
    cplx vf;
    for (int ref = 0;; ++ref) {
        OuterState fine = outer_state(spec, x, y, pl, 1.0);
        OuterState coarse = outer_state(spec, x, y, pl, 2.0);
        vf = series_sum(fine, nullptr, {}, &sc_f);
        cplx vc = series_sum(coarse, nullptr, {}, &sc_c);
        err = std::abs(vf - vc * std::exp(sc_c - sc_f));
        if (err <= contour_s.rel_tol * std::abs(vf.real()) ||
            ref >= contour_s.max_refinements)
            break;
        pl.ws *= 0.5;
        pl.wt *= 0.5;
    }
    check_im(vf.real(), vf.imag(), std::exp(-sc_f));
    return {vf.real(), sc_f, err, std::abs(vf.imag())};
}

MetricResult fox_h2(const BivariateFoxHSpec& spec, double x, double y,
                    ContourSpec contour_s, ContourSpec contour_t) {
    ScaledValue sv = fox_h2_scaled(spec, x, y, contour_s, contour_t);
    MetricResult r;
    r.value = sv.mantissa * std::exp(sv.log_scale);
    r.err_estimate = std::max(sv.err, sv.im_resid) * std::exp(sv.log_scale);
    r.method = Method::exact_foxh;
    return r;
}

MetricResult fox_h2_series(const BivariateFoxHSpec& base, GammaFactor per_j,
                           const std::vector<double>& log_pref, double x,
                           double y, ContourSpec contour_s,
                           ContourSpec contour_t) {
    if (!(x > 0.0) || !(y > 0.0))
        throw std::domain_error("fox_h2_series: requires x, y > 0");
    if (log_pref.empty())
        return {0.0, 0.0, Method::exact_foxh, 0, {}};
    BivarPlan pl = plan_bivariate(base, &per_j, x, y, contour_s, contour_t);
    double sc = 0.0, err = 0.0, last = 0.0;
    cplx vf;
    for (int ref = 0;; ++ref) {
        OuterState fine = outer_state(base, x, y, pl, 1.0);
        OuterState coarse = outer_state(base, x, y, pl, 2.0);
        vf = series_sum(fine, &per_j, log_pref, &sc, &last);
        cplx vc = series_sum(coarse, &per_j, log_pref, &sc);
        err = std::abs(vf - vc);
        if (err <= contour_s.rel_tol * std::abs(vf.real()) + 1e-15 ||
            ref >= contour_s.max_refinements)
            break;
        pl.ws *= 0.5;
        pl.wt *= 0.5;
    }
    check_im(vf.real(), vf.imag(), 1.0);
    MetricResult r;
    r.value = vf.real();
    r.err_estimate = std::max(err, std::abs(vf.imag()));
    r.method = Method::exact_foxh;
    r.series_terms_used = int(log_pref.size());
    r.diagnostics["last_term"] = last;
    return r;
}

} // namespace fsomm
