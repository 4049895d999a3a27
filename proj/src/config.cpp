#include "fsomm/config.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace fsomm {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct RawValue {
    std::string str;
    double num = 0.0;
    bool is_string = false;
    int line = 0;
    mutable bool used = false;
};

// The accepted config grammar is a TOML subset: [section] headers,
// key = value pairs, values are numbers or double-quoted strings,
// # starts a comment.
class RawConfig {
  public:
    RawConfig(const std::string& text, std::string origin)
        : origin_(std::move(origin)) {
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            size_t hash = line.find('#');
            size_t quote = line.find('"');
            if (hash != std::string::npos &&
                (quote == std::string::npos || hash < quote))
                line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    parse_fail(lineno, "unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty())
                    parse_fail(lineno, "empty section name");
                continue;
            }
            size_t eq = line.find('=');
            if (eq == std::string::npos)
                parse_fail(lineno, "expected key = value");
            std::string key = trim(line.substr(0, eq));
            std::string val = trim(line.substr(eq + 1));
            if (key.empty()) parse_fail(lineno, "empty key");
            if (val.empty()) parse_fail(lineno, "empty value");
            RawValue rv;
            rv.line = lineno;
            if (val.front() == '"') {
                if (val.size() < 2 || val.back() != '"')
                    parse_fail(lineno, "unterminated string");
                rv.str = val.substr(1, val.size() - 2);
                rv.is_string = true;
            } else {
                char* end = nullptr;
                rv.num = std::strtod(val.c_str(), &end);
                if (end != val.c_str() + val.size())
                    parse_fail(lineno, "expected a number or quoted string");
            }
            std::string path = section.empty() ? key : section + "." + key;
            if (kv_.count(path)) parse_fail(lineno, "duplicate key " + path);
            kv_.emplace(std::move(path), std::move(rv));
        }
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    double num(const std::string& key, double fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        if (it->second.is_string)
            semantic_fail(key, "expected a number");
        it->second.used = true;
        return it->second.num;
    }

    double num_req(const std::string& key) const {
        if (!has(key)) semantic_fail(key, "required key is missing");
        return num(key, 0.0);
    }

    std::string str(const std::string& key, const std::string& fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        if (!it->second.is_string)
            semantic_fail(key, "expected a quoted string");
        it->second.used = true;
        return it->second.str;
    }

    void mark_section_used(const std::string& section) const {
        for (auto& [k, v] : kv_)
            if (k.rfind(section + ".", 0) == 0) v.used = true;
    }

    void check_all_used() const {
        for (const auto& [k, v] : kv_)
            if (!v.used) semantic_fail(k, "unknown key");
    }

    [[noreturn]] void semantic_fail(const std::string& key,
                                    const std::string& msg) const {
        throw ConfigError(origin_ + ": " + key + ": " + msg);
    }

  private:
    [[noreturn]] void parse_fail(int lineno, const std::string& msg) const {
        throw ConfigError(origin_ + ":" + std::to_string(lineno) + ": " + msg);
    }

    std::string origin_;
    std::map<std::string, RawValue> kv_;
};

std::vector<double> split_numbers(const RawConfig& raw, const std::string& key,
                                  const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size())
            raw.semantic_fail(key, "expected space-separated numbers");
        out.push_back(v);
    }
    if (out.empty()) raw.semantic_fail(key, "empty list");
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig build_scenario(const RawConfig& raw) {
    ScenarioConfig cfg;
    cfg.id = raw.str("scenario.id", "scenario");
    cfg.gamma_th = raw.num("scenario.gamma_th", 1.0);
    if (cfg.gamma_th <= 0.0)
        raw.semantic_fail("scenario.gamma_th", "must be positive");
    cfg.snr_db = raw.num("scenario.snr_db", 10.0);

    // optical hop: named preset, explicit (alpha, beta), or Rytov inputs
    if (raw.has("fso.turbulence")) {
        std::string t = raw.str("fso.turbulence", "");
        if (t == "moderate") {
            cfg.alpha = 5.42;
            cfg.beta = 3.8;
        } else if (t == "strong") {
            cfg.alpha = 3.446;
            cfg.beta = 1.032;
        } else {
            raw.semantic_fail("fso.turbulence",
                              "unknown preset (moderate|strong)");
        }
    } else if (raw.has("fso.alpha") || raw.has("fso.beta")) {
        cfg.alpha = raw.num_req("fso.alpha");
        cfg.beta = raw.num_req("fso.beta");
    } else if (raw.has("fso.cn2")) {
        RytovInputs ry;
        ry.cn2 = raw.num_req("fso.cn2");
        ry.path_m = raw.num_req("fso.path_m");
        ry.wavelength_m = raw.num_req("fso.wavelength_m");
        auto [a, b] = rytov_to_alpha_beta(ry);
        cfg.alpha = a;
        cfg.beta = b;
    } else {
        raw.semantic_fail(
            "fso.alpha", "specify turbulence preset, alpha/beta, or cn2 inputs");
    }
    if (cfg.alpha <= 0.0) raw.semantic_fail("fso.alpha", "must be positive");
    if (cfg.beta <= 0.0) raw.semantic_fail("fso.beta", "must be positive");
    cfg.xi = raw.num("fso.xi", 0.0);
    cfg.r = int(raw.num("fso.r", 1.0));
    if (cfg.r != 1 && cfg.r != 2)
        raw.semantic_fail("fso.r", "detection order must be 1 or 2");

    cfg.m = raw.num_req("rf.m");
    cfg.K = raw.num_req("rf.K");
    cfg.Delta = raw.num_req("rf.delta");
    if (cfg.m <= 0.0) raw.semantic_fail("rf.m", "must be positive");
    if (cfg.K < 0.0) raw.semantic_fail("rf.K", "must be non-negative");
    if (cfg.Delta < 0.0 || cfg.Delta > 1.0)
        raw.semantic_fail("rf.delta", "must lie in [0, 1]");

    std::string mode = raw.str("relay.mode", "");
    if (mode == "af") {
        cfg.relay.mode = RelayMode::af_fixed_gain;
        if (!raw.has("relay.c_r"))
            raw.semantic_fail("relay.c_r", "required for AF relaying");
        cfg.relay.c_r = raw.num_req("relay.c_r");
    } else if (mode == "df") {
        cfg.relay.mode = RelayMode::df;
        if (raw.has("relay.c_r"))
            raw.semantic_fail("relay.c_r", "only valid for AF relaying");
        cfg.relay.c_r = 0.0;
    } else {
        raw.semantic_fail("relay.mode", "must be \"af\" or \"df\"");
    }

    if (raw.has("modulation.preset")) {
        std::string p = raw.str("modulation.preset", "");
        if (p == "dbpsk")
            cfg.mod = ModulationScheme::dbpsk();
        else if (p == "cbpsk")
            cfg.mod = ModulationScheme::cbpsk();
        else
            raw.semantic_fail("modulation.preset",
                              "unknown preset (cbpsk|dbpsk)");
    } else if (raw.has("modulation.p")) {
        cfg.mod.delta = raw.num("modulation.delta", 1.0);
        cfg.mod.p = raw.num_req("modulation.p");
        cfg.mod.q = split_numbers(raw, "modulation.q",
                                  raw.str("modulation.q", "1.0"));
        cfg.mod.n = int(raw.num("modulation.n", double(cfg.mod.q.size())));
        cfg.mod.validate();
    }

    cfg.cap = CapacityMode::for_detection(cfg.r);
    cfg.cap.c = raw.num("capacity.c", cfg.cap.c);
    if (cfg.cap.c <= 0.0) raw.semantic_fail("capacity.c", "must be positive");
    cfg.ec.A = raw.num("capacity.A", 1.0);
    if (cfg.ec.A <= 0.0) raw.semantic_fail("capacity.A", "must be positive");

    cfg.trunc.fixed_terms = int(raw.num("trunc.fixed_terms", 0.0));
    cfg.trunc.target_deficit = raw.num("trunc.target_deficit", 1e-6);
    cfg.trunc.hard_cap = int(raw.num("trunc.hard_cap", 200.0));
    if (cfg.trunc.target_deficit <= 0.0)
        raw.semantic_fail("trunc.target_deficit", "must be positive");
    if (cfg.trunc.hard_cap <= 0)
        raw.semantic_fail("trunc.hard_cap", "must be positive");

    double samples = raw.num("mc.samples", 1e6);
    if (samples < 1.0) raw.semantic_fail("mc.samples", "must be positive");
    cfg.mc.samples = std::uint64_t(samples);
    cfg.mc.seed = std::uint64_t(raw.num("mc.seed", 1.0));
    cfg.mc.workers = int(raw.num("mc.workers", 1.0));
    if (cfg.mc.workers <= 0) raw.semantic_fail("mc.workers", "must be positive");

    raw.mark_section_used("sweep");
    raw.check_all_used();
    return cfg;
}

Metric metric_from_name(const RawConfig& raw, const std::string& key,
                        const std::string& name) {
    if (name == "outage") return Metric::outage;
    if (name == "ber") return Metric::ber;
    if (name == "capacity") return Metric::capacity;
    if (name == "effcap") return Metric::effcap;
    raw.semantic_fail(key, "unknown metric " + name);
}

SweepMethod method_from_name(const RawConfig& raw, const std::string& key,
                             const std::string& name) {
    if (name == "exact") return SweepMethod::exact;
    if (name == "asymptotic") return SweepMethod::asymptotic;
    if (name == "oracle") return SweepMethod::oracle;
    if (name == "mc") return SweepMethod::mc;
    raw.semantic_fail(key, "unknown method " + name);
}

SweepSpec build_sweep(const RawConfig& raw) {
    SweepSpec sw;
    sw.snr_db_start = raw.num("sweep.snr_db_start", sw.snr_db_start);
    sw.snr_db_stop = raw.num("sweep.snr_db_stop", sw.snr_db_stop);
    sw.snr_db_step = raw.num("sweep.snr_db_step", sw.snr_db_step);
    if (raw.has("sweep.metrics")) {
        sw.metrics.clear();
        std::istringstream in(raw.str("sweep.metrics", ""));
        std::string tok;
        while (in >> tok)
            sw.metrics.push_back(metric_from_name(raw, "sweep.metrics", tok));
    }
    if (raw.has("sweep.methods")) {
        sw.methods.clear();
        std::istringstream in(raw.str("sweep.methods", ""));
        std::string tok;
        while (in >> tok)
            sw.methods.push_back(method_from_name(raw, "sweep.methods", tok));
    }
    try {
        sw.validate();
    } catch (const std::exception& e) {
        raw.semantic_fail("sweep.snr_db_start", e.what());
    }
    return sw;
}

} // namespace

GammaGammaParams ScenarioConfig::gg_at(double gamma_bar) const {
    return make_gamma_gamma(alpha, beta, xi, r, gamma_bar);
}

FtrParams ScenarioConfig::ftr_at(double gamma_bar) const {
    return make_ftr(m, K, Delta, gamma_bar);
}

const char* metric_name(Metric m) {
    switch (m) {
        case Metric::outage: return "outage";
        case Metric::ber: return "ber";
        case Metric::capacity: return "capacity";
        case Metric::effcap: return "effcap";
    }
    return "?";
}

const char* sweep_method_name(SweepMethod m) {
    switch (m) {
        case SweepMethod::exact: return "exact";
        case SweepMethod::asymptotic: return "asymptotic";
        case SweepMethod::oracle: return "oracle";
        case SweepMethod::mc: return "mc";
    }
    return "?";
}

void SweepSpec::validate() const {
    if (!(snr_db_start < snr_db_stop))
        throw ConfigError("sweep range: start must be below stop");
    if (!(snr_db_step > 0.0))
        throw ConfigError("sweep range: step must be positive");
}

std::vector<double> SweepSpec::grid() const {
    validate();
    std::vector<double> g;
    for (int i = 0;; ++i) {
        double x = snr_db_start + i * snr_db_step;
        if (x > snr_db_stop + 1e-9 * snr_db_step) break;
        g.push_back(x);
    }
    return g;
}

ScenarioConfig parse_config(const std::string& path) {
    return parse_config_text(read_file(path), path);
}

ScenarioConfig parse_config_text(const std::string& text,
                                 const std::string& origin) {
    RawConfig raw(text, origin);
    return build_scenario(raw);
}

SweepSpec parse_sweep(const std::string& path) {
    return parse_sweep_text(read_file(path), path);
}

SweepSpec parse_sweep_text(const std::string& text, const std::string& origin) {
    RawConfig raw(text, origin);
    return build_sweep(raw);
}

OutputRow eval_point(const ScenarioConfig& cfg, Metric metric,
                     SweepMethod method, double snr_db) {
    OutputRow row;
    row.scenario_id = cfg.id;
    row.metric = metric_name(metric);
    row.method = sweep_method_name(method);
    row.snr_db = snr_db;
    double gb = std::pow(10.0, snr_db / 10.0);
    GammaGammaParams gg = cfg.gg_at(gb);
    FtrParams ftr = cfg.ftr_at(gb);
    bool af = cfg.relay.mode == RelayMode::af_fixed_gain;

    if (method == SweepMethod::mc) {
        Estimate e;
        switch (metric) {
            case Metric::outage:
                e = estimate_outage(cfg.mc, gg, ftr, cfg.relay, cfg.gamma_th);
                break;
            case Metric::ber:
                e = estimate_ber(cfg.mc, gg, ftr, cfg.relay, cfg.mod);
                break;
            case Metric::capacity:
                e = estimate_capacity(cfg.mc, gg, ftr, cfg.relay, cfg.cap);
                break;
            case Metric::effcap:
                e = estimate_effective_capacity(cfg.mc, gg, ftr, cfg.relay,
                                                cfg.ec);
                break;
        }
        row.value = e.mean;
        row.err_estimate = e.std_error;
        row.samples = long(e.samples_used);
        return row;
    }

    MetricResult res;
    switch (metric) {
        case Metric::outage:
            if (method == SweepMethod::exact)
                res = af ? af_cdf(gg, ftr, cfg.relay, cfg.gamma_th, cfg.trunc)
                         : df_cdf(gg, ftr, cfg.gamma_th, cfg.trunc);
            else if (method == SweepMethod::oracle)
                res = af ? af_cdf_oracle(gg, ftr, cfg.relay, cfg.gamma_th,
                                         cfg.trunc)
                         : df_cdf_oracle(gg, ftr, cfg.gamma_th, cfg.trunc);
            else
                res = af ? af_cdf_asymptotic(gg, ftr, cfg.relay, cfg.gamma_th,
                                             cfg.trunc)
                         : df_cdf_asymptotic(gg, ftr, cfg.gamma_th, cfg.trunc);
            break;
        case Metric::ber:
            if (method == SweepMethod::exact)
                res = avg_ber(gg, ftr, cfg.relay, cfg.mod, cfg.trunc);
            else if (method == SweepMethod::oracle)
                res = avg_ber_oracle(gg, ftr, cfg.relay, cfg.mod, cfg.trunc);
            else
                res = avg_ber_asymptotic(gg, ftr, cfg.relay, cfg.mod,
                                         cfg.trunc);
            break;
        case Metric::capacity:
            if (method == SweepMethod::asymptotic)
                throw std::runtime_error(
                    "no asymptotic expansion for ergodic capacity");
            res = method == SweepMethod::exact
                      ? ergodic_capacity(gg, ftr, cfg.relay, cfg.cap, cfg.trunc)
                      : ergodic_capacity_oracle(gg, ftr, cfg.relay, cfg.cap,
                                                cfg.trunc);
            break;
        case Metric::effcap:
            if (method == SweepMethod::asymptotic)
                throw std::runtime_error(
                    "no asymptotic expansion for effective capacity");
            res = method == SweepMethod::exact
                      ? effective_capacity(gg, ftr, cfg.relay, cfg.ec,
                                           cfg.trunc)
                      : effective_capacity_oracle(gg, ftr, cfg.relay, cfg.ec,
                                                  cfg.trunc);
            break;
    }
    row.value = res.value;
    row.err_estimate = res.err_estimate;
    row.n_terms = res.series_terms_used;
    return row;
}

int sweep_worker_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FSOMM_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

std::vector<OutputRow> run_sweep(const ScenarioConfig& cfg,
                                 const SweepSpec& sweep, int workers) {
    sweep.validate();
    std::vector<double> grid = sweep.grid();
    struct Task {
        Metric metric;
        SweepMethod method;
        double snr_db;
    };
    std::vector<Task> tasks;
    for (double db : grid)
        for (Metric m : sweep.metrics)
            for (SweepMethod meth : sweep.methods)
                tasks.push_back({m, meth, db});
    std::vector<OutputRow> rows(tasks.size());
    int n_workers = std::min<std::size_t>(sweep_worker_count(workers),
                                          std::max<std::size_t>(tasks.size(), 1));
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& t = tasks[i];
            try {
                rows[i] = eval_point(cfg, t.metric, t.method, t.snr_db);
            } catch (const std::exception&) {
                OutputRow bad;
                bad.scenario_id = cfg.id;
                bad.metric = metric_name(t.metric);
                bad.method = sweep_method_name(t.method);
                bad.snr_db = t.snr_db;
                bad.value = std::nan("");
                bad.err_estimate = std::nan("");
                rows[i] = bad;
            }
        }
    };
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return rows;
}

void write_csv(std::ostream& os, const std::vector<OutputRow>& rows) {
    os << "scenario_id,metric,method,snr_db,value,err_estimate,n_terms,"
          "samples\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.17g,%.10g,%ld,%ld\n",
                      r.snr_db, r.value, r.err_estimate, r.n_terms, r.samples);
        os << r.scenario_id << ',' << r.metric << ',' << r.method << ','
           << buf;
    }
}

} // namespace fsomm
