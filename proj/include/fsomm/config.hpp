#ifndef FSOMM_CONFIG_HPP
#define FSOMM_CONFIG_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsomm/channels.hpp"
#include "fsomm/link_metrics.hpp"
#include "fsomm/monte_carlo.hpp"

namespace fsomm {

// Parse errors carry a line number, semantic errors the offending key path.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ScenarioConfig {
    std::string id = "scenario";
    double alpha = 0.0;
    double beta = 0.0;
    double xi = 0.0; // <= 0: no pointing-error factor
    int r = 1;
    double m = 0.0;
    double K = 0.0;
    double Delta = 0.0;
    RelayConfig relay;
    ModulationScheme mod = ModulationScheme::dbpsk();
    CapacityMode cap; // c filled from r unless overridden
    EffectiveCapacityParams ec;
    TruncationPolicy trunc;
    McConfig mc;
    double gamma_th = 1.0;
    double snr_db = 10.0; // default evaluation point

    // Equal-SNR assumption: both hops get the same average SNR.
    GammaGammaParams gg_at(double gamma_bar) const;
    FtrParams ftr_at(double gamma_bar) const;
};

enum class Metric { outage, ber, capacity, effcap };
enum class SweepMethod { exact, asymptotic, oracle, mc };

const char* metric_name(Metric m);
const char* sweep_method_name(SweepMethod m);

struct SweepSpec {
    double snr_db_start = 0.0;
    double snr_db_stop = 40.0;
    double snr_db_step = 5.0;
    std::vector<Metric> metrics{Metric::outage, Metric::ber, Metric::capacity,
                                Metric::effcap};
    std::vector<SweepMethod> methods{SweepMethod::exact};

    void validate() const;
    std::vector<double> grid() const;
};

struct OutputRow {
    std::string scenario_id;
    std::string metric;
    std::string method;
    double snr_db = 0.0;
    double value = 0.0; // NaN flags a failed point
    double err_estimate = 0.0;
    long n_terms = 0;
    long samples = 0;
};

ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text,
                                 const std::string& origin = "<string>");

// Sweep section of the same file, if present; otherwise the defaults.
SweepSpec parse_sweep(const std::string& path);
SweepSpec parse_sweep_text(const std::string& text,
                           const std::string& origin = "<string>");

// Evaluates one metric/method at one grid point.
OutputRow eval_point(const ScenarioConfig& cfg, Metric metric,
                     SweepMethod method, double snr_db);

// Grid points dispatched to `workers` threads (0 = pick automatically,
// honoring FSOMM_THREADS); rows come back in grid order.
std::vector<OutputRow> run_sweep(const ScenarioConfig& cfg,
                                 const SweepSpec& sweep, int workers = 0);

void write_csv(std::ostream& os, const std::vector<OutputRow>& rows);

int sweep_worker_count(int requested); // resolves 0 via FSOMM_THREADS/hardware

} // namespace fsomm

#endif
