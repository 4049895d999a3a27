#ifndef FSOMM_TYPES_HPP
#define FSOMM_TYPES_HPP

#include <map>
#include <string>

namespace fsomm {

enum class Method { exact_foxh, oracle_integral, asymptotic, monte_carlo };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::exact_foxh: return "exact_foxh";
        case Method::oracle_integral: return "oracle_integral";
        case Method::asymptotic: return "asymptotic";
        case Method::monte_carlo: return "monte_carlo";
    }
    return "?";
}

struct MetricResult {
    double value = 0.0;
    double err_estimate = 0.0;
    Method method = Method::exact_foxh;
    int series_terms_used = 0;
    std::map<std::string, double> diagnostics;
};

} // namespace fsomm

#endif
