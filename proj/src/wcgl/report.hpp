#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wcgl {

// One asserted number: value, its tolerance, and the sample count behind it.
struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    long samples = 0;
    bool pass = false;
    std::string note;
};

struct FitResult {
    std::string name;
    double slope = 0.0;
    double slope_se = 0.0;
    double intercept = 0.0;
};

struct Series {
    std::string name;
    std::vector<double> t;
    std::vector<double> y;
};

// Structured experiment output. The JSON/CSV body is deterministic for a
// fixed seed and config; volatile metadata (wall clock, environment) goes to
// a sidecar written separately so reports stay byte-comparable.
struct ExperimentReport {
    int schema_version = 1;
    std::string experiment;
    uint64_t seed = 0;
    std::string config_echo;
    std::vector<Check> checks;
    std::vector<FitResult> fits;
    std::vector<std::pair<std::string, double>> scalars;
    std::vector<Series> series;

    bool passed() const;
    void add_check(const std::string& name, double value, double tol, long samples,
                   bool pass, const std::string& note = "");
    void add_scalar(const std::string& name, double value);

    std::string to_json() const;
    std::string to_csv() const;
    // summary lines, one per check
    std::string summary() const;
};

// Writes report.{json|csv} plus the volatile sidecar <stem>.meta.json.
void write_report(const ExperimentReport& rep, const std::string& out_dir,
                  const std::string& stem, const std::string& format,
                  double wall_seconds);

}  // namespace wcgl
