#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wcgl/grid.hpp"

namespace wcgl {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Mild-solution exponents; gamma < 0 means "choose the midpoint of
// ((alpha0+beta)/2, 1/(2m+1)) at finalize time".
struct Exponents {
    double alpha = 0.05;
    double alpha_prime = 0.05;
    double beta = 0.2;
    double gamma = -1.0;
};

// One experiment definition. Parsed from the strict key-value format
// documented in the README; unknown sections or keys are errors.
struct RunConfig {
    std::string experiment;  // regularity | wellposedness | coupling | ergodicity | verify

    ModelParams model;
    GridSpec grid{16, 2};

    uint64_t seed = 1;
    double horizon = 1.0;
    double dt = 1e-3;
    int ensemble = 1;
    int noise_substeps = 1;
    double burn_in_fraction = 0.2;
    std::string out_dir = ".";
    std::string format = "json";
    int threads = 1;

    Exponents exponents;

    // coupling
    std::vector<double> lambda_grid;
    double shadow_offset = 2.0;
    double budget_gamma = 2.0;
    double budget_k = 0.0;  // 0 = auto (4x median budget)

    // norms / observables
    std::vector<int> p_list{1};
    int mode_window = 2;
    double besov_alpha = 0.4;

    // regularity
    std::vector<std::pair<int, int>> wick_orders{{1, 1}, {2, 1}};
    int samples = 400;

    // wellposedness
    bool rough_init = true;
    bool energy_check = false;
    bool refine_check = false;
    bool expect_blowups = false;

    // ergodicity
    double init_offset = 5.0;

    double gamma_resolved() const;
    void validate() const;
};

RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);
// Canonical text form; parse_config(serialize_config(c)) reproduces c exactly.
std::string serialize_config(const RunConfig& cfg);

}  // namespace wcgl
