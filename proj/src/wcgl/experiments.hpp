#pragma once

#include "wcgl/config.hpp"
#include "wcgl/report.hpp"
#include "wcgl/solver.hpp"

namespace wcgl {

// The four reproducible pipelines plus the invariant suite. Each returns a
// structured report whose checks decide the process exit code.
ExperimentReport run_regularity(const RunConfig& cfg);
ExperimentReport run_wellposedness(const RunConfig& cfg);
ExperimentReport run_coupling(const RunConfig& cfg);
ExperimentReport run_ergodicity(const RunConfig& cfg);
ExperimentReport run_verify(const RunConfig& cfg);

ExperimentReport run_experiment(const RunConfig& cfg);

// Deterministic work queue: fn(i) must write only to slot i of its output.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// Initial data helpers shared by pipelines and the acceptance suite.
SpectralField constant_field(GridSpec grid, Complex value);
// A stationary-law sample used as rough initial data (independent stream).
SpectralField rough_initial_data(GridSpec grid, double mu, uint64_t seed);

// Fits log(w) against t over [t_lo, t_hi], skipping samples below `floor`
// (underflow guard); returns the decay rate C2 = -slope.
struct DecayFit {
    double c2 = 0.0;
    double c2_se = 0.0;
    int points = 0;
};
DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& w_sq,
                        double t_lo, double t_hi, double floor = 1e-250);

}  // namespace wcgl
