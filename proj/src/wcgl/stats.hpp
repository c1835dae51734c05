#pragma once

#include <cstdint>
#include <vector>

namespace wcgl {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;  // residual-bootstrap standard error
};

// Least squares y ~ intercept + slope x; slope SE from a residual bootstrap
// (`resamples` refits on resampled residuals, seeded deterministically).
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                     uint64_t seed = 9001, int resamples = 200);

double mean(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);
// Standard error of the mean of (possibly autocorrelated) series by
// non-overlapping block means.
double blocked_se(const std::vector<double>& v, int blocks = 16);

struct BootstrapCI {
    double mean = 0.0;
    double lo = 0.0;   // 2.5%
    double hi = 0.0;   // 97.5%
    double se = 0.0;
};

// Moving-block bootstrap for the mean of an autocorrelated series.
BootstrapCI block_bootstrap_ci(const std::vector<double>& series, int block_len,
                               uint64_t seed, int resamples = 200);

}  // namespace wcgl
