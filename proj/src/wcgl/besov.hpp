#pragma once

#include <vector>

#include "wcgl/field.hpp"

namespace wcgl {

// Dyadic partition of unity evaluated on the lattice |k|_inf <= N.
// chi_{-1} is built from a smooth bump step, chi_0(x) = chi_{-1}(x/2) - chi_{-1}(x),
// chi_j(x) = chi_0(x / 2^j); the telescoping sum is exactly 1 on every
// retained mode.
struct DyadicPartition {
    int n_modes = 0;
    int j_max = 0;                   // blocks j = -1 .. j_max
    std::vector<double> chi;         // (j_max+2) rows of mode_count() values

    double value(int j, int idx) const { return chi[size_t(j + 1) * stride + idx]; }
    size_t stride = 0;
};

DyadicPartition build_partition(int n_modes);

// Radial profile chi_{-1}(|x|) (exposed for tests).
double chi_minus1(double radius);

// j-th Littlewood-Paley block: coefficient-wise multiply by chi_j(k).
SpectralField lp_block(const SpectralField& f, int j, const DyadicPartition& part);

// L^p norm by uniform-grid quadrature on the padded grid; p = infinity uses
// the grid max (an under-estimate of the true sup vanishing with padding).
double lp_norm(const PhysicalField& f, double p);
double lp_norm(const std::vector<Complex>& values, double p);

// Besov norm (sum_j 2^{alpha j q} ||delta_j f||_{L^p}^q)^{1/q}; sup over j
// when q = infinity. C^alpha is besov_norm(f, alpha, inf, inf).
double besov_norm(const SpectralField& f, double alpha, double p, double q,
                  const DyadicPartition& part);
double holder_norm(const SpectralField& f, double alpha, const DyadicPartition& part);

// ||P_t f||_{C^beta} t^{(beta-alpha)/2} / ||f||_{C^alpha}; bounded in t per
// the heat-semigroup smoothing estimate.
double heat_smoothing_ratio(const SpectralField& f, double alpha, double beta,
                            double t, double mu, const DyadicPartition& part);

}  // namespace wcgl
