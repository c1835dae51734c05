#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wcgl/besov.hpp"
#include "wcgl/wick.hpp"

namespace wcgl {

// Blow-up is a first-class result, not a crash: carries where and how large.
struct BlowUpError : std::runtime_error {
    BlowUpError(double time, double l2)
        : std::runtime_error("blow-up at t=" + std::to_string(time) +
                             ", ||v||_L2=" + std::to_string(l2)),
          t(time),
          l2_norm(l2) {}
    double t;
    double l2_norm;
};

struct NonContractionError : std::runtime_error {
    explicit NonContractionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Full checkpointable snapshot of the remainder dynamics: u = v + Z is the
// reported object, v alone is the smooth remainder. The Wick family is
// re-derived from the noise at every step.
struct SolverState {
    GridSpec grid;
    ModelParams params;
    uint64_t seed = 0;
    SpectralField v;
    OUState noise;
    WickFamily wick;

    double t() const { return noise.t; }
    SpectralField u() const { return add(v, noise.z); }
};

SolverState make_solver_state(GridSpec grid, const ModelParams& params,
                              uint64_t seed, const SpectralField& v0);

// Wick family for the state's noise under the params' renormalization choice.
WickFamily build_wick(const OUState& noise, const ModelParams& params);

// Renormalized drift
//   Psi = -nu sum_{i<=m+1, j<=m} C(m+1,i) C(m,j) v^i vbar^j Z^{:m+1-i,m-j:}
//         + (tau+1)(v + Z),
// products dealiased on the padded grid.
SpectralField psi(const SpectralField& v, const WickFamily& wick,
                  const ModelParams& params);
// Psi without its -nu v^{m+1} vbar^m term.
SpectralField psi_prime(const SpectralField& v, const WickFamily& wick,
                        const ModelParams& params);

// One exponential-Euler update of the field only:
// v' = e^{-a delta} v + (1-e^{-a delta})/a * drift per mode, a = rho + i theta.
SpectralField exp_euler_update(const SpectralField& v, const SpectralField& drift,
                               double delta, double mu);

// Production step: drift at time t, exact noise transition (optionally in
// `noise_substeps` exact sub-updates so runs at different delta can share one
// noise path), Wick refresh, blow-up detection.
SolverState step_exponential_euler(const SolverState& state, double delta,
                                   int noise_substeps = 1);

// Fixed-point iteration for the mild solution on [0, horizon]:
// (M v)_t = P_t u0 + int_0^t P_{t-s} Psi(v_s, Z_s) ds with the phi1
// quadrature on the same uniform sub-grid that carries `families`.
// Convergence is measured in sup_t t^gamma ||.||_{C^beta}.
std::vector<SpectralField> picard_local(
    const SpectralField& u0, const std::vector<WickFamily>& families,
    double delta_sub, const ModelParams& params, double tol, int max_iter,
    double gamma, double beta, const DyadicPartition& part);

// Terms of the L^{2p} energy identity, all real:
// lhs_rate = -grad_term - mass_term - dissipation_term + forcing_term + O(delta).
struct EnergyReport {
    int p = 1;
    double lhs_rate = 0.0;       // d/dt ||v||_{L^2p}^{2p} / (2p), forward difference
    double grad_term = 0.0;      // Re[(i+mu) <grad{(v vbar)^{p-1} vbar}, grad v>]
    double mass_term = 0.0;      // ||v||_{L^2p}^{2p}
    double dissipation_term = 0.0;  // Re nu ||v||_{L^{2p+2m}}^{2p+2m}
    double forcing_term = 0.0;   // <|v|^{2p-2}, Re(vbar Psi')>
    double residual() const {
        return lhs_rate - (-grad_term - mass_term - dissipation_term + forcing_term);
    }
};

EnergyReport energy_report(const SolverState& state, const SolverState& next, int p);

// Both sides of the quadratic-form dissipation bound:
// first  = Re[(i+mu) <grad{(v vbar)^{p-1} vbar}, grad v>]
// second = mu || |grad v|^2 |v|^{2p-2} ||_{L^1}
// so first >= delta* * second with (p-1)/(mu(mu+sqrt(1+mu^2))) = 1 - delta*.
std::pair<double, double> quadratic_form_sides(const SpectralField& v, int p, double mu);
double delta_star(int p, double mu);

// Two copies driven by one noise realization; the second copy's drift gains
// +lambda (v - v~).
struct CoupledState {
    SolverState primary;
    SolverState shadow;
};

CoupledState make_coupled_state(GridSpec grid, const ModelParams& params,
                                uint64_t seed, const SpectralField& v0,
                                const SpectralField& v0_shadow);
CoupledState step_coupled(const CoupledState& cs, double delta, int noise_substeps = 1);

}  // namespace wcgl
