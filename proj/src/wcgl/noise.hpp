#pragma once

#include "wcgl/field.hpp"
#include "wcgl/prng.hpp"

namespace wcgl {

// One Fourier-mode chain of the stochastic heat equation with dispersion
//   dZ_hat(k) = -(rho_k + i theta_k) Z_hat(k) dt + d zeta_k,
// sampled by its exact transition law, so the chain is distributionally
// exact for any step size. Increments are keyed by (seed, mode, step):
// two chains with the same seed stepping in lockstep see identical draws.
struct OUState {
    GridSpec grid;
    double mu = 1.0;
    double noise_scale = 1.0;
    bool stationary_origin = true;
    double start = 0.0;  // s of the zero-start chain (ignored when stationary)
    double t = 0.0;
    uint32_t step = 0;  // increment counter consumed so far
    SpectralField z;

    // Per-mode variance sigma^2_k(t): 1/(2 rho_k) when stationary,
    // (1 - e^{-2 rho_k (t-s)})/(2 rho_k) for the zero-start chain.
    double variance(int kx, int ky) const;
};

// Z_{-infty,t}: every coefficient independent CN(0, 1/(2 rho_k)).
OUState sample_stationary(GridSpec grid, double mu, const NoiseStream& rng,
                          double t0 = 0.0, uint32_t step0 = 0,
                          double noise_scale = 1.0);

// Z_{s,.} with Z(s) = 0.
OUState zero_start(GridSpec grid, double mu, double s, uint32_t step0 = 0,
                   double noise_scale = 1.0);

// Exact transition: Z(t+delta) = e^{-(rho+i theta) delta} Z(t) + eta,
// eta ~ CN(0, (1 - e^{-2 rho delta})/(2 rho)) drawn at counter `step`.
OUState evolve(const OUState& state, double delta, const NoiseStream& rng);

}  // namespace wcgl
