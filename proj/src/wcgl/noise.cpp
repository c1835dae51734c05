#include "wcgl/noise.hpp"

#include <cmath>

namespace wcgl {

double OUState::variance(int kx, int ky) const {
    const double r = rho(kx, ky, mu);
    const double s2 = noise_scale * noise_scale;
    if (stationary_origin) return s2 / (2.0 * r);
    const double dt = t - start;
    return s2 * -std::expm1(-2.0 * r * dt) / (2.0 * r);
}

OUState sample_stationary(GridSpec grid, double mu, const NoiseStream& rng,
                          double t0, uint32_t step0, double noise_scale) {
    grid.validate();
    OUState st;
    st.grid = grid;
    st.mu = mu;
    st.noise_scale = noise_scale;
    st.stationary_origin = true;
    st.t = t0;
    st.step = step0;
    st.z = SpectralField(grid);
    const int N = grid.n_modes;
    for (int kx = -N; kx <= N; ++kx)
        for (int ky = -N; ky <= N; ++ky) {
            const double sd = noise_scale * std::sqrt(1.0 / (2.0 * rho(kx, ky, mu)));
            st.z.at(kx, ky) = sd * rng.cn01(streams::kStationaryInit, step0, kx, ky);
        }
    return st;
}

OUState zero_start(GridSpec grid, double mu, double s, uint32_t step0,
                   double noise_scale) {
    grid.validate();
    OUState st;
    st.grid = grid;
    st.mu = mu;
    st.noise_scale = noise_scale;
    st.stationary_origin = false;
    st.start = s;
    st.t = s;
    st.step = step0;
    st.z = SpectralField(grid);
    return st;
}

OUState evolve(const OUState& state, double delta, const NoiseStream& rng) {
    if (!(delta > 0.0)) throw std::invalid_argument("evolve: delta must be > 0");
    OUState out = state;
    out.t = state.t + delta;
    out.step = state.step + 1;
    const int N = state.grid.n_modes;
    for (int kx = -N; kx <= N; ++kx)
        for (int ky = -N; ky <= N; ++ky) {
            const double r = rho(kx, ky, state.mu);
            const Complex mult = semigroup_multiplier(kx, ky, delta, state.mu);
            const double sd =
                state.noise_scale * std::sqrt(-std::expm1(-2.0 * r * delta) / (2.0 * r));
            const Complex eta = sd * rng.cn01(streams::kIncrement, state.step, kx, ky);
            out.z.at(kx, ky) = mult * state.z.at(kx, ky) + eta;
        }
    return out;
}

}  // namespace wcgl
