#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>

namespace wcgl {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Square frequency cutoff |k|_inf <= N on the unit torus T^2, with a
// zero-padded physical grid of pad*(2N+1) points per axis for dealiasing.
struct GridSpec {
    int n_modes = 0;  // N
    int pad = 2;

    int modes_per_axis() const { return 2 * n_modes + 1; }
    int mode_count() const { return modes_per_axis() * modes_per_axis(); }
    int phys_per_axis() const { return pad * modes_per_axis(); }
    int phys_count() const { return phys_per_axis() * phys_per_axis(); }

    // Row-major index of mode k = (kx, ky), each in [-N, N].
    int mode_index(int kx, int ky) const {
        return (kx + n_modes) * modes_per_axis() + (ky + n_modes);
    }

    // Largest pointwise-product degree that is alias-free on this grid:
    // pad >= ceil((d+1)/2) guarantees degree-d products of band-limited
    // fields truncate without folding.
    int max_alias_free_degree() const { return 2 * pad - 1; }

    bool operator==(const GridSpec& o) const {
        return n_modes == o.n_modes && pad == o.pad;
    }

    void validate() const {
        if (n_modes < 0) throw std::invalid_argument("GridSpec: n_modes must be >= 0");
        if (pad < 1) throw std::invalid_argument("GridSpec: pad must be >= 1");
    }
};

// Model constants of du = (i+mu) Lap u - nu |u|^{2m} u + tau u + xi.
struct ModelParams {
    double mu = 1.0;
    Complex nu{1.0, 0.0};
    Complex tau{0.0, 0.0};
    int m = 1;
    double lambda = 0.0;  // nudging coefficient of the coupled system

    // Which counterterm the solver's Wick family carries.
    enum class Renorm { zero_start, stationary, none };
    Renorm renorm = Renorm::zero_start;

    // Test hook: scales the noise (0 freezes Z at zero exactly).
    double noise_scale = 1.0;

    void validate() const {
        if (!(mu > 0.0)) throw std::invalid_argument("ModelParams: mu must be > 0");
        if (!(nu.real() > 0.0) && !(nu == Complex{0.0, 0.0}))
            throw std::invalid_argument("ModelParams: Re(nu) must be > 0 (or nu == 0 for the linear case)");
        if (m < 1) throw std::invalid_argument("ModelParams: m must be >= 1");
        if (lambda < 0.0) throw std::invalid_argument("ModelParams: lambda must be >= 0");
        if (noise_scale < 0.0) throw std::invalid_argument("ModelParams: noise_scale must be >= 0");
    }
};

// rho_k = 1 + 4 pi^2 mu |k|^2
inline double rho(int kx, int ky, double mu) {
    const double k2 = double(kx) * kx + double(ky) * ky;
    return 1.0 + kTwoPi * kTwoPi * mu * k2;
}

// theta_k = 4 pi^2 |k|^2
inline double theta(int kx, int ky) {
    const double k2 = double(kx) * kx + double(ky) * ky;
    return kTwoPi * kTwoPi * k2;
}

// e^{-(rho_k + i theta_k) t}; coefficient-wise this realizes P_t = e^{tA}
// with A = (i+mu) Lap - 1.
Complex semigroup_multiplier(int kx, int ky, double t, double mu);

// phi1-type weight (1 - e^{-a t}) / a with a = rho_k + i theta_k,
// stable for small |a t|.
Complex phi1_weight(int kx, int ky, double t, double mu);

}  // namespace wcgl
