#include "wcgl/grid.hpp"

#include <cmath>

namespace wcgl {

Complex semigroup_multiplier(int kx, int ky, double t, double mu) {
    if (t < 0.0) throw std::invalid_argument("semigroup_multiplier: t must be >= 0");
    const double r = rho(kx, ky, mu);
    const double th = theta(kx, ky);
    const double mag = std::exp(-r * t);
    return {mag * std::cos(th * t), -mag * std::sin(th * t)};
}

Complex phi1_weight(int kx, int ky, double t, double mu) {
    if (t < 0.0) throw std::invalid_argument("phi1_weight: t must be >= 0");
    const Complex a{rho(kx, ky, mu), theta(kx, ky)};
    const Complex at = a * t;
    if (std::abs(at) < 1e-4) {
        // (1 - e^{-at})/a = t (1 - at/2 + (at)^2/6 - ...)
        return t * (1.0 - at / 2.0 + at * at / 6.0);
    }
    return (1.0 - std::exp(-at)) / a;
}

}  // namespace wcgl
