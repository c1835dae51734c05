#include "wcgl/wick.hpp"

#include <cmath>
#include <cstdio>
#include <mutex>
#include <set>
#include <string>

#include "wcgl/fft.hpp"

namespace wcgl {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double b = 1.0;
    for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
    return std::round(b);
}

Complex wick_point(Complex z, double c, int k, int l) {
    if (k < 0 || l < 0) throw std::invalid_argument("wick_point: negative order");
    if (c < 0.0) throw std::invalid_argument("wick_point: c must be >= 0");
    const Complex zb = std::conj(z);
    Complex sum{};
    const int rmax = std::min(k, l);
    for (int r = 0; r <= rmax; ++r) {
        double coef = factorial(r) * binom(k, r) * binom(l, r) * std::pow(c, r);
        if (r % 2 == 1) coef = -coef;
        Complex term{coef, 0.0};
        for (int a = 0; a < k - r; ++a) term *= z;
        for (int a = 0; a < l - r; ++a) term *= zb;
        sum += term;
    }
    return sum;
}

double wick_constant(const OUState& state) {
    const int N = state.grid.n_modes;
    double c = 0.0;
    for (int kx = -N; kx <= N; ++kx)
        for (int ky = -N; ky <= N; ++ky) c += state.variance(kx, ky);
    return c;
}

double stationary_wick_constant(GridSpec grid, double mu) {
    const int N = grid.n_modes;
    double c = 0.0;
    for (int kx = -N; kx <= N; ++kx)
        for (int ky = -N; ky <= N; ++ky) c += 1.0 / (2.0 * rho(kx, ky, mu));
    return c;
}

WickFamily::WickFamily(GridSpec grid, int m, double c) : grid_(grid), m_(m), c_(c) {
    const int slots = (m + 2) * (m + 1);  // generous upper bound on i>=j pairs
    spec_.resize(slots);
    phys_.resize(slots);
}

int WickFamily::slot(int i, int j) const {
    if (i < j || i < 0 || j < 0 || i > m_ + 1 || j > m_ || i + j < 1) return -1;
    return i * (m_ + 1) + j;
}

bool WickFamily::has(int i, int j) const {
    if (i == 0 && j == 0) return true;
    const int s = (i >= j) ? slot(i, j) : slot(j, i);
    return s >= 0 && !spec_[s].coeffs.empty();
}

void WickFamily::set(int i, int j, SpectralField spec, std::vector<Complex> phys) {
    const int s = slot(i, j);
    if (s < 0) throw std::invalid_argument("WickFamily::set: index out of family range");
    spec_[s] = std::move(spec);
    phys_[s] = std::move(phys);
}

SpectralField WickFamily::power(int i, int j) const {
    if (!has(i, j)) throw std::invalid_argument("WickFamily: missing entry (" +
                                                std::to_string(i) + "," + std::to_string(j) + ")");
    if (i == 0 && j == 0) {
        SpectralField one(grid_);
        one.at(0, 0) = Complex{1.0, 0.0};
        return one;
    }
    if (i >= j) return spec_[slot(i, j)];
    return conj_field(spec_[slot(j, i)]);
}

std::vector<Complex> WickFamily::power_physical(int i, int j) const {
    if (!has(i, j)) throw std::invalid_argument("WickFamily: missing entry (" +
                                                std::to_string(i) + "," + std::to_string(j) + ")");
    if (i == 0 && j == 0) return std::vector<Complex>(grid_.phys_count(), Complex{1.0, 0.0});
    if (i >= j) return phys_[slot(i, j)];
    std::vector<Complex> out = phys_[slot(j, i)];
    for (Complex& v : out) v = std::conj(v);
    return out;
}

std::pair<const std::vector<Complex>*, bool> WickFamily::power_physical_view(int i,
                                                                             int j) const {
    if (!has(i, j)) throw std::invalid_argument("WickFamily: missing entry (" +
                                                std::to_string(i) + "," + std::to_string(j) + ")");
    if (i == 0 && j == 0) return {nullptr, false};
    if (i >= j) return {&phys_[slot(i, j)], false};
    return {&phys_[slot(j, i)], true};
}

namespace {

void warn_once(const std::string& key, const std::string& msg) {
    static std::mutex mtx;
    static std::set<std::string> seen;
    std::lock_guard<std::mutex> lock(mtx);
    if (seen.insert(key).second) std::fprintf(stderr, "[wcgl] warning: %s\n", msg.c_str());
}

}  // namespace

WickFamily wick_family_with_constant(const OUState& state, int m, double c) {
    const GridSpec grid = state.grid;
    if (grid.pad < 2)
        throw std::invalid_argument("wick_family: pad must be >= 2 to form Wick powers");
    if (grid.pad < m + 1)
        warn_once("wickpad" + std::to_string(grid.pad) + "_" + std::to_string(m),
                  "pad=" + std::to_string(grid.pad) + " < m+1=" + std::to_string(m + 1) +
                      "; residual aliasing in degree-" + std::to_string(2 * m + 1) +
                      " products is accepted");

    WickFamily fam(grid, m, c);
    const PhysicalField zp = to_physical(state.z);
    const size_t np = zp.values.size();

    // All powers in one pass per point via the lowering recursion
    //   :z^i zbar^j: = zbar :z^i zbar^{j-1}: - c i :z^{i-1} zbar^{j-1}:,
    // which agrees with wick_point (checked in the test suite).
    const int ni = m + 2, nj = m + 1;
    auto slot_of = [&](int i, int j) { return i * nj + j; };
    std::vector<std::vector<Complex>> vals(size_t(ni) * nj);
    for (int i = 0; i <= m + 1; ++i)
        for (int j = 0; j <= std::min(i, m); ++j)
            if (i + j >= 1 && !(i == 1 && j == 0)) vals[slot_of(i, j)].resize(np);

    std::vector<Complex> w(size_t(ni) * nj);
    for (size_t a = 0; a < np; ++a) {
        const Complex z = zp.values[a];
        const Complex zb = std::conj(z);
        w[slot_of(0, 0)] = Complex{1.0, 0.0};
        for (int i = 1; i <= m + 1; ++i) w[slot_of(i, 0)] = w[slot_of(i - 1, 0)] * z;
        for (int i = 0; i <= m + 1; ++i)
            for (int j = 1; j <= std::min(i, m); ++j)
                w[slot_of(i, j)] =
                    zb * w[slot_of(i, j - 1)] - (c * i) * w[slot_of(i - 1, j - 1)];
        for (int i = 0; i <= m + 1; ++i)
            for (int j = 0; j <= std::min(i, m); ++j)
                if (i + j >= 1 && !(i == 1 && j == 0)) vals[slot_of(i, j)][a] = w[slot_of(i, j)];
    }
    fam.set(1, 0, state.z, zp.values);
    for (int i = 0; i <= m + 1; ++i)
        for (int j = 0; j <= std::min(i, m); ++j) {
            if (i + j < 1 || (i == 1 && j == 0)) continue;
            SpectralField spec =
                to_spectral(PhysicalField{grid, std::move(vals[slot_of(i, j)])});
            std::vector<Complex> phys = to_physical(spec).values;
            fam.set(i, j, std::move(spec), std::move(phys));
        }
    return fam;
}

WickFamily wick_family(const OUState& state, int m) {
    return wick_family_with_constant(state, m, wick_constant(state));
}

WickFamily shift_wick_family(const WickFamily& stationary, double delta,
                             const WickFamily& fresh, double mu) {
    if (!(stationary.grid() == fresh.grid()))
        throw std::invalid_argument("shift_wick_family: grid mismatch");
    const GridSpec grid = fresh.grid();
    const int m = fresh.order();
    if (stationary.order() != m)
        throw std::invalid_argument("shift_wick_family: order mismatch");
    if (delta < 0.0) throw std::invalid_argument("shift_wick_family: delta must be >= 0");

    // V = P_delta Z_{-infty,s} and Z_t, both on the padded grid. The binomial
    // combination is assembled from the raw pointwise powers and projected
    // once per entry, so pad >= ceil((k+l+1)/2) keeps every product exact;
    // this also makes the result identical to the Wick polynomial of
    // Z_{s,t} = Z_t - V taken with the same constant.
    const std::vector<Complex> vphys =
        to_physical(apply_semigroup(stationary.power(1, 0), delta, mu)).values;
    const std::vector<Complex> ztphys = fresh.power_physical(1, 0);
    const size_t np = vphys.size();
    const double c = fresh.constant();

    WickFamily out(grid, m, c);
    for (int k = 0; k <= m + 1; ++k) {
        for (int l = 0; l <= std::min(k, m); ++l) {
            if (k + l < 1) continue;
            std::vector<Complex> acc(np, Complex{});
            for (int i = 0; i <= k; ++i) {
                for (int j = 0; j <= l; ++j) {
                    double coef = binom(k, i) * binom(l, j);
                    if ((i + j) % 2 == 1) coef = -coef;
                    for (size_t a = 0; a < np; ++a) {
                        Complex term{coef, 0.0};
                        for (int b = 0; b < i; ++b) term *= vphys[a];
                        for (int b = 0; b < j; ++b) term *= std::conj(vphys[a]);
                        acc[a] += term * wick_point(ztphys[a], c, k - i, l - j);
                    }
                }
            }
            SpectralField spec = to_spectral(PhysicalField{grid, std::move(acc)});
            std::vector<Complex> phys = to_physical(spec).values;
            out.set(k, l, std::move(spec), std::move(phys));
        }
    }
    return out;
}

double chaos_covariance_oracle(int k, int l, int ox, int oy, GridSpec grid, double mu) {
    return chaos_covariance_oracle_lagged(k, l, ox, oy, grid, mu, 0.0).real();
}

Complex chaos_covariance_oracle_lagged(int k, int l, int ox, int oy,
                                       GridSpec grid, double mu, double lag) {
    if (k < 0 || l < 0 || k + l < 1 || k + l > 4)
        throw std::invalid_argument("chaos_covariance_oracle: need 1 <= k+l <= 4");
    if (grid.n_modes > 4)
        throw std::invalid_argument("chaos_covariance_oracle: N <= 4 required");
    const int N = grid.n_modes;
    const int d = k + l;
    const double alag = std::abs(lag);

    // weight of index i (sign a_i enters the phase only)
    auto factor = [&](int jx, int jy, double ai) -> Complex {
        const double r = rho(jx, jy, mu);
        const double th = theta(jx, jy);
        const double mag = std::exp(-r * alag) / (2.0 * r);
        return {mag * std::cos(ai * th * lag), -mag * std::sin(ai * th * lag)};
    };

    Complex total{};
    // free indices j_1..j_{d-1}; last index solved from the constraint
    std::vector<int> jx(d), jy(d);
    auto recurse = [&](auto&& self, int depth) -> void {
        if (depth == d - 1) {
            // sum_{i<=k} j_i - sum_{i>k} j_i = omega
            int sx = 0, sy = 0;
            for (int i = 0; i < d - 1; ++i) {
                const int sgn = (i < k) ? 1 : -1;
                sx += sgn * jx[i];
                sy += sgn * jy[i];
            }
            const int sgn_last = (d - 1 < k) ? 1 : -1;
            const int lx = sgn_last * (ox - sx);
            const int ly = sgn_last * (oy - sy);
            if (std::abs(lx) > N || std::abs(ly) > N) return;
            jx[d - 1] = lx;
            jy[d - 1] = ly;
            Complex prod{1.0, 0.0};
            for (int i = 0; i < d; ++i)
                prod *= factor(jx[i], jy[i], (i < k) ? 1.0 : -1.0);
            total += prod;
            return;
        }
        for (int x = -N; x <= N; ++x)
            for (int y = -N; y <= N; ++y) {
                jx[depth] = x;
                jy[depth] = y;
                self(self, depth + 1);
            }
    };
    recurse(recurse, 0);
    return factorial(k) * factorial(l) * total;
}

}  // namespace wcgl
