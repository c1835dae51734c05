#include "wcgl/field.hpp"

#include <cmath>

#include "wcgl/fft.hpp"

namespace wcgl {

PhysicalField to_physical(const SpectralField& f) {
    const int n = f.grid.phys_per_axis();
    const int N = f.grid.n_modes;
    std::vector<Complex> buf(size_t(n) * n, Complex{});
    for (int kx = -N; kx <= N; ++kx) {
        const int ix = (kx % n + n) % n;
        for (int ky = -N; ky <= N; ++ky) {
            const int iy = (ky % n + n) % n;
            buf[size_t(ix) * n + iy] = f.coeffs[f.grid.mode_index(kx, ky)];
        }
    }
    PhysicalField out{f.grid, std::vector<Complex>(size_t(n) * n)};
    fft::backward(n, buf.data(), out.values.data());
    return out;
}

SpectralField to_spectral(const PhysicalField& p) {
    const int n = p.grid.phys_per_axis();
    const int N = p.grid.n_modes;
    std::vector<Complex> buf(size_t(n) * n);
    fft::forward(n, p.values.data(), buf.data());
    const double inv = 1.0 / (double(n) * n);
    SpectralField out(p.grid);
    for (int kx = -N; kx <= N; ++kx) {
        const int ix = (kx % n + n) % n;
        for (int ky = -N; ky <= N; ++ky) {
            const int iy = (ky % n + n) % n;
            out.coeffs[p.grid.mode_index(kx, ky)] = buf[size_t(ix) * n + iy] * inv;
        }
    }
    return out;
}

SpectralField conj_field(const SpectralField& f) {
    const int N = f.grid.n_modes;
    SpectralField out(f.grid);
    for (int kx = -N; kx <= N; ++kx)
        for (int ky = -N; ky <= N; ++ky)
            out.at(kx, ky) = std::conj(f.at(-kx, -ky));
    return out;
}

SpectralField add(const SpectralField& a, const SpectralField& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("add: grid mismatch");
    SpectralField out(a.grid);
    for (size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] = a.coeffs[i] + b.coeffs[i];
    return out;
}

SpectralField sub(const SpectralField& a, const SpectralField& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("sub: grid mismatch");
    SpectralField out(a.grid);
    for (size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] = a.coeffs[i] - b.coeffs[i];
    return out;
}

SpectralField scale(const SpectralField& f, Complex s) {
    SpectralField out(f.grid);
    for (size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] = f.coeffs[i] * s;
    return out;
}

SpectralField apply_semigroup(const SpectralField& f, double t, double mu) {
    const int N = f.grid.n_modes;
    SpectralField out(f.grid);
    for (int kx = -N; kx <= N; ++kx)
        for (int ky = -N; ky <= N; ++ky)
            out.at(kx, ky) = f.at(kx, ky) * semigroup_multiplier(kx, ky, t, mu);
    return out;
}

void gradient_physical(const SpectralField& f, std::vector<Complex>& dx,
                       std::vector<Complex>& dy) {
    const int N = f.grid.n_modes;
    SpectralField fx(f.grid), fy(f.grid);
    for (int kx = -N; kx <= N; ++kx)
        for (int ky = -N; ky <= N; ++ky) {
            const Complex c = f.at(kx, ky);
            fx.at(kx, ky) = Complex{0.0, kTwoPi * kx} * c;
            fy.at(kx, ky) = Complex{0.0, kTwoPi * ky} * c;
        }
    dx = to_physical(fx).values;
    dy = to_physical(fy).values;
}

double l2_norm_sq(const SpectralField& f) {
    double s = 0.0;
    for (const Complex& c : f.coeffs) s += std::norm(c);
    return s;
}

double l2_norm_sq_window(const SpectralField& f, int window) {
    const int N = f.grid.n_modes;
    const int w = std::min(window, N);
    double s = 0.0;
    for (int kx = -w; kx <= w; ++kx)
        for (int ky = -w; ky <= w; ++ky) s += std::norm(f.at(kx, ky));
    return s;
}

bool all_finite(const SpectralField& f) {
    for (const Complex& c : f.coeffs)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

bool is_real_valued(const SpectralField& f, double tol) {
    const int N = f.grid.n_modes;
    for (int kx = -N; kx <= N; ++kx)
        for (int ky = -N; ky <= N; ++ky)
            if (std::abs(f.at(-kx, -ky) - std::conj(f.at(kx, ky))) > tol) return false;
    return true;
}

SpectralField dealiased_product(std::span<const SpectralField> fs,
                                const std::vector<bool>& conj_flags) {
    if (fs.empty()) throw std::invalid_argument("dealiased_product: no factors");
    if (fs.size() != conj_flags.size())
        throw std::invalid_argument("dealiased_product: flags/factors size mismatch");
    const GridSpec grid = fs[0].grid;
    for (const auto& f : fs)
        if (!(f.grid == grid)) throw std::invalid_argument("dealiased_product: grid mismatch");
    const int d = int(fs.size());
    const int need = (d + 2) / 2;  // ceil((d+1)/2)
    if (grid.pad < need)
        throw std::invalid_argument("dealiased_product: padding insufficient for degree " +
                                    std::to_string(d));

    const size_t np = size_t(grid.phys_count());
    std::vector<Complex> acc(np, Complex{1.0, 0.0});
    for (int i = 0; i < d; ++i) {
        PhysicalField p = to_physical(fs[i]);
        if (conj_flags[i])
            for (size_t j = 0; j < np; ++j) acc[j] *= std::conj(p.values[j]);
        else
            for (size_t j = 0; j < np; ++j) acc[j] *= p.values[j];
    }
    return to_spectral(PhysicalField{grid, std::move(acc)});
}

}  // namespace wcgl
