#pragma once

#include <span>
#include <vector>

#include "wcgl/grid.hpp"

namespace wcgl {

// Complex field on the padded physical grid, row-major in x.
struct PhysicalField {
    GridSpec grid;
    std::vector<Complex> values;  // phys_count() samples at x = j/n
};

// Complex-valued function on T^2 stored as Fourier coefficients on the
// square cutoff |k|_inf <= N, convention u_hat(k) = int u(x) e^{-2 pi i k.x} dx.
struct SpectralField {
    GridSpec grid;
    std::vector<Complex> coeffs;  // mode_count(), row-major via mode_index

    SpectralField() = default;
    explicit SpectralField(GridSpec g) : grid(g), coeffs(g.mode_count(), Complex{}) {}

    Complex& at(int kx, int ky) { return coeffs[grid.mode_index(kx, ky)]; }
    const Complex& at(int kx, int ky) const { return coeffs[grid.mode_index(kx, ky)]; }
};

PhysicalField to_physical(const SpectralField& f);
// Projects onto |k|_inf <= N (truncation is the dealiasing step).
SpectralField to_spectral(const PhysicalField& p);

SpectralField conj_field(const SpectralField& f);
SpectralField add(const SpectralField& a, const SpectralField& b);
SpectralField sub(const SpectralField& a, const SpectralField& b);
SpectralField scale(const SpectralField& f, Complex s);

// Coefficient-wise e^{tA}, A = (i+mu) Lap - 1.
SpectralField apply_semigroup(const SpectralField& f, double t, double mu);

// Spectral derivatives (d/dx, d/dy) evaluated on the physical grid.
void gradient_physical(const SpectralField& f, std::vector<Complex>& dx,
                       std::vector<Complex>& dy);

// sum_k |u_hat(k)|^2  (= ||u||_{L^2}^2 by Parseval)
double l2_norm_sq(const SpectralField& f);
// restricted to |k|_inf <= window
double l2_norm_sq_window(const SpectralField& f, int window);

bool all_finite(const SpectralField& f);

// True iff u_hat(-k) == conj(u_hat(k)) for all k, within tol (not enforced
// anywhere; fields in this project are genuinely complex).
bool is_real_valued(const SpectralField& f, double tol = 1e-12);

// Truncation of the exact pointwise product of the fields (conjugated where
// flagged) to |k|_inf <= N. Requires pad >= ceil((d+1)/2) for d factors so
// the circular convolution is alias-free; throws otherwise.
SpectralField dealiased_product(std::span<const SpectralField> fs,
                                const std::vector<bool>& conj_flags);

}  // namespace wcgl
