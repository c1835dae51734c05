#pragma once

#include <vector>

#include "wcgl/noise.hpp"

namespace wcgl {

double factorial(int n);
double binom(int n, int k);

// Wick polynomial :z^k zbar^l:_c via the generalized Laguerre expansion,
//   sum_{r=0}^{min(k,l)} (-1)^r r! C(k,r) C(l,r) c^r z^{k-r} zbar^{l-r}.
Complex wick_point(Complex z, double c, int k, int l);

// Renormalization constant of the truncated field: c = sum_k sigma^2_k,
// i.e. the pointwise variance E|Z_N(x)|^2 under the state's law.
double wick_constant(const OUState& state);
// Stationary value sum_{|k|_inf<=N} 1/(2 rho_k).
double stationary_wick_constant(GridSpec grid, double mu);

// The renormalized powers Z^{:i,j:} of one field realization, held both as
// truncated spectral coefficients and as their synthesis on the padded grid.
// Entries are stored for i >= j only; (i,j) with i < j is served through the
// conjugation identity Z^{:j,i:} = conj(Z^{:i,j:}).
class WickFamily {
  public:
    WickFamily() = default;
    WickFamily(GridSpec grid, int m, double c);

    GridSpec grid() const { return grid_; }
    int order() const { return m_; }
    double constant() const { return c_; }

    bool has(int i, int j) const;
    // Spectral form of Z^{:i,j:} (truncated to |k|_inf <= N).
    SpectralField power(int i, int j) const;
    // Physical samples of the truncated Z^{:i,j:} on the padded grid.
    std::vector<Complex> power_physical(int i, int j) const;
    // Zero-copy view: the stored mirror entry plus a conjugation flag
    // ((i,j) with i < j is served as conj of (j,i)). Null for (0,0).
    std::pair<const std::vector<Complex>*, bool> power_physical_view(int i, int j) const;

    void set(int i, int j, SpectralField spec, std::vector<Complex> phys);

  private:
    int slot(int i, int j) const;  // -1 when (i,j) not stored directly

    GridSpec grid_;
    int m_ = 0;
    double c_ = 0.0;
    std::vector<SpectralField> spec_;
    std::vector<std::vector<Complex>> phys_;
};

// Builds {Z^{:i,j:}: 0<=i<=m+1, 0<=j<=m, i+j>=1} for the state's field with
// c = wick_constant(state). Powers are evaluated pointwise on the padded
// grid and truncated back to the cutoff.
WickFamily wick_family(const OUState& state, int m);
// Same construction with an explicit constant (stationary-normalized or
// zero for the un-renormalized drift).
WickFamily wick_family_with_constant(const OUState& state, int m, double c);

// The (k,l)-th power of Z_{s,s+delta} from the binomial shift identity
//   Z_{s,t}^{:k,l:} = sum_{i,j} C(k,i) C(l,j) (-1)^{i+j} V^i conj(V)^j
//                     Z_{-infty,t}^{:k-i,l-j:},   V = P_{t-s} Z_{-infty,s}.
// `stationary` is the family at time s (its (1,0) entry is Z_{-infty,s}),
// `fresh` the stationary family at time s+delta of the same noise
// realization. Algebraically this equals the plain Wick polynomial of
// Z_{s,s+delta} taken with the stationary constant.
WickFamily shift_wick_family(const WickFamily& stationary, double delta,
                             const WickFamily& fresh, double mu);

// Exact truncated chaos covariance
//   k! l! sum_{j_1+...+j_k-j_{k+1}-...-j_{k+l} = omega} prod_i 1/(2 rho_{j_i}),
// all j_i in the cutoff box. Guards k+l <= 4 and N <= 4
// (cost (2N+1)^{2(k+l-1)}).
double chaos_covariance_oracle(int k, int l, int ox, int oy, GridSpec grid,
                               double mu);
// Lagged version with factors e^{-rho|lag| - i a_i theta lag}/(2 rho),
// a_i = +1 for the first k indices and -1 for the rest.
Complex chaos_covariance_oracle_lagged(int k, int l, int ox, int oy,
                                       GridSpec grid, double mu, double lag);

}  // namespace wcgl
