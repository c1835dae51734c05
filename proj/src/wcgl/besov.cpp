#include "wcgl/besov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wcgl {

namespace {

// 64-point Gauss-Legendre nodes/weights on [-1,1], computed once by Newton
// iteration on the Legendre recurrence (deterministic at double precision).
struct GaussLegendre64 {
    double x[64];
    double w[64];
    GaussLegendre64() {
        const int n = 64;
        for (int i = 0; i < n / 2; ++i) {
            double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double p0, p1, dp;
            for (int it = 0; it < 100; ++it) {
                p0 = 1.0;
                p1 = t;
                for (int j = 2; j <= n; ++j) {
                    const double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (t * p1 - p0) / (t * t - 1.0);
                const double dt = p1 / dp;
                t -= dt;
                if (std::abs(dt) < 1e-15) break;
            }
            p0 = 1.0;
            p1 = t;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            x[i] = -t;
            x[n - 1 - i] = t;
            w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
    }
};

const GaussLegendre64& gl64() {
    static GaussLegendre64 g;
    return g;
}

double bump(double r) { return (std::abs(r) < 1.0) ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; }

// smooth step s(r) = int_{-1}^r h / int_{-1}^1 h, h the standard bump
double smooth_step(double r) {
    if (r <= -1.0) return 0.0;
    if (r >= 1.0) return 1.0;
    const auto& g = gl64();
    double num = 0.0, den = 0.0;
    // int_{-1}^{r}: map [-1,1] -> [-1,r]
    const double half_n = (r + 1.0) / 2.0, mid_n = (r - 1.0) / 2.0;
    for (int i = 0; i < 64; ++i) {
        num += g.w[i] * bump(half_n * g.x[i] + mid_n);
        den += g.w[i] * bump(g.x[i]);
    }
    return (num * half_n) / den;
}

}  // namespace

double chi_minus1(double radius) {
    // == 1 on |x| <= 3/4, == 0 on |x| >= 4/3, smooth monotone in between
    const double lo = 0.75, hi = 4.0 / 3.0;
    if (radius <= lo) return 1.0;
    if (radius >= hi) return 0.0;
    return 1.0 - smooth_step((radius - lo) / (hi - lo) * 2.0 - 1.0);
}

DyadicPartition build_partition(int n_modes) {
    if (n_modes < 0) throw std::invalid_argument("build_partition: n_modes must be >= 0");
    DyadicPartition part;
    part.n_modes = n_modes;
    const double kmax = std::sqrt(2.0) * n_modes;
    part.j_max = (n_modes > 0) ? int(std::ceil(std::log2(kmax))) + 1 : 0;
    const int mpa = 2 * n_modes + 1;
    part.stride = size_t(mpa) * mpa;
    part.chi.assign(size_t(part.j_max + 2) * part.stride, 0.0);

    auto chi_j = [](int j, double r) {
        if (j == -1) return chi_minus1(r);
        const double s = std::ldexp(1.0, -j);  // 2^-j
        return chi_minus1(r * s * 0.5) - chi_minus1(r * s);
    };
    for (int kx = -n_modes; kx <= n_modes; ++kx)
        for (int ky = -n_modes; ky <= n_modes; ++ky) {
            const double r = std::hypot(double(kx), double(ky));
            const int idx = (kx + n_modes) * mpa + (ky + n_modes);
            for (int j = -1; j <= part.j_max; ++j)
                part.chi[size_t(j + 1) * part.stride + idx] = chi_j(j, r);
        }
    return part;
}

SpectralField lp_block(const SpectralField& f, int j, const DyadicPartition& part) {
    if (j < -1) throw std::invalid_argument("lp_block: j must be >= -1");
    if (part.n_modes != f.grid.n_modes)
        throw std::invalid_argument("lp_block: partition/grid mismatch");
    SpectralField out(f.grid);
    if (j > part.j_max) return out;
    for (int idx = 0; idx < f.grid.mode_count(); ++idx)
        out.coeffs[idx] = f.coeffs[idx] * part.value(j, idx);
    return out;
}

double lp_norm(const std::vector<Complex>& values, double p) {
    if (std::isinf(p)) {
        double mx = 0.0;
        for (const Complex& v : values) mx = std::max(mx, std::abs(v));
        return mx;
    }
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    double s = 0.0;
    for (const Complex& v : values) s += std::pow(std::abs(v), p);
    return std::pow(s / double(values.size()), 1.0 / p);
}

double lp_norm(const PhysicalField& f, double p) { return lp_norm(f.values, p); }

double besov_norm(const SpectralField& f, double alpha, double p, double q,
                  const DyadicPartition& part) {
    if (!std::isinf(q) && q < 1.0) throw std::invalid_argument("besov_norm: q must be >= 1");
    double acc = 0.0, mx = 0.0;
    for (int j = -1; j <= part.j_max; ++j) {
        const double bn = lp_norm(to_physical(lp_block(f, j, part)), p);
        const double weighted = std::pow(2.0, alpha * j) * bn;
        if (std::isinf(q))
            mx = std::max(mx, weighted);
        else
            acc += std::pow(weighted, q);
    }
    return std::isinf(q) ? mx : std::pow(acc, 1.0 / q);
}

double holder_norm(const SpectralField& f, double alpha, const DyadicPartition& part) {
    const double inf = std::numeric_limits<double>::infinity();
    return besov_norm(f, alpha, inf, inf, part);
}

double heat_smoothing_ratio(const SpectralField& f, double alpha, double beta,
                            double t, double mu, const DyadicPartition& part) {
    if (!(beta >= alpha)) throw std::invalid_argument("heat_smoothing_ratio: beta >= alpha required");
    if (!(t > 0.0)) throw std::invalid_argument("heat_smoothing_ratio: t must be > 0");
    const double base = holder_norm(f, alpha, part);
    if (base == 0.0) throw std::invalid_argument("heat_smoothing_ratio: zero-norm input");
    const double smoothed = holder_norm(apply_semigroup(f, t, mu), beta, part);
    return smoothed * std::pow(t, (beta - alpha) / 2.0) / base;
}

}  // namespace wcgl
