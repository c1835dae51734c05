#include "wcgl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wcgl/prng.hpp"

namespace wcgl {

namespace {
// uniform integer in [0, n) from the philox stream
uint32_t pick(uint64_t seed, uint32_t step, uint32_t a, uint32_t b, uint32_t n) {
    const auto blk = philox::block(seed, step, a, b, streams::kBootstrap);
    return blk[0] % n;
}
}  // namespace

double mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean: empty");
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("sample_variance: need >= 2 samples");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / double(v.size() - 1);
}

double blocked_se(const std::vector<double>& v, int blocks) {
    if (int(v.size()) < 2 * blocks) blocks = std::max(2, int(v.size()) / 2);
    const size_t bl = v.size() / blocks;
    std::vector<double> bm(blocks);
    for (int b = 0; b < blocks; ++b) {
        double s = 0.0;
        for (size_t i = 0; i < bl; ++i) s += v[b * bl + i];
        bm[b] = s / double(bl);
    }
    return std::sqrt(sample_variance(bm) / double(blocks));
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                     uint64_t seed, int resamples) {
    const size_t n = x.size();
    if (n != y.size() || n < 3) throw std::invalid_argument("linear_fit: need >= 3 points");
    auto solve = [&](const std::vector<double>& yy) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < n; ++i) {
            sx += x[i];
            sy += yy[i];
            sxx += x[i] * x[i];
            sxy += x[i] * yy[i];
        }
        const double det = n * sxx - sx * sx;
        const double slope = (n * sxy - sx * sy) / det;
        const double inter = (sy - slope * sx) / n;
        return std::pair<double, double>{slope, inter};
    };

    LinearFit fit;
    auto [s0, i0] = solve(y);
    fit.slope = s0;
    fit.intercept = i0;

    std::vector<double> resid(n);
    for (size_t i = 0; i < n; ++i) resid[i] = y[i] - (i0 + s0 * x[i]);

    std::vector<double> slopes(resamples);
    std::vector<double> yb(n);
    for (int r = 0; r < resamples; ++r) {
        for (size_t i = 0; i < n; ++i)
            yb[i] = i0 + s0 * x[i] + resid[pick(seed, uint32_t(r), uint32_t(i), 0, uint32_t(n))];
        slopes[r] = solve(yb).first;
    }
    fit.slope_se = std::sqrt(sample_variance(slopes));
    return fit;
}

BootstrapCI block_bootstrap_ci(const std::vector<double>& series, int block_len,
                               uint64_t seed, int resamples) {
    const size_t n = series.size();
    if (n < 4) throw std::invalid_argument("block_bootstrap_ci: series too short");
    block_len = std::clamp(block_len, 1, int(n) / 2);
    const uint32_t n_starts = uint32_t(n - block_len + 1);
    const int blocks_per = int((n + block_len - 1) / block_len);

    BootstrapCI ci;
    ci.mean = mean(series);
    std::vector<double> means(resamples);
    for (int r = 0; r < resamples; ++r) {
        double s = 0.0;
        size_t count = 0;
        for (int b = 0; b < blocks_per && count < n; ++b) {
            const uint32_t start = pick(seed, uint32_t(r), uint32_t(b), 1, n_starts);
            for (int i = 0; i < block_len && count < n; ++i, ++count) s += series[start + i];
        }
        means[r] = s / double(count);
    }
    std::sort(means.begin(), means.end());
    const auto quantile = [&](double q) {
        const double pos = q * (resamples - 1);
        const size_t lo = size_t(pos);
        const double frac = pos - double(lo);
        return means[lo] * (1.0 - frac) + means[std::min(size_t(resamples - 1), lo + 1)] * frac;
    };
    ci.lo = quantile(0.025);
    ci.hi = quantile(0.975);
    ci.se = std::sqrt(sample_variance(means));
    return ci;
}

}  // namespace wcgl
