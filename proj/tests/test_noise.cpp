#include <doctest.h>

#include <cmath>
#include <vector>

#include "wcgl/noise.hpp"

using namespace wcgl;

namespace {
const GridSpec kGrid{1, 2};
constexpr double kMu = 1.0;

double exact_var(int kx, int ky) { return 1.0 / (2.0 * rho(kx, ky, kMu)); }
}  // namespace

TEST_CASE("seed determinism: identical seeds give bit-identical trajectories") {
    for (uint64_t seed : {7ull, 123456789ull}) {
        const NoiseStream rng{seed};
        OUState a = sample_stationary(kGrid, kMu, rng);
        OUState b = sample_stationary(kGrid, kMu, rng);
        for (int i = 0; i < 8; ++i) {
            a = evolve(a, 0.125, rng);
            b = evolve(b, 0.125, rng);
        }
        for (int i = 0; i < kGrid.mode_count(); ++i) CHECK(a.z.coeffs[i] == b.z.coeffs[i]);
    }
}

TEST_CASE("stationary marginals: variance, E[z^2]=0, cross-mode independence") {
    const int n = 100000;
    const NoiseStream rng{42};
    double sum00 = 0.0, sum10 = 0.0;
    Complex pseudo{}, cross{}, conj_pair{};
    double m4_00 = 0.0;
    for (int s = 0; s < n; ++s) {
        const Complex z00 = std::sqrt(exact_var(0, 0)) * rng.cn01(streams::kStationaryInit, s, 0, 0);
        const Complex z10 = std::sqrt(exact_var(1, 0)) * rng.cn01(streams::kStationaryInit, s, 1, 0);
        const Complex zm10 =
            std::sqrt(exact_var(-1, 0)) * rng.cn01(streams::kStationaryInit, s, -1, 0);
        sum00 += std::norm(z00);
        sum10 += std::norm(z10);
        pseudo += z00 * z00;
        cross += z00 * std::conj(z10);
        conj_pair += z10 * zm10;
        m4_00 += std::norm(z00) * std::norm(z00);
    }
    const double v00 = sum00 / n;
    const double v10 = sum10 / n;
    const double se00 = std::sqrt((m4_00 / n - v00 * v00) / n);
    CHECK(std::abs(v00 - 0.5) <= 3.0 * se00);
    CHECK(std::abs(v10 - exact_var(1, 0)) <= 3.0 * exact_var(1, 0) / std::sqrt(double(n)));
    CHECK(v10 == doctest::Approx(0.0123522).epsilon(0.05));

    // E[z^2] = 0, E[z z'] = 0, and Z_hat(k) independent of Z_hat(-k)
    const double se_pseudo = 0.5 / std::sqrt(double(n));
    CHECK(std::abs(pseudo.real() / n) <= 3.0 * se_pseudo);
    CHECK(std::abs(pseudo.imag() / n) <= 3.0 * se_pseudo);
    const double se_cross = std::sqrt(exact_var(0, 0) * exact_var(1, 0) / 2.0 / n);
    CHECK(std::abs(cross.real() / n) <= 3.0 * se_cross);
    CHECK(std::abs(cross.imag() / n) <= 3.0 * se_cross);
    const double se_conj = std::sqrt(exact_var(1, 0) * exact_var(-1, 0) / 2.0 / n);
    CHECK(std::abs(conj_pair.real() / n) <= 3.0 * se_conj);
    CHECK(std::abs(conj_pair.imag() / n) <= 3.0 * se_conj);
}

TEST_CASE("evolve preserves stationarity and has the exact lag covariance") {
    const int n = 60000;
    const double delta = 0.07;
    double var_after = 0.0, var_after_sq = 0.0;
    Complex lag{};
    for (int s = 0; s < n; ++s) {
        const NoiseStream rng{9000 + uint64_t(s)};
        OUState st = sample_stationary(kGrid, kMu, rng);
        const Complex before = st.z.at(1, 1);
        st = evolve(st, delta, rng);
        const Complex after = st.z.at(1, 1);
        var_after += std::norm(after);
        var_after_sq += std::norm(after) * std::norm(after);
        lag += after * std::conj(before);
    }
    const double v = var_after / n;
    const double ev = exact_var(1, 1);
    const double se = std::sqrt((var_after_sq / n - v * v) / n);
    CHECK(std::abs(v - ev) <= 3.0 * se);

    const Complex want = semigroup_multiplier(1, 1, delta, kMu) * ev;
    const double se_lag = ev / std::sqrt(double(n));
    CHECK(std::abs(lag.real() / double(n) - want.real()) <= 3.0 * se_lag);
    CHECK(std::abs(lag.imag() / double(n) - want.imag()) <= 3.0 * se_lag);
}

TEST_CASE("large delta decorrelates and lands on the stationary variance") {
    const int n = 40000;
    Complex lag{};
    double var_after = 0.0;
    for (int s = 0; s < n; ++s) {
        const NoiseStream rng{77000 + uint64_t(s)};
        OUState st = sample_stationary(kGrid, kMu, rng);
        const Complex before = st.z.at(0, 0);
        st = evolve(st, 25.0, rng);
        lag += st.z.at(0, 0) * std::conj(before);
        var_after += std::norm(st.z.at(0, 0));
    }
    CHECK(std::abs(lag / double(n)) <= 3.0 * 0.5 / std::sqrt(double(n)));
    CHECK(var_after / n == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("zero-start chain: zero at s, Ito-isometry variance vs quadrature oracle") {
    const NoiseStream rng{5};
    OUState st = zero_start(kGrid, kMu, 2.0);
    for (const Complex& c : st.z.coeffs) CHECK(c == Complex{});
    CHECK(st.t == 2.0);

    // oracle: direct 1-D integral of e^{-2 rho u} by fine trapezoid
    const double dt = 0.35;
    auto quad = [&](int kx, int ky) {
        const double r = rho(kx, ky, kMu);
        const int n = 20000;
        double s = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double u = dt * i / n;
            const double w = (i == 0 || i == n) ? 0.5 : 1.0;
            s += w * std::exp(-2.0 * r * u);
        }
        return s * dt / n;
    };
    st = evolve(st, dt, rng);
    for (int kx = -1; kx <= 1; ++kx)
        for (int ky = -1; ky <= 1; ++ky)
            CHECK(st.variance(kx, ky) == doctest::Approx(quad(kx, ky)).epsilon(1e-7));

    const int n = 50000;
    double acc = 0.0, acc_sq = 0.0;
    for (int s2 = 0; s2 < n; ++s2) {
        const NoiseStream r2{333000 + uint64_t(s2)};
        OUState z = zero_start(kGrid, kMu, 0.0);
        z = evolve(z, dt, r2);
        acc += std::norm(z.z.at(1, 0));
        acc_sq += std::norm(z.z.at(1, 0)) * std::norm(z.z.at(1, 0));
    }
    const double want = quad(1, 0);
    const double got = acc / n;
    const double se = std::sqrt((acc_sq / n - got * got) / n);
    CHECK(std::abs(got - want) <= 3.0 * se);
}

TEST_CASE("pathwise identity Z_{s,t} = Z_{-inf,t} - P_{t-s} Z_{-inf,s} under shared noise") {
    const NoiseStream rng{31337};
    OUState stat = sample_stationary(kGrid, kMu, rng);
    OUState zs = zero_start(kGrid, kMu, stat.t, stat.step);
    const OUState stat_at_s = stat;
    const double delta = 0.2;
    for (int i = 1; i <= 10; ++i) {
        stat = evolve(stat, delta, rng);
        zs = evolve(zs, delta, rng);
        const SpectralField want = sub(stat.z, apply_semigroup(stat_at_s.z, i * delta, kMu));
        for (int j = 0; j < kGrid.mode_count(); ++j)
            CHECK(std::abs(zs.z.coeffs[j] - want.coeffs[j]) < 1e-12);
    }
}

TEST_CASE("exactness in delta: n small transitions compose to one large one") {
    // deterministic check on the transition arithmetic: multiplier composes
    // and the accumulated noise variance telescopes to the closed form
    for (int kx : {0, 1}) {
        const double r = rho(kx, 1, kMu);
        const double delta = 0.05;
        const int n = 16;
        double var = 0.0;
        Complex mult{1.0, 0.0};
        for (int i = 0; i < n; ++i) {
            const double step_var = -std::expm1(-2.0 * r * delta) / (2.0 * r);
            var = var * std::norm(semigroup_multiplier(kx, 1, delta, kMu)) + step_var;
            mult *= semigroup_multiplier(kx, 1, delta, kMu);
        }
        CHECK(var == doctest::Approx(-std::expm1(-2.0 * r * n * delta) / (2.0 * r)).epsilon(1e-13));
        CHECK(std::abs(mult - semigroup_multiplier(kx, 1, n * delta, kMu)) < 1e-12);
    }

    // MC spot check: marginal variance after 4 steps of delta matches one 4*delta step
    const int n = 30000;
    double v_multi = 0.0, v_single = 0.0;
    for (int s = 0; s < n; ++s) {
        const NoiseStream rng{111000 + uint64_t(s)};
        OUState a = zero_start(kGrid, kMu, 0.0);
        for (int i = 0; i < 4; ++i) a = evolve(a, 0.1, rng);
        OUState b = zero_start(kGrid, kMu, 0.0, /*step0=*/100);
        b = evolve(b, 0.4, rng);
        v_multi += std::norm(a.z.at(1, 0));
        v_single += std::norm(b.z.at(1, 0));
    }
    v_multi /= n;
    v_single /= n;
    const double se = v_multi / std::sqrt(double(n)) * 2.0;
    CHECK(std::abs(v_multi - v_single) <= 4.0 * se);
}

TEST_CASE("stationarity chi-square test over 1e4 steps at the 1% level") {
    const NoiseStream rng{2024};
    OUState st = sample_stationary(kGrid, kMu, rng);
    const double delta = 0.25;
    const int gap = 8, total = 10000;
    std::vector<double> samples;
    for (int i = 0; i < total; ++i) {
        st = evolve(st, delta, rng);
        if (i % gap == 0) samples.push_back(std::norm(st.z.at(0, 0)));
    }
    const int blocks = 8;
    const size_t bl = samples.size() / blocks;
    std::vector<double> bm(blocks, 0.0);
    double all = 0.0;
    for (int b = 0; b < blocks; ++b) {
        for (size_t i = 0; i < bl; ++i) bm[b] += samples[b * bl + i];
        bm[b] /= double(bl);
        all += bm[b];
    }
    all /= blocks;
    // block means are ~N(mean, mean^2/bl) for the exponential |z|^2
    double t_stat = 0.0;
    for (int b = 0; b < blocks; ++b)
        t_stat += (bm[b] - all) * (bm[b] - all) * double(bl) / (all * all);
    CHECK(t_stat < 18.475);  // chi^2_7 at 1%
}

TEST_CASE("noise_scale = 0 freezes the chain at zero") {
    const NoiseStream rng{1};
    OUState st = zero_start(kGrid, kMu, 0.0, 0, 0.0);
    for (int i = 0; i < 5; ++i) st = evolve(st, 0.1, rng);
    for (const Complex& c : st.z.coeffs) CHECK(c == Complex{});
    CHECK(st.variance(0, 0) == 0.0);
}
