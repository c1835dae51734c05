#include "wcgl/solver.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace wcgl {

namespace {

// Per-(grid, mu, delta, noise_scale) mode tables; the entries reproduce
// semigroup_multiplier / phi1_weight / the transition noise sd bit for bit,
// they just avoid recomputing transcendentals every step.
struct StepTables {
    std::vector<Complex> mult;
    std::vector<Complex> phi1;
    std::vector<double> sd;
};

std::shared_ptr<const StepTables> step_tables(GridSpec grid, double mu, double delta,
                                              double noise_scale) {
    using Key = std::tuple<int, int, double, double, double>;
    static std::mutex mtx;
    static std::map<Key, std::shared_ptr<const StepTables>> cache;
    const Key key{grid.n_modes, grid.pad, mu, delta, noise_scale};
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    auto t = std::make_shared<StepTables>();
    const int N = grid.n_modes;
    t->mult.resize(grid.mode_count());
    t->phi1.resize(grid.mode_count());
    t->sd.resize(grid.mode_count());
    for (int kx = -N; kx <= N; ++kx)
        for (int ky = -N; ky <= N; ++ky) {
            const int idx = grid.mode_index(kx, ky);
            t->mult[idx] = semigroup_multiplier(kx, ky, delta, mu);
            t->phi1[idx] = phi1_weight(kx, ky, delta, mu);
            const double r = rho(kx, ky, mu);
            t->sd[idx] = noise_scale * std::sqrt(-std::expm1(-2.0 * r * delta) / (2.0 * r));
        }
    cache.emplace(key, t);
    return t;
}

// Same update as evolve(), reading the cached tables.
OUState evolve_tabled(const OUState& state, double delta, const StepTables& t,
                      const NoiseStream& rng) {
    OUState out = state;
    out.t = state.t + delta;
    out.step = state.step + 1;
    const int N = state.grid.n_modes;
    for (int kx = -N; kx <= N; ++kx)
        for (int ky = -N; ky <= N; ++ky) {
            const int idx = state.grid.mode_index(kx, ky);
            const Complex eta = t.sd[idx] * rng.cn01(streams::kIncrement, state.step, kx, ky);
            out.z.coeffs[idx] = t.mult[idx] * state.z.coeffs[idx] + eta;
        }
    return out;
}

constexpr double kBlowUpL2 = 1e8;

void check_finite(const SpectralField& v, double t) {
    double s = 0.0;
    for (const Complex& c : v.coeffs) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw BlowUpError(t, std::numeric_limits<double>::infinity());
        s += std::norm(c);
    }
    if (std::sqrt(s) > kBlowUpL2) throw BlowUpError(t, std::sqrt(s));
}
}  // namespace

WickFamily build_wick(const OUState& noise, const ModelParams& params) {
    switch (params.renorm) {
        case ModelParams::Renorm::zero_start:
            return wick_family(noise, params.m);
        case ModelParams::Renorm::stationary: {
            const double c = params.noise_scale * params.noise_scale *
                             stationary_wick_constant(noise.grid, noise.mu);
            return wick_family_with_constant(noise, params.m, c);
        }
        case ModelParams::Renorm::none:
            return wick_family_with_constant(noise, params.m, 0.0);
    }
    throw std::logic_error("build_wick: bad renorm mode");
}

SolverState make_solver_state(GridSpec grid, const ModelParams& params,
                              uint64_t seed, const SpectralField& v0) {
    grid.validate();
    params.validate();
    if (!(v0.grid == grid)) throw std::invalid_argument("make_solver_state: grid mismatch");
    SolverState st;
    st.grid = grid;
    st.params = params;
    st.seed = seed;
    st.v = v0;
    st.noise = zero_start(grid, params.mu, 0.0, 0, params.noise_scale);
    st.wick = build_wick(st.noise, params);
    return st;
}

namespace {

// Pointwise assembly of the drift sum; `skip_top` drops the (m+1, m) term
// (that is Psi' = Psi + nu v^{m+1} vbar^m).
std::vector<Complex> assemble_drift(const std::vector<Complex>& vphys,
                                    const WickFamily& wick,
                                    const ModelParams& params, bool skip_top) {
    const int m = params.m;
    for (int i = 0; i <= m + 1; ++i)
        for (int j = 0; j <= m; ++j)
            if (!wick.has(m + 1 - i, m - j))
                throw std::invalid_argument("psi: wick family missing entry");

    const size_t np = vphys.size();
    std::vector<Complex> acc(np, Complex{});

    struct Term {
        double coef;
        int i, j;
        const std::vector<Complex>* w;  // null: the constant (0,0) power
        bool conj;
    };
    std::vector<Term> terms;
    for (int i = 0; i <= m + 1; ++i)
        for (int j = 0; j <= m; ++j) {
            if (skip_top && i == m + 1 && j == m) continue;
            const auto [w, cj] = wick.power_physical_view(m + 1 - i, m - j);
            terms.push_back({binom(m + 1, i) * binom(m, j), i, j, w, cj});
        }

    std::vector<Complex> vpow(m + 2), vbpow(m + 1);
    for (size_t a = 0; a < np; ++a) {
        const Complex v = vphys[a];
        const Complex vb = std::conj(v);
        vpow[0] = Complex{1.0, 0.0};
        for (int i = 1; i <= m + 1; ++i) vpow[i] = vpow[i - 1] * v;
        vbpow[0] = Complex{1.0, 0.0};
        for (int j = 1; j <= m; ++j) vbpow[j] = vbpow[j - 1] * vb;
        Complex s{};
        for (const Term& t : terms) {
            Complex w{1.0, 0.0};
            if (t.w) w = t.conj ? std::conj((*t.w)[a]) : (*t.w)[a];
            s += t.coef * vpow[t.i] * vbpow[t.j] * w;
        }
        acc[a] = -params.nu * s;
    }
    return acc;
}

SpectralField drift_common(const SpectralField& v, const WickFamily& wick,
                           const ModelParams& params, bool skip_top) {
    if (!(v.grid == wick.grid())) throw std::invalid_argument("psi: grid mismatch");
    const PhysicalField vp = to_physical(v);
    std::vector<Complex> acc = assemble_drift(vp.values, wick, params, skip_top);
    const std::vector<Complex> zp = wick.power_physical(1, 0);
    const Complex tau1 = params.tau + 1.0;
    for (size_t a = 0; a < acc.size(); ++a) acc[a] += tau1 * (vp.values[a] + zp[a]);
    return to_spectral(PhysicalField{v.grid, std::move(acc)});
}

}  // namespace

SpectralField psi(const SpectralField& v, const WickFamily& wick,
                  const ModelParams& params) {
    return drift_common(v, wick, params, /*skip_top=*/false);
}

SpectralField psi_prime(const SpectralField& v, const WickFamily& wick,
                        const ModelParams& params) {
    return drift_common(v, wick, params, /*skip_top=*/true);
}

SpectralField exp_euler_update(const SpectralField& v, const SpectralField& drift,
                               double delta, double mu) {
    const int N = v.grid.n_modes;
    SpectralField out(v.grid);
    for (int kx = -N; kx <= N; ++kx)
        for (int ky = -N; ky <= N; ++ky)
            out.at(kx, ky) = semigroup_multiplier(kx, ky, delta, mu) * v.at(kx, ky) +
                             phi1_weight(kx, ky, delta, mu) * drift.at(kx, ky);
    return out;
}

SolverState step_exponential_euler(const SolverState& state, double delta,
                                   int noise_substeps) {
    if (!(delta > 0.0)) throw std::invalid_argument("step: delta must be > 0");
    if (noise_substeps < 1) throw std::invalid_argument("step: noise_substeps must be >= 1");
    const auto tables =
        step_tables(state.grid, state.params.mu, delta, state.params.noise_scale);
    const auto sub_tables =
        noise_substeps == 1
            ? tables
            : step_tables(state.grid, state.params.mu, delta / noise_substeps,
                          state.params.noise_scale);

    SolverState out;
    out.grid = state.grid;
    out.params = state.params;
    out.seed = state.seed;
    out.noise = state.noise;
    const SpectralField drift = psi(state.v, state.wick, state.params);
    out.v = SpectralField(state.grid);
    for (int idx = 0; idx < state.grid.mode_count(); ++idx)
        out.v.coeffs[idx] =
            tables->mult[idx] * state.v.coeffs[idx] + tables->phi1[idx] * drift.coeffs[idx];
    const NoiseStream rng{state.seed};
    for (int s = 0; s < noise_substeps; ++s)
        out.noise = evolve_tabled(out.noise, delta / noise_substeps, *sub_tables, rng);
    out.wick = build_wick(out.noise, state.params);
    check_finite(out.v, out.noise.t);
    return out;
}

std::vector<SpectralField> picard_local(
    const SpectralField& u0, const std::vector<WickFamily>& families,
    double delta_sub, const ModelParams& params, double tol, int max_iter,
    double gamma, double beta, const DyadicPartition& part) {
    if (families.empty()) throw std::invalid_argument("picard_local: empty noise path");
    const size_t n = families.size();  // times 0, delta, ..., (n-1) delta
    const double mu = params.mu;

    // starting iterate: pure semigroup flow of the initial data
    std::vector<SpectralField> cur(n);
    cur[0] = u0;
    for (size_t i = 1; i < n; ++i) cur[i] = apply_semigroup(cur[i - 1], delta_sub, mu);

    double prev_dist = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        std::vector<SpectralField> next(n);
        next[0] = u0;
        for (size_t i = 0; i + 1 < n; ++i) {
            const SpectralField drift = psi(cur[i], families[i], params);
            next[i + 1] = exp_euler_update(next[i], drift, delta_sub, mu);
        }
        double dist = 0.0;
        for (size_t i = 1; i < n; ++i) {
            const double w = std::pow(double(i) * delta_sub, gamma);
            dist = std::max(dist, w * holder_norm(sub(next[i], cur[i]), beta, part));
        }
        cur = std::move(next);
        if (dist < tol) return cur;
        if (dist > 4.0 * prev_dist && dist > 1e3)
            throw NonContractionError("picard_local: iterates diverge, horizon too large (dist=" +
                                      std::to_string(dist) + ")");
        prev_dist = dist;
    }
    throw NonContractionError("picard_local: no convergence within max_iter");
}

namespace {

// integrand of Re[(i+mu) <grad{(v vbar)^{p-1} vbar}, grad v>] at one point,
// with grad g expanded by the chain rule (exact given grad v on the grid)
inline double grad_term_point(Complex v, Complex dvx, Complex dvy, int p, double mu) {
    const Complex vb = std::conj(v);
    const double a = std::norm(v);  // |v|^2
    const Complex imu{mu, 1.0};     // (i + mu)
    const double a_pm2 = (p >= 2) ? std::pow(a, p - 2) : 0.0;
    const double a_pm1 = std::pow(a, p - 1);
    Complex gx, gy;
    if (p == 1) {
        gx = std::conj(dvx);
        gy = std::conj(dvy);
    } else {
        const Complex common_x = (vb * dvx + v * std::conj(dvx)) * vb;
        const Complex common_y = (vb * dvy + v * std::conj(dvy)) * vb;
        gx = double(p - 1) * a_pm2 * common_x + a_pm1 * std::conj(dvx);
        gy = double(p - 1) * a_pm2 * common_y + a_pm1 * std::conj(dvy);
    }
    return (imu * (gx * dvx + gy * dvy)).real();
}

}  // namespace

std::pair<double, double> quadratic_form_sides(const SpectralField& v, int p, double mu) {
    if (p < 1) throw std::invalid_argument("quadratic_form_sides: p must be >= 1");
    const PhysicalField vp = to_physical(v);
    std::vector<Complex> dx, dy;
    gradient_physical(v, dx, dy);
    const size_t np = vp.values.size();
    double lhs = 0.0, rhs = 0.0;
    for (size_t a = 0; a < np; ++a) {
        lhs += grad_term_point(vp.values[a], dx[a], dy[a], p, mu);
        const double g2 = std::norm(dx[a]) + std::norm(dy[a]);
        rhs += g2 * std::pow(std::norm(vp.values[a]), p - 1);
    }
    return {lhs / double(np), mu * rhs / double(np)};
}

double delta_star(int p, double mu) {
    const double q = mu * (mu + std::sqrt(1.0 + mu * mu));
    const double d = 1.0 - double(p - 1) / q;
    if (d < 0.0)
        throw std::invalid_argument("delta_star: p exceeds 1 + mu(mu+sqrt(1+mu^2))");
    return d;
}

EnergyReport energy_report(const SolverState& state, const SolverState& next, int p) {
    if (p < 1 || p > 8) throw std::invalid_argument("energy_report: p in [1,8] required");
    const ModelParams& params = state.params;
    const int m = params.m;
    EnergyReport rep;
    rep.p = p;

    const PhysicalField vp = to_physical(state.v);
    std::vector<Complex> dx, dy;
    gradient_physical(state.v, dx, dy);
    const PhysicalField psip = to_physical(psi_prime(state.v, state.wick, params));

    const size_t np = vp.values.size();
    double grad = 0.0, mass = 0.0, dissip = 0.0, forcing = 0.0, mass_next = 0.0;
    for (size_t a = 0; a < np; ++a) {
        const Complex v = vp.values[a];
        const double av2 = std::norm(v);
        grad += grad_term_point(v, dx[a], dy[a], p, params.mu);
        mass += std::pow(av2, p);
        dissip += std::pow(av2, p + m);
        forcing += std::pow(av2, p - 1) * (std::conj(v) * psip.values[a]).real();
    }
    const PhysicalField vn = to_physical(next.v);
    for (size_t a = 0; a < np; ++a) mass_next += std::pow(std::norm(vn.values[a]), p);

    const double inv = 1.0 / double(np);
    rep.grad_term = grad * inv;
    rep.mass_term = mass * inv;
    rep.dissipation_term = params.nu.real() * dissip * inv;
    rep.forcing_term = forcing * inv;
    const double dt = next.t() - state.t();
    rep.lhs_rate = (mass_next - mass) * inv / (2.0 * p * dt);
    return rep;
}

CoupledState make_coupled_state(GridSpec grid, const ModelParams& params,
                                uint64_t seed, const SpectralField& v0,
                                const SpectralField& v0_shadow) {
    CoupledState cs;
    cs.primary = make_solver_state(grid, params, seed, v0);
    cs.shadow = cs.primary;
    cs.shadow.v = v0_shadow;
    return cs;
}

CoupledState step_coupled(const CoupledState& cs, double delta, int noise_substeps) {
    if (!(delta > 0.0)) throw std::invalid_argument("step_coupled: delta must be > 0");
    if (noise_substeps < 1)
        throw std::invalid_argument("step_coupled: noise_substeps must be >= 1");
    const ModelParams& params = cs.primary.params;
    const auto tables = step_tables(cs.primary.grid, params.mu, delta, params.noise_scale);
    const auto sub_tables =
        noise_substeps == 1 ? tables
                            : step_tables(cs.primary.grid, params.mu,
                                          delta / noise_substeps, params.noise_scale);
    CoupledState out;
    out.primary.grid = cs.primary.grid;
    out.primary.params = params;
    out.primary.seed = cs.primary.seed;
    out.primary.noise = cs.primary.noise;
    out.primary.v = SpectralField(cs.primary.grid);
    out.shadow = out.primary;
    out.shadow.params = cs.shadow.params;
    out.shadow.seed = cs.shadow.seed;

    const SpectralField drift_a = psi(cs.primary.v, cs.primary.wick, params);
    SpectralField drift_b = psi(cs.shadow.v, cs.primary.wick, params);
    if (params.lambda != 0.0)
        drift_b = add(drift_b, scale(sub(cs.primary.v, cs.shadow.v),
                                     Complex{params.lambda, 0.0}));

    for (int idx = 0; idx < cs.primary.grid.mode_count(); ++idx) {
        out.primary.v.coeffs[idx] = tables->mult[idx] * cs.primary.v.coeffs[idx] +
                                    tables->phi1[idx] * drift_a.coeffs[idx];
        out.shadow.v.coeffs[idx] = tables->mult[idx] * cs.shadow.v.coeffs[idx] +
                                   tables->phi1[idx] * drift_b.coeffs[idx];
    }

    const NoiseStream rng{cs.primary.seed};
    for (int s = 0; s < noise_substeps; ++s)
        out.primary.noise = evolve_tabled(out.primary.noise, delta / noise_substeps,
                                          *sub_tables, rng);
    out.primary.wick = build_wick(out.primary.noise, params);
    out.shadow.noise = out.primary.noise;
    out.shadow.wick = out.primary.wick;

    check_finite(out.primary.v, out.primary.t());
    check_finite(out.shadow.v, out.shadow.t());
    return out;
}

}  // namespace wcgl
