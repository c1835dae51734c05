#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "wcgl/checkpoint.hpp"
#include "wcgl/experiments.hpp"
#include "wcgl/stats.hpp"

using namespace wcgl;

namespace {
std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("config: round trip, defaults, strictness") {
    RunConfig cfg;
    cfg.experiment = "coupling";
    cfg.model.mu = 2.0;
    cfg.model.nu = {1.5, -0.25};
    cfg.grid.n_modes = 12;
    cfg.lambda_grid = {10, 25, 50};
    cfg.exponents.gamma = 0.21;
    const std::string text = serialize_config(cfg);
    const RunConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);
    CHECK(back.model.nu == Complex{1.5, -0.25});
    CHECK(back.lambda_grid.size() == 3);

    SUBCASE("unknown keys are errors") {
        CHECK_THROWS_AS(parse_config(text + "\n[model]\nfoo = 1\n"), ConfigError);
        CHECK_THROWS_AS(parse_config(text + "\n[nonsense]\nx = 2\n"), ConfigError);
    }
    SUBCASE("type errors are rejected") {
        CHECK_THROWS_AS(parse_config("experiment = \"verify\"\n[model]\nmu = \"two\"\n"),
                        ConfigError);
        CHECK_THROWS_AS(parse_config("experiment = \"verify\"\n[model]\nm = 1.5\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("experiment = 3\n"), ConfigError);
    }
    SUBCASE("constraint violations are rejected") {
        CHECK_THROWS_AS(parse_config("experiment = \"verify\"\n[model]\nmu = -1\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("experiment = \"verify\"\n[run]\ndt = 0\n"), ConfigError);
    }
    SUBCASE("default gamma sits mid-interval") {
        RunConfig c;
        c.experiment = "verify";
        const double lo = (c.exponents.alpha + c.exponents.beta) / 2.0;
        const double hi = 1.0 / (2.0 * c.model.m + 1.0);
        CHECK(c.gamma_resolved() == doctest::Approx((lo + hi) / 2.0));
    }
    SUBCASE("missing config file") {
        CHECK_THROWS_AS(parse_config_file("/nonexistent/path.cfg"), ConfigError);
    }
}

TEST_CASE("checkpoint: byte-stable round trip and bit-identical resume") {
    RunConfig cfg;
    cfg.experiment = "wellposedness";
    cfg.grid = GridSpec{3, 2};
    cfg.model.mu = 2.0;
    cfg.dt = 0.02;
    cfg.horizon = 2.0;
    cfg.seed = 77;

    SolverState st = make_solver_state(cfg.grid, cfg.model, cfg.seed,
                                       constant_field(cfg.grid, {0.4, 0.1}));
    for (int i = 0; i < 50; ++i) st = step_exponential_euler(st, cfg.dt);

    const std::string p1 = temp_path("wcgl_ckpt_a.bin");
    const std::string p2 = temp_path("wcgl_ckpt_b.bin");
    save_checkpoint({st}, cfg, p1);
    CheckpointData loaded = load_checkpoint(p1);
    save_checkpoint(loaded.states, loaded.config, p2);

    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    CHECK(slurp(p1) == slurp(p2));

    SUBCASE("resume is bit-identical to an unbroken run") {
        SolverState resumed = loaded.states[0];
        SolverState unbroken = st;
        for (int i = 0; i < 50; ++i) {
            resumed = step_exponential_euler(resumed, cfg.dt);
            unbroken = step_exponential_euler(unbroken, cfg.dt);
        }
        for (int q = 0; q < cfg.grid.mode_count(); ++q) {
            CHECK(resumed.v.coeffs[q] == unbroken.v.coeffs[q]);
            CHECK(resumed.noise.z.coeffs[q] == unbroken.noise.z.coeffs[q]);
        }
    }
    SUBCASE("corrupted header or truncation is rejected with no partial state") {
        std::string bytes = slurp(p1);
        std::string bad = bytes;
        bad[0] = 'X';
        const std::string pb = temp_path("wcgl_ckpt_bad.bin");
        {
            std::ofstream out(pb, std::ios::binary);
            out << bad;
        }
        CHECK_THROWS_AS(load_checkpoint(pb), CheckpointError);
        {
            std::ofstream out(pb, std::ios::binary);
            out << bytes.substr(0, bytes.size() / 2);
        }
        CHECK_THROWS_AS(load_checkpoint(pb), CheckpointError);
        std::remove(pb.c_str());
    }
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("stats: linear fit, bootstrap, blocked SE") {
    std::vector<double> x, y;
    for (int i = 0; i < 40; ++i) {
        x.push_back(0.1 * i);
        y.push_back(3.0 - 2.0 * 0.1 * i);
    }
    const LinearFit f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(f.slope_se < 1e-10);

    // bootstrap CI covers the mean of an iid series
    NoiseStream rng{55};
    std::vector<double> series(2000);
    for (size_t i = 0; i < series.size(); ++i)
        series[i] = 1.0 + rng.normal(streams::kScalarMc, uint32_t(i), 3, 4);
    const BootstrapCI ci = block_bootstrap_ci(series, 20, 99);
    CHECK(ci.lo < 1.0);
    CHECK(ci.hi > 1.0);
    CHECK(ci.se > 0.0);
    CHECK(blocked_se(series) == doctest::Approx(1.0 / std::sqrt(2000.0)).epsilon(0.5));
}

TEST_CASE("fit_decay_rate recovers synthetic rates and survives underflow") {
    std::vector<double> t, w;
    for (int i = 0; i <= 1000; ++i) {
        t.push_back(0.01 * i);
        w.push_back(std::exp(-7.5 * 0.01 * i));
    }
    const DecayFit f = fit_decay_rate(t, w, 2.5, 10.0);
    CHECK(f.c2 == doctest::Approx(7.5).epsilon(1e-9));

    // strong decay underflows to zero before the window ends
    std::vector<double> w2;
    for (int i = 0; i <= 1000; ++i) {
        const double v = -200.0 * 0.01 * i;
        w2.push_back(v < -700.0 ? 0.0 : std::exp(v));
    }
    const DecayFit g = fit_decay_rate(t, w2, 2.5, 10.0);
    CHECK(g.points >= 10);
    CHECK(g.c2 == doctest::Approx(200.0).epsilon(0.05));
}

TEST_CASE("parallel_for is schedule-independent") {
    const int n = 37;
    std::vector<double> a(n), b(n);
    auto work = [](int i) {
        double s = 0.0;
        for (int j = 0; j < 1000; ++j) s += std::sin(i + j * 0.01);
        return s;
    };
    parallel_for(n, 1, [&](int i) { a[i] = work(i); });
    parallel_for(n, 4, [&](int i) { b[i] = work(i); });
    for (int i = 0; i < n; ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("verify suite passes and is deterministic") {
    RunConfig cfg;
    cfg.experiment = "verify";
    cfg.seed = 42;
    const ExperimentReport r1 = run_verify(cfg);
    const ExperimentReport r2 = run_verify(cfg);
    CHECK(r1.passed());
    CHECK(r1.to_json() == r2.to_json());
    for (const Check& c : r1.checks) CHECK(c.pass);
}

TEST_CASE("coupling pipeline smoke: positive contraction, monotone in lambda") {
    RunConfig cfg;
    cfg.experiment = "coupling";
    cfg.model = ModelParams{};
    cfg.model.mu = 2.0;
    cfg.grid = GridSpec{4, 2};
    cfg.seed = 5;
    cfg.horizon = 1.5;
    cfg.dt = 5e-3;
    cfg.ensemble = 2;
    cfg.lambda_grid = {5.0, 30.0};
    const ExperimentReport rep = run_coupling(cfg);
    CHECK(rep.passed());
}

TEST_CASE("ergodicity pipeline smoke: linear case reproduces the exact law") {
    RunConfig cfg;
    cfg.experiment = "ergodicity";
    cfg.model.mu = 1.0;
    cfg.model.nu = {0.0, 0.0};
    cfg.model.tau = {-1.0, 0.0};
    cfg.grid = GridSpec{2, 2};
    cfg.seed = 31;
    cfg.horizon = 60.0;
    cfg.dt = 0.02;
    cfg.mode_window = 1;
    cfg.init_offset = 2.0;
    const ExperimentReport rep = run_ergodicity(cfg);
    CHECK(rep.passed());
}

TEST_CASE("wellposedness pipeline smoke: envelope, energy and refinement checks") {
    RunConfig cfg;
    cfg.experiment = "wellposedness";
    cfg.model.mu = 2.0;
    cfg.model.nu = {1.0, 0.0};
    cfg.grid = GridSpec{4, 2};
    cfg.seed = 11;
    cfg.horizon = 2.0;
    cfg.dt = 5e-3;
    cfg.ensemble = 3;
    cfg.burn_in_fraction = 0.5;
    cfg.mode_window = 1;
    cfg.energy_check = true;
    cfg.refine_check = true;
    const ExperimentReport rep = run_wellposedness(cfg);
    CHECK(rep.passed());

    // linear gold case through the same pipeline
    RunConfig lin = cfg;
    lin.model.nu = {0.0, 0.0};
    lin.model.tau = {-1.0, 0.0};
    lin.model.mu = 1.0;
    lin.horizon = 40.0;
    lin.dt = 0.02;
    lin.ensemble = 6;
    lin.energy_check = false;
    lin.refine_check = false;
    const ExperimentReport lrep = run_wellposedness(lin);
    CHECK(lrep.passed());
}

TEST_CASE("worker count does not change results") {
    RunConfig cfg;
    cfg.experiment = "coupling";
    cfg.model.mu = 2.0;
    cfg.grid = GridSpec{3, 2};
    cfg.seed = 13;
    cfg.horizon = 0.5;
    cfg.dt = 0.01;
    cfg.ensemble = 3;
    cfg.lambda_grid = {5.0, 15.0};
    cfg.threads = 1;
    ExperimentReport ra = run_coupling(cfg);
    cfg.threads = 4;
    ExperimentReport rb = run_coupling(cfg);
    // the echo records the worker count; the measured content must not
    ra.config_echo.clear();
    rb.config_echo.clear();
    CHECK(ra.to_json() == rb.to_json());
}

TEST_CASE("report json is deterministic and csv has fixed columns") {
    ExperimentReport rep;
    rep.experiment = "demo";
    rep.seed = 1;
    rep.add_check("alpha", 1.25, 0.1, 100, true);
    rep.add_check("beta", -0.5, 0.0, 7, false, "note");
    rep.add_scalar("gamma", 3.5);
    rep.fits.push_back({"slope", -2.0, 0.05, 1.0});
    CHECK(rep.to_json() == rep.to_json());
    CHECK(!rep.passed());
    const std::string csv = rep.to_csv();
    CHECK(csv.find("section,name,value,tolerance,samples,pass") == 0);
    CHECK(csv.find("check,alpha,1.25,0.1,100,1") != std::string::npos);
}
