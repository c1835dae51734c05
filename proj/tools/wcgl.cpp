// Command-line front end: configures and runs the experiment pipelines,
// writes structured reports, and resumes checkpointed trajectories.
//
// Exit codes: 0 all declared criteria pass, 1 a criterion failed,
// 2 usage/config error, 3 blow-up where not expected.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>

#include "wcgl/checkpoint.hpp"
#include "wcgl/experiments.hpp"

using namespace wcgl;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string format;
    int64_t seed = -1;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
    auto* opt = cmd->add_option("--config", flags.config_path, "experiment config file");
    if (config_required) opt->required();
    cmd->add_option("--seed", flags.seed, "override config seed");
    cmd->add_option("--out", flags.out_dir, "override output directory");
    cmd->add_option("--threads", flags.threads, "override worker count");
    cmd->add_option("--format", flags.format, "report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
}

RunConfig load_config(const CommonFlags& flags, const std::string& fallback_experiment) {
    RunConfig cfg;
    if (!flags.config_path.empty()) {
        cfg = parse_config_file(flags.config_path);
    } else {
        cfg.experiment = fallback_experiment;
        cfg.validate();
    }
    if (flags.seed >= 0) cfg.seed = uint64_t(flags.seed);
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (flags.threads > 0) cfg.threads = flags.threads;
    if (!flags.format.empty()) cfg.format = flags.format;
    return cfg;
}

int execute(const RunConfig& cfg, const std::string& expected_experiment) {
    if (!expected_experiment.empty() && cfg.experiment != expected_experiment) {
        std::fprintf(stderr, "config declares experiment \"%s\" but subcommand wants \"%s\"\n",
                     cfg.experiment.c_str(), expected_experiment.c_str());
        return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep;
    try {
        rep = run_experiment(cfg);
    } catch (const BlowUpError& e) {
        std::fprintf(stderr, "unexpected %s\n", e.what());
        return 3;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_report(rep, cfg.out_dir, cfg.experiment, cfg.format, wall);
    std::fputs(rep.summary().c_str(), stdout);
    std::printf("report: %s/%s.%s (%.1fs)\n", cfg.out_dir.c_str(), cfg.experiment.c_str(),
                cfg.format.c_str(), wall);
    if (rep.passed()) return 0;
    for (const Check& c : rep.checks)
        if (!c.pass && c.name == "blow_up_events") return 3;
    return 1;
}

int resume_run(const std::string& ckpt_path, double until, const CommonFlags& flags) {
    CheckpointData data = load_checkpoint(ckpt_path);
    RunConfig cfg = data.config;
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (!flags.format.empty()) cfg.format = flags.format;
    const double target = until > 0.0 ? until : cfg.horizon;

    ExperimentReport rep;
    rep.experiment = "resume";
    rep.seed = cfg.seed;
    rep.config_echo = data.config_echo;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (data.states.size() == 1) {
            SolverState st = data.states[0];
            while (st.t() < target - 1e-12) st = step_exponential_euler(st, cfg.dt, cfg.noise_substeps);
            rep.add_scalar("final_t", st.t());
            rep.add_scalar("final_v_l2_sq", l2_norm_sq(st.v));
            rep.add_scalar("final_u_l2_sq", l2_norm_sq(st.u()));
            save_checkpoint({st}, cfg, ckpt_path + ".resumed");
        } else {
            CoupledState cs{data.states[0], data.states[1]};
            while (cs.primary.t() < target - 1e-12) cs = step_coupled(cs, cfg.dt, cfg.noise_substeps);
            rep.add_scalar("final_t", cs.primary.t());
            rep.add_scalar("final_w_l2_sq", l2_norm_sq(sub(cs.shadow.v, cs.primary.v)));
            save_checkpoint({cs.primary, cs.shadow}, cfg, ckpt_path + ".resumed");
        }
    } catch (const BlowUpError& e) {
        std::fprintf(stderr, "unexpected %s\n", e.what());
        return 3;
    }
    rep.add_check("resumed_to_horizon", 1.0, 0.0, 1, true);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_report(rep, cfg.out_dir, "resume", cfg.format, wall);
    std::fputs(rep.summary().c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"renormalized stochastic complex Ginzburg-Landau toolkit"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string ckpt_path;
    double until = 0.0;

    auto* reg = app.add_subcommand("run-regularity", "Wick-power regularity statistics");
    add_common(reg, flags, true);
    auto* wel = app.add_subcommand("run-wellposedness", "global solutions from rough data");
    add_common(wel, flags, true);
    auto* cou = app.add_subcommand("run-coupling", "nudged two-copy contraction rates");
    add_common(cou, flags, true);
    auto* erg = app.add_subcommand("run-ergodicity", "invariant-measure agreement test");
    add_common(erg, flags, true);
    auto* ver = app.add_subcommand("verify", "full invariant suite");
    add_common(ver, flags, false);
    auto* res = app.add_subcommand("resume", "continue a checkpointed trajectory");
    res->add_option("checkpoint", ckpt_path, "checkpoint file")->required();
    res->add_option("--until", until, "target time (default: config horizon)");
    res->add_option("--out", flags.out_dir, "override output directory");
    res->add_option("--format", flags.format, "report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (reg->parsed()) return execute(load_config(flags, "regularity"), "regularity");
        if (wel->parsed()) return execute(load_config(flags, "wellposedness"), "wellposedness");
        if (cou->parsed()) return execute(load_config(flags, "coupling"), "coupling");
        if (erg->parsed()) return execute(load_config(flags, "ergodicity"), "ergodicity");
        if (ver->parsed()) return execute(load_config(flags, "verify"), "verify");
        if (res->parsed()) return resume_run(ckpt_path, until, flags);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const CheckpointError& e) {
        std::fprintf(stderr, "checkpoint error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
