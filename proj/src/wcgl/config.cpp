#include "wcgl/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace wcgl {

double RunConfig::gamma_resolved() const {
    if (exponents.gamma >= 0.0) return exponents.gamma;
    const double lo = (exponents.alpha + exponents.beta) / 2.0;
    const double hi = 1.0 / (2.0 * model.m + 1.0);
    return (lo + hi) / 2.0;
}

void RunConfig::validate() const {
    try {
        model.validate();
        grid.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(dt > 0.0)) throw ConfigError("run.dt must be > 0");
    if (!(horizon > 0.0)) throw ConfigError("run.horizon must be > 0");
    if (ensemble < 1) throw ConfigError("run.ensemble must be >= 1");
    if (noise_substeps < 1) throw ConfigError("run.noise_substeps must be >= 1");
    if (threads < 1) throw ConfigError("run.threads must be >= 1");
    if (burn_in_fraction < 0.0 || burn_in_fraction >= 1.0)
        throw ConfigError("run.burn_in_fraction must be in [0,1)");
    if (format != "json" && format != "csv") throw ConfigError("run.format must be json or csv");
    for (int p : p_list)
        if (p < 1 || p > 8) throw ConfigError("norms.p_list entries must be in [1,8]");
    for (auto [k, l] : wick_orders)
        if (k < 0 || l < 0 || k + l < 1) throw ConfigError("regularity.orders entries invalid");
    const double g = gamma_resolved();
    if (!(g > 0.0) || !(g < 1.0 / (2.0 * model.m + 1.0) + 1e-12))
        throw ConfigError("exponents.gamma must lie in (0, 1/(2m+1))");
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

struct Parser {
    explicit Parser(const std::string& text) {
        std::istringstream is(text);
        std::string line;
        int lineno = 0;
        std::string section;
        while (std::getline(is, line)) {
            ++lineno;
            const size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("line " + std::to_string(lineno) + ": malformed section");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            if (key.empty() || val.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
            const std::string full = section.empty() ? key : section + "." + key;
            if (entries.count(full))
                throw ConfigError("duplicate key '" + full + "'");
            entries[full] = val;
        }
    }

    bool has(const std::string& key) const { return entries.count(key) > 0; }

    std::string take_raw(const std::string& key) {
        auto it = entries.find(key);
        if (it == entries.end()) throw ConfigError("missing key '" + key + "'");
        std::string v = it->second;
        entries.erase(it);
        return v;
    }

    double number(const std::string& raw, const std::string& key) const {
        try {
            size_t pos = 0;
            const double d = std::stod(raw, &pos);
            if (pos != raw.size()) throw std::invalid_argument("trailing");
            return d;
        } catch (...) {
            throw ConfigError("key '" + key + "': expected a number, got '" + raw + "'");
        }
    }

    double take_number(const std::string& key) { return number(take_raw(key), key); }

    long long take_int(const std::string& key) {
        const double d = take_number(key);
        if (d != std::floor(d)) throw ConfigError("key '" + key + "': expected an integer");
        return (long long)d;
    }

    bool take_bool(const std::string& key) {
        const std::string v = take_raw(key);
        if (v == "true") return true;
        if (v == "false") return false;
        throw ConfigError("key '" + key + "': expected true/false");
    }

    std::string take_string(const std::string& key) {
        std::string v = take_raw(key);
        if (v.size() < 2 || v.front() != '"' || v.back() != '"')
            throw ConfigError("key '" + key + "': expected a quoted string");
        return v.substr(1, v.size() - 2);
    }

    std::vector<double> take_array(const std::string& key) {
        std::string v = take_raw(key);
        if (v.size() < 2 || v.front() != '[' || v.back() != ']')
            throw ConfigError("key '" + key + "': expected [a, b, ...]");
        v = v.substr(1, v.size() - 2);
        std::vector<double> out;
        std::string item;
        std::istringstream is(v);
        while (std::getline(is, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            out.push_back(number(item, key));
        }
        return out;
    }

    void finish() const {
        if (!entries.empty())
            throw ConfigError("unknown key '" + entries.begin()->first + "'");
    }

    std::map<std::string, std::string> entries;
};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    Parser p(text);
    RunConfig cfg;
    cfg.experiment = p.take_string("experiment");

    if (p.has("model.mu")) cfg.model.mu = p.take_number("model.mu");
    if (p.has("model.nu")) {
        const auto a = p.take_array("model.nu");
        if (a.size() != 2) throw ConfigError("model.nu must be [re, im]");
        cfg.model.nu = {a[0], a[1]};
    }
    if (p.has("model.tau")) {
        const auto a = p.take_array("model.tau");
        if (a.size() != 2) throw ConfigError("model.tau must be [re, im]");
        cfg.model.tau = {a[0], a[1]};
    }
    if (p.has("model.m")) cfg.model.m = int(p.take_int("model.m"));
    if (p.has("model.lambda")) cfg.model.lambda = p.take_number("model.lambda");
    if (p.has("model.noise_scale")) cfg.model.noise_scale = p.take_number("model.noise_scale");
    if (p.has("model.renorm")) {
        const std::string r = p.take_string("model.renorm");
        if (r == "zero_start") cfg.model.renorm = ModelParams::Renorm::zero_start;
        else if (r == "stationary") cfg.model.renorm = ModelParams::Renorm::stationary;
        else if (r == "none") cfg.model.renorm = ModelParams::Renorm::none;
        else throw ConfigError("model.renorm must be zero_start|stationary|none");
    }

    if (p.has("grid.n_modes")) cfg.grid.n_modes = int(p.take_int("grid.n_modes"));
    if (p.has("grid.pad")) cfg.grid.pad = int(p.take_int("grid.pad"));

    if (p.has("run.seed")) cfg.seed = uint64_t(p.take_int("run.seed"));
    if (p.has("run.horizon")) cfg.horizon = p.take_number("run.horizon");
    if (p.has("run.dt")) cfg.dt = p.take_number("run.dt");
    if (p.has("run.ensemble")) cfg.ensemble = int(p.take_int("run.ensemble"));
    if (p.has("run.noise_substeps")) cfg.noise_substeps = int(p.take_int("run.noise_substeps"));
    if (p.has("run.burn_in_fraction")) cfg.burn_in_fraction = p.take_number("run.burn_in_fraction");
    if (p.has("run.out")) cfg.out_dir = p.take_string("run.out");
    if (p.has("run.format")) cfg.format = p.take_string("run.format");
    if (p.has("run.threads")) cfg.threads = int(p.take_int("run.threads"));

    if (p.has("exponents.alpha")) cfg.exponents.alpha = p.take_number("exponents.alpha");
    if (p.has("exponents.alpha_prime"))
        cfg.exponents.alpha_prime = p.take_number("exponents.alpha_prime");
    if (p.has("exponents.beta")) cfg.exponents.beta = p.take_number("exponents.beta");
    if (p.has("exponents.gamma")) cfg.exponents.gamma = p.take_number("exponents.gamma");

    if (p.has("coupling.lambda_grid")) cfg.lambda_grid = p.take_array("coupling.lambda_grid");
    if (p.has("coupling.shadow_offset")) cfg.shadow_offset = p.take_number("coupling.shadow_offset");
    if (p.has("coupling.budget_gamma")) cfg.budget_gamma = p.take_number("coupling.budget_gamma");
    if (p.has("coupling.budget_k")) cfg.budget_k = p.take_number("coupling.budget_k");

    if (p.has("norms.p_list")) {
        cfg.p_list.clear();
        for (double d : p.take_array("norms.p_list")) cfg.p_list.push_back(int(d));
    }
    if (p.has("observables.mode_window")) cfg.mode_window = int(p.take_int("observables.mode_window"));
    if (p.has("observables.besov_alpha")) cfg.besov_alpha = p.take_number("observables.besov_alpha");

    if (p.has("regularity.orders")) {
        const auto flat = p.take_array("regularity.orders");
        if (flat.size() % 2 != 0) throw ConfigError("regularity.orders must hold (k,l) pairs");
        cfg.wick_orders.clear();
        for (size_t i = 0; i + 1 < flat.size(); i += 2)
            cfg.wick_orders.emplace_back(int(flat[i]), int(flat[i + 1]));
    }
    if (p.has("regularity.samples")) cfg.samples = int(p.take_int("regularity.samples"));

    if (p.has("wellposedness.rough_init")) cfg.rough_init = p.take_bool("wellposedness.rough_init");
    if (p.has("wellposedness.energy_check")) cfg.energy_check = p.take_bool("wellposedness.energy_check");
    if (p.has("wellposedness.refine_check")) cfg.refine_check = p.take_bool("wellposedness.refine_check");
    if (p.has("wellposedness.expect_blowups"))
        cfg.expect_blowups = p.take_bool("wellposedness.expect_blowups");

    if (p.has("ergodicity.init_offset")) cfg.init_offset = p.take_number("ergodicity.init_offset");

    p.finish();
    cfg.validate();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "experiment = \"" << cfg.experiment << "\"\n\n";
    os << "[model]\n";
    os << "mu = " << fmt_double(cfg.model.mu) << "\n";
    os << "nu = [" << fmt_double(cfg.model.nu.real()) << ", " << fmt_double(cfg.model.nu.imag())
       << "]\n";
    os << "tau = [" << fmt_double(cfg.model.tau.real()) << ", " << fmt_double(cfg.model.tau.imag())
       << "]\n";
    os << "m = " << cfg.model.m << "\n";
    os << "lambda = " << fmt_double(cfg.model.lambda) << "\n";
    os << "noise_scale = " << fmt_double(cfg.model.noise_scale) << "\n";
    os << "renorm = \""
       << (cfg.model.renorm == ModelParams::Renorm::zero_start
               ? "zero_start"
               : (cfg.model.renorm == ModelParams::Renorm::stationary ? "stationary" : "none"))
       << "\"\n\n";
    os << "[grid]\n";
    os << "n_modes = " << cfg.grid.n_modes << "\n";
    os << "pad = " << cfg.grid.pad << "\n\n";
    os << "[run]\n";
    os << "seed = " << cfg.seed << "\n";
    os << "horizon = " << fmt_double(cfg.horizon) << "\n";
    os << "dt = " << fmt_double(cfg.dt) << "\n";
    os << "ensemble = " << cfg.ensemble << "\n";
    os << "noise_substeps = " << cfg.noise_substeps << "\n";
    os << "burn_in_fraction = " << fmt_double(cfg.burn_in_fraction) << "\n";
    os << "out = \"" << cfg.out_dir << "\"\n";
    os << "format = \"" << cfg.format << "\"\n";
    os << "threads = " << cfg.threads << "\n\n";
    os << "[exponents]\n";
    os << "alpha = " << fmt_double(cfg.exponents.alpha) << "\n";
    os << "alpha_prime = " << fmt_double(cfg.exponents.alpha_prime) << "\n";
    os << "beta = " << fmt_double(cfg.exponents.beta) << "\n";
    os << "gamma = " << fmt_double(cfg.exponents.gamma) << "\n\n";
    os << "[coupling]\n";
    os << "lambda_grid = [";
    for (size_t i = 0; i < cfg.lambda_grid.size(); ++i)
        os << (i ? ", " : "") << fmt_double(cfg.lambda_grid[i]);
    os << "]\n";
    os << "shadow_offset = " << fmt_double(cfg.shadow_offset) << "\n";
    os << "budget_gamma = " << fmt_double(cfg.budget_gamma) << "\n";
    os << "budget_k = " << fmt_double(cfg.budget_k) << "\n\n";
    os << "[norms]\n";
    os << "p_list = [";
    for (size_t i = 0; i < cfg.p_list.size(); ++i) os << (i ? ", " : "") << cfg.p_list[i];
    os << "]\n\n";
    os << "[observables]\n";
    os << "mode_window = " << cfg.mode_window << "\n";
    os << "besov_alpha = " << fmt_double(cfg.besov_alpha) << "\n\n";
    os << "[regularity]\n";
    os << "orders = [";
    for (size_t i = 0; i < cfg.wick_orders.size(); ++i)
        os << (i ? ", " : "") << cfg.wick_orders[i].first << ", " << cfg.wick_orders[i].second;
    os << "]\n";
    os << "samples = " << cfg.samples << "\n\n";
    os << "[wellposedness]\n";
    os << "rough_init = " << (cfg.rough_init ? "true" : "false") << "\n";
    os << "energy_check = " << (cfg.energy_check ? "true" : "false") << "\n";
    os << "refine_check = " << (cfg.refine_check ? "true" : "false") << "\n";
    os << "expect_blowups = " << (cfg.expect_blowups ? "true" : "false") << "\n\n";
    os << "[ergodicity]\n";
    os << "init_offset = " << fmt_double(cfg.init_offset) << "\n";
    return os.str();
}

}  // namespace wcgl
