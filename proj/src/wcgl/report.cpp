#include "wcgl/report.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace wcgl {

using ordered_json = nlohmann::ordered_json;

bool ExperimentReport::passed() const {
    for (const Check& c : checks)
        if (!c.pass) return false;
    return true;
}

void ExperimentReport::add_check(const std::string& name, double value, double tol,
                                 long samples, bool pass, const std::string& note) {
    checks.push_back(Check{name, value, tol, samples, pass, note});
}

void ExperimentReport::add_scalar(const std::string& name, double value) {
    scalars.emplace_back(name, value);
}

std::string ExperimentReport::to_json() const {
    ordered_json j;
    j["schema_version"] = schema_version;
    j["experiment"] = experiment;
    j["seed"] = seed;
    j["passed"] = passed();
    j["checks"] = ordered_json::array();
    for (const Check& c : checks) {
        ordered_json jc;
        jc["name"] = c.name;
        jc["value"] = c.value;
        jc["tolerance"] = c.tolerance;
        jc["samples"] = c.samples;
        jc["pass"] = c.pass;
        if (!c.note.empty()) jc["note"] = c.note;
        j["checks"].push_back(jc);
    }
    j["fits"] = ordered_json::array();
    for (const FitResult& f : fits) {
        ordered_json jf;
        jf["name"] = f.name;
        jf["slope"] = f.slope;
        jf["slope_se"] = f.slope_se;
        jf["intercept"] = f.intercept;
        j["fits"].push_back(jf);
    }
    j["scalars"] = ordered_json::object();
    for (const auto& [k, v] : scalars) j["scalars"][k] = v;
    j["series"] = ordered_json::array();
    for (const Series& s : series) {
        ordered_json js;
        js["name"] = s.name;
        js["t"] = s.t;
        js["y"] = s.y;
        j["series"].push_back(js);
    }
    j["config"] = config_echo;
    return j.dump(2) + "\n";
}

std::string ExperimentReport::to_csv() const {
    std::ostringstream os;
    os << "section,name,value,tolerance,samples,pass\n";
    for (const Check& c : checks)
        os << "check," << c.name << "," << c.value << "," << c.tolerance << "," << c.samples
           << "," << (c.pass ? 1 : 0) << "\n";
    for (const FitResult& f : fits)
        os << "fit," << f.name << "," << f.slope << "," << f.slope_se << ",0,1\n";
    for (const auto& [k, v] : scalars) os << "scalar," << k << "," << v << ",0,0,1\n";
    for (const Series& s : series)
        for (size_t i = 0; i < s.t.size(); ++i)
            os << "series," << s.name << "," << s.y[i] << "," << s.t[i] << ",0,1\n";
    return os.str();
}

std::string ExperimentReport::summary() const {
    std::ostringstream os;
    for (const Check& c : checks)
        os << (c.pass ? "[PASS] " : "[FAIL] ") << experiment << ": " << c.name
           << " value=" << c.value << " tol=" << c.tolerance << " n=" << c.samples
           << (c.note.empty() ? "" : (" (" + c.note + ")")) << "\n";
    return os.str();
}

void write_report(const ExperimentReport& rep, const std::string& out_dir,
                  const std::string& stem, const std::string& format,
                  double wall_seconds) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string ext = (format == "csv") ? ".csv" : ".json";
    {
        std::ofstream out(fs::path(out_dir) / (stem + ext), std::ios::binary | std::ios::trunc);
        out << (format == "csv" ? rep.to_csv() : rep.to_json());
    }
    {
        ordered_json meta;
        meta["wall_seconds"] = wall_seconds;
#ifdef __VERSION__
        meta["compiler"] = __VERSION__;
#endif
        meta["report"] = stem + ext;
        std::ofstream out(fs::path(out_dir) / (stem + ".meta.json"),
                          std::ios::binary | std::ios::trunc);
        out << meta.dump(2) << "\n";
    }
}

}  // namespace wcgl
