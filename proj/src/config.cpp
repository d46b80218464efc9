#include "nrds/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nrds/errors.hpp"
#include "nrds/scenarios.hpp"

namespace nrds {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

double to_double(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError,
                    "line " + std::to_string(line) + ": not a number: " + s);
    }
}

}  // namespace

const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> checks = {
        "driver",   "conjugation", "hyperbolic", "manifold",
        "attractor", "continuity", "gradient",   "wave"};
    return checks;
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    cfg.source_text = text;
    std::stringstream in(text);
    std::string line;
    int lineno = 0;
    bool have_etas = false, have_seeds = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ConfigError,
                        "line " + std::to_string(lineno) +
                            ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty())
            throw Error(ErrorCode::ConfigError,
                        "line " + std::to_string(lineno) + ": empty value for " +
                            key);

        if (key == "scenario") {
            cfg.scenario = value;
        } else if (key == "etas") {
            cfg.etas.clear();
            for (const auto& v : split_list(value))
                cfg.etas.push_back(to_double(v, lineno));
            have_etas = true;
        } else if (key == "seeds") {
            cfg.seeds.clear();
            for (const auto& v : split_list(value))
                cfg.seeds.push_back(
                    static_cast<std::uint64_t>(to_double(v, lineno)));
            have_seeds = true;
        } else if (key == "t_anchors") {
            cfg.t_anchors.clear();
            for (const auto& v : split_list(value))
                cfg.t_anchors.push_back(to_double(v, lineno));
        } else if (key == "checks") {
            cfg.checks = split_list(value);
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "numeric.dt") {
            cfg.dt = to_double(value, lineno);
        } else if (key == "numeric.T_back") {
            cfg.t_back = to_double(value, lineno);
        } else if (key == "numeric.T_h") {
            cfg.t_h = to_double(value, lineno);
        } else if (key == "numeric.eps_cluster") {
            cfg.eps_cluster = to_double(value, lineno);
        } else if (key == "numeric.delta0") {
            cfg.delta0 = to_double(value, lineno);
        } else if (key == "numeric.grid_n") {
            cfg.grid_n = static_cast<int>(to_double(value, lineno));
        } else if (key == "numeric.N_modes") {
            cfg.n_modes = static_cast<int>(to_double(value, lineno));
        } else if (key == "numeric.beta") {
            cfg.beta = to_double(value, lineno);
        } else if (key == "numeric.path_t_min") {
            cfg.path_t_min = to_double(value, lineno);
        } else if (key == "numeric.path_t_max") {
            cfg.path_t_max = to_double(value, lineno);
        } else {
            throw Error(ErrorCode::ConfigError,
                        "line " + std::to_string(lineno) +
                            ": unknown key: " + key);
        }
    }
    if (!have_etas) cfg.etas = {0.0};
    if (!have_seeds) cfg.seeds = {1};
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::ConfigError, "cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> errs;
    if (cfg.scenario.empty())
        errs.push_back("scenario: missing");
    else if (!scenario_exists(cfg.scenario))
        errs.push_back("scenario: unknown value '" + cfg.scenario + "'");
    if (cfg.etas.empty()) errs.push_back("etas: empty list");
    for (double e : cfg.etas)
        if (e < 0.0 || e > 1.0)
            errs.push_back("etas: value " + std::to_string(e) +
                           " outside [0, 1]");
    if (cfg.seeds.empty()) errs.push_back("seeds: empty list");
    if (cfg.checks.empty()) errs.push_back("checks: missing");
    for (const auto& c : cfg.checks)
        if (std::find(known_checks().begin(), known_checks().end(), c) ==
            known_checks().end())
            errs.push_back("checks: unknown suite '" + c + "'");
    if (cfg.out_dir.empty()) errs.push_back("out_dir: empty");

    auto positive = [&](double v, const char* key) {
        if (v < 0.0) errs.push_back(std::string(key) + ": must be positive");
    };
    if (cfg.dt <= 0.0) errs.push_back("numeric.dt: missing or not positive");
    positive(cfg.t_back, "numeric.T_back");
    positive(cfg.t_h, "numeric.T_h");
    positive(cfg.eps_cluster, "numeric.eps_cluster");
    positive(cfg.delta0, "numeric.delta0");
    positive(cfg.beta, "numeric.beta");
    if (cfg.grid_n < 0 || cfg.grid_n == 1)
        errs.push_back("numeric.grid_n: must be >= 2");
    if (cfg.n_modes < 0 || cfg.n_modes > 64)
        errs.push_back("numeric.N_modes: must be in [1, 64]");
    if (cfg.path_t_min > 0.0)
        errs.push_back("numeric.path_t_min: must be negative");
    if (cfg.path_t_max < 0.0)
        errs.push_back("numeric.path_t_max: must be positive");

    const bool needs_wave =
        std::find(cfg.checks.begin(), cfg.checks.end(), "wave") !=
        cfg.checks.end();
    if (needs_wave && cfg.scenario != "wave" && !cfg.scenario.empty())
        errs.push_back("checks: wave suite requires scenario = wave");
    return errs;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

}  // namespace nrds
