#pragma once
// Flat dotted-key experiment configuration: diff-able, hash-able, one file
// per experiment.

#include <cstdint>
#include <string>
#include <vector>

namespace nrds {

struct ExperimentConfig {
    std::string scenario;
    std::vector<double> etas = {0.0};
    std::vector<std::uint64_t> seeds = {1};
    std::vector<double> t_anchors;       // empty: scenario default
    std::vector<std::string> checks;
    std::string out_dir = "out";

    // numerics; 0 means "use the scenario default"
    double dt = 0.0;
    double t_back = 0.0;
    double t_h = 0.0;
    double eps_cluster = 0.0;
    double delta0 = 0.0;
    int grid_n = 0;
    int n_modes = 0;
    double beta = 0.0;
    double path_t_min = 0.0;
    double path_t_max = 0.0;

    std::string source_text;  // verbatim file contents, hashed for provenance
};

// throws Error(ConfigError) with a line-numbered message on malformed input
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// empty when valid; otherwise one diagnostic per problem, naming the key
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

const std::vector<std::string>& known_checks();

std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

}  // namespace nrds
