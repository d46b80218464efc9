#pragma once
// Named experiment scenarios: the autonomous nonlinearity, its conjugated
// random family, and sensible default numerics for each.

#include <optional>
#include <string>
#include <vector>

#include "nrds/attractor.hpp"
#include "nrds/conjugation.hpp"
#include "nrds/waveapp.hpp"

namespace nrds {

struct ScenarioDefaults {
    double dt = 1e-3;
    double path_t_min = -50.0;
    double path_t_max = 15.0;
    double t_h = 12.0;          // continuation half-window
    double t_back = 2.0;        // pullback horizon
    int grid_n = 2001;          // lattice points per dimension
    double eps_cluster = 0.04;
    double delta0 = 0.2;
    int n_modes = 8;
    double beta = 1.0;
    std::vector<double> t_anchors = {0.0};
};

struct Scenario {
    std::string name;
    std::string description;
    Mat b;                      // linear part of the drift
    SmoothMap f;                // autonomous nonlinearity
    NoiseShape shape;
    VectorFieldFamily family;   // conjugated random family
    Box box;                    // absorbing box for attractor work
    ScenarioDefaults defaults;
    std::optional<WaveGalerkinSpec> wave;
};

Scenario make_scenario(const std::string& name);
bool scenario_exists(const std::string& name);
std::vector<std::pair<std::string, std::string>> list_scenarios();

SmoothMap cubic1d_map();     // f(y) = y - y^3
SmoothMap linear1d_map();    // f(y) = -y
SmoothMap saddle2d_map();    // f(x, y) = (x, -y + x^2)
SmoothMap gradient2d_map();  // f = -grad[(x^2-1)^2/4 + y^2/2]

}  // namespace nrds
