#include "nrds/scenarios.hpp"

#include "nrds/errors.hpp"

namespace nrds {

SmoothMap cubic1d_map() {
    SmoothMap f;
    f.dim = 1;
    f.label = "cubic1d";
    f.poly13 = SmoothMap::Poly13{1.0, -1.0};
    f.eval = [](std::span<const double> y, std::span<double> out) {
        out[0] = y[0] - y[0] * y[0] * y[0];
    };
    f.jac = [](std::span<const double> y, std::span<double> jac) {
        jac[0] = 1.0 - 3.0 * y[0] * y[0];
    };
    return f;
}

SmoothMap linear1d_map() {
    SmoothMap f;
    f.dim = 1;
    f.label = "linear1d";
    f.poly13 = SmoothMap::Poly13{-1.0, 0.0};
    f.eval = [](std::span<const double> y, std::span<double> out) {
        out[0] = -y[0];
    };
    f.jac = [](std::span<const double>, std::span<double> jac) {
        jac[0] = -1.0;
    };
    return f;
}

SmoothMap saddle2d_map() {
    SmoothMap f;
    f.dim = 2;
    f.label = "saddle2d";
    f.eval = [](std::span<const double> y, std::span<double> out) {
        out[0] = y[0];
        out[1] = -y[1] + y[0] * y[0];
    };
    f.jac = [](std::span<const double> y, std::span<double> jac) {
        // column-major 2x2
        jac[0] = 1.0;
        jac[1] = 2.0 * y[0];
        jac[2] = 0.0;
        jac[3] = -1.0;
    };
    return f;
}

SmoothMap gradient2d_map() {
    SmoothMap f;
    f.dim = 2;
    f.label = "gradient2d";
    f.eval = [](std::span<const double> y, std::span<double> out) {
        out[0] = y[0] - y[0] * y[0] * y[0];
        out[1] = -y[1];
    };
    f.jac = [](std::span<const double> y, std::span<double> jac) {
        jac[0] = 1.0 - 3.0 * y[0] * y[0];
        jac[1] = 0.0;
        jac[2] = 0.0;
        jac[3] = -1.0;
    };
    return f;
}

namespace {

Scenario base_scenario(const std::string& name, const std::string& desc,
                       SmoothMap f) {
    Scenario s;
    s.name = name;
    s.description = desc;
    s.f = std::move(f);
    s.b = Mat::Zero(s.f.dim, s.f.dim);
    s.shape = default_noise_shape();
    s.family = build_rde(s.b, s.f, s.shape);
    return s;
}

}  // namespace

Scenario make_scenario(const std::string& name) {
    if (name == "cubic1d") {
        Scenario s = base_scenario(
            "cubic1d",
            "scalar double-well drift with multiplicative noise, conjugated "
            "to a random ODE",
            cubic1d_map());
        s.box.lo = Vec::Constant(1, -2.0);
        s.box.hi = Vec::Constant(1, 2.0);
        s.defaults.t_anchors = {-2.0, 0.0, 2.0};
        return s;
    }
    if (name == "linear1d") {
        Scenario s = base_scenario("linear1d",
                                   "scalar linear sink, conjugated", linear1d_map());
        s.box.lo = Vec::Constant(1, -2.0);
        s.box.hi = Vec::Constant(1, 2.0);
        s.defaults.grid_n = 65;
        return s;
    }
    if (name == "saddle2d") {
        Scenario s = base_scenario(
            "saddle2d",
            "planar saddle with quadratic coupling; the unstable graph of "
            "the origin is x^2/3 at eta = 0",
            saddle2d_map());
        s.box.lo = Vec::Constant(2, -0.5);
        s.box.hi = Vec::Constant(2, 0.5);
        s.defaults.grid_n = 33;
        s.defaults.eps_cluster = 0.02;
        return s;
    }
    if (name == "gradient2d") {
        Scenario s = base_scenario(
            "gradient2d",
            "planar double-well gradient flow with multiplicative noise",
            gradient2d_map());
        s.box.lo = (Vec(2) << -2.0, -1.0).finished();
        s.box.hi = (Vec(2) << 2.0, 1.0).finished();
        s.defaults.grid_n = 65;
        s.defaults.eps_cluster = 0.05;
        return s;
    }
    if (name == "wave") {
        Scenario s;
        s.name = "wave";
        s.description =
            "damped wave equation on (0, pi), sine-Galerkin truncation, "
            "random perturbation on the damping";
        WaveGalerkinSpec spec;
        s.wave = spec;
        s.shape = spec.shape;
        s.f.dim = 2 * spec.n_modes;
        s.family = build_wave_family(spec);
        s.box.lo = Vec::Constant(2 * spec.n_modes, -2.0);
        s.box.hi = Vec::Constant(2 * spec.n_modes, 2.0);
        s.defaults.grid_n = 3;
        s.defaults.eps_cluster = 0.05;
        s.defaults.path_t_min = -45.0;
        s.defaults.path_t_max = 25.0;
        return s;
    }
    throw Error(ErrorCode::ConfigError, "unknown scenario: " + name);
}

bool scenario_exists(const std::string& name) {
    return name == "cubic1d" || name == "linear1d" || name == "saddle2d" ||
           name == "gradient2d" || name == "wave";
}

std::vector<std::pair<std::string, std::string>> list_scenarios() {
    std::vector<std::pair<std::string, std::string>> out;
    for (const char* n :
         {"cubic1d", "linear1d", "saddle2d", "gradient2d", "wave"}) {
        const Scenario s = make_scenario(n);
        out.emplace_back(s.name, s.description);
    }
    return out;
}

}  // namespace nrds
