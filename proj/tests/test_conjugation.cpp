#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nrds/conjugation.hpp"
#include "nrds/errors.hpp"
#include "nrds/scenarios.hpp"

using namespace nrds;

namespace {

SmoothMap zero_map() {
    SmoothMap f;
    f.dim = 1;
    f.label = "zero";
    f.poly13 = SmoothMap::Poly13{0.0, 0.0};
    f.eval = [](std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
    };
    f.jac = [](std::span<const double>, std::span<double> j) { j[0] = 0.0; };
    return f;
}

}  // namespace

TEST_CASE("noise shapes differentiate cleanly") {
    CHECK(noise_shape_fd_error(default_noise_shape(), -20.0, 20.0) <= 1e-6);
    CHECK(noise_shape_fd_error(constant_noise_shape(), -20.0, 20.0) == 0.0);
}

TEST_CASE("eta 0 member is the autonomous field") {
    const Scenario s = make_scenario("cubic1d");
    for (double v : {-1.5, -0.2, 0.9}) {
        const Vec y = Vec::Constant(1, v);
        const Vec got = s.family.eval(0.0, 0.0, PathPoint(), y);
        CHECK(got(0) == doctest::Approx(v - v * v * v).epsilon(1e-15));
    }
}

TEST_CASE("pure noise field reduces to the linear multiplier") {
    const NoiseShape shape = default_noise_shape();
    const VectorFieldFamily fam =
        build_rde(Mat::Zero(1, 1), zero_map(), shape);
    const PathPtr path = sample_wiener_path(11, -40.0, 5.0, 1e-3);
    const PathPoint pp(0.0, path);
    for (double t : {-1.0, 0.0, 2.0}) {
        for (double v : {-0.7, 1.3}) {
            const double z = ou_stationary(*path, t, 30.0);
            const double want =
                0.1 * (shape.kappa(t) - shape.kappa_dot(t)) * z * v;
            const Vec got =
                fam.eval(0.1, t, pp, Vec::Constant(1, v));
            CHECK(std::abs(got(0) - want) <= 1e-12);
        }
    }
}

TEST_CASE("duplicate-formula oracle for the conjugated cubic") {
    const Scenario s = make_scenario("cubic1d");
    const PathPtr path = sample_wiener_path(11, -40.0, 5.0, 1e-3);
    const PathPoint pp(0.0, path);
    const NoiseShape& shape = s.shape;
    const double eta = 0.1;
    for (double t : {0.0, 1.0}) {
        for (double v : {1.0, -0.4}) {
            const double z = ou_stationary(*path, t, 30.0);
            const double a = eta * shape.kappa(t) * z;
            const double b = eta * (shape.kappa(t) - shape.kappa_dot(t)) * z;
            const double u = std::exp(a) * v;
            const double want = std::exp(-a) * (u - u * u * u) + b * v;
            const Vec got = s.family.eval(eta, t, pp, Vec::Constant(1, v));
            CHECK(std::abs(got(0) - want) <= 1e-12);
        }
    }
}

TEST_CASE("conjugate_state is the exact inverse scaling") {
    const Scenario s = make_scenario("cubic1d");
    const PathPtr path = sample_wiener_path(3, -40.0, 5.0, 1e-3);
    const PathPoint pp(0.0, path);
    const Vec y = Vec::Constant(1, 1.7);
    CHECK(conjugate_state(y, 0.3, pp, 0.0, s.shape)(0) == 1.7);
    CHECK(conjugate_state(Vec::Zero(1), 0.3, pp, 0.2, s.shape)(0) == 0.0);
    const double fac = conjugation_factor(0.3, pp, 0.2, s.shape);
    const Vec v = y / fac;
    CHECK(std::abs(conjugate_state(v, 0.3, pp, 0.2, s.shape)(0) - 1.7) <=
          1e-14);
}

TEST_CASE("sde oracle at eta 0 matches rk4 to second order") {
    const Scenario s = make_scenario("cubic1d");
    const PathPtr path = sample_wiener_path(5, -35.0, 3.0, 1e-3);
    const Trajectory heun = sde_oracle(s.b, s.f, s.shape, 0.0, path,
                                       Vec::Constant(1, 0.5), 0.0, 1.0, 1e-3);
    const Trajectory rk = integrate(s.family, 0.0, PathPoint(0.0, path),
                                    Vec::Constant(1, 0.5), 0.0, 1.0, 1e-3);
    CHECK(std::abs(heun.back_vec()(0) - rk.back_vec()(0)) <= 1e-5);
}

TEST_CASE("heun scheme converges at strong order one on pure noise") {
    const NoiseShape shape = default_noise_shape();
    const SmoothMap f0 = zero_map();
    const Mat b0 = Mat::Zero(1, 1);
    const Vec y0 = Vec::Constant(1, 1.0);
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const PathPtr path = sample_wiener_path(seed, -1.0, 6.0, 5e-4);
        auto endpoint = [&](double dt) {
            return sde_oracle(b0, f0, shape, 0.4, path, y0, 0.0, 4.0, dt)
                .back_vec()(0);
        };
        const double ref = endpoint(5e-4);
        const double e1 = std::abs(endpoint(8e-3) - ref);
        const double e2 = std::abs(endpoint(4e-3) - ref);
        const double e3 = std::abs(endpoint(2e-3) - ref);
        CHECK(e1 / e2 >= 1.6);
        CHECK(e1 / e2 <= 2.6);
        CHECK(e2 / e3 >= 1.6);
        CHECK(e2 / e3 <= 2.6);
    }
}

TEST_CASE("conjugation consistency: oracle and rde agree at order one") {
    const Scenario s = make_scenario("cubic1d");
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const PathPtr path = sample_wiener_path(seed, -40.0, 6.0, 1e-3);
        const PathPoint pp(0.0, path);
        const double eta = 0.1;
        std::vector<double> sups;
        for (double dt : {4e-3, 2e-3, 1e-3}) {
            const Trajectory y_sde =
                sde_oracle(s.b, s.f, s.shape, eta, path,
                           Vec::Constant(1, 0.5), 0.0, 5.0, dt);
            const Vec v0 = Vec::Constant(
                1, 0.5 / conjugation_factor(0.0, pp, eta, s.shape));
            const Trajectory v_rde =
                integrate(s.family, eta, pp, v0, 0.0, 5.0, dt);
            double sup = 0.0;
            for (std::size_t i = 0; i <= v_rde.steps(); ++i) {
                const double t = v_rde.time(i);
                const double y_back =
                    conjugation_factor(t, pp, eta, s.shape) *
                    v_rde.state_vec(i)(0);
                sup = std::max(sup,
                               std::abs(y_back - y_sde.state_vec(i)(0)));
            }
            sups.push_back(sup);
        }
        CHECK(sups[0] / sups[1] >= 1.6);
        CHECK(sups[0] / sups[1] <= 2.6);
        CHECK(sups[1] / sups[2] >= 1.6);
        CHECK(sups[1] / sups[2] <= 2.6);
    }
}

TEST_CASE("m1 m2 estimates: zero path, saturation, negative control") {
    const NoiseShape decaying = default_noise_shape();
    {
        std::vector<double> vals(12001, 0.0);
        const PathPtr p = WienerPath::from_values(-60.0, 1e-2, std::move(vals));
        const PathPoint pp(0.0, p);
        const auto est = m1_m2_estimate(decaying, pp, {-20.0, 20.0}, 801);
        CHECK(est.m1 == 0.0);
        CHECK(est.m2 == 0.0);
    }
    const PathPtr p = sample_wiener_path(1, -135.0, 105.0, 1e-2);
    const PathPoint pp(0.0, p);
    {
        const auto e50 = m1_m2_estimate(decaying, pp, {-50.0, 50.0}, 4001);
        const auto e100 = m1_m2_estimate(decaying, pp, {-100.0, 100.0}, 8001);
        CHECK(e100.m1 <= e50.m1 * 1.05);
        CHECK(e100.m2 <= e50.m2 * 1.05);
        CHECK(e100.saturated);
    }
    {
        const NoiseShape flat = constant_noise_shape();
        const auto e50 = m1_m2_estimate(flat, pp, {-50.0, 50.0}, 4001);
        const auto e100 = m1_m2_estimate(flat, pp, {-100.0, 100.0}, 8001);
        CHECK(e100.m1 > e50.m1);  // keeps growing with the window
        CHECK_FALSE(e100.saturated);
    }
}

TEST_CASE("rde determinism: same seed gives identical trajectories") {
    const Scenario s = make_scenario("cubic1d");
    auto run = [&]() {
        const PathPtr path = sample_wiener_path(17, -36.0, 3.0, 1e-3);
        return integrate(s.family, 0.1, PathPoint(0.0, path),
                         Vec::Constant(1, 0.5), 0.0, 2.0, 1e-3);
    };
    const Trajectory a = run();
    const Trajectory b = run();
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t i = 0; i < a.states.size(); i += 97)
        CHECK(a.states[i] == b.states[i]);
}
