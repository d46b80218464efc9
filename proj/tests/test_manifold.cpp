#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nrds/errors.hpp"
#include "nrds/manifold.hpp"
#include "nrds/scenarios.hpp"

using namespace nrds;

namespace {

PathPoint seeded_pp(std::uint64_t seed) {
    return PathPoint(0.0, sample_wiener_path(seed, -45.0, 15.0, 1e-3));
}

VectorFieldFamily linear_saddle_family() {
    VectorFieldFamily f;
    f.dim = 2;
    f.label = "diag(1,-1)";
    f.rhs = [](double, double, const PathPoint&, std::span<const double> y,
               std::span<double> out) {
        out[0] = y[0];
        out[1] = -y[1];
    };
    f.jac = [](double, double, const PathPoint&, std::span<const double>,
               std::span<double> j) {
        j[0] = 1.0;
        j[1] = 0.0;
        j[2] = 0.0;
        j[3] = -1.0;
    };
    return f;
}

struct SaddleSetup {
    HyperbolicSolutionTrace trace;
    DichotomyEstimate dich;
};

SaddleSetup saddle_setup(const VectorFieldFamily& fam, double eta,
                         const PathPoint& pp, const Vec& y_star, double t_h) {
    Equilibrium eq;
    eq.y_star = y_star;
    const SpectralSplit split =
        spectral_split(fam.eval_jac(0.0, 0.0, PathPoint(), y_star));
    eq.spectrum = split.spectrum;
    eq.gap = split.gap;
    eq.rank_u = split.rank_u;
    SaddleSetup out{
        continue_hyperbolic_solution(fam, eta, pp, eq, t_h), {}};
    const LinearProcess lp = linearize_along(fam, eta, out.trace);
    out.dich = dichotomy_estimate(lp, -t_h, t_h);
    return out;
}

}  // namespace

TEST_CASE("check_smallness evaluates the four inequalities") {
    {
        const SmallnessReport r = check_smallness(0.05, 1.0, 1.0, 0.1);
        CHECK(r.cond_bound);        // 0.05 <= 0.1
        CHECK(r.cond_contraction);  // 0.055 < 1
        CHECK(r.cond_graph);        // 0.0582 <= 0.1
        CHECK(r.cond_rate);         // 0.0528 < 0.5
        CHECK(r.all());
    }
    {
        const SmallnessReport r = check_smallness(0.5, 2.0, 1.0, 0.1);
        CHECK_FALSE(r.cond_bound);  // 1.0 > 0.1
        CHECK_FALSE(r.all());
    }
    CHECK_THROWS_AS(check_smallness(0.0, 1.0, 1.0, 0.1), Error);
}

TEST_CASE("solve_smallness_lip finds a workable class constant") {
    const auto lip = solve_smallness_lip(0.05, 1.0, 1.0);
    REQUIRE(lip.has_value());
    CHECK(check_smallness(0.05, 1.0, 1.0, *lip).all());
    CHECK_FALSE(solve_smallness_lip(0.9, 1.0, 1.0).has_value());
}

TEST_CASE("estimate_rho vanishes on linear fields") {
    const VectorFieldFamily fam = linear_saddle_family();
    const auto setup = saddle_setup(fam, 0.0, PathPoint(), Vec::Zero(2), 10.0);
    const auto est = estimate_rho(fam, 0.0, setup.trace, 0.3);
    CHECK(est.sup_norm == 0.0);
    CHECK(est.lip == 0.0);
}

TEST_CASE("estimate_rho scales linearly with the ball radius") {
    const Scenario s = make_scenario("cubic1d");
    const PathPoint pp;
    const auto setup = saddle_setup(s.family, 0.0, pp,
                                    Vec::Constant(1, 1.0), 10.0);
    const auto est1 = estimate_rho(s.family, 0.0, setup.trace, 0.1);
    const auto est2 = estimate_rho(s.family, 0.0, setup.trace, 0.05);
    // Lipschitz quotient of h(z) = f(1+z) - f(1) - f'(1) z is about |f''| d
    CHECK(est1.rho() <= 6.6 * 0.1 * 1.05);
    CHECK(est1.rho() >= 0.2);
    const double ratio = est1.rho() / est2.rho();
    CHECK(ratio >= 1.8);
    CHECK(ratio <= 2.2);

    // denser probe lattice agrees within 10 percent
    const auto dense = estimate_rho(s.family, 0.0, setup.trace, 0.1, 13, 33);
    CHECK(std::abs(dense.rho() - est1.rho()) <= 0.1 * dense.rho());
}

TEST_CASE("graph of a linear saddle is identically zero") {
    const VectorFieldFamily fam = linear_saddle_family();
    const auto setup = saddle_setup(fam, 0.0, PathPoint(), Vec::Zero(2), 12.0);
    const GraphMap gm =
        graph_transform(fam, 0.0, setup.trace, setup.dich, 0.2);
    for (std::size_t a = 0; a < gm.anchors.size(); ++a)
        for (std::size_t j = 0; j < gm.nodes.size(); ++j)
            CHECK(gm.value_at(a, j).norm() <= 1e-12);
    CHECK(gm.l_est <= 1e-12);
}

TEST_CASE("graph of the quadratic saddle matches x^2/3") {
    const Scenario s = make_scenario("saddle2d");
    const auto setup = saddle_setup(s.family, 0.0, PathPoint(), Vec::Zero(2),
                                    12.0);
    const GraphMap gm =
        graph_transform(s.family, 0.0, setup.trace, setup.dich, 0.2);
    REQUIRE(gm.unstable_dim == 1);
    double worst = 0.0, zero_val = 0.0;
    for (std::size_t j = 0; j < gm.nodes.size(); ++j) {
        const double x = gm.nodes[j](0);
        const Vec v = gm.value_at(0, j);
        worst = std::max(worst, std::abs(v(1) - x * x / 3.0));
        if (std::abs(x) < 1e-12) zero_val = v.norm();
    }
    CHECK(worst <= 5e-3);
    CHECK(zero_val <= 1e-8);
    CHECK(gm.l_est <= gm.smallness.lip);
    CHECK(gm.smallness.all());

    // stored values lie in the stable range
    double perp = 0.0;
    for (std::size_t j = 0; j < gm.nodes.size(); ++j)
        perp = std::max(perp, (gm.dich.proj_u * gm.value_at(0, j)).norm());
    CHECK(perp <= 1e-8);
}

TEST_CASE("sandwich bounds hold on the linear saddle with unit constants") {
    const VectorFieldFamily fam = linear_saddle_family();
    const auto setup = saddle_setup(fam, 0.0, PathPoint(), Vec::Zero(2), 12.0);
    const GraphMap gm =
        graph_transform(fam, 0.0, setup.trace, setup.dich, 0.2);
    const auto rep = sandwich_check(fam, 0.0, gm, 0.2, 12);
    CHECK(rep.inclusion_ok);
    CHECK(rep.max_bound_ratio <= 1.1);
    CHECK(rep.max_forward_defect <= 1e-8);
    CHECK(rep.pass());
}

TEST_CASE("sandwich check passes on the cubic saddle") {
    const Scenario s = make_scenario("cubic1d");
    const PathPoint pp = seeded_pp(7);
    for (double eta : {0.0, 0.05}) {
        const auto setup =
            saddle_setup(s.family, eta, pp, Vec::Zero(1), 12.0);
        const GraphMap gm =
            graph_transform(s.family, eta, setup.trace, setup.dich, 0.2);
        const auto rep = sandwich_check(s.family, eta, gm, 0.2, 20);
        CHECK(rep.n_samples == 20);
        CHECK(rep.inclusion_ok);
        CHECK(rep.max_bound_ratio <= 2.0);
        CHECK(rep.pass());
    }
}

TEST_CASE("attraction rate fits the stable eigenvalue on the linear saddle") {
    const VectorFieldFamily fam = linear_saddle_family();
    const auto setup = saddle_setup(fam, 0.0, PathPoint(), Vec::Zero(2), 12.0);
    const GraphMap gm =
        graph_transform(fam, 0.0, setup.trace, setup.dich, 0.2);
    {
        // start on the graph: the gap stays at zero
        Vec zeta0 = Vec::Zero(2);
        zeta0(0) = 0.05;
        const auto rep = attraction_rate_check(fam, 0.0, setup.trace, gm,
                                               zeta0, {0.0, 4.0});
        CHECK(rep.on_graph);
        CHECK(rep.pass());
    }
    {
        Vec zeta0 = Vec::Zero(2);
        zeta0(1) = 0.1;  // off graph, purely stable offset
        const auto rep = attraction_rate_check(fam, 0.0, setup.trace, gm,
                                               zeta0, {0.0, 4.0});
        CHECK_FALSE(rep.on_graph);
        CHECK(std::abs(rep.gamma_fit - 1.0) <= 0.1);
        CHECK(rep.pass());
    }
}

TEST_CASE("attraction toward the wells of the cubic") {
    const Scenario s = make_scenario("cubic1d");
    const PathPoint pp = seeded_pp(7);
    for (double eta : {0.0, 0.05}) {
        const auto setup =
            saddle_setup(s.family, eta, pp, Vec::Constant(1, 1.0), 12.0);
        GraphOptions gopt;
        gopt.anchors = {0.0};
        const GraphMap gm = graph_transform(s.family, eta, setup.trace,
                                            setup.dich, 0.2, gopt);
        const Vec zeta0 = Vec::Constant(1, 0.1);
        const auto rep = attraction_rate_check(s.family, eta, setup.trace, gm,
                                               zeta0, {0.0, 5.0});
        CHECK(rep.gamma_fit > 0.0);
        CHECK(rep.max_bound_ratio <= 2.0);
        CHECK(rep.pass());
    }
}

TEST_CASE("graph continuity gap shrinks with eta on the quadratic saddle") {
    const Scenario s = make_scenario("saddle2d");
    const PathPoint pp = seeded_pp(7);
    GraphOptions gopt;
    gopt.anchors = {-1.0, 0.0, 1.0};
    const auto setup0 = saddle_setup(s.family, 0.0, pp, Vec::Zero(2), 12.0);
    const GraphMap gm0 = graph_transform(s.family, 0.0, setup0.trace,
                                         setup0.dich, 0.2, gopt);
    CHECK(graph_continuity_gap(gm0, gm0) == 0.0);

    std::vector<double> gaps;
    const std::vector<double> etas = {0.1, 0.05, 0.025};
    for (double eta : etas) {
        const auto setup = saddle_setup(s.family, eta, pp, Vec::Zero(2), 12.0);
        const GraphMap gm = graph_transform(s.family, eta, setup.trace,
                                            setup.dich, 0.2, gopt);
        gaps.push_back(graph_continuity_gap(gm, gm0));
    }
    CHECK(gaps[0] > gaps[1]);
    CHECK(gaps[1] > gaps[2]);
    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        lo = std::min(lo, gaps[i] / etas[i]);
        hi = std::max(hi, gaps[i] / etas[i]);
    }
    CHECK(hi / lo <= 2.0);
}

TEST_CASE("grid mismatch between graphs is rejected") {
    const Scenario s = make_scenario("saddle2d");
    const auto setup = saddle_setup(s.family, 0.0, PathPoint(), Vec::Zero(2),
                                    12.0);
    GraphOptions a, b;
    a.grid_n = 17;
    b.grid_n = 9;
    const GraphMap g1 =
        graph_transform(s.family, 0.0, setup.trace, setup.dich, 0.2, a);
    const GraphMap g2 =
        graph_transform(s.family, 0.0, setup.trace, setup.dich, 0.2, b);
    CHECK_THROWS_AS(graph_continuity_gap(g1, g2), Error);
}
