// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are pinned in code next to each check.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "nrds/attractor.hpp"
#include "nrds/conjugation.hpp"
#include "nrds/driver.hpp"
#include "nrds/hyperbolic.hpp"
#include "nrds/manifold.hpp"
#include "nrds/scenarios.hpp"
#include "nrds/waveapp.hpp"

using namespace nrds;
namespace fs = std::filesystem;

namespace {

struct Harness {
    int failed = 0;
    int total = 0;

    void run(const std::string& name, const std::function<bool(std::string&)>& fn) {
        ++total;
        std::string detail;
        bool ok = false;
        const auto start = std::chrono::steady_clock::now();
        try {
            ok = fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
            ok = false;
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
        std::printf("[%s] %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL",
                    name.c_str(), secs, detail.empty() ? "" : " - ",
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failed;
    }
};

bool in_range(double v, double lo, double hi) { return v >= lo && v <= hi; }

PathPoint pp_for_seed(std::uint64_t seed, double lo = -50.0, double hi = 15.0,
                      double dt = 1e-3) {
    return PathPoint(0.0, sample_wiener_path(seed, lo, hi, dt));
}

Equilibrium equilibrium_at(const VectorFieldFamily& fam, const Vec& y_star) {
    Equilibrium eq;
    eq.y_star = y_star;
    const SpectralSplit split =
        spectral_split(fam.eval_jac(0.0, 0.0, PathPoint(), y_star));
    eq.spectrum = split.spectrum;
    eq.gap = split.gap;
    eq.rank_u = split.rank_u;
    return eq;
}

double cubic_exact(double y0, double t) {
    const double e2 = std::exp(2.0 * t);
    return y0 * std::exp(t) / std::sqrt(1.0 + y0 * y0 * (e2 - 1.0));
}

// ---------------------------------------------------------------- criteria

bool criterion1_driver(std::string& detail) {
    bool ok = true;
    const double dt = 1e-3;
    const PathPtr p = sample_wiener_path(1, -40.0, 5.0, dt);
    const OuTable& table = p->ou_table(30.0);
    const std::size_t off = p->index(table.t_lo());
    double rss = 0.0;
    std::size_t count = 0;
    for (double t = -5.0; t < 5.0 - dt; t += dt) {
        const std::size_t i = p->index(t);
        const double res = (table.at_index(i + 1 - off) -
                            table.at_index(i - off)) +
                           table.at_index(i - off) * dt -
                           (p->values()[i + 1] - p->values()[i]);
        rss += res * res;
        ++count;
    }
    const double rms = std::sqrt(rss / static_cast<double>(count));
    ok &= rms <= 3.0 * dt;

    // omega(s) = s: closed-form z* = 1
    const double fine = 1e-4;
    std::vector<double> vals;
    for (double t = -35.0; t <= 1.0 + 1e-12; t += fine) vals.push_back(t);
    const PathPtr lin = WienerPath::from_values(-35.0, fine, std::move(vals));
    const double z = ou_stationary(*lin, 0.0, 30.0);
    ok &= std::abs(z - 1.0) <= 1e-8;

    // shift flow property, sample-exact
    const PathPtr a = shift(*shift(*p, 1.0), 2.0);
    const PathPtr b = shift(*p, 3.0);
    double diff = 0.0;
    for (std::size_t i = 0; i < a->size(); ++i)
        diff = std::max(diff, std::abs(a->values()[i] - b->values()[i]));
    ok &= diff == 0.0;

    std::ostringstream os;
    os << "rms=" << rms << " z*err=" << std::abs(z - 1.0)
       << " shift_diff=" << diff;
    detail = os.str();
    return ok;
}

bool criterion2_integrator(std::string& detail) {
    bool ok = true;
    const Scenario lin = make_scenario("linear1d");
    const Scenario cub = make_scenario("cubic1d");
    auto err = [&](const Scenario& s, double y0, double exact, double dt) {
        return std::abs(integrate(s.family, 0.0, PathPoint(),
                                  Vec::Constant(1, y0), 0.0, 1.0, dt)
                            .back_vec()(0) -
                        exact);
    };
    const double r_lin =
        err(lin, 1.0, std::exp(-1.0), 0.05) / err(lin, 1.0, std::exp(-1.0), 0.025);
    const double r_cub = err(cub, 0.5, cubic_exact(0.5, 1.0), 0.05) /
                         err(cub, 0.5, cubic_exact(0.5, 1.0), 0.025);
    ok &= in_range(r_lin, 12.0, 20.0);
    ok &= in_range(r_cub, 12.0, 20.0);

    const PathPoint pp = pp_for_seed(7);
    const Vec y0 = Vec::Constant(1, 0.4);
    const double d1 = cocycle_defect(cub.family, 0.1, pp, y0, 0.7, 0.3, 1e-3);
    const double d2 = cocycle_defect(cub.family, 0.1, pp, y0, 0.7, 0.3, 5e-4);
    ok &= in_range(d1 / d2, 10.0, 24.0);

    std::ostringstream os;
    os << "linear=" << r_lin << " cubic=" << r_cub << " defect=" << d1 / d2;
    detail = os.str();
    return ok;
}

bool criterion3_conjugation(std::string& detail) {
    const Scenario s = make_scenario("cubic1d");
    const double eta = 0.1;
    bool ok = true;
    std::ostringstream os;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const PathPtr path = sample_wiener_path(seed, -40.0, 6.0, 1e-3);
        const PathPoint pp(0.0, path);
        std::vector<double> sups;
        for (double dt : {4e-3, 2e-3, 1e-3}) {
            const Trajectory y_sde =
                sde_oracle(s.b, s.f, s.shape, eta, path, Vec::Constant(1, 0.5),
                           0.0, 5.0, dt);
            const Vec v0 = Vec::Constant(
                1, 0.5 / conjugation_factor(0.0, pp, eta, s.shape));
            const Trajectory v_rde =
                integrate(s.family, eta, pp, v0, 0.0, 5.0, dt);
            double sup = 0.0;
            for (std::size_t i = 0; i <= v_rde.steps(); ++i) {
                const double t = v_rde.time(i);
                sup = std::max(
                    sup, std::abs(conjugation_factor(t, pp, eta, s.shape) *
                                      v_rde.state_vec(i)(0) -
                                  y_sde.state_vec(i)(0)));
            }
            sups.push_back(sup);
        }
        const double r1 = sups[0] / sups[1];
        const double r2 = sups[1] / sups[2];
        ok &= in_range(r1, 1.6, 2.6) && in_range(r2, 1.6, 2.6);
        os << "seed" << seed << ":" << r1 << "," << r2 << " ";
    }
    detail = os.str();
    return ok;
}

bool criterion4_hyperbolic(std::string& detail) {
    const Scenario s = make_scenario("cubic1d");
    const PathPoint pp = pp_for_seed(7);
    bool ok = true;
    std::ostringstream os;
    ContinueOptions opt;
    for (double well : {-1.0, 1.0}) {
        const Equilibrium eq =
            equilibrium_at(s.family, Vec::Constant(1, well));
        const auto tr0 =
            continue_hyperbolic_solution(s.family, 0.0, pp, eq, 12.0, opt);
        ok &= tr0.residual == 0.0;
        std::vector<double> ratios;
        for (double eta : {0.02, 0.04, 0.08}) {
            const auto tr = continue_hyperbolic_solution(s.family, eta, pp, eq,
                                                         12.0, opt);
            ratios.push_back(tr.sup_dist / eta);
        }
        const double lo = *std::min_element(ratios.begin(), ratios.end());
        const double hi = *std::max_element(ratios.begin(), ratios.end());
        ok &= hi <= 2.0 * lo;
        os << "well" << well << ":ratio_spread=" << hi / lo << " ";
    }
    {
        const Equilibrium eq = equilibrium_at(s.family, Vec::Constant(1, 1.0));
        const auto tr0 = continue_hyperbolic_solution(s.family, 0.05, pp, eq,
                                                      12.0, opt);
        const auto tr1 = continue_hyperbolic_solution(
            s.family, 0.05, pp.shifted(1.0), eq, 12.0, opt);
        double worst = 0.0;
        for (double t = -3.0; t <= 2.0; t += 0.1)
            worst = std::max(worst,
                             (tr1.at_time(t) - tr0.at_time(t + 1.0)).norm());
        ok &= worst <= 2.0 * opt.tol;
        os << "theta_compat=" << worst;
    }
    detail = os.str();
    return ok;
}

bool criterion5_dichotomy(std::string& detail) {
    LinearProcess lp;
    lp.dim = 2;
    lp.t0 = -10.0;
    lp.dt = 0.005;
    Mat a(2, 2);
    a << 1.0, 0.0, 0.0, -1.0;
    lp.jacs.assign(static_cast<std::size_t>(2.0 * 10.0 / lp.dt) + 1, a);
    const auto est = dichotomy_estimate(lp, -10.0, 10.0);
    bool ok = in_range(est.m, 1.0, 1.05) && in_range(est.alpha, 0.95, 1.0);
    est.validate();

    // projection algebra on estimates produced along perturbed traces
    const Scenario s = make_scenario("cubic1d");
    const PathPoint pp = pp_for_seed(7);
    for (double well : {-1.0, 0.0, 1.0}) {
        const Equilibrium eq =
            equilibrium_at(s.family, Vec::Constant(1, well));
        for (double eta : {0.0, 0.05}) {
            const auto tr =
                continue_hyperbolic_solution(s.family, eta, pp, eq, 12.0);
            const auto d =
                dichotomy_estimate(linearize_along(s.family, eta, tr), -12.0,
                                   12.0);
            d.validate();  // throws on any violated identity
        }
    }
    std::ostringstream os;
    os << "M=" << est.m << " alpha=" << est.alpha;
    detail = os.str();
    return ok;
}

bool criterion6_graph(std::string& detail) {
    const Scenario s = make_scenario("saddle2d");
    const Equilibrium eq = equilibrium_at(s.family, Vec::Zero(2));
    const auto trace =
        continue_hyperbolic_solution(s.family, 0.0, PathPoint(), eq, 12.0);
    const auto dich =
        dichotomy_estimate(linearize_along(s.family, 0.0, trace), -12.0, 12.0);
    const GraphMap gm = graph_transform(s.family, 0.0, trace, dich, 0.2);

    double worst = 0.0, zero_val = 0.0;
    for (std::size_t a = 0; a < gm.anchors.size(); ++a)
        for (std::size_t j = 0; j < gm.nodes.size(); ++j) {
            const double x = gm.nodes[j](0);
            worst = std::max(worst,
                             std::abs(gm.value_at(a, j)(1) - x * x / 3.0));
            if (std::abs(x) < 1e-12)
                zero_val = std::max(zero_val, gm.value_at(a, j).norm());
        }
    const bool ok = worst <= 5e-3 && zero_val <= 1e-8 &&
                    gm.l_est <= gm.smallness.lip && gm.smallness.all();
    std::ostringstream os;
    os << "node_err=" << worst << " zero=" << zero_val
       << " L_emp=" << gm.l_est << " L=" << gm.smallness.lip
       << " rho=" << gm.smallness.rho;
    detail = os.str();
    return ok;
}

bool criterion7_backward_bounds(std::string& detail) {
    const Scenario s = make_scenario("cubic1d");
    const PathPoint pp = pp_for_seed(7);
    bool ok = true;
    std::ostringstream os;
    for (double eta : {0.0, 0.05}) {
        const Equilibrium saddle =
            equilibrium_at(s.family, Vec::Zero(1));
        const auto trace =
            continue_hyperbolic_solution(s.family, eta, pp, saddle, 12.0);
        const auto dich = dichotomy_estimate(
            linearize_along(s.family, eta, trace), -12.0, 12.0);
        const GraphMap gm =
            graph_transform(s.family, eta, trace, dich, 0.2);
        const auto sw = sandwich_check(s.family, eta, gm, 0.2, 20);
        ok &= sw.inclusion_ok && sw.max_bound_ratio <= 2.0;

        const Equilibrium well =
            equilibrium_at(s.family, Vec::Constant(1, 1.0));
        const auto wtrace =
            continue_hyperbolic_solution(s.family, eta, pp, well, 12.0);
        const auto wdich = dichotomy_estimate(
            linearize_along(s.family, eta, wtrace), -12.0, 12.0);
        GraphOptions gopt;
        gopt.anchors = {0.0};
        const GraphMap wgm =
            graph_transform(s.family, eta, wtrace, wdich, 0.2, gopt);
        const auto ar = attraction_rate_check(s.family, eta, wtrace, wgm,
                                              Vec::Constant(1, 0.1),
                                              {0.0, 5.0});
        ok &= ar.gamma_fit > 0.0 && ar.max_bound_ratio <= 2.0;
        os << "eta" << eta << ":sandwich=" << sw.max_bound_ratio
           << ",gamma=" << ar.gamma_fit << " ";
    }
    detail = os.str();
    return ok;
}

bool criterion8_graph_continuity(std::string& detail) {
    const Scenario s = make_scenario("saddle2d");
    const PathPoint pp = pp_for_seed(7);
    GraphOptions gopt;
    gopt.anchors = {-1.0, 0.0, 1.0};
    auto graph_for = [&](double eta) {
        const Equilibrium eq = equilibrium_at(s.family, Vec::Zero(2));
        const auto trace =
            continue_hyperbolic_solution(s.family, eta, pp, eq, 12.0);
        const auto dich = dichotomy_estimate(
            linearize_along(s.family, eta, trace), -12.0, 12.0);
        return graph_transform(s.family, eta, trace, dich, 0.2, gopt);
    };
    const GraphMap gm0 = graph_for(0.0);
    std::vector<double> gaps;
    for (double eta : {0.1, 0.05, 0.025})
        gaps.push_back(graph_continuity_gap(graph_for(eta), gm0));
    const bool ok = gaps[0] > gaps[1] && gaps[1] > gaps[2];
    std::ostringstream os;
    os << "gaps=" << gaps[0] << "," << gaps[1] << "," << gaps[2];
    detail = os.str();
    return ok;
}

bool criterion9_attractor_continuity(std::string& detail) {
    const Scenario s = make_scenario("cubic1d");
    std::vector<PathPoint> pps;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) pps.push_back(pp_for_seed(seed));

    SweepParams params;
    params.box = s.box;
    params.t_back = 2.0;
    params.grid_n = 4001;
    params.eps_cluster = 0.04;
    params.cloud.check_convergence = false;

    // reference section span
    const SetCloud a0 =
        pullback_cloud(s.family, 0.0, pps[0], s.box, params.t_back,
                       params.grid_n, 0.0, params.eps_cluster, params.cloud);
    std::vector<double> sorted(a0.points.begin(), a0.points.end());
    std::sort(sorted.begin(), sorted.end());
    bool ok = std::abs(sorted.front() + 1.0) <= 0.02 &&
              std::abs(sorted.back() - 1.0) <= 0.02;

    const std::vector<double> etas = {0.0, 0.2, 0.1, 0.05, 0.025};
    const SweepTable table =
        continuity_sweep(s.family, pps, etas, {-2.0, 0.0, 2.0}, params);

    // eta = 0 self row
    for (std::size_t i = 0; i < table.etas.size(); ++i)
        if (table.etas[i] == 0.0) {
            ok &= table.max_upper[i] <= params.eps_cluster;
            ok &= table.max_lower[i] <= params.eps_cluster;
        }

    // both semidistance columns decrease in eta within 20 percent
    auto column = [&](const std::vector<double>& vals) {
        std::vector<double> out;
        for (double e : {0.2, 0.1, 0.05, 0.025})
            for (std::size_t i = 0; i < table.etas.size(); ++i)
                if (table.etas[i] == e) out.push_back(vals[i]);
        return out;
    };
    auto decreasing = [](const std::vector<double>& v) {
        bool good = v.back() < v.front();
        for (std::size_t i = 0; i + 1 < v.size(); ++i)
            if (v[i + 1] > v[i] * 1.2) good = false;
        return good;
    };
    const auto uppers = column(table.max_upper);
    const auto lowers = column(table.max_lower);
    ok &= decreasing(uppers);
    ok &= decreasing(lowers);

    std::ostringstream os;
    os << "span=[" << sorted.front() << "," << sorted.back() << "] upper=";
    for (double v : uppers) os << v << ",";
    os << " lower=";
    for (double v : lowers) os << v << ",";
    detail = os.str();
    return ok;
}

bool criterion10_structure(std::string& detail) {
    bool ok = true;
    std::ostringstream os;

    // cubic: unstable-set union fills the attractor at eta in {0, 0.05}
    const Scenario cub = make_scenario("cubic1d");
    const PathPoint pp = pp_for_seed(7);
    const auto eqs = find_equilibria(cub.family, cub.box.lo, cub.box.hi, 9);
    std::optional<ConnectionGraph> g0;
    for (double eta : {0.0, 0.05}) {
        CloudOptions copt;
        copt.check_convergence = false;
        const SetCloud a_cloud =
            pullback_cloud(cub.family, eta, pp, cub.box, 2.0, 4001, 0.0, 0.04,
                           copt);
        std::vector<SetCloud> unstable;
        std::vector<HyperbolicSolutionTrace> traces;
        for (const auto& eq : eqs) {
            const auto trace =
                continue_hyperbolic_solution(cub.family, eta, pp, eq, 12.0);
            const auto dich = dichotomy_estimate(
                linearize_along(cub.family, eta, trace), -12.0, 12.0);
            GraphOptions gopt;
            gopt.anchors = {0.0};
            const GraphMap gm =
                graph_transform(cub.family, eta, trace, dich, 0.2, gopt);
            unstable.push_back(
                unstable_section_cloud(cub.family, eta, gm, 0.0, 0.04));
            traces.push_back(trace);
        }
        const auto [residual, reverse] =
            unstable_union_residual(a_cloud, unstable);
        ok &= residual <= 2.0 * 0.04;
        os << "cubic_eta" << eta << ":res=" << residual << " ";

        const ConnectionGraph g =
            classify_connections(cub.family, eta, pp, traces, 0.05, 4);
        ok &= g.acyclic;
        if (eta == 0.0) {
            g0 = g;
        } else if (g0) {
            const bool same = g.edges.size() == g0->edges.size() &&
                              std::all_of(g.edges.begin(), g.edges.end(),
                                          [&](const auto& e) {
                                              return g0->has_edge(e.first,
                                                                  e.second);
                                          });
            ok &= same;
            os << "digraph_equal=" << same << " ";
        }
    }

    // planar double well at eta = 0
    const Scenario grad = make_scenario("gradient2d");
    const auto geqs = find_equilibria(grad.family, grad.box.lo, grad.box.hi, 9);
    CloudOptions copt;
    copt.check_convergence = false;
    const SetCloud ga =
        pullback_cloud(grad.family, 0.0, pp, grad.box, 2.0, 65, 0.0, 0.05,
                       copt);
    std::vector<SetCloud> gun;
    for (const auto& eq : geqs) {
        const auto trace =
            continue_hyperbolic_solution(grad.family, 0.0, pp, eq, 12.0);
        const auto dich = dichotomy_estimate(
            linearize_along(grad.family, 0.0, trace), -12.0, 12.0);
        GraphOptions gopt;
        gopt.anchors = {0.0};
        const GraphMap gm =
            graph_transform(grad.family, 0.0, trace, dich, 0.2, gopt);
        gun.push_back(unstable_section_cloud(grad.family, 0.0, gm, 0.0, 0.05));
    }
    const auto [gres, grev] = unstable_union_residual(ga, gun);
    ok &= gres <= 2.0 * 0.05;
    os << "gradient2d:res=" << gres;
    detail = os.str();
    return ok;
}

bool criterion11_wave(std::string& detail) {
    bool ok = true;
    std::ostringstream os;
    WaveGalerkinSpec spec;  // N = 8, beta = 1
    const PathPoint pp(0.0, sample_wiener_path(9, -45.0, 25.0, 1e-3));

    {
        const VectorFieldFamily fam = build_wave_family(spec);
        Vec y0 = Vec::Zero(2 * spec.n_modes);
        y0(0) = 0.5;
        y0(1) = 0.2;
        y0(spec.n_modes) = 0.1;
        const Trajectory tr = integrate(fam, 0.0, pp, y0, 0.0, 10.0, 1e-3);
        double prev =
            lyapunov_energy(spec, WaveState::from_flat(tr.state_vec(0)));
        double worst_rise = -1e300;
        for (std::size_t i = 1; i <= tr.steps(); ++i) {
            const double e =
                lyapunov_energy(spec, WaveState::from_flat(tr.state_vec(i)));
            worst_rise = std::max(worst_rise, e - prev);
            prev = e;
        }
        ok &= worst_rise <= 1e-8;
        os << "dE_max=" << worst_rise << " ";
    }

    {
        WaveGalerkinSpec s4 = spec;
        s4.n_modes = 4;
        Mat lin = Mat::Zero(8, 8);
        for (int k = 1; k <= 4; ++k) {
            lin(k - 1, 4 + k - 1) = 1.0;
            lin(4 + k - 1, k - 1) = -static_cast<double>(k * k);
            lin(4 + k - 1, 4 + k - 1) = -s4.beta;
        }
        Eigen::EigenSolver<Mat> es(lin);
        double err = 0.0;
        for (int k = 1; k <= 4; ++k) {
            const auto roots = wave_mode_roots(s4.beta, k);
            for (const auto root : {roots.first, roots.second}) {
                double best = 1e300;
                for (int i = 0; i < 8; ++i)
                    best =
                        std::min(best, std::abs(es.eigenvalues()(i) - root));
                err = std::max(err, best);
            }
        }
        ok &= err <= 1e-10;
        os << "eig_err=" << err << " ";
    }

    {
        const auto rep0 = linear_decay_split(spec, 0.0, pp, 20.0, 1e-3);
        ok &= rep0.alpha_fit > 0.0;
        const double dev =
            std::abs(rep0.alpha_fit - rep0.alpha_modes) / rep0.alpha_modes;
        ok &= dev <= 0.15;
        const auto rep1 = linear_decay_split(spec, 0.1, pp, 20.0, 1e-3);
        ok &= rep1.alpha_fit >= rep0.alpha_fit * 0.95;
        os << "alpha0=" << rep0.alpha_fit << " dev=" << dev
           << " alpha_eta=" << rep1.alpha_fit << " ";
    }

    {
        const auto bounds = damping_bounds(spec, 0.1, pp, {-10.0, 10.0});
        ok &= bounds.b0 >= spec.beta;
        os << "b0=" << bounds.b0;
    }
    detail = os.str();
    return ok;
}

struct CmdResult {
    int exit_code = -1;
    std::string output;
};

CmdResult run_cmd(const std::string& cmd) {
    CmdResult r;
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    if (pipe == nullptr) return r;
    std::array<char, 4096> buf{};
    while (fgets(buf.data(), buf.size(), pipe) != nullptr)
        r.output += buf.data();
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool criterion12_cli(std::string& detail) {
    const std::string cli = NRDS_CLI_PATH;
    const fs::path tmp = fs::temp_directory_path();
    const fs::path out1 = tmp / "nrds_acc1";
    const fs::path out2 = tmp / "nrds_acc2";
    fs::remove_all(out1);
    fs::remove_all(out2);
    const std::string body =
        "scenario = cubic1d\n"
        "etas = 0\n"
        "seeds = 1\n"
        "t_anchors = 0\n"
        "checks = attractor\n"
        "numeric.dt = 1e-3\n"
        "numeric.T_back = 1.5\n"
        "numeric.grid_n = 501\n"
        "numeric.eps_cluster = 0.05\n"
        "numeric.path_t_min = -40\n"
        "numeric.path_t_max = 5\n";
    auto write_cfg = [&](const std::string& name, const std::string& text) {
        const fs::path p = tmp / name;
        std::ofstream out(p);
        out << text;
        return p;
    };
    const fs::path c1 =
        write_cfg("acc1.cfg", body + "out_dir = " + out1.string() + "\n");
    const fs::path c2 =
        write_cfg("acc2.cfg", body + "out_dir = " + out2.string() + "\n");
    const CmdResult r1 = run_cmd(cli + " run " + c1.string());
    const CmdResult r2 = run_cmd(cli + " run " + c2.string());
    bool ok = r1.exit_code == 0 && r2.exit_code == 0;
    ok &= slurp(out1 / "sweep.csv") == slurp(out2 / "sweep.csv") &&
          !slurp(out1 / "sweep.csv").empty();
    ok &= slurp(out1 / "checks.csv") == slurp(out2 / "checks.csv");

    const fs::path out3 = tmp / "nrds_acc3";
    fs::remove_all(out3);
    const fs::path c3 = write_cfg(
        "acc3.cfg",
        "scenario = linear1d\netas = 0\nseeds = 1\nchecks = manifold\n"
        "numeric.dt = 1e-3\nnumeric.path_t_min = -40\n"
        "numeric.path_t_max = 5\nout_dir = " +
            out3.string() + "\n");
    const CmdResult r3 = run_cmd(cli + " run " + c3.string());
    ok &= r3.exit_code == 2;

    const fs::path c4 = write_cfg("acc4.cfg", "nonsense = 1\n");
    const CmdResult r4 = run_cmd(cli + " run " + c4.string());
    ok &= r4.exit_code == 1;

    std::ostringstream os;
    os << "run=" << r1.exit_code << "," << r2.exit_code
       << " fail_cfg=" << r3.exit_code << " bad_cfg=" << r4.exit_code;
    detail = os.str();
    return ok;
}

}  // namespace

int main() {
    Harness h;
    h.run("criterion 1: driver (OU residual, closed form, shift flow)",
          criterion1_driver);
    h.run("criterion 2: integrator order (RK4 and cocycle defect)",
          criterion2_integrator);
    h.run("criterion 3: conjugation consistency at order one",
          criterion3_conjugation);
    h.run("criterion 4: hyperbolic continuation scaling and compatibility",
          criterion4_hyperbolic);
    h.run("criterion 5: dichotomy fits and projection algebra",
          criterion5_dichotomy);
    h.run("criterion 6: unstable graph accuracy and smallness",
          criterion6_graph);
    h.run("criterion 7: backward bounds and exponential attraction",
          criterion7_backward_bounds);
    h.run("criterion 8: graph continuity in eta", criterion8_graph_continuity);
    h.run("criterion 9: attractor continuity sweep",
          criterion9_attractor_continuity);
    h.run("criterion 10: gradient structure and connection digraph",
          criterion10_structure);
    h.run("criterion 11: damped wave checks", criterion11_wave);
    h.run("criterion 12: cli determinism and exit codes", criterion12_cli);
    std::printf("%d/%d criteria passed\n", h.total - h.failed, h.total);
    return h.failed == 0 ? 0 : 1;
}
