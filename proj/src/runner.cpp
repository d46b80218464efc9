#include "nrds/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nrds/attractor.hpp"
#include "nrds/conjugation.hpp"
#include "nrds/csv.hpp"
#include "nrds/errors.hpp"
#include "nrds/hyperbolic.hpp"
#include "nrds/manifold.hpp"
#include "nrds/scenarios.hpp"
#include "nrds/waveapp.hpp"

namespace nrds {

namespace {

namespace fs = std::filesystem;

struct Resolved {
    Scenario scn;
    double dt, t_back, t_h, eps, delta0, beta, path_lo, path_hi;
    int grid_n, n_modes;
    std::vector<double> anchors;
    std::vector<double> etas;
    std::vector<std::uint64_t> seeds;
    WaveGalerkinSpec wave_spec;
};

Resolved resolve(const ExperimentConfig& cfg) {
    Resolved r{make_scenario(cfg.scenario),
               0, 0, 0, 0, 0, 0, 0, 0,
               0, 0, {}, cfg.etas, cfg.seeds, {}};
    const ScenarioDefaults& d = r.scn.defaults;
    r.dt = cfg.dt > 0 ? cfg.dt : d.dt;
    r.t_back = cfg.t_back > 0 ? cfg.t_back : d.t_back;
    r.t_h = cfg.t_h > 0 ? cfg.t_h : d.t_h;
    r.eps = cfg.eps_cluster > 0 ? cfg.eps_cluster : d.eps_cluster;
    r.delta0 = cfg.delta0 > 0 ? cfg.delta0 : d.delta0;
    r.beta = cfg.beta > 0 ? cfg.beta : d.beta;
    r.grid_n = cfg.grid_n > 0 ? cfg.grid_n : d.grid_n;
    r.n_modes = cfg.n_modes > 0 ? cfg.n_modes : d.n_modes;
    r.path_lo = cfg.path_t_min < 0 ? cfg.path_t_min : d.path_t_min;
    r.path_hi = cfg.path_t_max > 0 ? cfg.path_t_max : d.path_t_max;
    r.anchors = cfg.t_anchors.empty() ? d.t_anchors : cfg.t_anchors;
    if (r.scn.wave) {
        r.wave_spec = *r.scn.wave;
        r.wave_spec.n_modes = r.n_modes;
        r.wave_spec.beta = r.beta;
        r.scn.family = build_wave_family(r.wave_spec);
    }
    return r;
}

class Collector {
  public:
    explicit Collector(const std::string& out_dir) : dir_(out_dir) {
        fs::create_directories(dir_);
    }

    void write(const std::string& rel, const std::string& content) {
        const fs::path p = dir_ / rel;
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        if (!out)
            throw Error(ErrorCode::IoError, "cannot write " + p.string());
        out << content;
        files_.emplace_back(rel, fnv1a64_hex(content));
    }

    // hash a file that a module wrote directly
    std::string path_for(const std::string& rel) {
        pending_.push_back(rel);
        return (dir_ / rel).string();
    }

    void settle() {
        for (const auto& rel : pending_) {
            std::ifstream in(dir_ / rel, std::ios::binary);
            std::stringstream buf;
            buf << in.rdbuf();
            files_.emplace_back(rel, fnv1a64_hex(buf.str()));
        }
        pending_.clear();
    }

    const std::vector<std::pair<std::string, std::string>>& files() const {
        return files_;
    }
    const fs::path& dir() const { return dir_; }

  private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
    std::vector<std::string> pending_;
};

void add(std::vector<CheckResult>& out, const std::string& suite,
         const std::string& name, double value, double threshold, bool pass,
         const std::string& note = "") {
    out.push_back({suite, name, value, threshold, pass, note});
}

std::string eta_tag(double eta) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", eta);
    return buf;
}

std::vector<double> nonzero_etas_desc(const std::vector<double>& etas) {
    std::vector<double> out;
    for (double e : etas)
        if (e > 0.0) out.push_back(e);
    std::sort(out.rbegin(), out.rend());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double table_safe_lo(const WienerPath& p) { return p.t_min() + 31.0; }

// ---------------------------------------------------------------- driver

void suite_driver(const Resolved& r, Collector& col,
                  std::vector<CheckResult>& checks) {
    const std::uint64_t seed = r.seeds.front();
    const PathPtr p = sample_wiener_path(seed, r.path_lo, r.path_hi, r.dt);

    add(checks, "driver", "anchor_zero", std::abs(p->value_at(0.0)), 0.0,
        p->value_at(0.0) == 0.0);

    const PathPtr p2 = sample_wiener_path(seed, r.path_lo, r.path_hi, r.dt);
    double dmax = 0.0;
    for (std::size_t i = 0; i < p->size(); ++i)
        dmax = std::max(dmax, std::abs(p->values()[i] - p2->values()[i]));
    add(checks, "driver", "determinism", dmax, 0.0, dmax == 0.0);

    {
        const PathPtr s1 = shift(*shift(*p, 1.0), 2.0);
        const PathPtr s2 = shift(*p, 3.0);
        double diff = 0.0;
        for (std::size_t i = 0; i < s1->size(); ++i)
            diff = std::max(diff,
                            std::abs(s1->values()[i] - s2->values()[i]));
        add(checks, "driver", "shift_flow_exact", diff, 0.0, diff == 0.0);
        add(checks, "driver", "shift_anchor_zero",
            std::abs(s2->value_at(0.0)), 0.0, s2->value_at(0.0) == 0.0);
    }

    {
        // omega(s) = s gives z* = 1 in closed form
        const double fine = 1e-4;
        std::vector<double> vals;
        const double lo = -35.0, hi = 1.0;
        const std::size_t n =
            static_cast<std::size_t>(std::llround((hi - lo) / fine)) + 1;
        vals.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            vals.push_back(lo + static_cast<double>(i) * fine);
        const PathPtr lin = WienerPath::from_values(lo, fine, std::move(vals));
        const double z = ou_stationary(*lin, 0.0, 30.0);
        add(checks, "driver", "linear_path_oracle", std::abs(z - 1.0), 1e-8,
            std::abs(z - 1.0) <= 1e-8);
    }

    {
        // discrete residual of dz = -z dt + d omega along the table
        const OuTable& table = p->ou_table(30.0);
        double rss = 0.0;
        std::size_t count = 0;
        const std::size_t i_lo = p->index(std::max(table.t_lo(), -5.0));
        const std::size_t i_hi = p->index(std::min(5.0, table.t_hi()));
        const std::size_t off =
            p->index(table.t_lo());  // table index 0 in path coordinates
        for (std::size_t i = i_lo; i + 1 <= i_hi; ++i) {
            const double z0 = table.at_index(i - off);
            const double z1 = table.at_index(i + 1 - off);
            const double dw = p->values()[i + 1] - p->values()[i];
            const double res = (z1 - z0) + z0 * r.dt - dw;
            rss += res * res;
            ++count;
        }
        const double rms = std::sqrt(rss / static_cast<double>(count));
        add(checks, "driver", "ou_residual_rms", rms, 3.0 * r.dt,
            rms <= 3.0 * r.dt);
    }

    {
        double worst = 0.0;
        for (double t : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
            const double a = ou_stationary(*shift(*p, t), 0.0, 30.0);
            const double b = ou_stationary(*p, t, 30.0);
            worst = std::max(worst, std::abs(a - b));
        }
        add(checks, "driver", "ou_shift_stationarity", worst, 1e-12,
            worst <= 1e-12);
    }

    {
        const double z30 = ou_stationary(*p, 5.0, 30.0);
        const double z40 = ou_stationary(*p, 5.0, 40.0);
        double sup_tail = 0.0;
        for (double t = r.path_lo; t <= 5.0; t += 1.0)
            sup_tail = std::max(sup_tail, std::abs(p->value_at(t)));
        const double thr = std::exp(-30.0) * (1.0 + sup_tail);
        add(checks, "driver", "ou_truncation_insensitive",
            std::abs(z30 - z40), thr, std::abs(z30 - z40) <= thr);
    }

    {
        std::vector<double> grid;
        for (double t = std::ceil(table_safe_lo(*p)); t <= r.path_hi - 1.0;
             t += 2.0)
            grid.push_back(t);
        const auto report = sublinear_report(*p, grid, 30.0);
        CsvWriter w({"t", "ratio"});
        double edge = 0.0;
        for (const auto& [t, ratio] : report) {
            w.row({t, ratio});
            if (std::abs(t) >= 10.0) edge = std::max(edge, ratio);
        }
        col.write("driver_sublinear.csv", w.content());
        add(checks, "driver", "sublinear_ratio_cap", edge, 0.5, edge < 0.5);
    }

    p->save_csv(col.path_for("path_seed.csv"));
}

// ------------------------------------------------------------ conjugation

void suite_conjugation(const Resolved& r, Collector& col,
                       std::vector<CheckResult>& checks) {
    const std::vector<double> etas = nonzero_etas_desc(r.etas);
    const double eta = etas.empty() ? 0.1 : etas.front();
    CsvWriter rows({"seed", "dt", "sup_discrepancy"});

    double worst_ratio_lo = 1e300, worst_ratio_hi = 0.0;
    for (std::uint64_t seed : r.seeds) {
        const PathPtr path =
            sample_wiener_path(seed, r.path_lo, r.path_hi, r.dt);
        const PathPoint pp(0.0, path);
        Vec y0(r.scn.f.dim);
        y0.setConstant(0.5);

        std::vector<double> sups;
        for (double dt : {4.0 * r.dt, 2.0 * r.dt, r.dt}) {
            const Trajectory y_sde = sde_oracle(r.scn.b, r.scn.f, r.scn.shape,
                                                eta, path, y0, 0.0, 5.0, dt);
            Vec v0 = y0 / conjugation_factor(0.0, pp, eta, r.scn.shape);
            const Trajectory v_rde =
                integrate(r.scn.family, eta, pp, v0, 0.0, 5.0, dt);
            double sup = 0.0;
            for (std::size_t i = 0; i <= v_rde.steps(); ++i) {
                const double t = v_rde.time(i);
                const Vec y_back =
                    conjugation_factor(t, pp, eta, r.scn.shape) *
                    v_rde.state_vec(i);
                sup = std::max(sup, (y_back - y_sde.state_vec(i)).norm());
            }
            sups.push_back(sup);
            rows.row({static_cast<double>(seed), dt, sup});
        }
        for (std::size_t i = 0; i + 1 < sups.size(); ++i) {
            const double ratio = sups[i] / std::max(sups[i + 1], 1e-300);
            worst_ratio_lo = std::min(worst_ratio_lo, ratio);
            worst_ratio_hi = std::max(worst_ratio_hi, ratio);
        }
    }
    col.write("conjugation_consistency.csv", rows.content());
    add(checks, "conjugation", "oracle_order_ratio_lo", worst_ratio_lo, 1.6,
        worst_ratio_lo >= 1.6);
    add(checks, "conjugation", "oracle_order_ratio_hi", worst_ratio_hi, 2.6,
        worst_ratio_hi <= 2.6);

    {
        const PathPtr path =
            sample_wiener_path(r.seeds.front(), r.path_lo, r.path_hi, r.dt);
        const PathPoint pp(0.0, path);
        const double t_lo = r.path_lo + 31.0;
        const double t_hi = r.path_hi - 1.0;
        const double half = std::min(-t_lo, t_hi);
        const auto est = m1_m2_estimate(r.scn.shape, pp, {-half, half}, 2001);
        add(checks, "conjugation", "m1_saturated", est.m1, 0.0,
            est.saturated, "window " + format_double(2 * half));
        CsvWriter mw({"m1", "m2", "saturated", "window"});
        mw.row({est.m1, est.m2, est.saturated ? 1.0 : 0.0, est.window});
        col.write("conjugation_m1m2.csv", mw.content());
    }

    if (etas.size() >= 2) {
        const PathPtr path =
            sample_wiener_path(r.seeds.front(), r.path_lo, r.path_hi, r.dt);
        const PathPoint pp(0.0, path);
        std::vector<double> gaps;
        CsvWriter gw({"eta", "gap", "gap_over_eta"});
        for (double e : etas) {
            const double g =
                convergence_gap(r.scn.family, e, pp, 2.0, {-3.0, 3.0}, 24);
            gaps.push_back(g);
            gw.row({e, g, g / e});
        }
        col.write("conjugation_gap.csv", gw.content());
        bool decreasing = true;
        for (std::size_t i = 0; i + 1 < gaps.size(); ++i)
            if (gaps[i] <= gaps[i + 1]) decreasing = false;
        add(checks, "conjugation", "gap_strictly_decreasing",
            gaps.back(), gaps.front(), decreasing);
        double lo = 1e300, hi = 0.0;
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            lo = std::min(lo, gaps[i] / etas[i]);
            hi = std::max(hi, gaps[i] / etas[i]);
        }
        add(checks, "conjugation", "gap_linear_in_eta", hi / lo, 2.0,
            hi / lo <= 2.0);
    }
}

// ------------------------------------------------------------- hyperbolic

void suite_hyperbolic(const Resolved& r, Collector& col,
                      std::vector<CheckResult>& checks) {
    const auto eqs = find_equilibria(r.scn.family, r.scn.box.lo, r.scn.box.hi, 9);
    add(checks, "hyperbolic", "equilibria_found",
        static_cast<double>(eqs.size()), 1.0, !eqs.empty());
    if (eqs.empty()) return;

    const PathPtr path =
        sample_wiener_path(r.seeds.front(), r.path_lo, r.path_hi, r.dt);
    const PathPoint pp(0.0, path);
    const std::vector<double> etas = nonzero_etas_desc(r.etas);

    CsvWriter rows({"eq_index", "eta", "sup_dist", "residual", "M", "alpha"});
    bool first_trace_saved = false;
    for (std::size_t e = 0; e < eqs.size(); ++e) {
        if (!eqs[e].hyperbolic()) continue;
        std::vector<double> ratios;
        for (double eta : r.etas) {
            ContinueOptions opt;
            const auto trace = continue_hyperbolic_solution(
                r.scn.family, eta, pp, eqs[e], r.t_h, opt);
            const LinearProcess lp = linearize_along(r.scn.family, eta, trace);
            const auto dich = dichotomy_estimate(lp, -r.t_h, r.t_h);
            rows.row({static_cast<double>(e), eta, trace.sup_dist,
                      trace.residual, dich.m, dich.alpha});
            if (eta == 0.0) {
                add(checks, "hyperbolic",
                    "eta0_residual_eq" + std::to_string(e), trace.residual,
                    0.0, trace.residual == 0.0);
                const double adev =
                    std::abs(dich.alpha - eqs[e].gap) / eqs[e].gap;
                add(checks, "hyperbolic",
                    "alpha_matches_gap_eq" + std::to_string(e), adev, 0.1,
                    adev <= 0.1);
            } else {
                ratios.push_back(trace.sup_dist / eta);
            }
            if (!first_trace_saved) {
                trace.save_csv(col.path_for("hyperbolic_trace.csv"));
                dich.save_json(col.path_for("dichotomy.json"));
                first_trace_saved = true;
            }
        }
        if (ratios.size() >= 2) {
            const double lo = *std::min_element(ratios.begin(), ratios.end());
            const double hi = *std::max_element(ratios.begin(), ratios.end());
            add(checks, "hyperbolic",
                "supdist_linear_eq" + std::to_string(e),
                hi / std::max(lo, 1e-300), 2.0, hi <= 2.0 * lo);
        }
    }
    col.write("hyperbolic_continuation.csv", rows.content());

    // Theta-compatibility: continuing from the shifted base point matches
    // the time-shifted trace on the deep overlap
    if (!etas.empty()) {
        const double eta = etas.back();
        ContinueOptions opt;
        const auto eq = std::find_if(eqs.begin(), eqs.end(), [](const auto& q) {
            return q.hyperbolic();
        });
        const double ts = 1.0;
        const auto tr0 = continue_hyperbolic_solution(r.scn.family, eta, pp,
                                                      *eq, r.t_h, opt);
        const auto tr1 = continue_hyperbolic_solution(
            r.scn.family, eta, pp.shifted(ts), *eq, r.t_h, opt);
        double worst = 0.0;
        const double margin = 0.75 * r.t_h;
        for (double t = -r.t_h + margin; t + ts <= r.t_h - margin + 1e-9;
             t += 0.1)
            worst = std::max(
                worst, (tr1.at_time(t) - tr0.at_time(t + ts)).norm());
        add(checks, "hyperbolic", "theta_compatibility", worst, 2.0 * opt.tol,
            worst <= 2.0 * opt.tol);
    }
}

// --------------------------------------------------------------- manifold

void suite_manifold(const Resolved& r, Collector& col,
                    std::vector<CheckResult>& checks) {
    const auto eqs = find_equilibria(r.scn.family, r.scn.box.lo, r.scn.box.hi, 9);
    const PathPtr path =
        sample_wiener_path(r.seeds.front(), r.path_lo, r.path_hi, r.dt);
    const PathPoint pp(0.0, path);

    // graph center: a genuine saddle when available, else the most unstable
    int center = -1, stable = -1;
    for (std::size_t e = 0; e < eqs.size(); ++e) {
        if (!eqs[e].hyperbolic()) continue;
        if (eqs[e].rank_u > 0 && eqs[e].rank_u < r.scn.f.dim && center < 0)
            center = static_cast<int>(e);
        if (eqs[e].rank_u == 0 && stable < 0) stable = static_cast<int>(e);
    }
    if (center < 0)
        for (std::size_t e = 0; e < eqs.size(); ++e)
            if (eqs[e].hyperbolic() && eqs[e].rank_u > 0)
                center = static_cast<int>(e);
    if (center < 0) {
        add(checks, "manifold", "graph_center_available", 0.0, 1.0, false,
            "no equilibrium with unstable directions");
        return;
    }

    GraphOptions gopt;
    gopt.anchors = {-1.0, 0.0, 1.0};

    std::vector<double> etas_sorted = nonzero_etas_desc(r.etas);
    std::vector<double> gaps;
    GraphMap gm0;
    bool have_gm0 = false;

    std::vector<double> all_etas = {0.0};
    all_etas.insert(all_etas.end(), etas_sorted.begin(), etas_sorted.end());

    for (double eta : all_etas) {
        ContinueOptions copt;
        const auto trace = continue_hyperbolic_solution(
            r.scn.family, eta, pp, eqs[center], r.t_h, copt);
        const LinearProcess lp = linearize_along(r.scn.family, eta, trace);
        const auto dich = dichotomy_estimate(lp, -r.t_h, r.t_h);
        const GraphMap gm = graph_transform(r.scn.family, eta, trace, dich,
                                            r.delta0, gopt);

        double zero_val = 0.0, perp = 0.0;
        for (std::size_t a = 0; a < gm.anchors.size(); ++a)
            for (std::size_t j = 0; j < gm.nodes.size(); ++j) {
                if (gm.nodes[j].norm() < 1e-12)
                    zero_val = std::max(zero_val, gm.value_at(a, j).norm());
                perp = std::max(
                    perp, (gm.dich.proj_u * gm.value_at(a, j)).norm());
            }
        const std::string tag = "_eta" + eta_tag(eta);
        add(checks, "manifold", "graph_zero_at_origin" + tag, zero_val, 1e-8,
            zero_val <= 1e-8);
        add(checks, "manifold", "graph_values_in_stable_range" + tag, perp,
            1e-8, perp <= 1e-8);
        add(checks, "manifold", "lipschitz_within_class" + tag, gm.l_est,
            gm.smallness.lip, gm.l_est <= gm.smallness.lip);
        add(checks, "manifold", "smallness_all_true" + tag,
            gm.smallness.all() ? 1.0 : 0.0, 1.0, gm.smallness.all());

        const auto sw = sandwich_check(r.scn.family, eta, gm,
                                       0.9 * r.delta0, 20);
        add(checks, "manifold", "sandwich_inclusion" + tag,
            sw.max_tube_radius, sw.delta_p, sw.inclusion_ok);
        add(checks, "manifold", "sandwich_decay_slack" + tag,
            sw.max_bound_ratio, sw.slack, sw.bound_ok);

        if (eta == 0.0) {
            gm.save_csv(col.path_for("graph_eta0.csv"));
            gm0 = gm;
            have_gm0 = true;
        } else if (have_gm0) {
            gaps.push_back(graph_continuity_gap(gm, gm0));
        }
    }

    const bool nontrivial =
        eqs[center].rank_u > 0 && eqs[center].rank_u < r.scn.f.dim;
    if (gaps.size() >= 2 && nontrivial) {
        bool decreasing = true;
        for (std::size_t i = 0; i + 1 < gaps.size(); ++i)
            if (gaps[i] <= gaps[i + 1]) decreasing = false;
        add(checks, "manifold", "graph_gap_strictly_decreasing", gaps.back(),
            gaps.front(), decreasing);
        CsvWriter gw({"eta", "gap"});
        for (std::size_t i = 0; i < gaps.size(); ++i)
            gw.row({etas_sorted[i], gaps[i]});
        col.write("manifold_continuity.csv", gw.content());
    }

    // exponential attraction toward the graph, measured at a stable
    // equilibrium when one exists (the graph there is trivial)
    const int attractor_eq = stable >= 0 ? stable : center;
    for (double eta : all_etas) {
        if (eta != 0.0 && eta != all_etas.back()) continue;
        ContinueOptions copt;
        const auto trace = continue_hyperbolic_solution(
            r.scn.family, eta, pp, eqs[attractor_eq], r.t_h, copt);
        const LinearProcess lp = linearize_along(r.scn.family, eta, trace);
        const auto dich = dichotomy_estimate(lp, -r.t_h, r.t_h);
        GraphOptions topt;
        topt.anchors = {0.0};
        const GraphMap gm = graph_transform(r.scn.family, eta, trace, dich,
                                            r.delta0, topt);
        Vec zeta0 = Vec::Zero(r.scn.f.dim);
        const Mat sbasis = range_basis(dich.proj_s);
        if (sbasis.cols() > 0)
            zeta0 = (r.delta0 / 2.0) * sbasis.col(0);
        else
            zeta0(0) = r.delta0 / 2.0;
        const auto rep = attraction_rate_check(r.scn.family, eta, trace, gm,
                                               zeta0, {0.0, 5.0});
        const std::string tag = "_eta" + eta_tag(eta);
        add(checks, "manifold", "attraction_gamma_positive" + tag,
            rep.gamma_fit, 0.0, rep.on_graph || rep.gamma_fit > 0.0);
        add(checks, "manifold", "attraction_bound_slack" + tag,
            rep.max_bound_ratio, rep.slack, rep.pass());
    }
}

// ------------------------------------------------- attractor / continuity

SweepTable run_sweep(const Resolved& r, Collector& col) {
    std::vector<PathPoint> pps;
    for (std::uint64_t seed : r.seeds)
        pps.emplace_back(0.0,
                         sample_wiener_path(seed, r.path_lo, r.path_hi, r.dt));
    SweepParams params;
    params.box = r.scn.box;
    params.t_back = r.t_back;
    params.grid_n = r.grid_n;
    params.eps_cluster = r.eps;
    params.cloud.dt = r.dt;
    const SweepTable table =
        continuity_sweep(r.scn.family, pps, r.etas, r.anchors, params);
    table.save_csv(col.path_for("sweep.csv"));
    return table;
}

void suite_attractor(const Resolved& r, Collector& col,
                     std::vector<CheckResult>& checks, const SweepTable& table,
                     bool require_monotone) {
    const bool has_zero =
        std::find(r.etas.begin(), r.etas.end(), 0.0) != r.etas.end();
    if (has_zero) {
        for (std::size_t i = 0; i < table.etas.size(); ++i) {
            if (table.etas[i] != 0.0) continue;
            add(checks, "attractor", "self_row_upper", table.max_upper[i],
                r.eps, table.max_upper[i] <= r.eps);
            add(checks, "attractor", "self_row_lower", table.max_lower[i],
                r.eps, table.max_lower[i] <= r.eps);
        }
    }

    {
        // invariance of the section family along the process
        const PathPtr path =
            sample_wiener_path(r.seeds.front(), r.path_lo, r.path_hi, r.dt);
        const PathPoint pp(0.0, path);
        const double eta =
            nonzero_etas_desc(r.etas).empty() ? 0.0
                                              : nonzero_etas_desc(r.etas).back();
        if (r.anchors.size() >= 2) {
            CloudOptions copt;
            copt.dt = r.dt;
            copt.check_convergence = false;
            const SetCloud cs = pullback_cloud(
                r.scn.family, eta, pp, r.scn.box, r.t_back, r.grid_n,
                r.anchors.front(), r.eps, copt);
            const SetCloud ct = pullback_cloud(
                r.scn.family, eta, pp, r.scn.box, r.t_back, r.grid_n,
                r.anchors.back(), r.eps, copt);
            const double defect =
                invariance_defect(r.scn.family, eta, pp, cs, ct, r.dt);
            add(checks, "attractor", "invariance_defect", defect, 2.0 * r.eps,
                defect <= 2.0 * r.eps);
            cs.save_csv(col.path_for("cloud_eta" + eta_tag(eta) + ".csv"));
        }
    }

    if (require_monotone) {
        const auto etas = nonzero_etas_desc(r.etas);
        if (etas.size() >= 2) {
            auto column_ok = [&](const std::vector<double>& col_vals) {
                std::vector<double> vals;
                for (double e : etas)
                    for (std::size_t i = 0; i < table.etas.size(); ++i)
                        if (table.etas[i] == e) vals.push_back(col_vals[i]);
                bool ok = vals.back() < vals.front();
                for (std::size_t i = 0; i + 1 < vals.size(); ++i)
                    if (vals[i + 1] > vals[i] * 1.2) ok = false;
                return ok;
            };
            add(checks, "continuity", "upper_semicontinuity", 0.0, 0.0,
                column_ok(table.max_upper), "max dist_H(A_eta, A_0) per eta");
            add(checks, "continuity", "lower_semicontinuity", 0.0, 0.0,
                column_ok(table.max_lower), "max dist_H(A_0, A_eta) per eta");
            add(checks, "continuity", "dh_decreasing", 0.0, 0.0,
                column_ok(table.max_dh), "max d_H per eta");
        }
    }
}

// ---------------------------------------------------------------- gradient

void suite_gradient(const Resolved& r, Collector& col,
                    std::vector<CheckResult>& checks) {
    const auto eqs = find_equilibria(r.scn.family, r.scn.box.lo, r.scn.box.hi, 9);
    const PathPtr path =
        sample_wiener_path(r.seeds.front(), r.path_lo, r.path_hi, r.dt);
    const PathPoint pp(0.0, path);

    std::vector<double> etas = {0.0};
    const auto nz = nonzero_etas_desc(r.etas);
    if (!nz.empty()) etas.push_back(nz.back());

    std::optional<ConnectionGraph> graph0;
    for (double eta : etas) {
        std::vector<HyperbolicSolutionTrace> traces;
        std::vector<GraphMap> graphs;
        for (const auto& eq : eqs) {
            if (!eq.hyperbolic()) continue;
            ContinueOptions copt;
            const auto trace = continue_hyperbolic_solution(
                r.scn.family, eta, pp, eq, r.t_h, copt);
            const LinearProcess lp = linearize_along(r.scn.family, eta, trace);
            const auto dich = dichotomy_estimate(lp, -r.t_h, r.t_h);
            GraphOptions gopt;
            gopt.anchors = {0.0};
            graphs.push_back(graph_transform(r.scn.family, eta, trace, dich,
                                             r.delta0, gopt));
            traces.push_back(trace);
        }
        if (traces.empty()) {
            add(checks, "gradient", "hyperbolic_family_nonempty", 0.0, 1.0,
                false);
            return;
        }

        const double t_anchor = 0.0;
        CloudOptions copt;
        copt.dt = r.dt;
        copt.check_convergence = false;
        const SetCloud a_cloud =
            pullback_cloud(r.scn.family, eta, pp, r.scn.box, r.t_back,
                           r.grid_n, t_anchor, r.eps, copt);
        std::vector<SetCloud> unstable;
        FlowOutOptions fopt;
        fopt.dt = r.dt;
        for (const GraphMap& gm : graphs)
            unstable.push_back(unstable_section_cloud(r.scn.family, eta, gm,
                                                      t_anchor, r.eps, fopt));
        const auto [residual, reverse] =
            unstable_union_residual(a_cloud, unstable);
        const std::string tag = "_eta" + eta_tag(eta);
        add(checks, "gradient", "unstable_union_residual" + tag, residual,
            2.0 * r.eps, residual <= 2.0 * r.eps);
        add(checks, "gradient", "unstable_sets_in_attractor" + tag, reverse,
            2.0 * r.eps, reverse <= 2.0 * r.eps);

        const ConnectionGraph graph = classify_connections(
            r.scn.family, eta, pp, traces, 0.05, 8);
        add(checks, "gradient", "connections_acyclic" + tag,
            graph.acyclic ? 1.0 : 0.0, 1.0, graph.acyclic);
        add(checks, "gradient", "connections_classified" + tag,
            graph.classified_fraction, 1.0,
            graph.classified_fraction >= 1.0);

        std::vector<std::string> witness_files;
        for (std::size_t e = 0; e < graph.witnesses.size(); ++e) {
            const std::string rel = "witness" + tag + "_" +
                                    std::to_string(e) + ".csv";
            graph.witnesses[e].save_csv(col.path_for(rel));
            witness_files.push_back(rel);
        }
        graph.save_json(col.path_for("connections" + tag + ".json"),
                        witness_files);

        if (eta == 0.0) {
            graph0 = graph;
        } else if (graph0) {
            const bool same =
                graph.edges.size() == graph0->edges.size() &&
                std::all_of(graph.edges.begin(), graph.edges.end(),
                            [&](const auto& e) {
                                return graph0->has_edge(e.first, e.second);
                            });
            add(checks, "gradient", "digraph_matches_unperturbed" + tag,
                same ? 1.0 : 0.0, 1.0, same);
        }
    }
}

// -------------------------------------------------------------------- wave

void suite_wave(const Resolved& r, Collector& col,
                std::vector<CheckResult>& checks) {
    const WaveGalerkinSpec& spec = r.wave_spec;
    const PathPtr path =
        sample_wiener_path(r.seeds.front(), r.path_lo, r.path_hi, r.dt);
    const PathPoint pp(0.0, path);

    {
        const GrowthCheck g = growth_check(spec);
        add(checks, "wave", "growth_exponent", g.p, 2.0, g.pass,
            "fitted c = " + format_double(g.c));
    }

    {
        // mode-wise eigenvalues against the dense eigensolver at N = 4
        WaveGalerkinSpec s4 = spec;
        s4.n_modes = 4;
        Mat lin = Mat::Zero(8, 8);
        for (int k = 1; k <= 4; ++k) {
            lin(k - 1, 4 + k - 1) = 1.0;
            lin(4 + k - 1, k - 1) = -static_cast<double>(k * k);
            lin(4 + k - 1, 4 + k - 1) = -s4.beta;
        }
        Eigen::EigenSolver<Mat> es(lin);
        // max over predicted roots of distance to the nearest computed one
        double err = 0.0;
        for (int k = 1; k <= 4; ++k) {
            const auto roots = wave_mode_roots(s4.beta, k);
            for (const auto root : {roots.first, roots.second}) {
                double best = 1e300;
                for (int i = 0; i < 8; ++i)
                    best = std::min(best,
                                    std::abs(es.eigenvalues()(i) - root));
                err = std::max(err, best);
            }
        }
        add(checks, "wave", "mode_eigenvalues", err, 1e-10, err <= 1e-10);
    }

    const VectorFieldFamily fam = build_wave_family(spec);
    Vec y0 = Vec::Zero(2 * spec.n_modes);
    y0(0) = 0.5;
    y0(1) = 0.2;
    y0(spec.n_modes) = 0.1;

    {
        const Trajectory tr = integrate(fam, 0.0, pp, y0, 0.0, 10.0, r.dt);
        double worst_rise = 0.0;
        double prev = lyapunov_energy(spec, WaveState::from_flat(tr.state_vec(0)));
        CsvWriter ew({"t", "E", "V0"});
        for (std::size_t i = 1; i <= tr.steps(); ++i) {
            const WaveState s = WaveState::from_flat(tr.state_vec(i));
            const double e = lyapunov_energy(spec, s);
            worst_rise = std::max(worst_rise, e - prev);
            prev = e;
            if (i % 100 == 0)
                ew.row({tr.time(i), e, lyapunov_v0(spec, s)});
        }
        col.write("wave_energy.csv", ew.content());
        add(checks, "wave", "energy_monotone", worst_rise, 1e-8,
            worst_rise <= 1e-8);
    }

    {
        // Galerkin consistency under mode doubling
        WaveGalerkinSpec s2 = spec;
        s2.n_modes = 2 * spec.n_modes;
        const VectorFieldFamily fam2 = build_wave_family(s2);
        Vec y0b = Vec::Zero(2 * s2.n_modes);
        y0b.head(spec.n_modes) = y0.head(spec.n_modes);
        y0b.segment(s2.n_modes, spec.n_modes) = y0.tail(spec.n_modes);
        const Trajectory t1 = integrate(fam, 0.0, pp, y0, 0.0, 5.0, r.dt);
        const Trajectory t2 = integrate(fam2, 0.0, pp, y0b, 0.0, 5.0, r.dt);
        double worst = 0.0;
        for (double t = 0.5; t <= 5.0; t += 0.5) {
            const double e1 =
                lyapunov_energy(spec, WaveState::from_flat(t1.at_time(t)));
            const double e2 =
                lyapunov_energy(s2, WaveState::from_flat(t2.at_time(t)));
            worst = std::max(worst,
                             std::abs(e1 - e2) / std::max(1.0, std::abs(e1)));
        }
        add(checks, "wave", "galerkin_consistency", worst, 0.01,
            worst <= 0.01);
    }

    {
        const auto rep0 = linear_decay_split(spec, 0.0, pp, 20.0, r.dt);
        add(checks, "wave", "linear_alpha_positive", rep0.alpha_fit, 0.0,
            rep0.alpha_fit > 0.0);
        const double dev =
            std::abs(rep0.alpha_fit - rep0.alpha_modes) / rep0.alpha_modes;
        add(checks, "wave", "linear_alpha_vs_modes", dev, 0.15, dev <= 0.15);

        const double eta =
            nonzero_etas_desc(r.etas).empty() ? 0.1
                                              : nonzero_etas_desc(r.etas).front();
        const auto rep1 = linear_decay_split(spec, eta, pp, 20.0, r.dt);
        add(checks, "wave", "perturbed_alpha_no_slower", rep1.alpha_fit,
            rep0.alpha_fit * 0.95, rep1.alpha_fit >= rep0.alpha_fit * 0.95);
        add(checks, "wave", "splitting_identity", rep1.split_defect, 1e-12,
            rep1.split_defect <= 1e-12);

        const auto bounds =
            damping_bounds(spec, eta, pp, {-10.0, 10.0}, 2001);
        add(checks, "wave", "damping_lower_bound", bounds.b0, spec.beta,
            bounds.b0 >= spec.beta);
        CsvWriter dw({"b0", "b1", "saturated"});
        dw.row({bounds.b0, bounds.b1, bounds.saturated ? 1.0 : 0.0});
        col.write("wave_damping.csv", dw.content());
    }

    {
        const auto eqs = galerkin_equilibria(spec);
        double worst = 0.0;
        for (const Vec& a : eqs)
            worst = std::max(worst, elliptic_residual(spec, a));
        add(checks, "wave", "elliptic_equilibria_residual", worst, 1e-8,
            worst <= 1e-8 && !eqs.empty(),
            std::to_string(eqs.size()) + " equilibria");
    }
}

}  // namespace

std::string scenario_listing() {
    std::ostringstream out;
    for (const auto& [name, desc] : list_scenarios())
        out << name << " - " << desc << "\n";
    return out.str();
}

RunResult run_experiment(const ExperimentConfig& cfg) {
    RunResult result;
    const auto errs = validate_config(cfg);
    if (!errs.empty()) {
        for (const auto& e : errs)
            result.checks.push_back({"config", e, 0.0, 0.0, false, ""});
        result.exit_code = 1;
        return result;
    }

    const Resolved r = resolve(cfg);
    Collector col(cfg.out_dir);
    bool runtime_error = false;
    std::string error_note;

    auto wants = [&](const char* name) {
        return std::find(cfg.checks.begin(), cfg.checks.end(), name) !=
               cfg.checks.end();
    };

    try {
        if (wants("driver")) suite_driver(r, col, result.checks);
        if (wants("conjugation")) suite_conjugation(r, col, result.checks);
        if (wants("hyperbolic")) suite_hyperbolic(r, col, result.checks);
        if (wants("manifold")) suite_manifold(r, col, result.checks);
        if (wants("attractor") || wants("continuity")) {
            const SweepTable table = run_sweep(r, col);
            suite_attractor(r, col, result.checks, table,
                            wants("continuity"));
        }
        if (wants("gradient")) suite_gradient(r, col, result.checks);
        if (wants("wave")) suite_wave(r, col, result.checks);
    } catch (const Error& err) {
        runtime_error = true;
        error_note = std::string(error_code_name(err.code())) + ": " +
                     err.what();
    }

    col.settle();

    // per-check table
    {
        CsvWriter w({"suite", "check", "value", "threshold", "pass"});
        for (const auto& c : result.checks)
            w.row_mixed({c.suite, c.name, format_double(c.value),
                         format_double(c.threshold), c.pass ? "1" : "0"});
        col.write("checks.csv", w.content());
    }

    const bool all_pass =
        !runtime_error &&
        std::all_of(result.checks.begin(), result.checks.end(),
                    [](const CheckResult& c) { return c.pass; });

    nlohmann::json manifest;
    manifest["version"] = "nrds 0.1.0";
    manifest["config_hash"] = fnv1a64_hex(cfg.source_text);
    manifest["scenario"] = cfg.scenario;
    manifest["seeds"] = cfg.seeds;
    manifest["status"] =
        runtime_error ? "ERROR" : (all_pass ? "PASSED" : "FAILED");
    if (runtime_error) manifest["error"] = error_note;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [rel, hash] : col.files()) {
        nlohmann::json f;
        f["path"] = rel;
        f["fnv1a64"] = hash;
        files.push_back(f);
    }
    manifest["files"] = files;
    {
        std::ofstream out(fs::path(cfg.out_dir) / "manifest.json");
        out << manifest.dump(2) << "\n";
    }

    for (const auto& [rel, hash] : col.files()) result.files.push_back(rel);
    result.exit_code = runtime_error ? 1 : (all_pass ? 0 : 2);
    return result;
}

}  // namespace nrds
