#include "nrds/manifold.hpp"

#include <algorithm>
#include <cmath>

#include "nrds/csv.hpp"
#include "nrds/errors.hpp"

namespace nrds {

SmallnessReport check_smallness(double rho, double m, double alpha,
                                double lip) {
    if (!(rho > 0.0) || !(m > 0.0) || !(alpha > 0.0) || !(lip > 0.0))
        throw Error(ErrorCode::InvalidInterval,
                    "smallness inputs must be positive");
    SmallnessReport r;
    r.rho = rho;
    r.m = m;
    r.alpha = alpha;
    r.lip = lip;
    r.cond_bound = rho * m / alpha <= lip;
    r.cond_contraction = rho * m * (1.0 + lip) / alpha < 1.0;
    const double denom = alpha - rho * m * (1.0 + lip);
    r.cond_graph = denom > 0.0 && rho * m * m * (1.0 + lip) / denom <= lip;
    const double denom2 = 2.0 * alpha - rho * m * (1.0 + lip);
    r.cond_rate = denom2 > 0.0 &&
                  rho * m + rho * rho * m * m * (1.0 + lip) * (1.0 + m) /
                                denom2 <
                      alpha / 2.0;
    return r;
}

std::optional<double> solve_smallness_lip(double rho, double m, double alpha) {
    if (!(rho > 0.0)) return std::nullopt;
    const double lo = rho * m / alpha;
    for (int i = 0; i <= 4000; ++i) {
        const double lip =
            lo * std::pow(1e4, static_cast<double>(i) / 4000.0);
        if (lip > 50.0) break;
        if (check_smallness(rho, m, alpha, lip).all()) return lip;
    }
    return std::nullopt;
}

RhoEstimate estimate_rho(const VectorFieldFamily& f, double eta,
                         const HyperbolicSolutionTrace& trace, double delta,
                         int n_z_probe, int n_t_probe) {
    const int d = f.dim;
    RhoEstimate est;

    // tensor probe lattice in the ball, plus a shifted half-lattice
    std::vector<Vec> probes;
    auto add_lattice = [&](int n, double scale) {
        const int total = static_cast<int>(std::pow(n, d));
        for (int s = 0; s < total; ++s) {
            Vec z(d);
            int rem = s;
            for (int c = 0; c < d; ++c) {
                const int idx = rem % n;
                rem /= n;
                z(c) = -scale +
                       2.0 * scale * static_cast<double>(idx) /
                           static_cast<double>(n - 1);
            }
            if (z.norm() <= delta * (1.0 + 1e-12)) probes.push_back(z);
        }
    };
    add_lattice(n_z_probe, delta);
    add_lattice(n_z_probe - 2, delta * 0.93);

    const Mat j_mid = f.eval_jac(eta, 0.0, trace.pp, trace.at_time(0.0));
    for (int ti = 0; ti < n_t_probe; ++ti) {
        const double t = -trace.t_h + 2.0 * trace.t_h *
                                          static_cast<double>(ti) /
                                          static_cast<double>(n_t_probe - 1);
        const Vec xi = trace.at_time(t);
        const Vec rhs_xi = f.eval(eta, t, trace.pp, xi);
        const Mat jac_xi = f.eval_jac(eta, t, trace.pp, xi);
        est.drift = std::max(est.drift, spectral_norm(jac_xi - j_mid));

        std::vector<Vec> h(probes.size());
        for (std::size_t i = 0; i < probes.size(); ++i) {
            h[i] = f.eval(eta, t, trace.pp, xi + probes[i]) - rhs_xi -
                   jac_xi * probes[i];
            est.sup_norm = std::max(est.sup_norm, h[i].norm());
        }
        for (std::size_t i = 0; i < probes.size(); ++i)
            for (std::size_t j = i + 1; j < probes.size(); ++j) {
                const double dz = (probes[i] - probes[j]).norm();
                if (dz < 1e-12) continue;
                est.lip = std::max(est.lip, (h[i] - h[j]).norm() / dz);
            }
    }
    return est;
}

namespace {

double cutoff(double r, double delta0) {
    const double r1 = 1.25 * delta0;
    const double r2 = 2.5 * delta0;
    if (r <= r1) return 1.0;
    if (r >= r2) return 0.0;
    const double u = (r - r1) / (r2 - r1);
    return 1.0 - u * u * (3.0 - 2.0 * u);
}

// backward Lyapunov-Perron solver around a hyperbolic trace with frozen
// midpoint linearization; shared by graph_transform and sandwich_check
class GraphSolver {
  public:
    GraphSolver(const VectorFieldFamily& f, double eta,
                const HyperbolicSolutionTrace& trace,
                const DichotomyEstimate& dich, double delta0, double t_back,
                double tol, int max_iter)
        : f_(f), eta_(eta), trace_(trace), delta0_(delta0), tol_(tol),
          max_iter_(max_iter), dt_(trace.dt), proj_u_(dich.proj_u),
          proj_s_(dich.proj_s) {
        a_mid_ = f.eval_jac(eta, 0.0, trace.pp, trace.at_time(0.0));
        e_fwd_ = expm(Mat(a_mid_ * dt_));
        e_bwd_ = expm(Mat(-a_mid_ * dt_));
        basis_u_ = range_basis(proj_u_);
        steps_ = static_cast<std::size_t>(std::llround(t_back / dt_));
        if (steps_ < 8)
            throw Error(ErrorCode::WindowExhausted,
                        "backward window too short for the graph solver");
    }

    const Mat& basis_u() const { return basis_u_; }
    int unstable_dim() const { return static_cast<int>(basis_u_.cols()); }
    double t_back() const { return static_cast<double>(steps_) * dt_; }

    struct Orbit {
        std::vector<Vec> z;    // deviations along [s - t_back, s]
        Vec value;             // stable component at the anchor
        int iterations = 0;
    };

    // backward-bounded deviation orbit with unstable anchor coordinate zeta
    Orbit solve(double s, const Vec& zeta) const {
        const std::size_t m = steps_;
        const int d = f_.dim;
        if (s - t_back() < -trace_.t_h - 1e-9 || s > trace_.t_h + 1e-9)
            throw Error(ErrorCode::WindowExhausted,
                        "anchor window leaves the trace");

        std::vector<Vec> xi(m + 1), rhs_xi(m + 1);
        for (std::size_t i = 0; i <= m; ++i) {
            const double t = s - t_back() + static_cast<double>(i) * dt_;
            xi[i] = trace_.at_time(t);
            rhs_xi[i] = f_.eval(eta_, t, trace_.pp, xi[i]);
        }

        const Vec zu_anchor = basis_u_ * zeta;
        std::vector<Vec> zfree(m + 1);
        zfree[m] = zu_anchor;
        for (std::size_t i = m; i-- > 0;) zfree[i] = e_bwd_ * zfree[i + 1];

        std::vector<Vec> z = zfree;
        std::vector<Vec> h(m + 1), znew(m + 1);
        double prev_update = 1e300;
        int worse = 0;
        Orbit orbit;
        for (int it = 0; it < max_iter_; ++it) {
            for (std::size_t i = 0; i <= m; ++i) {
                const double t =
                    s - t_back() + static_cast<double>(i) * dt_;
                const Vec raw = f_.eval(eta_, t, trace_.pp, xi[i] + z[i]) -
                                rhs_xi[i] - a_mid_ * z[i];
                h[i] = cutoff(z[i].norm(), delta0_) * raw;
            }
            // stable part, bottom-up
            Vec acc = Vec::Zero(d);
            std::vector<Vec> zs(m + 1);
            zs[0] = acc;
            for (std::size_t i = 1; i <= m; ++i) {
                acc = e_fwd_ * (acc + (dt_ / 2) * (proj_s_ * h[i - 1])) +
                      (dt_ / 2) * (proj_s_ * h[i]);
                zs[i] = acc;
            }
            // unstable correction, top-down
            Vec iu = Vec::Zero(d);
            znew[m] = zu_anchor + zs[m];
            for (std::size_t i = m; i-- > 0;) {
                iu = e_bwd_ * (iu + (dt_ / 2) * (proj_u_ * h[i + 1])) +
                     (dt_ / 2) * (proj_u_ * h[i]);
                znew[i] = zfree[i] - iu + zs[i];
            }
            double update = 0.0;
            for (std::size_t i = 0; i <= m; ++i)
                update = std::max(update, (znew[i] - z[i]).norm());
            std::swap(z, znew);
            orbit.iterations = it + 1;
            if (update < tol_) break;
            if (update >= prev_update) {
                if (++worse >= 5)
                    throw Error(ErrorCode::NoContraction,
                                "graph fixed point stopped contracting");
            } else {
                worse = 0;
            }
            prev_update = update;
            if (it + 1 == max_iter_)
                throw Error(ErrorCode::NoContraction,
                            "graph fixed point did not converge");
        }
        orbit.value = proj_s_ * z[m];
        orbit.z = std::move(z);
        return orbit;
    }

  private:
    const VectorFieldFamily& f_;
    double eta_;
    const HyperbolicSolutionTrace& trace_;
    double delta0_, tol_;
    int max_iter_;
    double dt_;
    Mat proj_u_, proj_s_, a_mid_, e_fwd_, e_bwd_, basis_u_;
    std::size_t steps_ = 0;
};

std::vector<Vec> tensor_nodes(int k, int grid_n, double delta0) {
    std::vector<Vec> nodes;
    if (k == 0) {
        nodes.emplace_back(0);
        return nodes;
    }
    const int total = static_cast<int>(std::pow(grid_n, k));
    nodes.reserve(total);
    for (int s = 0; s < total; ++s) {
        Vec zeta(k);
        int rem = s;
        for (int c = 0; c < k; ++c) {
            const int idx = rem % grid_n;
            rem /= grid_n;
            zeta(c) = -delta0 + 2.0 * delta0 * static_cast<double>(idx) /
                                    static_cast<double>(grid_n - 1);
        }
        nodes.push_back(zeta);
    }
    return nodes;
}

}  // namespace

GraphMap graph_transform(const VectorFieldFamily& f, double eta,
                         const HyperbolicSolutionTrace& trace,
                         const DichotomyEstimate& dich, double delta0,
                         const GraphOptions& opt) {
    GraphMap gm;
    gm.center = trace;
    gm.dich = dich;
    gm.delta0 = delta0;
    gm.unstable_dim = dich.rank_u;

    // license the certificate on the largest radius where the four
    // inequalities admit an L; the node ball may be larger
    double lo = 0.0, hi = delta0;
    RhoEstimate chosen{};
    std::optional<double> lip;
    {
        const RhoEstimate full = estimate_rho(f, eta, trace, delta0);
        const double rho_full = full.rho() + full.drift;
        lip = rho_full > 0.0
                  ? solve_smallness_lip(rho_full, dich.m, dich.alpha)
                  : solve_smallness_lip(1e-12, dich.m, dich.alpha);
        if (lip) {
            gm.delta_licensed = delta0;
            chosen = full;
        }
    }
    if (!lip) {
        for (int it = 0; it < 24; ++it) {
            const double mid = 0.5 * (lo + hi);
            const RhoEstimate est = estimate_rho(f, eta, trace, mid);
            const double rho_eff = std::max(est.rho() + est.drift, 1e-12);
            if (solve_smallness_lip(rho_eff, dich.m, dich.alpha)) {
                lo = mid;
                chosen = est;
            } else {
                hi = mid;
            }
        }
        if (lo == 0.0)
            throw Error(ErrorCode::SmallnessViolated,
                        "no radius satisfies the smallness inequalities");
        gm.delta_licensed = lo;
        lip = solve_smallness_lip(std::max(chosen.rho() + chosen.drift, 1e-12),
                                  dich.m, dich.alpha);
    }
    gm.smallness = check_smallness(
        std::max(chosen.rho() + chosen.drift, 1e-12), dich.m, dich.alpha, *lip);
    if (!gm.smallness.all())
        throw Error(ErrorCode::SmallnessViolated,
                    "smallness certificate failed at the licensed radius");

    double t_back = opt.t_back;
    if (t_back <= 0.0) t_back = std::max(10.0 / dich.alpha, 8.0);
    gm.anchors = opt.anchors.empty() ? std::vector<double>{0.0} : opt.anchors;
    for (double s : gm.anchors)
        if (s - t_back < -trace.t_h || s > trace.t_h)
            throw Error(ErrorCode::WindowExhausted,
                        "anchor outside the feasible trace window");

    GraphSolver solver(f, eta, trace, dich, delta0, t_back, opt.tol,
                       opt.max_iter);
    gm.basis_u = solver.basis_u();
    const int k = solver.unstable_dim();
    gm.nodes = tensor_nodes(k, opt.grid_n, delta0);

    gm.values.reserve(gm.anchors.size() * gm.nodes.size());
    for (double s : gm.anchors)
        for (const Vec& zeta : gm.nodes)
            gm.values.push_back(solver.solve(s, zeta).value);

    gm.l_est = 0.0;
    for (std::size_t a = 0; a < gm.anchors.size(); ++a)
        for (std::size_t i = 0; i < gm.nodes.size(); ++i)
            for (std::size_t j = i + 1; j < gm.nodes.size(); ++j) {
                const double dz = (gm.nodes[i] - gm.nodes[j]).norm();
                if (dz < 1e-12) continue;
                const double dv =
                    (gm.value_at(a, i) - gm.value_at(a, j)).norm();
                gm.l_est = std::max(gm.l_est, dv / dz);
            }
    return gm;
}

Vec GraphMap::eval(double t, const Vec& zeta) const {
    const int d = center.dim;
    if (unstable_dim == 0 || nodes.size() == 1) return Vec::Zero(d);

    // anchor weights (nearest / linear in t)
    std::size_t a0 = 0, a1 = 0;
    double wa = 0.0;
    if (anchors.size() == 1) {
        a0 = a1 = 0;
    } else {
        auto it = std::lower_bound(anchors.begin(), anchors.end(), t);
        if (it == anchors.begin()) {
            a0 = a1 = 0;
        } else if (it == anchors.end()) {
            a0 = a1 = anchors.size() - 1;
        } else {
            a1 = static_cast<std::size_t>(it - anchors.begin());
            a0 = a1 - 1;
            wa = (t - anchors[a0]) / (anchors[a1] - anchors[a0]);
        }
    }

    const int k = unstable_dim;
    const int grid_n = k == 1 ? static_cast<int>(nodes.size())
                              : static_cast<int>(std::llround(
                                    std::sqrt(static_cast<double>(nodes.size()))));
    const double step = 2.0 * delta0 / static_cast<double>(grid_n - 1);
    auto clampi = [&](double x) {
        const double pos = (x + delta0) / step;
        const int i = std::clamp(static_cast<int>(std::floor(pos)), 0,
                                 grid_n - 2);
        return std::pair<int, double>(i, std::clamp(pos - i, 0.0, 1.0));
    };

    auto value_on = [&](std::size_t a) -> Vec {
        if (k == 1) {
            const auto [i, w] = clampi(zeta(0));
            return (1.0 - w) * value_at(a, i) + w * value_at(a, i + 1);
        }
        const auto [i, wx] = clampi(zeta(0));
        const auto [j, wy] = clampi(zeta(1));
        auto node = [&](int ix, int jy) {
            return value_at(a, static_cast<std::size_t>(jy) * grid_n + ix);
        };
        return (1 - wx) * (1 - wy) * node(i, j) + wx * (1 - wy) * node(i + 1, j) +
               (1 - wx) * wy * node(i, j + 1) + wx * wy * node(i + 1, j + 1);
    };

    if (a0 == a1) return value_on(a0);
    return (1.0 - wa) * value_on(a0) + wa * value_on(a1);
}

void GraphMap::save_csv(const std::string& path) const {
    std::vector<std::string> cols = {"s"};
    for (int c = 1; c <= unstable_dim; ++c)
        cols.push_back("z_" + std::to_string(c));
    for (int c = 1; c <= center.dim; ++c)
        cols.push_back("sigma_" + std::to_string(c));
    CsvWriter w(cols);
    for (std::size_t a = 0; a < anchors.size(); ++a)
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            std::vector<double> row = {anchors[a]};
            for (int c = 0; c < unstable_dim; ++c) row.push_back(nodes[j](c));
            const Vec v = value_at(a, j);
            for (int c = 0; c < center.dim; ++c) row.push_back(v(c));
            w.row(row);
        }
    w.save(path);
}

SandwichReport sandwich_check(const VectorFieldFamily& f, double eta,
                              const GraphMap& gm, double delta,
                              int n_solutions) {
    if (delta > gm.delta0 + 1e-12)
        throw Error(ErrorCode::InvalidInterval, "delta must be <= delta0");
    SandwichReport rep;
    rep.delta = delta;
    const double m = gm.dich.m;
    const double lip = gm.smallness.lip;
    const double shrink = m * m * (1.0 + lip);
    rep.delta_p = delta / shrink;
    rep.delta_pp = rep.delta_p / shrink;
    rep.n_samples = n_solutions;

    const double rho = gm.smallness.rho;
    const double rate = gm.dich.alpha - rho * m * (1.0 + lip);

    GraphSolver solver(f, eta, gm.center, gm.dich,
                       gm.delta0, std::max(10.0 / gm.dich.alpha, 8.0),
                       1e-10, 80);
    const int k = solver.unstable_dim();
    if (k == 0) {
        rep.inclusion_ok = true;
        rep.bound_ok = true;
        return rep;
    }

    const double s = gm.anchors.empty() ? 0.0 : gm.anchors[gm.anchors.size() / 2];
    bool inclusion = true;
    double worst_ratio = 0.0, worst_radius = 0.0, worst_defect = 0.0;
    for (int q = 0; q < n_solutions; ++q) {
        // deterministic directions and radii filling the delta'' ball
        Vec zeta(k);
        const double angle = 2.0 * 3.14159265358979323846 *
                             static_cast<double>(q) /
                             static_cast<double>(n_solutions);
        if (k == 1) {
            zeta(0) = (q % 2 == 0 ? 1.0 : -1.0) *
                      rep.delta_pp *
                      (0.25 + 0.75 * static_cast<double>(q) /
                                  std::max(1, n_solutions - 1));
        } else {
            zeta(0) = rep.delta_pp * std::cos(angle);
            zeta(1) = rep.delta_pp * std::sin(angle);
        }

        const auto orbit = solver.solve(s, zeta);
        const double z_anchor = orbit.z.back().norm();
        for (std::size_t i = 0; i < orbit.z.size(); ++i) {
            const double r = orbit.z[i].norm();
            worst_radius = std::max(worst_radius, r);
            if (r > rep.delta_p * (1.0 + 1e-9)) inclusion = false;
            const double t_rel =
                (static_cast<double>(i) - static_cast<double>(orbit.z.size() - 1)) *
                gm.center.dt;  // t - s <= 0
            const double bound =
                shrink * std::exp(rate * t_rel) * z_anchor;
            if (bound > 1e-300)
                worst_ratio = std::max(worst_ratio, r / bound);
        }

        // forward witness: re-integrate from far back and land on the sample
        const double t_from = s - solver.t_back();
        const Vec start = gm.center.at_time(t_from) + orbit.z.front();
        const Vec end = flow(f, eta, gm.center.pp, start, t_from, s,
                             gm.center.dt);
        const Vec target = gm.center.at_time(s) + orbit.z.back();
        worst_defect = std::max(worst_defect, (end - target).norm());
    }
    rep.inclusion_ok = inclusion;
    rep.max_tube_radius = worst_radius;
    rep.max_bound_ratio = worst_ratio;
    rep.max_forward_defect = worst_defect;
    rep.bound_ok = worst_ratio <= rep.slack;
    if (!inclusion)
        throw Error(ErrorCode::TubeEscape,
                    "a sampled solution left the delta' tube backward");
    return rep;
}

AttractionReport attraction_rate_check(const VectorFieldFamily& f, double eta,
                                       const HyperbolicSolutionTrace& trace,
                                       const GraphMap& gm, const Vec& zeta0,
                                       std::pair<double, double> window) {
    AttractionReport rep;
    rep.gamma_ref = gm.dich.gamma;
    const double t0 = window.first, t1 = window.second;
    const Vec start = trace.at_time(t0) + zeta0;
    const Trajectory traj =
        integrate(f, eta, trace.pp, start, t0, t1, trace.dt);

    const Mat& pu = gm.dich.proj_u;
    const Mat& ps = gm.dich.proj_s;
    const Mat& basis = gm.basis_u;

    std::vector<double> ts, logg;
    bool tube_ok = true;
    double g_start = -1.0, g_end = 0.0, worst_ratio = 0.0;
    const std::size_t stride = std::max<std::size_t>(1, traj.steps() / 400);
    for (std::size_t i = 0; i <= traj.steps(); i += stride) {
        const double t = traj.time(i);
        const Vec dev = traj.state_vec(i) - trace.at_time(t);
        Vec zeta(basis.cols());
        if (basis.cols() > 0) zeta = basis.transpose() * (pu * dev);
        // the graph is only defined while the unstable coordinate stays in
        // the delta0 ball; a gross deviation blow-up also counts as escape
        if (zeta.norm() > gm.delta0 * (1.0 + 1e-9) ||
            dev.norm() > 4.0 * gm.delta0) {
            tube_ok = false;
            break;
        }
        const double g = (ps * dev - gm.eval(t, zeta)).norm();
        if (g_start < 0.0) g_start = g;
        g_end = g;
        if (g > 1e-14) {
            ts.push_back(t);
            logg.push_back(std::log(g));
        }
        if (g_start > 1e-300) {
            const double bound =
                gm.dich.m * std::exp(-rep.gamma_ref * (t - t0)) * g_start;
            if (bound > 1e-300)
                worst_ratio = std::max(worst_ratio, g / bound);
        }
    }
    rep.tube_ok = tube_ok;
    rep.g_start = std::max(g_start, 0.0);
    rep.g_end = g_end;
    rep.max_bound_ratio = worst_ratio;
    if (!tube_ok)
        throw Error(ErrorCode::TubeEscape,
                    "solution left the delta0 tube during attraction check");
    if (rep.g_start <= 1e-6 && g_end <= 1e-6) {
        rep.on_graph = true;
        return rep;
    }
    if (ts.size() >= 4) rep.gamma_fit = -fit_line(ts, logg).slope;
    return rep;
}

double graph_continuity_gap(const GraphMap& gm_eta, const GraphMap& gm_0) {
    if (gm_eta.nodes.size() != gm_0.nodes.size() ||
        gm_eta.anchors.size() != gm_0.anchors.size())
        throw Error(ErrorCode::GridMismatch, "graphs use different grids");
    for (std::size_t i = 0; i < gm_eta.nodes.size(); ++i)
        if ((gm_eta.nodes[i] - gm_0.nodes[i]).norm() > 1e-12)
            throw Error(ErrorCode::GridMismatch, "node grids differ");

    double value_gap = 0.0;
    for (std::size_t a = 0; a < gm_eta.anchors.size(); ++a)
        for (std::size_t j = 0; j < gm_eta.nodes.size(); ++j)
            value_gap = std::max(
                value_gap,
                (gm_eta.value_at(a, j) - gm_0.value_at(a, j)).norm());
    return spectral_norm(gm_eta.dich.proj_u - gm_0.dich.proj_u) + value_gap;
}

}  // namespace nrds
