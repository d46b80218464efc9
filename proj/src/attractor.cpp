#include "nrds/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>

#include <nlohmann/json.hpp>

#include "nrds/csv.hpp"
#include "nrds/errors.hpp"
#include "nrds/parallel.hpp"
#include "nrds/simd/kernels.hpp"

namespace nrds {

Vec SetCloud::point_vec(std::size_t i) const {
    Vec v(dim);
    for (int c = 0; c < dim; ++c) v(c) = points[i * dim + c];
    return v;
}

void SetCloud::save_csv(const std::string& path) const {
    std::vector<std::string> cols = {"t_anchor", "eta"};
    for (int c = 1; c <= dim; ++c) cols.push_back("y_" + std::to_string(c));
    CsvWriter w(cols);
    for (std::size_t i = 0; i < size(); ++i) {
        std::vector<double> row = {t_anchor, eta};
        for (int c = 0; c < dim; ++c) row.push_back(points[i * dim + c]);
        w.row(row);
    }
    w.save(path);
}

SetCloud cluster_points(std::vector<double> points, int dim, double eps,
                        double t_anchor, double eta, std::uint64_t seed) {
    SetCloud cloud;
    cloud.dim = dim;
    cloud.t_anchor = t_anchor;
    cloud.eta = eta;
    cloud.seed = seed;
    cloud.eps_cluster = eps;
    const std::size_t n = points.size() / dim;
    const double r2 = (eps / 2.0) * (eps / 2.0);
    const auto& k = simd::ops();
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = points.data() + i * dim;
        if (!cloud.points.empty()) {
            const double d2 = k.min_sqdist(cloud.points.size() / dim, dim,
                                           cloud.points.data(), p);
            if (d2 < r2) continue;
        }
        cloud.points.insert(cloud.points.end(), p, p + dim);
    }
    return cloud;
}

namespace {

std::vector<double> lattice(const Box& box, int grid_n) {
    const int dim = static_cast<int>(box.lo.size());
    const std::size_t total =
        static_cast<std::size_t>(std::pow(grid_n, dim));
    std::vector<double> pts(total * dim);
    for (std::size_t s = 0; s < total; ++s) {
        std::size_t rem = s;
        for (int c = 0; c < dim; ++c) {
            const std::size_t idx = rem % grid_n;
            rem /= grid_n;
            const double frac =
                grid_n > 1 ? static_cast<double>(idx) /
                                 static_cast<double>(grid_n - 1)
                           : 0.5;
            pts[s * dim + c] = box.lo(c) + frac * (box.hi(c) - box.lo(c));
        }
    }
    return pts;
}

bool inside(const Box& box, const Vec& y, double slack) {
    for (int c = 0; c < y.size(); ++c) {
        const double pad = slack * (box.hi(c) - box.lo(c));
        if (y(c) < box.lo(c) - pad || y(c) > box.hi(c) + pad) return false;
    }
    return true;
}

void check_absorbing(const VectorFieldFamily& f, double eta,
                     const PathPoint& pp, const Box& box, double t0, double t1,
                     double dt) {
    const int dim = f.dim;
    const Vec mid = 0.5 * (box.lo + box.hi);
    std::vector<Vec> probes;
    const int corners = 1 << dim;
    for (int s = 0; s < corners; ++s) {
        Vec y(dim);
        for (int c = 0; c < dim; ++c) {
            const double half = box.hi(c) - mid(c);
            y(c) = mid(c) + ((s >> c) & 1 ? 2.0 : -2.0) * half;
        }
        probes.push_back(y);
    }
    probes.push_back(mid);
    for (const Vec& y0 : probes) {
        const Trajectory tr = integrate(f, eta, pp, y0, t0, t1, dt);
        bool entered = false;
        for (std::size_t i = 0; i <= tr.steps(); ++i) {
            const bool in = inside(box, tr.state_vec(i), 1e-9);
            if (in) entered = true;
            if (entered && !in)
                throw Error(ErrorCode::NotAbsorbing,
                            "probe left the box after entering");
        }
        if (!entered)
            throw Error(ErrorCode::NotAbsorbing,
                        "probe from 2x box never entered the box");
    }
}

SetCloud evolve_lattice(const VectorFieldFamily& f, double eta,
                        const PathPoint& pp, const Box& box, double t_back,
                        int grid_n, double t_anchor, double eps_cluster,
                        double dt) {
    std::vector<double> pts = lattice(box, grid_n);
    const std::size_t n = pts.size() / f.dim;
    integrate_batch(f, eta, pp, pts, n, t_anchor - t_back, t_anchor, dt);
    return cluster_points(std::move(pts), f.dim, eps_cluster, t_anchor, eta,
                          pp.path ? pp.path->seed() : 0);
}

}  // namespace

SetCloud pullback_cloud(const VectorFieldFamily& f, double eta,
                        const PathPoint& pp, const Box& box, double t_back,
                        int grid_n, double t_anchor, double eps_cluster,
                        const CloudOptions& opt) {
    if (opt.check_absorbing)
        check_absorbing(f, eta, pp, box, t_anchor - t_back, t_anchor, opt.dt);
    SetCloud cloud = evolve_lattice(f, eta, pp, box, t_back, grid_n, t_anchor,
                                    eps_cluster, opt.dt);
    if (opt.check_convergence) {
        const SetCloud doubled = evolve_lattice(
            f, eta, pp, box, 2.0 * t_back, grid_n, t_anchor, eps_cluster,
            opt.dt);
        cloud.converged = hausdorff_dist(cloud, doubled) <= eps_cluster;
    }
    return cloud;
}

double hausdorff_semidist(const SetCloud& a, const SetCloud& b) {
    if (a.size() == 0 || b.size() == 0)
        throw Error(ErrorCode::EmptyCloud, "semidistance of an empty cloud");
    const auto& k = simd::ops();
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d2 =
            k.min_sqdist(b.size(), b.dim, b.points.data(), a.point(i).data());
        worst = std::max(worst, d2);
    }
    return std::sqrt(worst);
}

double hausdorff_dist(const SetCloud& a, const SetCloud& b) {
    return std::max(hausdorff_semidist(a, b), hausdorff_semidist(b, a));
}

void SweepTable::save_csv(const std::string& path) const {
    CsvWriter w({"eta", "seed", "t_anchor", "upper", "lower", "dH"});
    for (const SweepRow& r : rows)
        w.row({r.eta, static_cast<double>(r.seed), r.t_anchor, r.upper,
               r.lower, r.dh});
    w.save(path);
}

SweepTable continuity_sweep(const VectorFieldFamily& f,
                            const std::vector<PathPoint>& pps,
                            const std::vector<double>& etas,
                            const std::vector<double>& t_anchors,
                            const SweepParams& params) {
    SweepTable table;
    table.etas = etas;

    // eta = 0 reference section, autonomous: one cloud
    const SetCloud a0 = pullback_cloud(
        f, 0.0, pps.front(), params.box, params.t_back, params.grid_n,
        t_anchors.front(), params.eps_cluster, params.cloud);

    struct Cell {
        double eta;
        std::size_t pp_index;
        double t_anchor;
    };
    std::vector<Cell> cells;
    for (double eta : etas) {
        if (eta == 0.0) {
            cells.push_back({0.0, 0, t_anchors.front()});
            continue;
        }
        for (std::size_t p = 0; p < pps.size(); ++p)
            for (double t_anchor : t_anchors) cells.push_back({eta, p, t_anchor});
    }

    std::vector<SweepRow> rows(cells.size());
    parallel_for(cells.size(), [&](std::size_t i) {
        const Cell& cell = cells[i];
        const PathPoint& pp = pps[cell.pp_index];
        const SetCloud cloud = pullback_cloud(
            f, cell.eta, pp, params.box, params.t_back, params.grid_n,
            cell.t_anchor, params.eps_cluster, params.cloud);
        SweepRow row;
        row.eta = cell.eta;
        row.seed = pp.path ? pp.path->seed() : 0;
        row.t_anchor = cell.t_anchor;
        row.upper = hausdorff_semidist(cloud, a0);
        row.lower = hausdorff_semidist(a0, cloud);
        row.dh = std::max(row.upper, row.lower);
        rows[i] = row;
    });
    table.rows = std::move(rows);

    for (double eta : etas) {
        double mu = 0.0, ml = 0.0, mdh = 0.0;
        for (const SweepRow& row : table.rows) {
            if (row.eta != eta) continue;
            mu = std::max(mu, row.upper);
            ml = std::max(ml, row.lower);
            mdh = std::max(mdh, row.dh);
        }
        table.max_upper.push_back(mu);
        table.max_lower.push_back(ml);
        table.max_dh.push_back(mdh);
    }
    return table;
}

double invariance_defect(const VectorFieldFamily& f, double eta,
                         const PathPoint& pp, const SetCloud& cloud_s,
                         const SetCloud& cloud_t, double dt) {
    if (cloud_t.t_anchor <= cloud_s.t_anchor)
        throw Error(ErrorCode::InvalidInterval, "need t > s");
    std::vector<double> pts = cloud_s.points;
    integrate_batch(f, eta, pp, pts, cloud_s.size(), cloud_s.t_anchor,
                    cloud_t.t_anchor, dt);
    SetCloud image;
    image.dim = cloud_s.dim;
    image.t_anchor = cloud_t.t_anchor;
    image.eta = eta;
    image.points = std::move(pts);
    return hausdorff_dist(image, cloud_t);
}

std::pair<double, double> unstable_union_residual(
    const SetCloud& attractor_cloud, const std::vector<SetCloud>& unstable) {
    if (unstable.empty())
        throw Error(ErrorCode::EmptyCloud, "no unstable clouds supplied");
    SetCloud merged;
    merged.dim = attractor_cloud.dim;
    merged.t_anchor = attractor_cloud.t_anchor;
    for (const SetCloud& c : unstable)
        merged.points.insert(merged.points.end(), c.points.begin(),
                             c.points.end());
    return {hausdorff_semidist(attractor_cloud, merged),
            hausdorff_semidist(merged, attractor_cloud)};
}

SetCloud unstable_section_cloud(const VectorFieldFamily& f, double eta,
                                const GraphMap& gm, double t_anchor,
                                double eps_cluster, const FlowOutOptions& opt) {
    const int dim = f.dim;
    const int k = gm.unstable_dim;
    std::vector<double> collected;

    // graph sections at earlier times flowed forward to the anchor
    for (int snap = 0; snap < opt.n_snapshots; ++snap) {
        const double t_flow =
            opt.t_flow * static_cast<double>(snap) /
            static_cast<double>(std::max(1, opt.n_snapshots - 1));
        const double t_from = t_anchor - t_flow;

        std::vector<double> pts;
        if (k == 0) {
            const Vec y = gm.center.at_time(t_from);
            pts.insert(pts.end(), y.data(), y.data() + dim);
        } else {
            const int per = opt.n_resample;
            const int total = static_cast<int>(std::pow(per, k));
            for (int s = 0; s < total; ++s) {
                Vec zeta(k);
                int rem = s;
                for (int c = 0; c < k; ++c) {
                    const int idx = rem % per;
                    rem /= per;
                    zeta(c) = -gm.delta0 +
                              2.0 * gm.delta0 * static_cast<double>(idx) /
                                  static_cast<double>(per - 1);
                }
                const Vec y = gm.center.at_time(t_from) + gm.basis_u * zeta +
                              gm.eval(t_from, zeta);
                pts.insert(pts.end(), y.data(), y.data() + dim);
            }
        }
        if (t_flow > 0.0)
            integrate_batch(f, eta, gm.center.pp, pts, pts.size() / dim,
                            t_from, t_anchor, opt.dt);
        collected.insert(collected.end(), pts.begin(), pts.end());
    }
    return cluster_points(std::move(collected), dim, eps_cluster, t_anchor,
                          eta,
                          gm.center.pp.path ? gm.center.pp.path->seed() : 0);
}

bool ConnectionGraph::has_edge(int i, int j) const {
    for (const auto& e : edges)
        if (e.first == i && e.second == j) return true;
    return false;
}

void ConnectionGraph::save_json(
    const std::string& path,
    const std::vector<std::string>& witness_files) const {
    nlohmann::json j;
    j["n_nodes"] = n_nodes;
    j["acyclic"] = acyclic;
    j["classified_fraction"] = classified_fraction;
    nlohmann::json edge_list = nlohmann::json::array();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        nlohmann::json entry;
        entry["from"] = edges[e].first;
        entry["to"] = edges[e].second;
        if (e < witness_files.size()) entry["witness"] = witness_files[e];
        edge_list.push_back(entry);
    }
    j["edges"] = edge_list;
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << j.dump(2) << "\n";
}

namespace {

bool digraph_acyclic(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (const auto& e : edges) adj[e.first].push_back(e.second);
    std::vector<int> state(n, 0);  // 0 unseen, 1 on stack, 2 done
    std::function<bool(int)> dfs = [&](int v) {
        state[v] = 1;
        for (int w : adj[v]) {
            if (state[w] == 1) return false;
            if (state[w] == 0 && !dfs(w)) return false;
        }
        state[v] = 2;
        return true;
    };
    for (int v = 0; v < n; ++v)
        if (state[v] == 0 && !dfs(v)) return false;
    return true;
}

}  // namespace

ConnectionGraph classify_connections(
    const VectorFieldFamily& f, double eta, const PathPoint& pp,
    const std::vector<HyperbolicSolutionTrace>& traces, double eps,
    int n_probe, const ClassifyOptions& opt) {
    const int p = static_cast<int>(traces.size());
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            double sep = 1e300;
            for (double t = -1.0; t <= 1.0; t += 0.5)
                sep = std::min(sep, (traces[i].at_time(t) -
                                     traces[j].at_time(t)).norm());
            if (sep < 3.0 * eps)
                throw Error(ErrorCode::InvalidInterval,
                            "traces closer than 3 eps");
        }

    ConnectionGraph graph;
    graph.n_nodes = p;
    int classified = 0, total = 0;
    const double t0 = 0.0;
    for (int i = 0; i < p; ++i) {
        const SpectralSplit split = spectral_split(traces[i].a);
        const Mat basis = range_basis(split.proj_u);
        const int k = static_cast<int>(basis.cols());
        if (k == 0) continue;  // nothing leaves a stable solution

        std::vector<Vec> dirs;
        if (k == 1) {
            dirs.push_back(basis.col(0));
            dirs.push_back(-basis.col(0));
        } else {
            for (int q = 0; q < std::max(4, n_probe); ++q) {
                const double ang = 2.0 * 3.14159265358979323846 *
                                   static_cast<double>(q) /
                                   static_cast<double>(std::max(4, n_probe));
                dirs.push_back(std::cos(ang) * basis.col(0) +
                               std::sin(ang) * basis.col(1));
            }
        }

        for (const Vec& dir : dirs) {
            ++total;
            const Vec start = traces[i].at_time(t0) + opt.probe_radius * dir;
            const Trajectory tr =
                integrate(f, eta, pp, start, t0, t0 + opt.t_end, opt.dt);

            // omega-limit: trailing-window mean distance to each trace
            int best = -1;
            double best_mean = 1e300;
            for (int j = 0; j < p; ++j) {
                double mean = 0.0;
                int count = 0;
                for (std::size_t q = 0; q <= tr.steps(); q += 16) {
                    const double t = tr.time(q);
                    if (t < t0 + opt.t_end - opt.trailing) continue;
                    mean += (tr.state_vec(q) - traces[j].at_time(t)).norm();
                    ++count;
                }
                mean /= std::max(1, count);
                if (mean < best_mean) {
                    best_mean = mean;
                    best = j;
                }
            }
            if (best < 0 || best_mean > eps)
                throw Error(ErrorCode::UnclassifiedOrbit,
                            "a probe's omega-limit matched no trace");
            ++classified;
            if (best != i && !graph.has_edge(i, best)) {
                graph.edges.emplace_back(i, best);
                graph.witnesses.push_back(tr);
            }
        }
    }
    graph.classified_fraction =
        total > 0 ? static_cast<double>(classified) / total : 1.0;
    graph.acyclic = digraph_acyclic(p, graph.edges);
    return graph;
}

}  // namespace nrds
