#pragma once
// Pullback-attractor sections as epsilon-clustered point clouds, Hausdorff
// (semi)distances, the eta-continuity sweep, unstable-set flow-outs, and the
// connection digraph behind the gradient-structure check.

#include <cstdint>
#include <string>
#include <vector>

#include "nrds/cocycle.hpp"
#include "nrds/hyperbolic.hpp"
#include "nrds/manifold.hpp"

namespace nrds {

struct SetCloud {
    int dim = 1;
    double t_anchor = 0.0;
    double eta = 0.0;
    std::uint64_t seed = 0;
    double eps_cluster = 0.0;
    bool converged = true;  // doubling T_back moved the cloud < eps_cluster
    std::vector<double> points;  // interleaved, n * dim

    std::size_t size() const { return points.size() / dim; }
    std::span<const double> point(std::size_t i) const {
        return {points.data() + i * dim, static_cast<std::size_t>(dim)};
    }
    Vec point_vec(std::size_t i) const;
    void save_csv(const std::string& path) const;
};

struct Box {
    Vec lo;
    Vec hi;
    double diameter() const { return (hi - lo).norm(); }
};

struct CloudOptions {
    double dt = 1e-3;
    bool check_absorbing = true;
    bool check_convergence = true;
};

SetCloud pullback_cloud(const VectorFieldFamily& f, double eta,
                        const PathPoint& pp, const Box& box, double t_back,
                        int grid_n, double t_anchor, double eps_cluster,
                        const CloudOptions& opt = {});

// greedy prune: no two kept points closer than eps/2, first-seen order
SetCloud cluster_points(std::vector<double> points, int dim, double eps,
                        double t_anchor, double eta, std::uint64_t seed);

double hausdorff_semidist(const SetCloud& a, const SetCloud& b);
double hausdorff_dist(const SetCloud& a, const SetCloud& b);

struct SweepRow {
    double eta = 0.0;
    std::uint64_t seed = 0;
    double t_anchor = 0.0;
    double upper = 0.0;  // dist_H(A_eta, A_0)
    double lower = 0.0;  // dist_H(A_0, A_eta)
    double dh = 0.0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    std::vector<double> etas;
    std::vector<double> max_upper;  // per eta over anchors/seeds
    std::vector<double> max_lower;
    std::vector<double> max_dh;
    void save_csv(const std::string& path) const;
};

struct SweepParams {
    Box box;
    double t_back = 2.0;
    int grid_n = 2001;
    double eps_cluster = 0.04;
    CloudOptions cloud;
};

SweepTable continuity_sweep(const VectorFieldFamily& f,
                            const std::vector<PathPoint>& pps,
                            const std::vector<double>& etas,
                            const std::vector<double>& t_anchors,
                            const SweepParams& params);

double invariance_defect(const VectorFieldFamily& f, double eta,
                         const PathPoint& pp, const SetCloud& cloud_s,
                         const SetCloud& cloud_t, double dt = 1e-3);

// dist_H(A, union of unstable clouds) and the reverse semidistance
std::pair<double, double> unstable_union_residual(
    const SetCloud& attractor_cloud, const std::vector<SetCloud>& unstable);

struct FlowOutOptions {
    double t_flow = 5.0;
    int n_snapshots = 21;
    int n_resample = 65;  // graph nodes per unstable dimension
    double dt = 1e-3;
};

// local graph flowed forward: approximates the unstable-set section
SetCloud unstable_section_cloud(const VectorFieldFamily& f, double eta,
                                const GraphMap& gm, double t_anchor,
                                double eps_cluster,
                                const FlowOutOptions& opt = {});

struct ConnectionGraph {
    int n_nodes = 0;
    std::vector<std::pair<int, int>> edges;  // i -> j, no self loops
    std::vector<Trajectory> witnesses;       // one per edge
    bool acyclic = false;
    double classified_fraction = 0.0;

    bool has_edge(int i, int j) const;
    void save_json(const std::string& path,
                   const std::vector<std::string>& witness_files) const;
};

struct ClassifyOptions {
    double probe_radius = 0.02;
    double t_end = 10.0;
    double trailing = 2.0;
    double dt = 1e-3;
};

ConnectionGraph classify_connections(
    const VectorFieldFamily& f, double eta, const PathPoint& pp,
    const std::vector<HyperbolicSolutionTrace>& traces, double eps,
    int n_probe, const ClassifyOptions& opt = {});

}  // namespace nrds
