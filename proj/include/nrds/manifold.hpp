#pragma once
// Local unstable sets of hyperbolic solutions as Lipschitz graphs over the
// unstable subspace, built by a backward Lyapunov-Perron fixed point with a
// smooth cut-off, plus the smallness certificate and the backward-decay and
// exponential-attraction checks.

#include <optional>
#include <vector>

#include "nrds/cocycle.hpp"
#include "nrds/hyperbolic.hpp"

namespace nrds {

struct SmallnessReport {
    double rho = 0.0;
    double m = 1.0;
    double alpha = 0.0;
    double lip = 0.0;  // the class constant L
    bool cond_bound = false;       // rho M / alpha <= L
    bool cond_contraction = false; // rho M (1+L) / alpha < 1
    bool cond_graph = false;       // rho M^2 (1+L)/(alpha - rho M (1+L)) <= L
    bool cond_rate = false;        // rho M + rho^2 M^2 (1+L)(1+M)/(2a - rho M(1+L)) < a/2
    bool all() const {
        return cond_bound && cond_contraction && cond_graph && cond_rate;
    }
};

SmallnessReport check_smallness(double rho, double m, double alpha, double lip);

// smallest L on a scan for which all four inequalities hold, if any
std::optional<double> solve_smallness_lip(double rho, double m, double alpha);

struct RhoEstimate {
    double sup_norm = 0.0;   // sup ||h||
    double lip = 0.0;        // sup Lipschitz quotient
    double drift = 0.0;      // sup_t ||jac(t) - jac(mid)||
    double rho() const { return std::max(sup_norm, lip); }
};

// h(t,z) = rhs(eta,t,xi+z) - rhs(eta,t,xi) - jac(eta,t,xi) z over a probe
// lattice in the ball ||z|| <= delta and the trace grid
RhoEstimate estimate_rho(const VectorFieldFamily& f, double eta,
                         const HyperbolicSolutionTrace& trace, double delta,
                         int n_z_probe = 7, int n_t_probe = 17);

struct GraphOptions {
    int grid_n = 17;             // nodes per unstable dimension
    double tol = 1e-10;
    int max_iter = 80;
    double t_back = 0.0;         // 0: choose 10/alpha, clipped to the window
    std::vector<double> anchors; // empty: single anchor at t = 0
};

struct GraphMap {
    HyperbolicSolutionTrace center;
    DichotomyEstimate dich;
    double delta0 = 0.0;
    double delta_licensed = 0.0;  // radius at which the certificate holds
    SmallnessReport smallness;
    Mat basis_u;                  // dim x k orthonormal basis of range(proj_u)
    int unstable_dim = 0;
    std::vector<double> anchors;
    std::vector<Vec> nodes;       // unstable coordinates, ||zeta|| <= delta0
    // values[a * nodes.size() + j]: stable component at anchor a, node j
    std::vector<Vec> values;
    double l_est = 0.0;           // empirical Lipschitz over node pairs

    Vec value_at(std::size_t anchor, std::size_t node) const {
        return values[anchor * nodes.size() + node];
    }
    // interpolated graph value (linear in t, multilinear in zeta; k <= 2)
    Vec eval(double t, const Vec& zeta) const;
    void save_csv(const std::string& path) const;
};

GraphMap graph_transform(const VectorFieldFamily& f, double eta,
                         const HyperbolicSolutionTrace& trace,
                         const DichotomyEstimate& dich, double delta0,
                         const GraphOptions& opt = {});

struct SandwichReport {
    double delta = 0.0;
    double delta_p = 0.0;    // delta / M^2 (1+L)
    double delta_pp = 0.0;   // delta_p / M^2 (1+L)
    int n_samples = 0;
    double max_tube_radius = 0.0;   // sup_r ||z(r)|| over all samples
    double max_bound_ratio = 0.0;   // vs M^2(1+L) e^{(a - rho M(1+L))(t-s)}
    double max_forward_defect = 0.0;
    bool inclusion_ok = false;
    bool bound_ok = false;          // max ratio <= slack
    double slack = 2.0;
    bool pass() const { return inclusion_ok && bound_ok; }
};

SandwichReport sandwich_check(const VectorFieldFamily& f, double eta,
                              const GraphMap& gm, double delta,
                              int n_solutions);

struct AttractionReport {
    double gamma_fit = 0.0;
    double gamma_ref = 0.0;     // dich.gamma
    double max_bound_ratio = 0.0;  // vs M e^{-gamma_ref (t-s)} g(s)
    double g_start = 0.0;
    double g_end = 0.0;
    bool on_graph = false;      // g stayed below tolerance throughout
    bool tube_ok = false;
    double slack = 2.0;
    bool pass() const {
        return tube_ok && (on_graph || (gamma_fit > 0.0 &&
                                        max_bound_ratio <= slack));
    }
};

AttractionReport attraction_rate_check(const VectorFieldFamily& f, double eta,
                                       const HyperbolicSolutionTrace& trace,
                                       const GraphMap& gm, const Vec& zeta0,
                                       std::pair<double, double> window);

// sup over shared anchors/nodes of projection difference plus value difference
double graph_continuity_gap(const GraphMap& gm_eta, const GraphMap& gm_0);

}  // namespace nrds
