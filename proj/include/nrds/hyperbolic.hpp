#pragma once
// Hyperbolic equilibria of the eta = 0 field, their continuation to bounded
// solutions of the perturbed pathwise process (Lyapunov-Perron fixed point),
// and exponential-dichotomy constants fitted from linearized flows.

#include <complex>
#include <optional>
#include <vector>

#include "nrds/cocycle.hpp"

namespace nrds {

struct Equilibrium {
    Vec y_star;
    std::vector<std::complex<double>> spectrum;  // of A = B + f0'(y*)
    double gap = 0.0;                            // min |Re lambda|
    int rank_u = 0;
    bool hyperbolic(double tol = 1e-8) const { return gap > tol; }
};

std::vector<Equilibrium> find_equilibria(const VectorFieldFamily& f,
                                         const Vec& box_lo, const Vec& box_hi,
                                         int seeds_per_dim);

struct DichotomyEstimate {
    Mat proj_u;
    Mat proj_s;
    double m = 1.0;       // bound, >= 1
    double alpha = 0.0;   // exponent, > 0
    double gamma = 0.0;   // stable-part decay rate
    int rank_u = 0;
    double fit_r2 = 0.0;

    void validate() const;  // projection algebra + constants, throws
    void save_json(const std::string& path) const;
};

// matrix-valued map t -> J(t) on a uniform grid (t0 + i dt)
struct LinearProcess {
    double t0 = 0.0;
    double dt = 0.0;
    int dim = 1;
    std::vector<Mat> jacs;

    double t_hi() const {
        return t0 + static_cast<double>(jacs.size() - 1) * dt;
    }
    Mat at(double t) const;  // linear interpolation
};

struct DichotomyOptions {
    double gap_tol = 1e-3;
    int n_samples = 33;
    std::optional<Mat> proj_guess;
};

DichotomyEstimate dichotomy_estimate(const LinearProcess& lp, double t_lo,
                                     double t_hi,
                                     const DichotomyOptions& opt = {});

struct HyperbolicSolutionTrace {
    double t_h = 0.0;   // window [-t_h, t_h] relative to pp.tau
    double dt = 0.0;
    double eta = 0.0;
    int dim = 1;
    PathPoint pp;
    Vec y_star;
    Mat a;              // frozen linearization B + f0'(y*)
    Mat proj_u, proj_s;
    std::vector<double> states;
    double residual = 0.0;   // final fixed-point update norm
    double sup_dist = 0.0;   // sup_t ||xi(t) - y*||
    int iterations = 0;
    double contraction = 0.0;  // typical ratio of successive updates

    std::size_t steps() const { return states.size() / dim - 1; }
    double time(std::size_t i) const {
        return -t_h + static_cast<double>(i) * dt;
    }
    Vec state_vec(std::size_t i) const;
    Vec at_time(double t) const;
    void save_csv(const std::string& path) const;
};

struct ContinueOptions {
    double dt = 0.005;
    double tol = 1e-8;
    int max_iter = 60;
    bool verify_window = false;  // re-run with t_h + 5, compare midpoints
};

HyperbolicSolutionTrace continue_hyperbolic_solution(
    const VectorFieldFamily& f, double eta, const PathPoint& pp,
    const Equilibrium& eq, double t_h, const ContinueOptions& opt = {});

// J(t) = jac(eta, t, pp, xi(t)) packaged at half-step resolution
LinearProcess linearize_along(const VectorFieldFamily& f, double eta,
                              const HyperbolicSolutionTrace& trace);

}  // namespace nrds
