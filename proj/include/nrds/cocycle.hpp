#pragma once
// eta-indexed nonautonomous random vector fields and the fixed-step RK4
// realization of the pathwise solution operator psi_eta(t, omega_tau).

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nrds/driver.hpp"
#include "nrds/linalg.hpp"

namespace nrds {

struct VectorFieldFamily {
    int dim = 1;
    std::string label;

    // out = F(eta, tau + t, omega, y); t is time relative to pp.tau
    std::function<void(double eta, double t, const PathPoint& pp,
                       std::span<const double> y, std::span<double> out)>
        rhs;

    // column-major dim x dim derivative of rhs in y
    std::function<void(double eta, double t, const PathPoint& pp,
                       std::span<const double> y, std::span<double> jac)>
        jac;

    // optional fast path for n states, interleaved point-major; may be null
    std::function<void(double eta, double t, const PathPoint& pp,
                       const double* ys, std::size_t n, double* out)>
        rhs_batch;

    Vec eval(double eta, double t, const PathPoint& pp, const Vec& y) const;
    Mat eval_jac(double eta, double t, const PathPoint& pp, const Vec& y) const;
};

struct Trajectory {
    double t0 = 0.0;    // relative to pp.tau
    double dt = 0.0;
    double eta = 0.0;
    int dim = 1;
    PathPoint pp;
    std::vector<double> states;  // (steps + 1) * dim, step-major

    std::size_t steps() const { return states.size() / dim - 1; }
    double time(std::size_t i) const {
        return t0 + static_cast<double>(i) * dt;
    }
    std::span<const double> state(std::size_t i) const {
        return {states.data() + i * dim, static_cast<std::size_t>(dim)};
    }
    Vec state_vec(std::size_t i) const;
    Vec back_vec() const { return state_vec(steps()); }
    Vec at_time(double t) const;  // linear interpolation between grid states

    void save_csv(const std::string& path) const;
};

struct IntegrateOptions {
    double blowup_norm = 1e6;
};

// classical fixed-step RK4; dt must divide t1 - t0
Trajectory integrate(const VectorFieldFamily& f, double eta,
                     const PathPoint& pp, const Vec& y0, double t0, double t1,
                     double dt, const IntegrateOptions& opt = {});

// advances n states in place from t0 to t1 (interleaved point-major)
void integrate_batch(const VectorFieldFamily& f, double eta,
                     const PathPoint& pp, std::vector<double>& states,
                     std::size_t n, double t0, double t1, double dt,
                     const IntegrateOptions& opt = {});

// single state endpoint; s and t need not be grid multiples of dt
// (a trailing short step is taken)
Vec flow(const VectorFieldFamily& f, double eta, const PathPoint& pp,
         const Vec& y0, double t0, double t1, double dt,
         const IntegrateOptions& opt = {});

// || psi(t+s, pp) y0 - psi(t, Theta_s pp) psi(s, pp) y0 ||
double cocycle_defect(const VectorFieldFamily& f, double eta,
                      const PathPoint& pp, const Vec& y0, double t, double s,
                      double dt);

// max over probes of ||rhs_eta - rhs_0|| + ||jac_eta - jac_0||_2
double convergence_gap(const VectorFieldFamily& f, double eta,
                       const PathPoint& pp, double radius,
                       std::pair<double, double> t_window,
                       std::size_t n_probe);

// max relative finite-difference error of the analytic Jacobian (test aid)
double jacobian_fd_error(const VectorFieldFamily& f, double eta,
                         const PathPoint& pp, double t, const Vec& y);

}  // namespace nrds
