#pragma once
// The pathwise transform between the Stratonovich equation
// dy = By dt + f(y) dt + eta kappa_t y o dW_t and its conjugated random ODE,
// an independent Heun oracle for the SDE, and the kappa z* boundedness
// estimates.

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "nrds/cocycle.hpp"
#include "nrds/driver.hpp"
#include "nrds/linalg.hpp"

namespace nrds {

struct NoiseShape {
    std::string name;
    std::function<double(double)> kappa;
    std::function<double(double)> kappa_dot;
};

// kappa_t = 1/(1+t^2); decays fast enough that kappa z* and
// (kappa - kappa') z* stay bounded along sublinear z*
NoiseShape default_noise_shape();
NoiseShape constant_noise_shape();  // kappa = 1, negative control

// max relative mismatch between kappa_dot and finite differences of kappa
double noise_shape_fd_error(const NoiseShape& shape, double t_lo, double t_hi,
                            int n_probe = 64);

struct SmoothMap {
    int dim = 1;
    std::string label;
    std::function<void(std::span<const double> y, std::span<double> out)> eval;
    std::function<void(std::span<const double> y, std::span<double> jac)> jac;

    // set when eval is c1*y + c3*y^3 componentwise (enables kernel fast path)
    struct Poly13 {
        double c1 = 0.0;
        double c3 = 0.0;
    };
    std::optional<Poly13> poly13;
};

// v' = Bv + e^{-eta kappa z*} f(e^{eta kappa z*} v) + eta (kappa - kappa') z* v
VectorFieldFamily build_rde(const Mat& b, const SmoothMap& f,
                            const NoiseShape& shape,
                            double t_trunc = 30.0);

// y = e^{eta kappa_T z*(theta_T omega)} v at T = pp.tau + t
Vec conjugate_state(const Vec& v, double t, const PathPoint& pp, double eta,
                    const NoiseShape& shape, double t_trunc = 30.0);
double conjugation_factor(double t, const PathPoint& pp, double eta,
                          const NoiseShape& shape, double t_trunc = 30.0);

// Heun (midpoint-corrected) Stratonovich scheme along the path increments;
// t0, t1, dt in absolute path time, dt a grid multiple of the path step
Trajectory sde_oracle(const Mat& b, const SmoothMap& f, const NoiseShape& shape,
                      double eta, const PathPtr& path, const Vec& y0, double t0,
                      double t1, double dt, double blowup_norm = 1e6);

struct M1M2Estimate {
    double m1 = 0.0;        // sup |kappa_t z*(theta_t omega)|
    double m2 = 0.0;        // sup |(kappa_t - kappa'_t) z*(theta_t omega)|
    bool saturated = false; // < 5% growth when the window doubles
    double window = 0.0;
};

M1M2Estimate m1_m2_estimate(const NoiseShape& shape, const PathPoint& pp,
                            std::pair<double, double> t_window,
                            std::size_t n_grid, double t_trunc = 30.0);

}  // namespace nrds
