#pragma once
// Sine-Galerkin truncation of the damped wave equation on (0, pi) with a
// random perturbation on the damping, its energy functional, damping bounds,
// and the linear/nonlinear splitting diagnostics.

#include <functional>
#include <vector>

#include "nrds/cocycle.hpp"
#include "nrds/conjugation.hpp"

namespace nrds {

struct ScalarNonlinearity {
    std::string label;
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> ddf;
    std::function<double(double)> antiderivative;  // G(u) = int_0^u f
};

ScalarNonlinearity cubic_wave_nonlinearity();  // f(u) = u - u^3

struct WaveGalerkinSpec {
    int n_modes = 8;
    double beta = 1.0;
    ScalarNonlinearity f = cubic_wave_nonlinearity();
    NoiseShape shape = default_noise_shape();
    double t_trunc = 30.0;
};

struct WaveState {
    Vec a;  // modes of u
    Vec b;  // modes of u_t

    static WaveState from_flat(const Vec& y);
    Vec flat() const;
    double h1_norm() const;
    double energy_norm() const;
};

struct GrowthCheck {
    double c = 0.0;
    double p = 0.0;
    bool pass = false;  // p < 2 on the probe grid
};

GrowthCheck growth_check(const WaveGalerkinSpec& spec, double s_max = 5.0,
                         int n_probe = 64);

// 2N-dimensional family: a' = b, b' = -k^2 a - beta_eta(t) b + P_N f(u)
VectorFieldFamily build_wave_family(const WaveGalerkinSpec& spec);

double wave_damping_coefficient(const WaveGalerkinSpec& spec, double eta,
                                const PathPoint& pp, double t);

struct DampingBounds {
    double b0 = 0.0;
    double b1 = 0.0;
    bool saturated = false;
};

DampingBounds damping_bounds(const WaveGalerkinSpec& spec, double eta,
                             const PathPoint& pp,
                             std::pair<double, double> t_window,
                             std::size_t n_grid = 2001);

// E = 1/2 int |grad u|^2 + 1/2 int v^2 - int G(u); the damped-wave energy
double lyapunov_energy(const WaveGalerkinSpec& spec, const WaveState& y);
// the displayed variant with beta/2 on the kinetic term, reported only
double lyapunov_v0(const WaveGalerkinSpec& spec, const WaveState& y);

// eigenvalues of the k-th linear mode block, roots of l^2 + beta l + k^2
std::pair<std::complex<double>, std::complex<double>> wave_mode_roots(
    double beta, int k);

struct DecaySplitReport {
    double k_fit = 0.0;        // bound in |phi(t)| <= K e^{-alpha t}
    double alpha_fit = 0.0;
    double fit_r2 = 0.0;
    double alpha_modes = 0.0;  // min over modes of |Re root|
    double split_defect = 0.0;   // || psi - (phi + nonlinear remainder) ||
    double duhamel_defect = 0.0; // remainder vs Duhamel quadrature
};

DecaySplitReport linear_decay_split(const WaveGalerkinSpec& spec, double eta,
                                    const PathPoint& pp, double t_final,
                                    double dt, int n_flow_samples = 40);

// Galerkin equilibria (u*, 0): -k^2 a + P_N f(u) = 0, Newton from seeds
std::vector<Vec> galerkin_equilibria(const WaveGalerkinSpec& spec,
                                     int n_seeds = 5);
double elliptic_residual(const WaveGalerkinSpec& spec, const Vec& a);

}  // namespace nrds
