#include "nrds/waveapp.hpp"

#include <cmath>
#include <numbers>

#include "nrds/errors.hpp"
#include "nrds/simd/kernels.hpp"

namespace nrds {

namespace {

constexpr double kPi = std::numbers::pi;

// collocation machinery for one mode count: 4N interior points
struct Collocation {
    int n = 0;
    int m = 0;           // 4n grid intervals
    Mat s_eval;          // (m-1) x n, sin(k x_j)
    Mat s_proj;          // n x (m-1), (2/m) sin(k x_j)

    explicit Collocation(int n_modes) : n(n_modes), m(4 * n_modes) {
        s_eval.resize(m - 1, n);
        for (int j = 1; j < m; ++j)
            for (int k = 1; k <= n; ++k)
                s_eval(j - 1, k - 1) =
                    std::sin(static_cast<double>(k * j) * kPi /
                             static_cast<double>(m));
        s_proj = (2.0 / static_cast<double>(m)) * s_eval.transpose();
    }

    Vec grid_values(const Vec& a) const { return s_eval * a; }
    Vec project(const Vec& grid) const { return s_proj * grid; }

    double quad(const Vec& grid) const {
        // rectangle rule on the uniform interior grid, exact enough for
        // smooth integrands with Dirichlet ends
        return grid.sum() * kPi / static_cast<double>(m);
    }
};

const Collocation& collocation(int n_modes) {
    static std::mutex mutex;
    static std::vector<std::unique_ptr<Collocation>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    for (const auto& c : cache)
        if (c->n == n_modes) return *c;
    cache.push_back(std::make_unique<Collocation>(n_modes));
    return *cache.back();
}

}  // namespace

ScalarNonlinearity cubic_wave_nonlinearity() {
    ScalarNonlinearity f;
    f.label = "u-u^3";
    f.f = [](double u) { return u - u * u * u; };
    f.df = [](double u) { return 1.0 - 3.0 * u * u; };
    f.ddf = [](double u) { return -6.0 * u; };
    f.antiderivative = [](double u) {
        return u * u / 2.0 - u * u * u * u / 4.0;
    };
    return f;
}

WaveState WaveState::from_flat(const Vec& y) {
    const int n = static_cast<int>(y.size()) / 2;
    WaveState s;
    s.a = y.head(n);
    s.b = y.tail(n);
    return s;
}

Vec WaveState::flat() const {
    Vec y(a.size() + b.size());
    y << a, b;
    return y;
}

double WaveState::h1_norm() const {
    double s = 0.0;
    for (int k = 1; k <= a.size(); ++k)
        s += static_cast<double>(k * k) * a(k - 1) * a(k - 1);
    return std::sqrt(s * kPi / 2.0);
}

double WaveState::energy_norm() const {
    double s = 0.0;
    for (int k = 1; k <= a.size(); ++k)
        s += static_cast<double>(k * k) * a(k - 1) * a(k - 1);
    s += b.squaredNorm();
    return std::sqrt(s * kPi / 2.0);
}

GrowthCheck growth_check(const WaveGalerkinSpec& spec, double s_max,
                         int n_probe) {
    // smallest p whose tight-constant envelope c (1 + |s|^p) stays within a
    // factor 4 of max(|f'|, |f''|) across the probe grid
    std::vector<double> ss, ms;
    for (int i = 0; i < n_probe; ++i) {
        const double s = 0.1 + (s_max - 0.1) * static_cast<double>(i) /
                                   static_cast<double>(n_probe - 1);
        ss.push_back(s);
        ms.push_back(std::max(
            {std::abs(spec.f.df(s)), std::abs(spec.f.ddf(s)), 1e-12}));
    }
    GrowthCheck out;
    for (double p = 0.05; p <= 3.0 + 1e-9; p += 0.05) {
        double c = 0.0;
        for (std::size_t i = 0; i < ss.size(); ++i)
            c = std::max(c, ms[i] / (1.0 + std::pow(ss[i], p)));
        double slack = 0.0;
        for (std::size_t i = 0; i < ss.size(); ++i)
            slack = std::max(slack,
                             c * (1.0 + std::pow(ss[i], p)) / ms[i]);
        if (slack <= 4.0) {
            out.c = c;
            out.p = p;
            out.pass = p < 2.0;
            return out;
        }
    }
    out.p = 3.0;
    out.pass = false;
    return out;
}

double wave_damping_coefficient(const WaveGalerkinSpec& spec, double eta,
                                const PathPoint& pp, double t) {
    if (eta == 0.0) return spec.beta;
    const double abs_t = pp.tau + t;
    const double z = pp.path->ou_table(spec.t_trunc).eval(abs_t);
    return spec.beta + eta * std::abs(spec.shape.kappa(abs_t) * z);
}

VectorFieldFamily build_wave_family(const WaveGalerkinSpec& spec) {
    if (spec.n_modes > 64)
        throw Error(ErrorCode::GridTooLarge, "mode count capped at 64");
    VectorFieldFamily fam;
    const int n = spec.n_modes;
    fam.dim = 2 * n;
    fam.label = "wave(N=" + std::to_string(n) + ")";
    const WaveGalerkinSpec sp = spec;

    fam.rhs = [sp, n](double eta, double t, const PathPoint& pp,
                      std::span<const double> y, std::span<double> out) {
        const auto& col = collocation(n);
        Eigen::Map<const Vec> a(y.data(), n);
        Eigen::Map<const Vec> b(y.data() + n, n);
        const double beta = wave_damping_coefficient(sp, eta, pp, t);

        Vec grid = col.grid_values(a);
        Vec fgrid(grid.size());
        if (sp.f.label == "u-u^3") {
            simd::ops().poly13(grid.size(), 1.0, -1.0, grid.data(),
                               fgrid.data());
        } else {
            for (int j = 0; j < grid.size(); ++j) fgrid(j) = sp.f.f(grid(j));
        }
        const Vec fhat = col.project(fgrid);
        for (int k = 1; k <= n; ++k) {
            out[k - 1] = b(k - 1);
            out[n + k - 1] = -static_cast<double>(k * k) * a(k - 1) -
                             beta * b(k - 1) + fhat(k - 1);
        }
    };

    fam.jac = [sp, n](double eta, double t, const PathPoint& pp,
                      std::span<const double> y, std::span<double> jac) {
        const auto& col = collocation(n);
        Eigen::Map<const Vec> a(y.data(), n);
        const double beta = wave_damping_coefficient(sp, eta, pp, t);
        Eigen::Map<Mat> j(jac.data(), 2 * n, 2 * n);
        j.setZero();
        const Vec grid = col.grid_values(a);
        Vec dgrid(grid.size());
        for (int q = 0; q < grid.size(); ++q) dgrid(q) = sp.f.df(grid(q));
        const Mat jf = col.s_proj * dgrid.asDiagonal() * col.s_eval;
        for (int k = 1; k <= n; ++k) {
            j(k - 1, n + k - 1) = 1.0;
            j(n + k - 1, k - 1) = -static_cast<double>(k * k);
            j(n + k - 1, n + k - 1) = -beta;
        }
        j.block(n, 0, n, n) += jf;
    };
    return fam;
}

DampingBounds damping_bounds(const WaveGalerkinSpec& spec, double eta,
                             const PathPoint& pp,
                             std::pair<double, double> t_window,
                             std::size_t n_grid) {
    auto minmax_on = [&](double lo, double hi, double& b0, double& b1) {
        b0 = 1e300;
        b1 = -1e300;
        for (std::size_t i = 0; i < n_grid; ++i) {
            const double t = lo + (hi - lo) * static_cast<double>(i) /
                                      static_cast<double>(n_grid - 1);
            const double beta = wave_damping_coefficient(spec, eta, pp, t);
            b0 = std::min(b0, beta);
            b1 = std::max(b1, beta);
        }
    };
    DampingBounds out;
    minmax_on(t_window.first, t_window.second, out.b0, out.b1);
    const double mid = 0.5 * (t_window.first + t_window.second);
    const double half = 0.25 * (t_window.second - t_window.first);
    double h0 = 0.0, h1 = 0.0;
    minmax_on(mid - half, mid + half, h0, h1);
    const double g = out.b1 > 0 ? (out.b1 - h1) / out.b1 : 0.0;
    out.saturated = g < 0.05;
    return out;
}

double lyapunov_energy(const WaveGalerkinSpec& spec, const WaveState& y) {
    const auto& col = collocation(spec.n_modes);
    double quad_part = 0.0;
    for (int k = 1; k <= y.a.size(); ++k)
        quad_part += static_cast<double>(k * k) * y.a(k - 1) * y.a(k - 1);
    quad_part += y.b.squaredNorm();
    quad_part *= 0.5 * kPi / 2.0;

    const Vec grid = col.grid_values(y.a);
    Vec ggrid(grid.size());
    for (int j = 0; j < grid.size(); ++j)
        ggrid(j) = spec.f.antiderivative(grid(j));
    return quad_part - col.quad(ggrid);
}

double lyapunov_v0(const WaveGalerkinSpec& spec, const WaveState& y) {
    const auto& col = collocation(spec.n_modes);
    double grad = 0.0;
    for (int k = 1; k <= y.a.size(); ++k)
        grad += static_cast<double>(k * k) * y.a(k - 1) * y.a(k - 1);
    const double kinetic = y.b.squaredNorm();
    const Vec grid = col.grid_values(y.a);
    Vec ggrid(grid.size());
    for (int j = 0; j < grid.size(); ++j)
        ggrid(j) = spec.f.antiderivative(grid(j));
    return 0.5 * grad * kPi / 2.0 +
           0.5 * spec.beta * kinetic * kPi / 2.0 - col.quad(ggrid);
}

std::pair<std::complex<double>, std::complex<double>> wave_mode_roots(
    double beta, int k) {
    const std::complex<double> disc =
        std::sqrt(std::complex<double>(beta * beta - 4.0 * k * k, 0.0));
    return {(-beta + disc) / 2.0, (-beta - disc) / 2.0};
}

namespace {

Mat energy_weight(int n) {
    Vec w(2 * n);
    for (int k = 1; k <= n; ++k) {
        w(k - 1) = static_cast<double>(k) * std::sqrt(kPi / 2.0);
        w(n + k - 1) = std::sqrt(kPi / 2.0);
    }
    return w.asDiagonal();
}

// RK4 for the linear matrix flow Phi' = B_eta(t) Phi
void linear_step(const WaveGalerkinSpec& spec, double eta, const PathPoint& pp,
                 double t, double dt, Mat& phi) {
    const int n = spec.n_modes;
    auto apply = [&](double tt, const Mat& x) {
        Mat out(2 * n, x.cols());
        const double beta = wave_damping_coefficient(spec, eta, pp, tt);
        out.topRows(n) = x.bottomRows(n);
        for (int k = 1; k <= n; ++k)
            out.row(n + k - 1) = -static_cast<double>(k * k) * x.row(k - 1) -
                                 beta * x.row(n + k - 1);
        return out;
    };
    const Mat k1 = apply(t, phi);
    const Mat k2 = apply(t + dt / 2, Mat(phi + (dt / 2) * k1));
    const Mat k3 = apply(t + dt / 2, Mat(phi + (dt / 2) * k2));
    const Mat k4 = apply(t + dt, Mat(phi + dt * k3));
    phi += (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace

DecaySplitReport linear_decay_split(const WaveGalerkinSpec& spec, double eta,
                                    const PathPoint& pp, double t_final,
                                    double dt, int n_flow_samples) {
    const int n = spec.n_modes;
    const Mat w = energy_weight(n);
    const Mat winv = w.diagonal().cwiseInverse().asDiagonal();

    DecaySplitReport rep;
    rep.alpha_modes = 1e300;
    for (int k = 1; k <= n; ++k) {
        const auto roots = wave_mode_roots(spec.beta, k);
        rep.alpha_modes = std::min(
            rep.alpha_modes,
            std::min(std::abs(roots.first.real()),
                     std::abs(roots.second.real())));
    }

    const std::size_t steps =
        static_cast<std::size_t>(std::llround(t_final / dt));
    const std::size_t sample_every = std::max<std::size_t>(
        1, steps / static_cast<std::size_t>(std::max(1, n_flow_samples)));
    Mat phi = Mat::Identity(2 * n, 2 * n);
    std::vector<double> ts, lognorm;
    std::vector<Mat> phis;
    std::vector<double> phi_times;
    phis.push_back(phi);
    phi_times.push_back(0.0);
    ts.push_back(0.0);
    lognorm.push_back(std::log(spectral_norm(w * phi * winv)));
    for (std::size_t i = 0; i < steps; ++i) {
        linear_step(spec, eta, pp, static_cast<double>(i) * dt, dt, phi);
        if ((i + 1) % sample_every == 0 || i + 1 == steps) {
            const double t = static_cast<double>(i + 1) * dt;
            ts.push_back(t);
            lognorm.push_back(std::log(spectral_norm(w * phi * winv)));
            phis.push_back(phi);
            phi_times.push_back(t);
        }
    }
    const LineFit fit = fit_line(ts, lognorm);
    rep.alpha_fit = -fit.slope;
    rep.k_fit = std::exp(fit.intercept);
    rep.fit_r2 = fit.r2;
    if (rep.alpha_fit <= 0.0)
        throw Error(ErrorCode::FitFailure,
                    "linear decay fit produced a nonpositive rate");

    // splitting on probe data: psi = phi + remainder; the remainder is also
    // recomputed through the Duhamel quadrature on the sampled flow
    const VectorFieldFamily fam = build_wave_family(spec);
    Vec y0 = Vec::Zero(2 * n);
    y0(0) = 0.4;
    y0(1) = -0.2;
    y0(n) = 0.1;
    const Trajectory psi = integrate(fam, eta, pp, y0, 0.0, t_final, dt);

    const auto& col = collocation(n);
    auto nonlinear_term = [&](const Vec& y) {
        Vec out = Vec::Zero(2 * n);
        const Vec grid = col.grid_values(y.head(n));
        Vec fgrid(grid.size());
        for (int j = 0; j < grid.size(); ++j) fgrid(j) = spec.f.f(grid(j));
        out.tail(n) = col.project(fgrid);
        return out;
    };

    double worst_split = 0.0, worst_duhamel = 0.0;
    for (std::size_t s = 1; s < phis.size(); ++s) {
        const double t = phi_times[s];
        const Vec psi_t = psi.at_time(t);
        const Vec lin_t = phis[s] * y0;
        const Vec remainder = psi_t - lin_t;
        // defect of the splitting identity itself is zero by construction;
        // recompute the remainder by Duhamel instead
        Vec duhamel = Vec::Zero(2 * n);
        for (std::size_t q = 0; q < s; ++q) {
            const double tq0 = phi_times[q], tq1 = phi_times[q + 1];
            const Vec f0 = phis[s] *
                           phis[q].partialPivLu().solve(
                               nonlinear_term(psi.at_time(tq0)));
            const Vec f1 = phis[s] *
                           phis[q + 1].partialPivLu().solve(
                               nonlinear_term(psi.at_time(tq1)));
            duhamel += 0.5 * (tq1 - tq0) * (f0 + f1);
        }
        worst_duhamel = std::max(worst_duhamel, (remainder - duhamel).norm());
        worst_split = std::max(
            worst_split, (psi_t - (lin_t + remainder)).norm());
    }
    rep.split_defect = worst_split;
    rep.duhamel_defect = worst_duhamel;
    return rep;
}

std::vector<Vec> galerkin_equilibria(const WaveGalerkinSpec& spec,
                                     int n_seeds) {
    const int n = spec.n_modes;
    const auto& col = collocation(n);
    auto resid = [&](const Vec& a) {
        const Vec grid = col.grid_values(a);
        Vec fgrid(grid.size());
        for (int j = 0; j < grid.size(); ++j) fgrid(j) = spec.f.f(grid(j));
        Vec r = col.project(fgrid);
        for (int k = 1; k <= n; ++k)
            r(k - 1) -= static_cast<double>(k * k) * a(k - 1);
        return r;
    };
    auto jac = [&](const Vec& a) {
        const Vec grid = col.grid_values(a);
        Vec dgrid(grid.size());
        for (int j = 0; j < grid.size(); ++j) dgrid(j) = spec.f.df(grid(j));
        Mat jm = col.s_proj * dgrid.asDiagonal() * col.s_eval;
        for (int k = 1; k <= n; ++k)
            jm(k - 1, k - 1) -= static_cast<double>(k * k);
        return jm;
    };

    std::vector<Vec> found;
    for (int s = 0; s < n_seeds; ++s) {
        Vec a = Vec::Zero(n);
        a(0) = -2.0 + 4.0 * static_cast<double>(s) /
                          static_cast<double>(std::max(1, n_seeds - 1));
        bool ok = true;
        for (int it = 0; it < 80; ++it) {
            const Vec r = resid(a);
            if (r.norm() < 1e-12) break;
            const Vec step = jac(a).fullPivLu().solve(r);
            if (!step.allFinite() || step.norm() > 1e3) {
                ok = false;
                break;
            }
            a -= step;
        }
        if (!ok || resid(a).norm() > 1e-10) continue;
        bool dup = false;
        for (const Vec& e : found)
            if ((e - a).norm() < 1e-6) dup = true;
        if (!dup) found.push_back(a);
    }
    std::sort(found.begin(), found.end(),
              [](const Vec& x, const Vec& y) { return x(0) < y(0); });
    return found;
}

double elliptic_residual(const WaveGalerkinSpec& spec, const Vec& a) {
    const auto& col = collocation(spec.n_modes);
    const Vec grid = col.grid_values(a);
    Vec fgrid(grid.size());
    for (int j = 0; j < grid.size(); ++j) fgrid(j) = spec.f.f(grid(j));
    Vec r = col.project(fgrid);
    for (int k = 1; k <= spec.n_modes; ++k)
        r(k - 1) -= static_cast<double>(k * k) * a(k - 1);
    return r.norm();
}

}  // namespace nrds
