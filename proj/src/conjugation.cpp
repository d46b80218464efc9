#include "nrds/conjugation.hpp"

#include <cmath>

#include "nrds/errors.hpp"
#include "nrds/simd/kernels.hpp"

namespace nrds {

NoiseShape default_noise_shape() {
    NoiseShape s;
    s.name = "decaying";
    s.kappa = [](double t) { return 1.0 / (1.0 + t * t); };
    s.kappa_dot = [](double t) {
        const double d = 1.0 + t * t;
        return -2.0 * t / (d * d);
    };
    return s;
}

NoiseShape constant_noise_shape() {
    NoiseShape s;
    s.name = "constant";
    s.kappa = [](double) { return 1.0; };
    s.kappa_dot = [](double) { return 0.0; };
    return s;
}

double noise_shape_fd_error(const NoiseShape& shape, double t_lo, double t_hi,
                            int n_probe) {
    const double h = 1e-5;
    double worst = 0.0;
    for (int i = 0; i < n_probe; ++i) {
        const double t = t_lo + (t_hi - t_lo) * static_cast<double>(i) /
                                    static_cast<double>(n_probe - 1);
        const double fd = (shape.kappa(t + h) - shape.kappa(t - h)) / (2 * h);
        const double kd = shape.kappa_dot(t);
        worst = std::max(worst,
                         std::abs(fd - kd) / std::max(1.0, std::abs(kd)));
    }
    return worst;
}

VectorFieldFamily build_rde(const Mat& b, const SmoothMap& f,
                            const NoiseShape& shape, double t_trunc) {
    VectorFieldFamily fam;
    fam.dim = f.dim;
    fam.label = "rde(" + f.label + "," + shape.name + ")";
    const std::size_t dim = static_cast<std::size_t>(f.dim);
    const Mat bmat = b;
    const NoiseShape sh = shape;
    const SmoothMap fm = f;

    auto coeffs = [sh, t_trunc](double eta, double t, const PathPoint& pp,
                                double& a, double& bb) {
        const double abs_t = pp.tau + t;
        const double z = pp.path->ou_table(t_trunc).eval(abs_t);
        const double k = sh.kappa(abs_t);
        a = eta * k * z;
        bb = eta * (k - sh.kappa_dot(abs_t)) * z;
    };

    fam.rhs = [bmat, fm, coeffs, dim](double eta, double t, const PathPoint& pp,
                                      std::span<const double> y,
                                      std::span<double> out) {
        double a = 0.0, bb = 0.0;
        if (eta != 0.0) coeffs(eta, t, pp, a, bb);
        if (fm.poly13) {
            // e^{-a} f(e^{a} v) = c1 v + c3 e^{2a} v^3, componentwise
            const double c1 = fm.poly13->c1 + bb;
            const double c3 = fm.poly13->c3 * std::exp(2.0 * a);
            simd::ops().poly13(dim, c1, c3, y.data(), out.data());
        } else {
            const double e = std::exp(a);
            std::vector<double> scaled(dim);
            for (std::size_t i = 0; i < dim; ++i) scaled[i] = e * y[i];
            fm.eval({scaled.data(), dim}, out);
            const double einv = std::exp(-a);
            for (std::size_t i = 0; i < dim; ++i)
                out[i] = einv * out[i] + bb * y[i];
        }
        if (bmat.squaredNorm() > 0.0) {
            Eigen::Map<const Vec> yv(y.data(), dim);
            Eigen::Map<Vec> ov(out.data(), dim);
            ov += bmat * yv;
        }
    };

    fam.jac = [bmat, fm, coeffs, dim](double eta, double t, const PathPoint& pp,
                                      std::span<const double> y,
                                      std::span<double> jac) {
        double a = 0.0, bb = 0.0;
        if (eta != 0.0) coeffs(eta, t, pp, a, bb);
        const double e = std::exp(a);
        std::vector<double> scaled(dim);
        for (std::size_t i = 0; i < dim; ++i) scaled[i] = e * y[i];
        fm.jac({scaled.data(), dim}, jac);
        Eigen::Map<Mat> jm(jac.data(), dim, dim);
        jm += bmat + bb * Mat::Identity(dim, dim);
    };

    if (fm.poly13) {
        fam.rhs_batch = [bmat, fm, coeffs, dim](double eta, double t,
                                                const PathPoint& pp,
                                                const double* ys, std::size_t n,
                                                double* out) {
            double a = 0.0, bb = 0.0;
            if (eta != 0.0) coeffs(eta, t, pp, a, bb);
            const double b00 = bmat.size() > 0 ? bmat(0, 0) : 0.0;
            const double c1 = fm.poly13->c1 + bb + b00;
            const double c3 = fm.poly13->c3 * std::exp(2.0 * a);
            simd::ops().poly13(n * dim, c1, c3, ys, out);
        };
    }
    return fam;
}

double conjugation_factor(double t, const PathPoint& pp, double eta,
                          const NoiseShape& shape, double t_trunc) {
    if (eta == 0.0) return 1.0;
    const double abs_t = pp.tau + t;
    const double z = pp.path->ou_table(t_trunc).eval(abs_t);
    return std::exp(eta * shape.kappa(abs_t) * z);
}

Vec conjugate_state(const Vec& v, double t, const PathPoint& pp, double eta,
                    const NoiseShape& shape, double t_trunc) {
    return conjugation_factor(t, pp, eta, shape, t_trunc) * v;
}

Trajectory sde_oracle(const Mat& b, const SmoothMap& f, const NoiseShape& shape,
                      double eta, const PathPtr& path, const Vec& y0, double t0,
                      double t1, double dt, double blowup_norm) {
    if (t1 < t0) throw Error(ErrorCode::InvalidInterval, "t1 < t0");
    const double ratio = dt / path->dt();
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
        throw Error(ErrorCode::InvalidInterval,
                    "dt must be a multiple of the path step");
    const double nsteps_d = (t1 - t0) / dt;
    if (std::abs(nsteps_d - std::round(nsteps_d)) > 1e-9)
        throw Error(ErrorCode::InvalidInterval, "dt must divide t1 - t0");
    const std::size_t steps =
        static_cast<std::size_t>(std::llround(nsteps_d));
    const std::size_t dim = static_cast<std::size_t>(f.dim);

    auto drift = [&](const Vec& y) {
        Vec out(dim);
        f.eval({y.data(), dim}, {out.data(), dim});
        if (b.size() > 0) out += b * y;
        return out;
    };

    Trajectory tr;
    tr.t0 = 0.0;
    tr.dt = dt;
    tr.eta = eta;
    tr.dim = f.dim;
    tr.pp = PathPoint(t0, path);
    tr.states.resize((steps + 1) * dim);

    Vec y = y0;
    for (std::size_t c = 0; c < dim; ++c) tr.states[c] = y(c);
    const double blow2 = blowup_norm * blowup_norm;
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = t0 + static_cast<double>(i) * dt;
        const double dw = path->value_at(t + dt) - path->value_at(t);
        const Vec a0 = drift(y);
        const Vec b0 = (eta * shape.kappa(t)) * y;
        const Vec pred = y + dt * a0 + dw * b0;
        const Vec a1 = drift(pred);
        const Vec b1 = (eta * shape.kappa(t + dt)) * pred;
        y = y + (dt / 2.0) * (a0 + a1) + (dw / 2.0) * (b0 + b1);
        if (y.squaredNorm() > blow2)
            throw Error(ErrorCode::BlowUp, "sde oracle blow-up");
        for (std::size_t c = 0; c < dim; ++c)
            tr.states[(i + 1) * dim + c] = y(c);
    }
    return tr;
}

M1M2Estimate m1_m2_estimate(const NoiseShape& shape, const PathPoint& pp,
                            std::pair<double, double> t_window,
                            std::size_t n_grid, double t_trunc) {
    auto sup_on = [&](double lo, double hi, double& m1, double& m2) {
        m1 = 0.0;
        m2 = 0.0;
        for (std::size_t i = 0; i < n_grid; ++i) {
            const double t = lo + (hi - lo) * static_cast<double>(i) /
                                      static_cast<double>(n_grid - 1);
            const double abs_t = pp.tau + t;
            const double z = pp.path->ou_table(t_trunc).eval(abs_t);
            const double k = shape.kappa(abs_t);
            const double kd = shape.kappa_dot(abs_t);
            m1 = std::max(m1, std::abs(k * z));
            m2 = std::max(m2, std::abs((k - kd) * z));
        }
    };

    M1M2Estimate est;
    est.window = t_window.second - t_window.first;
    sup_on(t_window.first, t_window.second, est.m1, est.m2);

    // saturation probe: halve the window and compare
    const double mid = 0.5 * (t_window.first + t_window.second);
    const double half = 0.25 * (t_window.second - t_window.first);
    double m1h = 0.0, m2h = 0.0;
    sup_on(mid - half, mid + half, m1h, m2h);
    const double g1 = est.m1 > 0 ? (est.m1 - m1h) / est.m1 : 0.0;
    const double g2 = est.m2 > 0 ? (est.m2 - m2h) / est.m2 : 0.0;
    est.saturated = g1 < 0.05 && g2 < 0.05;
    return est;
}

}  // namespace nrds
