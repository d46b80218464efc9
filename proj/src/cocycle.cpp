#include "nrds/cocycle.hpp"

#include <cmath>

#include "nrds/csv.hpp"
#include "nrds/errors.hpp"
#include "nrds/rng.hpp"
#include "nrds/simd/kernels.hpp"

namespace nrds {

namespace {

bool near_integer(double x) {
    return std::abs(x - std::round(x)) <= 1e-9 * (1.0 + std::abs(x));
}

double sq_norm(const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += y[i] * y[i];
    return s;
}

struct Rk4Scratch {
    std::vector<double> k1, k2, k3, k4, tmp;
    explicit Rk4Scratch(std::size_t n)
        : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
};

template <typename Eval>
void rk4_step(Eval&& eval, double t, double dt, double* y, std::size_t n,
              Rk4Scratch& s) {
    const auto& k = simd::ops();
    eval(t, y, s.k1.data());
    k.stage(n, y, dt / 2, s.k1.data(), s.tmp.data());
    eval(t + dt / 2, s.tmp.data(), s.k2.data());
    k.stage(n, y, dt / 2, s.k2.data(), s.tmp.data());
    eval(t + dt / 2, s.tmp.data(), s.k3.data());
    k.stage(n, y, dt, s.k3.data(), s.tmp.data());
    eval(t + dt, s.tmp.data(), s.k4.data());
    k.combine4(n, y, dt / 6, s.k1.data(), dt / 3, s.k2.data(), dt / 3,
               s.k3.data(), dt / 6, s.k4.data());
}

}  // namespace

Vec VectorFieldFamily::eval(double eta, double t, const PathPoint& pp,
                            const Vec& y) const {
    Vec out(dim);
    rhs(eta, t, pp, {y.data(), static_cast<std::size_t>(dim)},
        {out.data(), static_cast<std::size_t>(dim)});
    return out;
}

Mat VectorFieldFamily::eval_jac(double eta, double t, const PathPoint& pp,
                                const Vec& y) const {
    Mat out(dim, dim);
    jac(eta, t, pp, {y.data(), static_cast<std::size_t>(dim)},
        {out.data(), static_cast<std::size_t>(dim * dim)});
    return out;
}

Vec Trajectory::state_vec(std::size_t i) const {
    Vec v(dim);
    for (int c = 0; c < dim; ++c) v(c) = states[i * dim + c];
    return v;
}

Vec Trajectory::at_time(double t) const {
    const double x = (t - t0) / dt;
    const double last = static_cast<double>(steps());
    if (x < -1e-9 || x > last + 1e-9)
        throw Error(ErrorCode::WindowExhausted, "time outside trajectory");
    const double xc = std::clamp(x, 0.0, last);
    const std::size_t i =
        std::min(static_cast<std::size_t>(xc), steps() - (steps() > 0));
    const double frac = xc - static_cast<double>(i);
    Vec v(dim);
    for (int c = 0; c < dim; ++c)
        v(c) = states[i * dim + c] * (1.0 - frac) +
               states[(i + 1) * dim + c] * frac;
    return v;
}

void Trajectory::save_csv(const std::string& path) const {
    std::vector<std::string> cols = {"t"};
    for (int c = 1; c <= dim; ++c) cols.push_back("y_" + std::to_string(c));
    CsvWriter w(cols);
    for (std::size_t i = 0; i + 1 <= states.size() / dim; ++i) {
        std::vector<double> row = {time(i)};
        for (int c = 0; c < dim; ++c) row.push_back(states[i * dim + c]);
        w.row(row);
    }
    w.save(path);
}

Trajectory integrate(const VectorFieldFamily& f, double eta,
                     const PathPoint& pp, const Vec& y0, double t0, double t1,
                     double dt, const IntegrateOptions& opt) {
    if (t1 < t0) throw Error(ErrorCode::InvalidInterval, "t1 < t0");
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidInterval, "dt <= 0");
    if (!near_integer((t1 - t0) / dt))
        throw Error(ErrorCode::InvalidInterval, "dt must divide t1 - t0");
    const std::size_t steps =
        static_cast<std::size_t>(std::llround((t1 - t0) / dt));
    const std::size_t n = static_cast<std::size_t>(f.dim);

    Trajectory tr;
    tr.t0 = t0;
    tr.dt = dt;
    tr.eta = eta;
    tr.dim = f.dim;
    tr.pp = pp;
    tr.states.resize((steps + 1) * n);
    for (std::size_t c = 0; c < n; ++c) tr.states[c] = y0(c);

    const double blow2 = opt.blowup_norm * opt.blowup_norm;
    Rk4Scratch scratch(n);
    std::vector<double> y(y0.data(), y0.data() + n);
    auto eval = [&](double t, const double* in, double* out) {
        f.rhs(eta, t, pp, {in, n}, {out, n});
    };
    for (std::size_t i = 0; i < steps; ++i) {
        rk4_step(eval, t0 + static_cast<double>(i) * dt, dt, y.data(), n,
                 scratch);
        if (sq_norm(y.data(), n) > blow2)
            throw Error(ErrorCode::BlowUp, "state norm exceeded blow-up bound");
        for (std::size_t c = 0; c < n; ++c) tr.states[(i + 1) * n + c] = y[c];
    }
    return tr;
}

void integrate_batch(const VectorFieldFamily& f, double eta,
                     const PathPoint& pp, std::vector<double>& states,
                     std::size_t n, double t0, double t1, double dt,
                     const IntegrateOptions& opt) {
    if (t1 < t0) throw Error(ErrorCode::InvalidInterval, "t1 < t0");
    if (!near_integer((t1 - t0) / dt))
        throw Error(ErrorCode::InvalidInterval, "dt must divide t1 - t0");
    const std::size_t steps =
        static_cast<std::size_t>(std::llround((t1 - t0) / dt));
    const std::size_t dim = static_cast<std::size_t>(f.dim);
    const std::size_t total = n * dim;
    if (states.size() != total)
        throw Error(ErrorCode::InvalidInterval, "batch size mismatch");

    Rk4Scratch scratch(total);
    std::vector<double> one(dim);
    auto eval = [&](double t, const double* in, double* out) {
        if (f.rhs_batch) {
            f.rhs_batch(eta, t, pp, in, n, out);
            return;
        }
        for (std::size_t p = 0; p < n; ++p)
            f.rhs(eta, t, pp, {in + p * dim, dim}, {out + p * dim, dim});
    };
    const double blow2 = opt.blowup_norm * opt.blowup_norm;
    for (std::size_t i = 0; i < steps; ++i) {
        rk4_step(eval, t0 + static_cast<double>(i) * dt, dt, states.data(),
                 total, scratch);
        if (i % 64 == 0) {
            for (std::size_t p = 0; p < n; ++p)
                if (sq_norm(states.data() + p * dim, dim) > blow2)
                    throw Error(ErrorCode::BlowUp,
                                "lattice point exceeded blow-up bound");
        }
    }
}

Vec flow(const VectorFieldFamily& f, double eta, const PathPoint& pp,
         const Vec& y0, double t0, double t1, double dt,
         const IntegrateOptions& opt) {
    const std::size_t n = static_cast<std::size_t>(f.dim);
    const double span = t1 - t0;
    if (span < 0.0) throw Error(ErrorCode::InvalidInterval, "t1 < t0");
    std::size_t full = static_cast<std::size_t>(std::floor(span / dt + 1e-9));
    double rem = span - static_cast<double>(full) * dt;
    if (rem < 1e-12) rem = 0.0;

    Rk4Scratch scratch(n);
    std::vector<double> y(y0.data(), y0.data() + n);
    auto eval = [&](double t, const double* in, double* out) {
        f.rhs(eta, t, pp, {in, n}, {out, n});
    };
    const double blow2 = opt.blowup_norm * opt.blowup_norm;
    for (std::size_t i = 0; i < full; ++i) {
        rk4_step(eval, t0 + static_cast<double>(i) * dt, dt, y.data(), n,
                 scratch);
        if (sq_norm(y.data(), n) > blow2)
            throw Error(ErrorCode::BlowUp, "state norm exceeded blow-up bound");
    }
    if (rem > 0.0)
        rk4_step(eval, t0 + static_cast<double>(full) * dt, rem, y.data(), n,
                 scratch);
    Vec out(n);
    for (std::size_t c = 0; c < n; ++c) out(c) = y[c];
    return out;
}

double cocycle_defect(const VectorFieldFamily& f, double eta,
                      const PathPoint& pp, const Vec& y0, double t, double s,
                      double dt) {
    const Vec direct = flow(f, eta, pp, y0, 0.0, s + t, dt);
    const Vec mid = flow(f, eta, pp, y0, 0.0, s, dt);
    const Vec composed = flow(f, eta, pp.shifted(s), mid, 0.0, t, dt);
    return (direct - composed).norm();
}

double convergence_gap(const VectorFieldFamily& f, double eta,
                       const PathPoint& pp, double radius,
                       std::pair<double, double> t_window,
                       std::size_t n_probe) {
    GaussianRng rng(777);
    const int d = f.dim;
    std::vector<Vec> probes;
    probes.reserve(n_probe);
    for (std::size_t i = 0; i < n_probe; ++i) {
        Vec v(d);
        for (int c = 0; c < d; ++c) v(c) = rng.normal();
        const double norm = v.norm();
        const double r =
            radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
        probes.push_back(norm > 0 ? Vec((r / norm) * v) : Vec::Zero(d));
    }
    const int n_t = 9;
    double gap = 0.0;
    for (int j = 0; j < n_t; ++j) {
        const double t =
            t_window.first + (t_window.second - t_window.first) *
                                 static_cast<double>(j) /
                                 static_cast<double>(n_t - 1);
        for (const Vec& x : probes) {
            const Vec dr = f.eval(eta, t, pp, x) - f.eval(0.0, t, pp, x);
            const Mat dj =
                f.eval_jac(eta, t, pp, x) - f.eval_jac(0.0, t, pp, x);
            gap = std::max(gap, dr.norm() + spectral_norm(dj));
        }
    }
    return gap;
}

double jacobian_fd_error(const VectorFieldFamily& f, double eta,
                         const PathPoint& pp, double t, const Vec& y) {
    const Mat j = f.eval_jac(eta, t, pp, y);
    const double h = 1e-6;
    Mat fd(f.dim, f.dim);
    for (int c = 0; c < f.dim; ++c) {
        Vec yp = y, ym = y;
        yp(c) += h;
        ym(c) -= h;
        fd.col(c) = (f.eval(eta, t, pp, yp) - f.eval(eta, t, pp, ym)) / (2 * h);
    }
    const double scale = std::max(1.0, spectral_norm(j));
    return spectral_norm(fd - j) / scale;
}

}  // namespace nrds
