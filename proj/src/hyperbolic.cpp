#include "nrds/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "nrds/csv.hpp"
#include "nrds/errors.hpp"

#include <nlohmann/json.hpp>

namespace nrds {

namespace {

const PathPoint kNoPath{};  // eta = 0 members never touch the driver

}  // namespace

std::vector<Equilibrium> find_equilibria(const VectorFieldFamily& f,
                                         const Vec& box_lo, const Vec& box_hi,
                                         int seeds_per_dim) {
    const int d = f.dim;
    const int total = static_cast<int>(std::pow(seeds_per_dim, d));
    std::vector<Equilibrium> found;

    for (int s = 0; s < total; ++s) {
        Vec y(d);
        int rem = s;
        for (int c = 0; c < d; ++c) {
            const int idx = rem % seeds_per_dim;
            rem /= seeds_per_dim;
            const double frac =
                seeds_per_dim > 1
                    ? static_cast<double>(idx) /
                          static_cast<double>(seeds_per_dim - 1)
                    : 0.5;
            y(c) = box_lo(c) + frac * (box_hi(c) - box_lo(c));
        }

        bool ok = true;
        for (int it = 0; it < 60; ++it) {
            const Vec r = f.eval(0.0, 0.0, kNoPath, y);
            if (r.norm() < 1e-13) break;
            const Mat j = f.eval_jac(0.0, 0.0, kNoPath, y);
            const Vec step = j.fullPivLu().solve(r);
            if (!step.allFinite() || step.norm() > 1e6) {
                ok = false;
                break;
            }
            y -= step;
            if (!y.allFinite() ||
                (y - 0.5 * (box_lo + box_hi)).norm() >
                    4.0 * (box_hi - box_lo).norm()) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        if (f.eval(0.0, 0.0, kNoPath, y).norm() > 1e-10) continue;

        bool dup = false;
        for (const auto& e : found)
            if ((e.y_star - y).norm() < 1e-6) dup = true;
        if (dup) continue;

        Equilibrium eq;
        eq.y_star = y;
        const SpectralSplit split = spectral_split(f.eval_jac(0.0, 0.0, kNoPath, y));
        eq.spectrum = split.spectrum;
        eq.gap = split.gap;
        eq.rank_u = split.rank_u;
        found.push_back(std::move(eq));
    }

    std::sort(found.begin(), found.end(),
              [](const Equilibrium& a, const Equilibrium& b) {
                  return a.y_star(0) < b.y_star(0);
              });
    return found;
}

void DichotomyEstimate::validate() const {
    const int n = static_cast<int>(proj_u.rows());
    const Mat id = Mat::Identity(n, n);
    if (spectral_norm(proj_u + proj_s - id) > 1e-10)
        throw Error(ErrorCode::FitFailure, "projections do not sum to identity");
    if (spectral_norm(proj_u * proj_u - proj_u) > 1e-8)
        throw Error(ErrorCode::FitFailure, "proj_u is not idempotent");
    if (spectral_norm(proj_s * proj_s - proj_s) > 1e-8)
        throw Error(ErrorCode::FitFailure, "proj_s is not idempotent");
    if (m < 1.0) throw Error(ErrorCode::FitFailure, "bound M < 1");
    if (!(alpha > 0.0)) throw Error(ErrorCode::FitFailure, "exponent <= 0");
    if (!(gamma > 0.0)) throw Error(ErrorCode::FitFailure, "gamma <= 0");
}

void DichotomyEstimate::save_json(const std::string& path) const {
    nlohmann::json j;
    j["rank_u"] = rank_u;
    j["rank_s"] = static_cast<int>(proj_u.rows()) - rank_u;
    j["M"] = m;
    j["alpha"] = alpha;
    j["gamma"] = gamma;
    j["fit_r2"] = fit_r2;
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << j.dump(2) << "\n";
}

Mat LinearProcess::at(double t) const {
    const double x = (t - t0) / dt;
    const double last = static_cast<double>(jacs.size() - 1);
    if (x < -1e-9 || x > last + 1e-9)
        throw Error(ErrorCode::WindowExhausted, "time outside linear process");
    const double xc = std::clamp(x, 0.0, last);
    const std::size_t i =
        std::min(static_cast<std::size_t>(xc), jacs.size() - 2);
    const double frac = xc - static_cast<double>(i);
    if (frac < 1e-12) return jacs[i];
    return (1.0 - frac) * jacs[i] + frac * jacs[i + 1];
}

namespace {

// RK4 for Phi' = J(t) Phi
Mat propagate(const LinearProcess& lp, Mat phi, double t0, double t1,
              double h) {
    const double span = t1 - t0;
    const int steps = static_cast<int>(std::llround(span / h));
    for (int i = 0; i < steps; ++i) {
        const double t = t0 + static_cast<double>(i) * h;
        const Mat k1 = lp.at(t) * phi;
        const Mat k2 = lp.at(t + h / 2) * (phi + (h / 2) * k1);
        const Mat k3 = lp.at(t + h / 2) * (phi + (h / 2) * k2);
        const Mat k4 = lp.at(t + h) * (phi + h * k3);
        phi += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return phi;
}

struct DecayFit {
    LineFit fit;
    bool usable = false;
};

DecayFit fit_decay(const LinearProcess& lp, const Mat& proj, double t_mid,
                   double t_end, int n_samples) {
    DecayFit out;
    if (spectral_norm(proj) < 1e-12) return out;
    const double dir = t_end >= t_mid ? 1.0 : -1.0;
    const double h = dir * 2.0 * lp.dt;
    const double total = std::abs(t_end - t_mid);
    const int per = std::max(
        1, static_cast<int>(total / std::abs(h)) / std::max(1, n_samples - 1));

    std::vector<double> xs, ys;
    Mat phi = Mat::Identity(lp.dim, lp.dim);
    double t = t_mid;
    xs.push_back(0.0);
    double prev = spectral_norm(phi * proj);
    ys.push_back(std::log(prev));
    const int steps = static_cast<int>(total / std::abs(h));
    for (int i = 0; i < steps; ++i) {
        phi = propagate(lp, phi, t, t + h, h);
        t += h;
        if ((i + 1) % per != 0 && i + 1 != steps) continue;
        const double norm = spectral_norm(phi * proj);
        if (norm < 1e-280) break;
        if (norm > prev * (1.0 + 1e-6))
            throw Error(ErrorCode::FitFailure,
                        "non-monotone log-norm sequence in dichotomy fit");
        prev = norm;
        xs.push_back(std::abs(t - t_mid));
        ys.push_back(std::log(norm));
    }
    if (xs.size() < 3) return out;
    out.fit = fit_line(xs, ys);
    out.usable = true;
    return out;
}

}  // namespace

DichotomyEstimate dichotomy_estimate(const LinearProcess& lp, double t_lo,
                                     double t_hi, const DichotomyOptions& opt) {
    const double t_mid = 0.5 * (t_lo + t_hi);
    const Mat j_mid = lp.at(t_mid);

    DichotomyEstimate est;
    if (opt.proj_guess) {
        est.proj_u = *opt.proj_guess;
        est.proj_s = Mat::Identity(lp.dim, lp.dim) - est.proj_u;
        est.rank_u = static_cast<int>(std::llround(est.proj_u.trace()));
    } else {
        const SpectralSplit split = spectral_split(j_mid);
        if (split.gap < opt.gap_tol)
            throw Error(ErrorCode::NoGap,
                        "spectral gap below tolerance; not hyperbolic");
        est.proj_u = split.proj_u;
        est.proj_s = split.proj_s;
        est.rank_u = split.rank_u;
    }

    const DecayFit fwd = fit_decay(lp, est.proj_s, t_mid, t_hi, opt.n_samples);
    const DecayFit bwd = fit_decay(lp, est.proj_u, t_mid, t_lo, opt.n_samples);
    if (!fwd.usable && !bwd.usable)
        throw Error(ErrorCode::FitFailure, "no decaying component to fit");

    double alpha = 1e300, m = 1.0, r2 = 1.0;
    if (fwd.usable) {
        alpha = std::min(alpha, -fwd.fit.slope);
        m = std::max(m, std::exp(fwd.fit.intercept));
        r2 = std::min(r2, fwd.fit.r2);
        est.gamma = -fwd.fit.slope;
    }
    if (bwd.usable) {
        alpha = std::min(alpha, -bwd.fit.slope);
        m = std::max(m, std::exp(bwd.fit.intercept));
        r2 = std::min(r2, bwd.fit.r2);
        if (!fwd.usable) est.gamma = -bwd.fit.slope;
    }
    est.alpha = alpha;
    est.m = m;
    est.fit_r2 = r2;
    est.validate();
    return est;
}

Vec HyperbolicSolutionTrace::state_vec(std::size_t i) const {
    Vec v(dim);
    for (int c = 0; c < dim; ++c) v(c) = states[i * dim + c];
    return v;
}

Vec HyperbolicSolutionTrace::at_time(double t) const {
    const double x = (t + t_h) / dt;
    const double last = static_cast<double>(steps());
    if (x < -1e-9 || x > last + 1e-9)
        throw Error(ErrorCode::WindowExhausted, "time outside trace window");
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

void HyperbolicSolutionTrace::save_csv(const std::string& path) const {
    std::vector<std::string> cols = {"t"};
    for (int c = 1; c <= dim; ++c) cols.push_back("xi_" + std::to_string(c));
    CsvWriter w(cols);
    for (std::size_t i = 0; i <= steps(); ++i) {
        std::vector<double> row = {time(i)};
        for (int c = 0; c < dim; ++c) row.push_back(states[i * dim + c]);
        w.row(row);
    }
    w.save(path);
}

namespace {

HyperbolicSolutionTrace continue_once(const VectorFieldFamily& f, double eta,
                                      const PathPoint& pp,
                                      const Equilibrium& eq, double t_h,
                                      const ContinueOptions& opt) {
    const int d = f.dim;
    const std::size_t n =
        2 * static_cast<std::size_t>(std::llround(t_h / opt.dt));
    const double dt = opt.dt;

    const Mat a = f.eval_jac(0.0, 0.0, kNoPath, eq.y_star);
    const SpectralSplit split = spectral_split(a);
    const Vec rhs0_star = f.eval(0.0, 0.0, kNoPath, eq.y_star);

    const Mat e_fwd = expm(Mat(a * dt));
    const Mat e_bwd = expm(Mat(-a * dt));

    HyperbolicSolutionTrace tr;
    tr.t_h = t_h;
    tr.dt = dt;
    tr.eta = eta;
    tr.dim = d;
    tr.pp = pp;
    tr.y_star = eq.y_star;
    tr.a = a;
    tr.proj_u = split.proj_u;
    tr.proj_s = split.proj_s;
    tr.states.assign((n + 1) * d, 0.0);

    std::vector<Vec> xi(n + 1, eq.y_star);
    std::vector<Vec> g(n + 1, Vec::Zero(d));
    std::vector<Vec> xi_new(n + 1, Vec::Zero(d));

    double prev_update = 1e300;
    int worse_streak = 0;
    double update = 0.0;
    std::vector<double> ratios;

    int it = 0;
    for (; it < opt.max_iter; ++it) {
        for (std::size_t i = 0; i <= n; ++i) {
            const double t = -t_h + static_cast<double>(i) * dt;
            g[i] = f.eval(eta, t, pp, xi[i]) - a * (xi[i] - eq.y_star) -
                   rhs0_star;
        }
        // composite-trapezoid sweeps of the two variation-of-constants
        // integrals, stable part bottom-up, unstable part top-down
        Vec s = Vec::Zero(d);
        xi_new[0] = eq.y_star + s;
        std::vector<Vec> s_acc(n + 1, Vec::Zero(d));
        for (std::size_t i = 1; i <= n; ++i) {
            s = e_fwd * (s + (dt / 2) * (split.proj_s * g[i - 1])) +
                (dt / 2) * (split.proj_s * g[i]);
            s_acc[i] = s;
        }
        Vec u = Vec::Zero(d);
        for (std::size_t i = n; i-- > 0;) {
            u = e_bwd * (u + (dt / 2) * (split.proj_u * g[i + 1])) +
                (dt / 2) * (split.proj_u * g[i]);
            xi_new[i] = eq.y_star + s_acc[i] - u;
        }
        xi_new[n] = eq.y_star + s_acc[n];

        update = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            update = std::max(update, (xi_new[i] - xi[i]).norm());
        std::swap(xi, xi_new);

        if (prev_update < 1e290 && prev_update > 0.0)
            ratios.push_back(update / prev_update);
        if (update >= prev_update && update > opt.tol) {
            if (++worse_streak >= 5)
                throw Error(ErrorCode::NoContraction,
                            "fixed-point updates stopped contracting");
        } else {
            worse_streak = 0;
        }
        prev_update = update;
        if (update < opt.tol) {
            ++it;
            break;
        }
    }
    if (update >= opt.tol)
        throw Error(ErrorCode::NoContraction,
                    "fixed point did not reach tolerance");

    tr.residual = update;
    tr.iterations = it;
    if (!ratios.empty())
        tr.contraction = *std::max_element(ratios.begin(), ratios.end());
    tr.sup_dist = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        tr.sup_dist = std::max(tr.sup_dist, (xi[i] - eq.y_star).norm());
        for (int c = 0; c < d; ++c) tr.states[i * d + c] = xi[i](c);
    }
    return tr;
}

}  // namespace

HyperbolicSolutionTrace continue_hyperbolic_solution(
    const VectorFieldFamily& f, double eta, const PathPoint& pp,
    const Equilibrium& eq, double t_h, const ContinueOptions& opt) {
    if (!eq.hyperbolic())
        throw Error(ErrorCode::NoGap, "equilibrium is not certified hyperbolic");
    HyperbolicSolutionTrace tr = continue_once(f, eta, pp, eq, t_h, opt);
    if (opt.verify_window) {
        ContinueOptions wide = opt;
        wide.verify_window = false;
        const HyperbolicSolutionTrace ref =
            continue_once(f, eta, pp, eq, t_h + 5.0, wide);
        const double shiftv = (ref.at_time(0.0) - tr.at_time(0.0)).norm();
        if (shiftv > 10.0 * opt.tol)
            throw Error(ErrorCode::WindowTooShort,
                        "midpoint moved when the window was widened");
    }
    return tr;
}

LinearProcess linearize_along(const VectorFieldFamily& f, double eta,
                              const HyperbolicSolutionTrace& trace) {
    LinearProcess lp;
    lp.dim = f.dim;
    lp.dt = trace.dt / 2.0;
    lp.t0 = -trace.t_h;
    const std::size_t n = 2 * trace.steps();
    lp.jacs.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = lp.t0 + static_cast<double>(i) * lp.dt;
        lp.jacs.push_back(f.eval_jac(eta, t, trace.pp, trace.at_time(t)));
    }
    return lp;
}

}  // namespace nrds
