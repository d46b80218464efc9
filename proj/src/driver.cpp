#include "nrds/driver.hpp"

#include <algorithm>
#include <cmath>

#include "nrds/csv.hpp"
#include "nrds/errors.hpp"
#include "nrds/rng.hpp"
#include "nrds/simd/kernels.hpp"

namespace nrds {

namespace {

std::int64_t grid_round(double x) {
    return static_cast<std::int64_t>(std::llround(x));
}

bool near_integer(double x) {
    return std::abs(x - std::round(x)) <= 1e-9 * (1.0 + std::abs(x));
}

struct OuWeights {
    double dt = 0.0;
    double t_trunc = 0.0;
    std::vector<double> w;
    double total = 0.0;
};

// trapezoid weights w_j = c_j * dt * e^{s_j}, s_j = -T + j dt, j = 0..m
std::shared_ptr<const OuWeights> ou_weights(double dt, double t_trunc) {
    static std::mutex mutex;
    static std::vector<std::shared_ptr<const OuWeights>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    for (const auto& entry : cache)
        if (entry->dt == dt && entry->t_trunc == t_trunc) return entry;
    auto entry = std::make_shared<OuWeights>();
    entry->dt = dt;
    entry->t_trunc = t_trunc;
    const std::size_t m = static_cast<std::size_t>(grid_round(t_trunc / dt));
    entry->w.resize(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        const double s = -t_trunc + static_cast<double>(j) * dt;
        const double c = (j == 0 || j == m) ? 0.5 : 1.0;
        entry->w[j] = c * dt * std::exp(s);
    }
    for (double v : entry->w) entry->total += v;
    cache.push_back(entry);
    return entry;
}

// shared single-point evaluation so table rows and direct calls agree bitwise
double ou_eval_at_index(const std::vector<double>& omega, std::size_t i,
                        double dt, double t_trunc) {
    const auto weights = ou_weights(dt, t_trunc);
    const std::vector<double>& w = weights->w;
    const std::size_t m = w.size() - 1;
    const double dotted =
        simd::ops().dot(w.size(), w.data(), omega.data() + (i - m));
    return -(dotted - omega[i] * weights->total);
}

}  // namespace

WienerPath::WienerPath(std::int64_t k_min, std::int64_t k_max, double dt,
                       std::vector<double> values, std::uint64_t seed)
    : k_min_(k_min), k_max_(k_max), dt_(dt), values_(std::move(values)),
      seed_(seed) {
    base_ = std::make_shared<const std::vector<double>>(values_);
    base_anchor_ = static_cast<std::size_t>(-k_min_);
}

std::shared_ptr<const WienerPath> WienerPath::sample(std::uint64_t seed,
                                                     double t_min,
                                                     double t_max, double dt) {
    if (!(dt > 0.0))
        throw Error(ErrorCode::InvalidInterval, "dt must be positive");
    if (!(t_min < 0.0 && 0.0 < t_max))
        throw Error(ErrorCode::InvalidInterval,
                    "interval must contain 0 in its interior");
    if (!near_integer(t_min / dt) || !near_integer(t_max / dt))
        throw Error(ErrorCode::InvalidInterval,
                    "t_min and t_max must be grid multiples of dt");
    const std::int64_t k_min = grid_round(t_min / dt);
    const std::int64_t k_max = grid_round(t_max / dt);
    const std::size_t n = static_cast<std::size_t>(k_max - k_min) + 1;
    if (n > kMaxSamples)
        throw Error(ErrorCode::GridTooLarge, "path grid exceeds sample cap");

    // forward increments first, then backward, one stream per seed
    GaussianRng rng(seed);
    const double sd = std::sqrt(dt);
    std::vector<double> v(n, 0.0);
    const std::size_t i0 = static_cast<std::size_t>(-k_min);
    for (std::size_t i = i0 + 1; i < n; ++i)
        v[i] = v[i - 1] + sd * rng.normal();
    for (std::size_t i = i0; i > 0; --i)
        v[i - 1] = v[i] - sd * rng.normal();
    return std::shared_ptr<const WienerPath>(
        new WienerPath(k_min, k_max, dt, std::move(v), seed));
}

std::shared_ptr<const WienerPath> WienerPath::from_values(
    double t_min, double dt, std::vector<double> values, std::uint64_t seed) {
    if (!(dt > 0.0) || values.empty())
        throw Error(ErrorCode::InvalidInterval, "bad explicit path");
    if (!near_integer(t_min / dt))
        throw Error(ErrorCode::InvalidInterval, "t_min must be a dt multiple");
    const std::int64_t k_min = grid_round(t_min / dt);
    const std::int64_t k_max = k_min + static_cast<std::int64_t>(values.size()) - 1;
    if (k_min > 0 || k_max < 0)
        throw Error(ErrorCode::InvalidInterval, "grid must contain t = 0");
    const std::size_t i0 = static_cast<std::size_t>(-k_min);
    if (std::abs(values[i0]) > 1e-12)
        throw Error(ErrorCode::InvalidInterval, "omega(0) must be 0");
    values[i0] = 0.0;
    return std::shared_ptr<const WienerPath>(
        new WienerPath(k_min, k_max, dt, std::move(values), seed));
}

bool WienerPath::on_grid(double t) const { return near_integer(t / dt_); }

std::size_t WienerPath::index(double t) const {
    if (!on_grid(t))
        throw Error(ErrorCode::OffGridShift, "time not on the path grid");
    const std::int64_t k = grid_round(t / dt_);
    if (k < k_min_ || k > k_max_)
        throw Error(ErrorCode::WindowExhausted, "time outside the path grid");
    return static_cast<std::size_t>(k - k_min_);
}

double WienerPath::value_at(double t) const {
    const double x = (t - t_min()) / dt_;
    if (x < -1e-9 || x > static_cast<double>(values_.size() - 1) + 1e-9)
        throw Error(ErrorCode::WindowExhausted, "time outside the path grid");
    const double xc = std::clamp(x, 0.0,
                                 static_cast<double>(values_.size() - 1));
    const std::size_t i =
        std::min(static_cast<std::size_t>(xc), values_.size() - 2);
    const double frac = xc - static_cast<double>(i);
    return values_[i] * (1.0 - frac) + values_[i + 1] * frac;
}

const OuTable& WienerPath::ou_table(double t_trunc) const {
    std::lock_guard<std::mutex> lock(ou_mutex_);
    for (const auto& [tt, table] : ou_tables_)
        if (tt == t_trunc) return *table;
    ou_tables_.emplace_back(t_trunc,
                            std::make_shared<const OuTable>(*this, t_trunc));
    return *ou_tables_.back().second;
}

void WienerPath::save_csv(const std::string& path) const {
    CsvWriter w({"t", "omega"});
    for (std::size_t i = 0; i < values_.size(); ++i)
        w.row({t_min() + static_cast<double>(i) * dt_, values_[i]});
    w.save(path);
}

std::shared_ptr<const WienerPath> WienerPath::load_csv(
    const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.columns.size() != 2 || table.rows.size() < 3)
        throw Error(ErrorCode::IoError, "path csv must have columns t,omega");
    const double t0 = table.rows[0][0];
    const double dt = table.rows[1][0] - t0;
    std::vector<double> values;
    values.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const double expected = t0 + static_cast<double>(i) * dt;
        if (std::abs(table.rows[i][0] - expected) > 1e-9 * (1.0 + std::abs(expected)))
            throw Error(ErrorCode::IoError, "path csv grid is not uniform");
        values.push_back(table.rows[i][1]);
    }
    return WienerPath::from_values(t0, dt, std::move(values));
}

OuTable::OuTable(const WienerPath& path, double t_trunc)
    : dt_(path.dt()), t_trunc_(t_trunc) {
    const std::size_t m =
        static_cast<std::size_t>(grid_round(t_trunc / path.dt()));
    if (m + 1 >= path.size())
        throw Error(ErrorCode::InsufficientLeftWindow,
                    "path shorter than the truncation window");
    t_lo_ = path.t_min() + t_trunc;
    t_hi_ = path.t_max();
    const std::size_t n = path.size() - m;
    z_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        z_[i] = ou_eval_at_index(path.values(), i + m, dt_, t_trunc_);
}

double OuTable::eval(double t) const {
    const double x = (t - t_lo_) / dt_;
    if (x < -1e-9 || x > static_cast<double>(z_.size() - 1) + 1e-9)
        throw Error(ErrorCode::InsufficientLeftWindow,
                    "time outside the z* table range");
    const double xc = std::clamp(x, 0.0, static_cast<double>(z_.size() - 1));
    const std::size_t i = std::min(static_cast<std::size_t>(xc), z_.size() - 2);
    const double frac = xc - static_cast<double>(i);
    return z_[i] * (1.0 - frac) + z_[i + 1] * frac;
}

PathPtr sample_wiener_path(std::uint64_t seed, double t_min, double t_max,
                           double dt) {
    return WienerPath::sample(seed, t_min, t_max, dt);
}

PathPtr shift(const WienerPath& p, double t) {
    if (!p.on_grid(t))
        throw Error(ErrorCode::OffGridShift, "shift must be a grid multiple");
    const std::size_t it = p.index(t);
    const double new_t_min = p.t_min() - t;
    const double new_t_max = p.t_max() - t;
    if (!(new_t_min < 0.0 && 0.0 < new_t_max))
        throw Error(ErrorCode::WindowExhausted,
                    "shifted window no longer contains 0");
    // re-anchor against the shared base samples: theta_t omega(s) =
    // omega(t+s) - omega(t); composed shifts stay sample-exact
    const std::vector<double>& base = *p.base_;
    const double anchor = base[it];
    std::vector<double> v(p.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = base[i] - anchor;
    const std::int64_t k_min = grid_round(new_t_min / p.dt());
    const std::int64_t k_max = grid_round(new_t_max / p.dt());
    auto out = std::shared_ptr<WienerPath>(
        new WienerPath(k_min, k_max, p.dt(), std::move(v), p.seed()));
    out->base_ = p.base_;
    out->base_anchor_ = it;
    return out;
}

double ou_stationary(const WienerPath& p, double t, double t_trunc) {
    if (!p.on_grid(t))
        throw Error(ErrorCode::OffGridShift,
                    "ou_stationary expects a grid time");
    if (t - t_trunc < p.t_min() - 1e-9)
        throw Error(ErrorCode::InsufficientLeftWindow,
                    "need t - t_trunc >= t_min");
    const std::size_t i = p.index(t);
    return ou_eval_at_index(p.values(), i, p.dt(), t_trunc);
}

std::vector<std::pair<double, double>> sublinear_report(
    const WienerPath& p, const std::vector<double>& t_grid, double t_trunc) {
    std::vector<std::pair<double, double>> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        const double z = ou_stationary(p, t, t_trunc);
        out.emplace_back(t, std::abs(z) / std::max(1.0, std::abs(t)));
    }
    return out;
}

}  // namespace nrds
