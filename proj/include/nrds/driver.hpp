#pragma once
// Two-sided Wiener paths on a uniform grid, the shift flow, and the
// stationary Ornstein-Uhlenbeck evaluation z*(theta_t omega) used by the
// conjugated vector fields. Paths are immutable and safe to share.

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace nrds {

class OuTable;

class WienerPath {
  public:
    static constexpr std::size_t kMaxSamples = 50'000'000;

    // Gaussian increments of variance dt, anchored to omega(0) = 0.
    static std::shared_ptr<const WienerPath> sample(std::uint64_t seed,
                                                    double t_min, double t_max,
                                                    double dt);

    // Deterministic path from explicit samples (oracles, CSV import).
    static std::shared_ptr<const WienerPath> from_values(
        double t_min, double dt, std::vector<double> values,
        std::uint64_t seed = 0);

    double t_min() const { return k_min_ * dt_; }
    double t_max() const { return k_max_ * dt_; }
    double dt() const { return dt_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }

    bool on_grid(double t) const;
    std::size_t index(double t) const;     // t must lie on the grid
    double value_at(double t) const;       // linear interpolation off-grid

    // z*(theta_t omega) table over the valid range, built on first use.
    const OuTable& ou_table(double t_trunc = 30.0) const;

    void save_csv(const std::string& path) const;
    static std::shared_ptr<const WienerPath> load_csv(const std::string& path);

  private:
    friend std::shared_ptr<const WienerPath> shift(const WienerPath& p,
                                                   double t);

    WienerPath(std::int64_t k_min, std::int64_t k_max, double dt,
               std::vector<double> values, std::uint64_t seed);

    std::int64_t k_min_;
    std::int64_t k_max_;
    double dt_;
    std::vector<double> values_;
    std::uint64_t seed_;

    // shift provenance: values_[i] = (*base_)[i] - (*base_)[base_anchor_],
    // so composed shifts re-anchor against the same base samples and the
    // flow property holds bit-exactly
    std::shared_ptr<const std::vector<double>> base_;
    std::size_t base_anchor_ = 0;

    mutable std::mutex ou_mutex_;
    mutable std::vector<std::pair<double, std::shared_ptr<const OuTable>>>
        ou_tables_;
};

using PathPtr = std::shared_ptr<const WienerPath>;

// Sampled z*(theta_t omega) at every admissible grid time, trapezoid rule
// over [-t_trunc, 0] on the path grid.
class OuTable {
  public:
    OuTable(const WienerPath& path, double t_trunc);

    double t_lo() const { return t_lo_; }
    double t_hi() const { return t_hi_; }
    double t_trunc() const { return t_trunc_; }

    double at_index(std::size_t i) const { return z_[i]; }
    double eval(double t) const;  // linear interpolation between grid values

  private:
    double t_lo_, t_hi_, dt_, t_trunc_;
    std::vector<double> z_;
};

// (tau, omega): a point on the driving flow's base. tau is absolute path
// time; the driving flow acts by Theta_t (tau, omega) = (tau + t, omega).
struct PathPoint {
    double tau = 0.0;
    PathPtr path;

    PathPoint() = default;
    PathPoint(double tau_, PathPtr path_) : tau(tau_), path(std::move(path_)) {}
    PathPoint shifted(double t) const { return PathPoint(tau + t, path); }
};

PathPtr sample_wiener_path(std::uint64_t seed, double t_min, double t_max,
                           double dt);

// theta_t omega = omega(t + .) - omega(t) on the shrunken grid.
PathPtr shift(const WienerPath& p, double t);

// -int_{-T}^{0} e^s (theta_t omega)(s) ds, trapezoid on the path grid.
double ou_stationary(const WienerPath& p, double t, double t_trunc = 30.0);

// pairs (t, |z*(theta_t omega)| / max(1, |t|))
std::vector<std::pair<double, double>> sublinear_report(
    const WienerPath& p, const std::vector<double>& t_grid,
    double t_trunc = 30.0);

}  // namespace nrds
