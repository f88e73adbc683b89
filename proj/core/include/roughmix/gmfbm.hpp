#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace roughmix {

/// Parameters of a generalized mixed fractional Brownian motion
/// M_t = sum_k a_k B^{H_k}_t with independent fBm components, replicated
/// independently in each of `dim` coordinates.
struct GmfbmSpec {
    std::vector<double> hursts;
    std::vector<double> coeffs;
    int dim = 1;
    double horizon = 1.0;

    /// Throws DomainError unless the invariants hold: equal lengths, at least
    /// one component, every H_k in (0,1), coefficients finite and not all
    /// zero, dim >= 1, horizon > 0.
    void validate() const;

    std::size_t components() const noexcept { return hursts.size(); }
    double min_hurst() const;

    friend bool operator==(const GmfbmSpec&, const GmfbmSpec&) = default;
};

/// Strictly increasing sampling times starting at 0.
class TimeGrid {
public:
    TimeGrid() : points_{0.0} {}
    explicit TimeGrid(std::vector<double> points);

    static TimeGrid uniform(double horizon, std::size_t intervals);
    /// Points k 2^{-level} T for k = 0..2^level.
    static TimeGrid dyadic(double horizon, int level);

    std::size_t size() const noexcept { return points_.size(); }
    std::size_t intervals() const noexcept { return points_.size() - 1; }
    double operator[](std::size_t i) const { return points_[i]; }
    double back() const noexcept { return points_.back(); }
    const std::vector<double>& points() const noexcept { return points_; }

    /// True when all steps agree to within `rel_tol` of the mean step.
    bool is_uniform(double rel_tol = 1e-9) const;
    /// Mean step; the step of a uniform grid.
    double step() const;

    /// Index of the grid point equal to `t` (within `tol`), if any.
    std::optional<std::size_t> find(double t, double tol) const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::vector<double> points_;
};

enum class SampleMethod { cholesky, circulant };

std::string to_string(SampleMethod method);
SampleMethod parse_sample_method(const std::string& name);

/// A d-dimensional path on a time grid; row i holds the value at grid[i].
struct SamplePath {
    SamplePath() = default;
    SamplePath(TimeGrid grid, Eigen::MatrixXd values);

    TimeGrid grid;
    Eigen::MatrixXd values;
    std::optional<GmfbmSpec> spec;
    std::uint64_t seed = 0;
    /// Unscaled fBm components B^{H_k} (same shape as `values`) when the
    /// path was generated; empty for observed data.
    std::vector<Eigen::MatrixXd> components;
    SampleMethod method = SampleMethod::cholesky;
    std::vector<std::string> warnings;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(values.cols()); }
    std::size_t size() const noexcept { return grid.size(); }
};

/// Covariance of a standard fBm: (s^{2H} + t^{2H} - |t-s|^{2H}) / 2.
double fbm_covariance(double hurst, double s, double t);

/// E[M_s M_t] for one coordinate of the GMFBM.
double covariance(const GmfbmSpec& spec, double s, double t);

/// E[(M_t - M_s)^2] = sum_k a_k^2 |t-s|^{2H_k}, for 0 <= s <= t.
double increment_variance(const GmfbmSpec& spec, double s, double t);

/// E[(M_v - M_u)(M_t - M_s)] for 0 <= u <= v <= s <= t.
double increment_cross_covariance(const GmfbmSpec& spec, double u, double v, double s, double t);

/// Coefficients a_k h^{H_k}: M_{h t} has the law of the rescaled process at t.
GmfbmSpec self_similarity_rescale(const GmfbmSpec& spec, double h);

/// Exact Gaussian sampler for a fixed (spec, grid). Factorizations are
/// computed once in the constructor, so drawing many paths is cheap.
///
/// Component k of coordinate c consumes Philox stream (seed, k, c); a draw
/// depends only on (spec, grid, method, seed). The circulant method needs a
/// uniform grid; if its embedding is not nonnegative definite the sampler
/// falls back to Cholesky and records a warning.
class GmfbmSampler {
public:
    GmfbmSampler(GmfbmSpec spec, TimeGrid grid, SampleMethod method = SampleMethod::cholesky);

    SamplePath draw(std::uint64_t seed) const;

    /// Values of the unscaled fBm component `k` in coordinate `coordinate`.
    Eigen::VectorXd draw_component(std::size_t k, std::uint32_t coordinate, std::uint64_t seed) const;

    const GmfbmSpec& spec() const noexcept { return spec_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    SampleMethod method() const noexcept { return method_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    struct Factor {
        double hurst = 0.5;
        bool circulant = false;
        Eigen::MatrixXd lower;       // Cholesky factor over grid points 1..n-1
        Eigen::VectorXd sqrt_eigen;  // sqrt(lambda / m) of the circulant embedding
    };

    Factor make_cholesky(double hurst) const;
    std::optional<Factor> make_circulant(double hurst) const;

    GmfbmSpec spec_;
    TimeGrid grid_;
    SampleMethod method_;
    std::vector<Factor> factors_;           // distinct Hurst values
    std::vector<std::size_t> factor_index_;  // component -> factor
    std::vector<std::string> warnings_;
};

/// One-shot convenience around GmfbmSampler.
SamplePath sample(const GmfbmSpec& spec, const TimeGrid& grid, std::uint64_t seed,
                  SampleMethod method = SampleMethod::cholesky);

}  // namespace roughmix
