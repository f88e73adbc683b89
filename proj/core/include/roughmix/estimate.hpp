#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "roughmix/gmfbm.hpp"

namespace roughmix {

/// Mean squared increment per lag, averaged over offsets and coordinates.
struct StructureTable {
    std::vector<std::size_t> lags;
    std::vector<double> dt;      // lag * grid step
    std::vector<double> values;  // mean of |X_{t + lag dt} - X_t|^2
};

/// Throws DomainError on a non-uniform grid or a lag outside [1, n].
StructureTable structure_function(const SamplePath& path, std::span<const std::size_t> lags);

/// Dyadic lags 1, 2, 4, ... up to max(2, n / 64), capped below n.
std::vector<std::size_t> default_lags(std::size_t intervals);

struct SingleFit {
    double hurst = 0.0;
    double coeff_sq = 0.0;
    double hurst_se = 0.0;
    double coeff_sq_se = 0.0;
};

/// Log-log regression v(dt) = a^2 dt^{2H}. Throws EstimationError when a
/// structure value is not positive, ConfigError for fewer than two lags.
SingleFit fit_single(const StructureTable& table);
SingleFit fit_single(const SamplePath& path, std::span<const std::size_t> lags);

/// Candidate Hurst values 0.02, 0.03, ..., 0.98.
std::vector<double> default_hurst_grid();

/// Lawson-Hanson nonnegative least squares: argmin |Ax - b| subject to x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

struct MixtureOptions {
    std::vector<double> hurst_grid;    // empty: default_hurst_grid()
    /// Relative residuals at lag l are weighted by l^{-weight_exponent}.
    double weight_exponent = 0.5;
    /// Components closer than this in H are merged.
    double merge_tolerance = 0.02;
    /// Smallest coordinate-descent step on H.
    double refine_tolerance = 1e-10;
    /// Moving-block bootstrap replicates (path input only); 0 disables.
    std::size_t bootstrap = 0;
    std::size_t block_length = 0;  // 0: ceil(n^{1/3})
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct FitReport {
    std::vector<double> hursts;     // ascending
    std::vector<double> coeffs_sq;
    double residual = 0.0;          // weighted relative residual norm
    std::vector<std::size_t> lags;
    std::vector<double> dt;
    std::vector<double> hurst_se;       // from the regression Jacobian
    std::vector<double> coeffs_sq_se;
    std::vector<double> bootstrap_hurst_se;
    std::vector<double> bootstrap_coeffs_sq_se;
    std::size_t requested_components = 0;
    bool identifiable = true;
    std::vector<std::string> notes;
};

/// Fits v(dt) = sum_k c_k dt^{2 H_k}, c_k >= 0: nonnegative least squares
/// over the H grid, the heaviest n_components clusters of active grid
/// points as starting values, then coordinate descent on the H_k with the
/// weights re-solved at every step. Coincident components are merged and
/// the report is flagged non-identifiable. Throws ConfigError when there
/// are fewer than 2 n_components lags.
FitReport fit_mixture(const StructureTable& table, std::size_t n_components, const MixtureOptions& options = {});
FitReport fit_mixture(const SamplePath& path, std::span<const std::size_t> lags, std::size_t n_components,
                      const MixtureOptions& options = {});

}  // namespace roughmix
