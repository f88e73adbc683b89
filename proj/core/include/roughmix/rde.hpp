#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "roughmix/gmfbm.hpp"
#include "roughmix/lift.hpp"
#include "roughmix/tensor.hpp"

namespace roughmix {

/// A vector field f: R^e -> L(R^d, R^e), stored as callbacks.
///
/// `eval(y)` returns the e x d matrix whose column j is f_j(y).
/// `jacobian_apply(y, m)` returns sum_{i,j} (Df_j(y) f_i(y)) m_ij, the
/// second-order term of the Davie step for a level-2 increment m.
struct VectorField {
    std::string name;
    std::size_t state_dim = 1;
    std::size_t driver_dim = 1;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> eval;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::MatrixXd&)> jacobian_apply;
    /// Known sup bounds of |f|, |Df|, |D^2 f| (absent when unbounded or unknown).
    std::optional<double> bound_f;
    std::optional<double> bound_df;
    std::optional<double> bound_d2f;
};

/// f(y) = diag(y): each coordinate driven multiplicatively by its own noise.
VectorField linear_field(std::size_t dim);
/// Scalar state, f(y) = (y, ..., y): dY = Y (dM^1 + ... + dM^d).
VectorField bilinear_field(std::size_t driver_dim);
/// f(y) = diag(tanh(y)).
VectorField bounded_sigmoid_field(std::size_t dim);
/// f(y) = c for a fixed e x d matrix.
VectorField constant_field(const Eigen::MatrixXd& c);
/// f_j(y) = A_j y.
VectorField general_linear_field(std::vector<Eigen::MatrixXd> generators);

/// Built-in catalog used by the command-line tool: "linear", "bilinear",
/// "bounded-sigmoid". Throws ConfigError for other names.
VectorField make_field(const std::string& name, std::size_t driver_dim);
std::vector<std::string> field_names();

/// Largest relative mismatch between jacobian_apply and a central finite
/// difference of eval, over `points` random states of scale `radius`.
double jacobian_consistency(const VectorField& field, std::size_t points, std::uint64_t seed, double radius = 1.0);

/// y + f(y) inc1 + sum_ij Df_j(y) f_i(y) inc2_ij. Throws NumericalError
/// (index 0) on a non-finite result.
Eigen::VectorXd davie_step(const Eigen::VectorXd& y, const Eigen::VectorXd& inc1, const Eigen::MatrixXd& inc2,
                           const VectorField& field);

struct RdeSolution {
    std::vector<double> times;
    Eigen::MatrixXd states;  // rows = times, cols = state dimension
    std::string scheme;
    int order = 2;
    std::string driver;
};

/// Iterates davie_step over the intervals of `rp`. A blow-up raises
/// NumericalError carrying the interval index.
RdeSolution solve(const Level2RoughPath& rp, const VectorField& field, const Eigen::VectorXd& y0);

/// Linear equation dY = sum_j A_j Y dM^j propagated per interval by the
/// truncated tensor exponential of inc1 + Anti(inc2), mapped through
/// words w to the products A_{w_n} ... A_{w_1}.
RdeSolution linear_exact(const Level2RoughPath& rp, std::span<const Eigen::MatrixXd> generators,
                         const Eigen::VectorXd& y0, int level = kDefaultLevel);

struct RateRow {
    double mesh = 0.0;
    double error = 0.0;
    std::uint64_t seed = 0;
};

struct RateReport {
    std::vector<int> levels;            // log2 of interval counts
    std::vector<RateRow> rows;          // seed-major, then level
    std::vector<double> seed_slopes;    // log-log slope of error against mesh, per seed
    double median_slope = 0.0;
    double predicted_exponent = 0.0;    // 3 min H - 1; NaN when the driver carries no spec
    int reference_level = 0;
};

struct RateOptions {
    /// The reference solution uses 2^reference_extra times the finest mesh.
    int reference_extra = 2;
    SampleMethod method = SampleMethod::circulant;
    unsigned threads = 0;
};

/// Error of the Davie scheme on dyadic subsamplings of one driver against
/// the solution on the driver's full resolution. `fine` must live on a
/// dyadic grid of level >= max(levels) + 1.
RateReport convergence_rate(const SamplePath& fine, const VectorField& field, const Eigen::VectorXd& y0,
                            std::span<const int> levels);

/// Monte Carlo version: one GMFBM driver per seed, sampled at
/// max(levels) + reference_extra and subsampled to each level.
RateReport convergence_rate(const GmfbmSpec& spec, const VectorField& field, const Eigen::VectorXd& y0,
                            std::span<const int> levels, std::span<const std::uint64_t> seeds,
                            const RateOptions& options = {});

struct HolderEstimate {
    double exponent = 0.0;
    double standard_error = 0.0;
    double lower = 0.0;  // exponent -/+ 1.96 standard errors
    double upper = 0.0;
    std::vector<std::size_t> lags;
    std::vector<double> max_increment;
};

/// Slope of log max |X_{t+l} - X_t| against log(l dt) over lags
/// 1, 2, ..., 2^J with J = max(2, floor(log2 n) - 8) for n intervals.
/// Needs a uniform grid with at least 64 points; a constant path throws
/// DomainError.
HolderEstimate holder_estimate(const SamplePath& path);
HolderEstimate holder_estimate(const RdeSolution& solution);

struct Perturbation {
    double hurst = 0.0;  // added to every H_k
    double coeff = 0.0;  // added to every a_k
    double y0 = 0.0;     // added to every coordinate of y0
};

struct StabilityRow {
    Perturbation perturbation;
    double size = 0.0;  // sum |dH_k| + sum |da_k| + sum |dy0_i|
    std::vector<double> differences;  // sup-norm solution difference per seed
    double median = 0.0;
};

struct StabilityReport {
    std::vector<StabilityRow> rows;  // ascending size
    bool monotone = false;           // medians non-decreasing in size
};

struct StabilityOptions {
    int level = 10;
    SampleMethod method = SampleMethod::circulant;
    unsigned threads = 0;
};

/// Sup-norm distance between solutions driven by the base and perturbed
/// specs, sharing random numbers through a common seed.
StabilityReport stability_probe(const GmfbmSpec& spec, std::span<const Perturbation> perturbations,
                                const VectorField& field, const Eigen::VectorXd& y0,
                                std::span<const std::uint64_t> seeds, const StabilityOptions& options = {});

}  // namespace roughmix
