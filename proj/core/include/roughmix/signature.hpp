#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "roughmix/gmfbm.hpp"
#include "roughmix/tensor.hpp"

namespace roughmix {

/// Truncated signature of the piecewise-linear interpolant of `path`:
/// the product of exp(delta_i) over its segments. Throws ConfigError when
/// the tensor would exceed kMaxTensorEntries.
TruncatedTensor signature(const SamplePath& path, int level = kDefaultLevel);

/// Log-signature, log(signature(path, level)).
TruncatedTensor log_signature(const SamplePath& path, int level = kDefaultLevel);

/// The path traversed backwards: time t maps to T - t.
SamplePath reverse(const SamplePath& path);

/// `a` followed by `b`, with `b` translated in time and space so that it
/// starts where `a` ends.
SamplePath concat(const SamplePath& a, const SamplePath& b);

/// Residuals of the first- and second-level formulas on [0, T].
///
/// Each field is a max-absolute-entry difference between the level-2
/// signature S2 and a candidate expression built from the level-2 lift L2:
///   adopted:      S2 - L2
///   area_reading: S2 - (Anti(L2) + S1 (x) S1 / 2)
///   literal:      S2 - (L2 + S1 (x) S1 / 2)
/// The shuffle residual is max |S_i S_j - S_ij - S_ji|.
struct LevelFormulaReport {
    double level1_residual = 0.0;
    double adopted_residual = 0.0;
    double area_reading_residual = 0.0;
    double literal_residual = 0.0;
    double shuffle_residual = 0.0;
};

LevelFormulaReport level_formulas_check(const SamplePath& path);

struct MonteCarloOptions {
    SampleMethod method = SampleMethod::cholesky;
    unsigned threads = 0;
};

struct SignatureMoments {
    TruncatedTensor mean;
    TruncatedTensor standard_error;
    std::size_t paths = 0;
};

/// Monte Carlo mean of signatures of GMFBM paths on `grid`; path i uses
/// seed derive_seed(seed, i).
SignatureMoments expected_signature_mc(const GmfbmSpec& spec, const TimeGrid& grid, int level,
                                       std::size_t n_paths, std::uint64_t seed,
                                       const MonteCarloOptions& options = {});

struct CrossTermOptions {
    /// Intervals of the common uniform grid on [0, horizon]; every scale
    /// must land on one of its nodes.
    std::size_t intervals = 1024;
    double horizon = 1.0;
    SampleMethod method = SampleMethod::circulant;
    unsigned threads = 0;
};

struct CrossTermReport {
    std::vector<double> scales;
    std::vector<double> second_moment;   // E|int_0^t B^i dB^j|^2 per scale
    std::vector<double> standard_error;
    double slope = 0.0;                  // log-log slope of second_moment against scale
    double slope_se = 0.0;
    double expected_slope = 0.0;         // 2 (H_i + H_j)
};

/// Second moment of the cross iterated integral of two independent fBms,
/// evaluated on nested intervals [0, t] of one sampled path per replicate.
/// Throws DomainError when H_i + H_j <= 1/2 or fewer than three scales are given.
CrossTermReport cross_term_scaling(double hurst_i, double hurst_j, std::span<const double> scales,
                                   std::size_t n_paths, std::uint64_t seed, const CrossTermOptions& options = {});

}  // namespace roughmix
