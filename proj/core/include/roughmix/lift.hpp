#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "roughmix/gmfbm.hpp"

namespace roughmix {

/// First and second level of a rough path over one interval [s,t]:
/// level1 = X_t - X_s, level2 = int_s^t (X_u - X_s) (x) dX_u.
struct Level2Increment {
    Eigen::VectorXd level1;
    Eigen::MatrixXd level2;

    static Level2Increment zero(std::size_t dim);
    /// Lift of a straight segment with increment `delta`.
    static Level2Increment linear(const Eigen::VectorXd& delta);
};

/// Chen's identity: (a over [s,t]) (x) (b over [t,u]) = increment over [s,u].
Level2Increment chen(const Level2Increment& a, const Level2Increment& b);

/// Per-interval level-1/level-2 data of a rough path on a partition
/// times[0] < ... < times[n]. Increments over unions of consecutive
/// intervals follow from Chen's identity.
struct Level2RoughPath {
    std::vector<double> times;
    Eigen::MatrixXd inc1;                // intervals x dim
    std::vector<Eigen::MatrixXd> inc2;   // one dim x dim matrix per interval
    double p_exponent = 2.0;

    std::size_t intervals() const noexcept { return inc2.size(); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(inc1.cols()); }
    double start() const { return times.front(); }
    double end() const { return times.back(); }

    Level2Increment interval(std::size_t i) const;
    /// Increment between partition nodes `from` <= `to` (sequential Chen).
    Level2Increment over(std::size_t from, std::size_t to) const;
    Level2Increment total() const { return over(0, intervals()); }

    /// Sub-path between nodes `from` <= `to`.
    Level2RoughPath slice(std::size_t from, std::size_t to) const;

    /// Throws DomainError when shapes are inconsistent.
    void validate() const;
};

/// Constant-time interval queries via prefix signatures S_k = X_{t_0, t_k}:
/// X^1_{a,b} = S1_b - S1_a and X^2_{a,b} = S2_b - S2_a - S1_a (x) X^1_{a,b}.
class PrefixLift {
public:
    explicit PrefixLift(const Level2RoughPath& rp);

    std::size_t nodes() const noexcept { return prefix1_.size(); }
    Eigen::VectorXd level1(std::size_t a, std::size_t b) const;
    Eigen::MatrixXd level2(std::size_t a, std::size_t b) const;
    /// Level-1 path value X_{t_0, t_k}.
    const Eigen::VectorXd& point(std::size_t k) const { return prefix1_[k]; }

private:
    std::vector<Eigen::VectorXd> prefix1_;
    std::vector<Eigen::MatrixXd> prefix2_;
};

/// Piecewise-linear interpolation of `path` through its values at the dyadic
/// points k 2^{-m} T (T = last grid time), evaluated on the path's own grid.
/// Components are interpolated the same way. When a dyadic point is not a
/// grid point, `allow_interpolation` reads the input polyline there;
/// otherwise a ResolutionError is thrown.
SamplePath dyadic_approx(const SamplePath& path, int m, bool allow_interpolation = false);

/// The path restricted to its dyadic nodes of level m (grid of 2^m + 1 points).
SamplePath dyadic_nodes(const SamplePath& path, int m, bool allow_interpolation = false);

/// Exact level-2 lift of the piecewise-linear interpolant: each interval
/// contributes (delta, delta (x) delta / 2).
Level2RoughPath lift_piecewise_linear(const SamplePath& path, double p_exponent = 2.0);

/// Concatenates a rough path over [s,t] with one over [t,u].
Level2RoughPath chen_compose(const Level2RoughPath& a, const Level2RoughPath& b);

/// Largest entry of X_{0,k} (x) X_{k,n} - X_{0,n} over interior nodes k,
/// where X_{0,k} and X_{k,n} are accumulated independently.
double max_chen_defect(const Level2RoughPath& rp);

/// Largest entry of Sym(X^2) - X^1 (x) X^1 / 2 over all intervals.
double max_geometric_defect(const Level2RoughPath& rp);

/// Level-2 over the whole span of a generated path, rebuilt from its
/// per-component lifts: sum_k a_k^2 B^k + sum_{i<j} a_i a_j (I_ij + I_ji)
/// with I_ij = int (B^i_u - B^i_0) (x) dB^j_u. Needs `path.components`.
Eigen::MatrixXd mixed_level2(const SamplePath& path);

/// Family of partitions over which variation suprema are taken.
struct PartitionSchedule {
    enum class Family { dyadic, uniform, all_subsets_dp };

    Family family = Family::dyadic;
    /// dyadic: depths 0..max_depth of node-index dyadics (-1: resolve the grid).
    int max_depth = -1;
    /// uniform: partitions taking every stride-th node.
    std::vector<std::size_t> strides;

    static PartitionSchedule dyadic(int max_depth = -1) { return {Family::dyadic, max_depth, {}}; }
    static PartitionSchedule uniform(std::vector<std::size_t> strides) {
        return {Family::uniform, -1, std::move(strides)};
    }
    static PartitionSchedule exact() { return {Family::all_subsets_dp, -1, {}}; }
};

/// Maximum node count accepted by the exact dynamic program.
inline constexpr std::size_t kMaxExactVariationNodes = 4096;

/// (sup_D sum |X^k_{u,v}|^{p/k})^{k/p} for a single level k in {1, 2}.
/// Norms are max-absolute-entry.
double p_variation_level(const Level2RoughPath& rp, double p, int k, const PartitionSchedule& schedule);

/// max over k in {1, ..., min(floor(p), 2)} of p_variation_level.
double p_variation(const Level2RoughPath& rp, double p, const PartitionSchedule& schedule = {});

/// Computable proxy for the inhomogeneous p-variation distance of two lifts
/// on the same partition: sup-norm of the level-1 path difference plus the
/// (p/2)-variation of the level-2 difference over the dyadic family.
double dp_distance_proxy(const Level2RoughPath& a, const Level2RoughPath& b, double p, int max_depth = -1);

/// d_p proxy between the dyadic lifts at m and m+1, for m = m_min..m_max,
/// of a path whose grid holds the dyadic points of level m_max + 1.
std::vector<double> cauchy_distances(const SamplePath& fine, int m_min, int m_max, double p);

struct CauchyOptions {
    int m_min = 1;
    /// The fine path lives on the dyadic grid of level m_max + 1 + extra_levels.
    int extra_levels = 0;
    SampleMethod method = SampleMethod::circulant;
    unsigned threads = 0;
};

struct CauchyRow {
    int m = 0;
    std::uint64_t seed = 0;
    double d_p = 0.0;
};

struct CauchyReport {
    double p = 0.0;
    std::vector<CauchyRow> rows;       // seed-major, then m
    std::vector<int> levels;           // m values
    std::vector<double> median;        // median d_p per m over seeds
    bool strictly_decreasing = false;  // median strictly decreasing in m
    double log2_decay_slope = 0.0;     // slope of log2(median) against m
    std::vector<std::string> warnings;
};

/// Samples one fine path per seed, forms dyadic lifts and reports the d_p
/// proxy between consecutive levels. p <= 1/min H only raises a warning.
CauchyReport cauchy_diagnostic(const GmfbmSpec& spec, int m_max, double p, std::span<const std::uint64_t> seeds,
                               const CauchyOptions& options = {});

struct SharpnessOptions {
    int m_min = 1;
    double horizon = 1.0;
    SampleMethod method = SampleMethod::circulant;
    unsigned threads = 0;
    /// Thresholds used for the verdict flags (growth factor, relative spread).
    double growth_threshold = 2.0;
    double stability_threshold = 0.3;
};

struct SharpnessReport {
    double hurst = 0.0;
    std::vector<int> levels;
    std::vector<double> area_variance;  // variance over seeds of the (1,2) Levy area on [0,T]
    double growth_ratio = 0.0;          // variance at m_max over variance at m_min
    double relative_spread = 0.0;       // (max - min) / min over the levels
    bool grows = false;
    bool stabilizes = false;
};

/// Levy-area variance of dyadic lifts of a two-dimensional fBm with Hurst
/// parameter `hurst`, for m = m_min..m_max. Diverges in m for H < 1/4.
SharpnessReport sharpness_probe(double hurst, int m_max, std::span<const std::uint64_t> seeds,
                                const SharpnessOptions& options = {});

struct CovarianceDecayRow {
    double gap = 0.0;
    double covariance = 0.0;
    double bound_shape = 0.0;  // h^{2H} (gap/h)^{2H-2}, no constant
};

/// Covariance of fBm increments over [0,h] and [h+gap, 2h+gap] next to the
/// scaling shape of the mixed-increment bound. Diagnostic only.
std::vector<CovarianceDecayRow> covariance_decay_table(double hurst, double h, std::span<const double> gaps);

}  // namespace roughmix
