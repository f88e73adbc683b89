#include "roughmix/signature.hpp"

#include <algorithm>
#include <cmath>

#include "roughmix/error.hpp"
#include "roughmix/lift.hpp"
#include "roughmix/parallel.hpp"
#include "roughmix/rng.hpp"
#include "roughmix/stats.hpp"

namespace roughmix {

TruncatedTensor signature(const SamplePath& path, int level) {
    if (level < 1) throw DomainError("signature: level must be >= 1");
    if (path.size() < 2) throw DomainError("signature: path needs at least two grid points");
    TruncatedTensor sig = unit(static_cast<int>(path.dim()), level);
    std::vector<double> delta(path.dim());
    for (Eigen::Index i = 1; i < path.values.rows(); ++i) {
        for (Eigen::Index c = 0; c < path.values.cols(); ++c)
            delta[static_cast<std::size_t>(c)] = path.values(i, c) - path.values(i - 1, c);
        mul_exp_increment(sig, delta);
    }
    return sig;
}

TruncatedTensor log_signature(const SamplePath& path, int level) { return log(signature(path, level)); }

SamplePath reverse(const SamplePath& path) {
    const std::size_t n = path.size();
    const double horizon = path.grid.back();
    std::vector<double> times(n);
    for (std::size_t i = 0; i < n; ++i) times[i] = horizon - path.grid[n - 1 - i];
    times.front() = 0.0;
    SamplePath out(TimeGrid(std::move(times)), path.values.colwise().reverse());
    for (const auto& c : path.components) out.components.push_back(c.colwise().reverse());
    return out;
}

SamplePath concat(const SamplePath& a, const SamplePath& b) {
    if (a.dim() != b.dim()) throw ComposabilityError("concat: dimension mismatch");
    if (b.size() < 2) return a;
    const double shift = a.grid.back();
    std::vector<double> times = a.grid.points();
    for (std::size_t i = 1; i < b.size(); ++i) times.push_back(shift + b.grid[i]);
    Eigen::MatrixXd values(static_cast<Eigen::Index>(times.size()), a.values.cols());
    const auto na = a.values.rows();
    const auto nb = b.values.rows();
    values.topRows(na) = a.values;
    const Eigen::RowVectorXd offset = a.values.row(na - 1) - b.values.row(0);
    values.bottomRows(nb - 1) = b.values.bottomRows(nb - 1).rowwise() + offset;
    return SamplePath(TimeGrid(std::move(times)), std::move(values));
}

LevelFormulaReport level_formulas_check(const SamplePath& path) {
    const TruncatedTensor sig = signature(path, 2);
    const auto d = static_cast<Eigen::Index>(path.dim());
    const auto l1 = sig.level_data(1);
    const auto l2 = sig.level_data(2);
    Eigen::VectorXd s1(d);
    Eigen::MatrixXd s2(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        s1(i) = l1[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < d; ++j) s2(i, j) = l2[static_cast<std::size_t>(i * d + j)];
    }
    const Level2Increment lift = lift_piecewise_linear(path).total();
    const Eigen::MatrixXd half_square = 0.5 * s1 * s1.transpose();
    const Eigen::MatrixXd anti = 0.5 * (lift.level2 - lift.level2.transpose());

    LevelFormulaReport rep;
    const Eigen::VectorXd total = (path.values.row(path.values.rows() - 1) - path.values.row(0)).transpose();
    rep.level1_residual = (s1 - total).cwiseAbs().maxCoeff();
    rep.adopted_residual = (s2 - lift.level2).cwiseAbs().maxCoeff();
    rep.area_reading_residual = (s2 - (anti + half_square)).cwiseAbs().maxCoeff();
    rep.literal_residual = (s2 - (lift.level2 + half_square)).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            rep.shuffle_residual = std::max(rep.shuffle_residual, std::abs(s1(i) * s1(j) - s2(i, j) - s2(j, i)));
    return rep;
}

SignatureMoments expected_signature_mc(const GmfbmSpec& spec, const TimeGrid& grid, int level,
                                       std::size_t n_paths, std::uint64_t seed, const MonteCarloOptions& options) {
    if (n_paths < 2) throw ConfigError("expected_signature_mc: need at least two paths");
    const GmfbmSampler sampler(spec, grid, options.method);
    const TruncatedTensor zero(spec.dim, level);

    constexpr std::size_t kChunk = 64;
    const std::size_t chunks = (n_paths + kChunk - 1) / kChunk;
    struct Sums {
        std::vector<double> sum, sum_sq;
    };
    const auto partial = parallel_map(chunks, options.threads, [&](std::size_t c) {
        Sums s{std::vector<double>(zero.raw().size(), 0.0), std::vector<double>(zero.raw().size(), 0.0)};
        for (std::size_t i = c * kChunk; i < std::min(n_paths, (c + 1) * kChunk); ++i) {
            const TruncatedTensor sig = signature(sampler.draw(derive_seed(seed, i)), level);
            const auto raw = sig.raw();
            for (std::size_t k = 0; k < raw.size(); ++k) {
                s.sum[k] += raw[k];
                s.sum_sq[k] += raw[k] * raw[k];
            }
        }
        return s;
    });

    SignatureMoments out{zero, zero, n_paths};
    auto mean = out.mean.raw();
    auto se = out.standard_error.raw();
    std::vector<double> sum_sq(mean.size(), 0.0);
    for (const auto& s : partial)
        for (std::size_t k = 0; k < mean.size(); ++k) {
            mean[k] += s.sum[k];
            sum_sq[k] += s.sum_sq[k];
        }
    const auto n = static_cast<double>(n_paths);
    for (std::size_t k = 0; k < mean.size(); ++k) {
        mean[k] /= n;
        const double var = std::max(0.0, (sum_sq[k] - n * mean[k] * mean[k]) / (n - 1.0));
        se[k] = std::sqrt(var / n);
    }
    return out;
}

CrossTermReport cross_term_scaling(double hurst_i, double hurst_j, std::span<const double> scales,
                                   std::size_t n_paths, std::uint64_t seed, const CrossTermOptions& options) {
    if (!(hurst_i + hurst_j > 0.5))
        throw DomainError("cross_term_scaling: H_i + H_j must exceed 1/2 for the cross integral to exist");
    if (scales.size() < 3) throw DomainError("cross_term_scaling: need at least three scales");
    if (n_paths < 2) throw ConfigError("cross_term_scaling: need at least two paths");

    const TimeGrid grid = TimeGrid::uniform(options.horizon, options.intervals);
    std::vector<std::size_t> nodes;
    for (double t : scales) {
        if (!(t > 0.0)) throw DomainError("cross_term_scaling: scales must be positive");
        const auto idx = grid.find(t, 1e-9 * options.horizon);
        if (!idx) throw ResolutionError("cross_term_scaling: scale " + std::to_string(t) + " is not a grid node");
        nodes.push_back(*idx);
    }
    const std::size_t last = *std::max_element(nodes.begin(), nodes.end());

    const GmfbmSpec spec{{hurst_i, hurst_j}, {1.0, 1.0}, 1, options.horizon};
    const GmfbmSampler sampler(spec, grid, options.method);
    const auto cross = parallel_map(n_paths, options.threads, [&](std::size_t p) {
        const std::uint64_t s = derive_seed(seed, p);
        const Eigen::VectorXd bi = sampler.draw_component(0, 0, s);
        const Eigen::VectorXd bj = sampler.draw_component(1, 0, s);
        // Running int_0^t (B^i_u - B^i_0) dB^j_u of the polyline.
        std::vector<double> running(last + 1, 0.0);
        for (std::size_t k = 1; k <= last; ++k) {
            const auto a = static_cast<Eigen::Index>(k - 1);
            const auto b = static_cast<Eigen::Index>(k);
            running[k] = running[k - 1] + (0.5 * (bi(a) + bi(b)) - bi(0)) * (bj(b) - bj(a));
        }
        std::vector<double> out;
        for (std::size_t node : nodes) out.push_back(running[node] * running[node]);
        return out;
    });

    CrossTermReport rep;
    rep.scales.assign(scales.begin(), scales.end());
    rep.expected_slope = 2.0 * (hurst_i + hurst_j);
    for (std::size_t s = 0; s < nodes.size(); ++s) {
        std::vector<double> col;
        col.reserve(n_paths);
        for (const auto& c : cross) col.push_back(c[s]);
        rep.second_moment.push_back(stats::mean(col));
        rep.standard_error.push_back(stats::standard_error(col));
    }
    const auto fit = stats::fit_loglog(rep.scales, rep.second_moment);
    rep.slope = fit.slope;
    rep.slope_se = fit.slope_se;
    return rep;
}

}  // namespace roughmix
