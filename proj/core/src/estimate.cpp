#include "roughmix/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "roughmix/error.hpp"
#include "roughmix/parallel.hpp"
#include "roughmix/rng.hpp"
#include "roughmix/stats.hpp"

namespace roughmix {

StructureTable structure_function(const SamplePath& path, std::span<const std::size_t> lags) {
    if (!path.grid.is_uniform()) throw DomainError("structure_function: needs a uniform grid");
    const std::size_t n = path.grid.intervals();
    StructureTable table;
    for (std::size_t lag : lags) {
        if (lag < 1 || lag >= n + 1 || n == 0)
            throw DomainError("structure_function: lag " + std::to_string(lag) + " outside [1, " +
                              std::to_string(n) + "]");
        const auto l = static_cast<Eigen::Index>(lag);
        const auto rows = path.values.rows() - l;
        const double ss = (path.values.bottomRows(rows) - path.values.topRows(rows)).squaredNorm();
        table.lags.push_back(lag);
        table.dt.push_back(static_cast<double>(lag) * path.grid.step());
        table.values.push_back(ss / static_cast<double>(rows * path.values.cols()));
    }
    return table;
}

std::vector<std::size_t> default_lags(std::size_t intervals) {
    if (intervals < 3) throw DomainError("default_lags: need at least three intervals");
    const std::size_t top = std::min(std::max<std::size_t>(2, intervals / 64), intervals - 1);
    std::vector<std::size_t> lags;
    for (std::size_t l = 1; l <= top; l *= 2) lags.push_back(l);
    return lags;
}

SingleFit fit_single(const StructureTable& table) {
    if (table.values.size() < 2) throw ConfigError("fit_single: need at least two lags");
    for (double v : table.values)
        if (!(v > 0.0)) throw EstimationError("fit_single: structure function has non-positive values");
    const auto line = stats::fit_loglog(table.dt, table.values);
    SingleFit fit;
    fit.hurst = line.slope / 2.0;
    fit.coeff_sq = std::exp(line.intercept);
    fit.hurst_se = line.slope_se / 2.0;
    fit.coeff_sq_se = fit.coeff_sq * line.intercept_se;
    return fit;
}

SingleFit fit_single(const SamplePath& path, std::span<const std::size_t> lags) {
    return fit_single(structure_function(path, lags));
}

std::vector<double> default_hurst_grid() {
    std::vector<double> grid;
    for (int i = 2; i <= 98; ++i) grid.push_back(i / 100.0);
    return grid;
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    const Eigen::Index n = a.cols();
    if (a.rows() != b.size()) throw DomainError("nnls: shape mismatch");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    const double tol = 10.0 * std::numeric_limits<double>::epsilon() * a.cwiseAbs().maxCoeff() *
                       static_cast<double>(std::max(a.rows(), n));

    auto solve_passive = [&]() {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < n; ++j)
            if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
        Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
        const Eigen::VectorXd zs = sub.colPivHouseholderQr().solve(b);
        Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
        for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zs(static_cast<Eigen::Index>(k));
        return z;
    };

    const int max_outer = 3 * static_cast<int>(n) + 10;
    for (int outer = 0; outer < max_outer; ++outer) {
        const Eigen::VectorXd w = a.transpose() * (b - a * x);
        Eigen::Index best = -1;
        double best_w = tol;
        for (Eigen::Index j = 0; j < n; ++j)
            if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
                best_w = w(j);
                best = j;
            }
        if (best < 0) break;
        passive[static_cast<std::size_t>(best)] = true;

        Eigen::VectorXd z = solve_passive();
        for (int inner = 0; inner < max_outer; ++inner) {
            bool feasible = true;
            double alpha = 1.0;
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
                    feasible = false;
                    alpha = std::min(alpha, x(j) / (x(j) - z(j)));
                }
            if (feasible) break;
            x += alpha * (z - x);
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)] && x(j) <= tol) {
                    passive[static_cast<std::size_t>(j)] = false;
                    x(j) = 0.0;
                }
            z = solve_passive();
        }
        x = z;
    }
    return x;
}

namespace {

struct WeightedProblem {
    Eigen::VectorXd log_dt;
    Eigen::VectorXd weight_over_v;  // w_l / v_l
    Eigen::VectorXd weight;         // w_l

    Eigen::VectorXd column(double hurst) const {
        return ((2.0 * hurst) * log_dt).array().exp().matrix().cwiseProduct(weight_over_v);
    }
};

struct Solved {
    std::vector<double> hursts;
    std::vector<double> coeffs;
    double objective = 0.0;
};

// Nonnegative weights for fixed H values.
Solved solve_weights(const WeightedProblem& prob, const std::vector<double>& hursts) {
    const auto m = prob.weight.size();
    Eigen::MatrixXd design(m, static_cast<Eigen::Index>(hursts.size()));
    Eigen::VectorXd norms(static_cast<Eigen::Index>(hursts.size()));
    for (std::size_t k = 0; k < hursts.size(); ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        design.col(c) = prob.column(hursts[k]);
        norms(c) = design.col(c).norm();
        design.col(c) /= norms(c);
    }
    const Eigen::VectorXd scaled = nnls(design, prob.weight);
    Solved s;
    s.hursts = hursts;
    for (Eigen::Index c = 0; c < scaled.size(); ++c) s.coeffs.push_back(scaled(c) / norms(c));
    s.objective = (design * scaled - prob.weight).norm();
    return s;
}

Solved refine(const WeightedProblem& prob, std::vector<double> hursts, double tolerance) {
    constexpr double kLo = 0.005;
    constexpr double kHi = 0.995;
    Solved best = solve_weights(prob, hursts);
    for (double step = 0.01; step >= tolerance; step *= 0.5) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t k = 0; k < hursts.size(); ++k) {
                for (double dir : {-1.0, 1.0}) {
                    std::vector<double> trial = best.hursts;
                    trial[k] = std::clamp(trial[k] + dir * step, kLo, kHi);
                    if (trial[k] == best.hursts[k]) continue;
                    Solved s = solve_weights(prob, trial);
                    if (s.objective < best.objective) {
                        best = std::move(s);
                        improved = true;
                    }
                }
            }
        }
    }
    return best;
}

// Weighted relative residuals at parameters (H, c).
Eigen::VectorXd residuals(const WeightedProblem& prob, const std::vector<double>& hursts,
                          const std::vector<double>& coeffs) {
    Eigen::VectorXd r = -prob.weight;
    for (std::size_t k = 0; k < hursts.size(); ++k) r += coeffs[k] * prob.column(hursts[k]);
    return r;
}

void regression_errors(const WeightedProblem& prob, FitReport& rep) {
    const std::size_t k = rep.hursts.size();
    const auto m = prob.weight.size();
    const auto p = static_cast<Eigen::Index>(2 * k);
    rep.hurst_se.assign(k, std::numeric_limits<double>::quiet_NaN());
    rep.coeffs_sq_se.assign(k, std::numeric_limits<double>::quiet_NaN());
    if (m <= p || k == 0) return;
    Eigen::MatrixXd jac(m, p);
    for (std::size_t j = 0; j < k; ++j) {
        const Eigen::VectorXd col = prob.column(rep.hursts[j]);
        jac.col(static_cast<Eigen::Index>(j)) = rep.coeffs_sq[j] * 2.0 * prob.log_dt.cwiseProduct(col);
        jac.col(static_cast<Eigen::Index>(k + j)) = col;
    }
    const double rss = residuals(prob, rep.hursts, rep.coeffs_sq).squaredNorm();
    const double sigma2 = rss / static_cast<double>(m - p);
    const Eigen::MatrixXd info = jac.transpose() * jac;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
    if (!lu.isInvertible()) return;
    const Eigen::MatrixXd cov = sigma2 * lu.inverse();
    for (std::size_t j = 0; j < k; ++j) {
        const auto a = static_cast<Eigen::Index>(j);
        const auto b = static_cast<Eigen::Index>(k + j);
        rep.hurst_se[j] = std::sqrt(std::max(0.0, cov(a, a)));
        rep.coeffs_sq_se[j] = std::sqrt(std::max(0.0, cov(b, b)));
    }
}

}  // namespace

FitReport fit_mixture(const StructureTable& table, std::size_t n_components, const MixtureOptions& options) {
    if (n_components < 1) throw ConfigError("fit_mixture: need at least one component");
    if (table.values.size() < 2 * n_components)
        throw ConfigError("fit_mixture: " + std::to_string(n_components) + " components need at least " +
                          std::to_string(2 * n_components) + " lags, got " + std::to_string(table.values.size()));
    for (double v : table.values)
        if (!(v > 0.0)) throw EstimationError("fit_mixture: structure function has non-positive values");

    const auto m = static_cast<Eigen::Index>(table.values.size());
    WeightedProblem prob{Eigen::VectorXd(m), Eigen::VectorXd(m), Eigen::VectorXd(m)};
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const double lag = table.lags.empty() ? table.dt[u] / table.dt[0] : static_cast<double>(table.lags[u]);
        prob.log_dt(i) = std::log(table.dt[u]);
        prob.weight(i) = std::pow(lag, -options.weight_exponent);
        prob.weight_over_v(i) = prob.weight(i) / table.values[u];
    }

    const std::vector<double> grid = options.hurst_grid.empty() ? default_hurst_grid() : options.hurst_grid;
    const Solved coarse = solve_weights(prob, grid);

    // Clusters of consecutive active grid points, heaviest first.
    struct Cluster {
        double weight = 0.0;
        double hurst = 0.0;
    };
    std::vector<Cluster> clusters;
    bool open = false;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double c = coarse.coeffs[g];
        if (c > 0.0) {
            if (!open) clusters.emplace_back();
            clusters.back().weight += c;
            clusters.back().hurst += c * grid[g];
            open = true;
        } else {
            open = false;
        }
    }
    for (auto& c : clusters) c.hurst /= c.weight;
    std::stable_sort(clusters.begin(), clusters.end(),
                     [](const Cluster& a, const Cluster& b) { return a.weight > b.weight; });

    FitReport rep;
    rep.requested_components = n_components;
    rep.lags = table.lags;
    rep.dt = table.dt;
    if (clusters.empty()) throw EstimationError("fit_mixture: no candidate exponent carries weight");
    if (clusters.size() < n_components) {
        rep.identifiable = false;
        rep.notes.push_back("only " + std::to_string(clusters.size()) + " distinct exponent(s) supported by the data");
    }

    std::vector<double> start;
    for (std::size_t k = 0; k < std::min(n_components, clusters.size()); ++k) start.push_back(clusters[k].hurst);
    std::sort(start.begin(), start.end());
    Solved fit = refine(prob, start, options.refine_tolerance);

    // Drop empty components and merge coincident ones until stable.
    for (;;) {
        std::vector<std::size_t> order(fit.hursts.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit.hursts[a] < fit.hursts[b]; });
        std::vector<double> kept;
        std::vector<double> kept_w;
        bool changed = false;
        for (std::size_t idx : order) {
            if (!(fit.coeffs[idx] > 0.0)) {
                changed = true;
                rep.notes.push_back("dropped a component with zero weight");
                continue;
            }
            if (!kept.empty() && fit.hursts[idx] - kept.back() < options.merge_tolerance) {
                const double w = kept_w.back() + fit.coeffs[idx];
                kept.back() = (kept.back() * kept_w.back() + fit.hursts[idx] * fit.coeffs[idx]) / w;
                kept_w.back() = w;
                changed = true;
                rep.notes.push_back("merged components closer than the merge tolerance");
                continue;
            }
            kept.push_back(fit.hursts[idx]);
            kept_w.push_back(fit.coeffs[idx]);
        }
        if (!changed) break;
        rep.identifiable = false;
        if (kept.empty()) throw EstimationError("fit_mixture: every component vanished during refinement");
        fit = refine(prob, kept, options.refine_tolerance);
    }

    std::vector<std::size_t> order(fit.hursts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit.hursts[a] < fit.hursts[b]; });
    for (std::size_t idx : order) {
        rep.hursts.push_back(fit.hursts[idx]);
        rep.coeffs_sq.push_back(fit.coeffs[idx]);
    }
    rep.residual = residuals(prob, rep.hursts, rep.coeffs_sq).norm();
    regression_errors(prob, rep);
    return rep;
}

FitReport fit_mixture(const SamplePath& path, std::span<const std::size_t> lags, std::size_t n_components,
                      const MixtureOptions& options) {
    FitReport rep = fit_mixture(structure_function(path, lags), n_components, options);
    if (options.bootstrap == 0) return rep;
    if (options.bootstrap < 2) throw ConfigError("fit_mixture: bootstrap needs at least two replicates");

    const std::size_t n = path.grid.intervals();
    const Eigen::MatrixXd inc = path.values.bottomRows(static_cast<Eigen::Index>(n)) -
                                path.values.topRows(static_cast<Eigen::Index>(n));
    const std::size_t block =
        options.block_length > 0 ? options.block_length
                                 : static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n))));
    if (block > n) throw ConfigError("fit_mixture: bootstrap block longer than the path");
    MixtureOptions inner = options;
    inner.bootstrap = 0;

    const auto replicates = parallel_map(options.bootstrap, options.threads, [&](std::size_t b) {
        const Philox4x32 rng(options.seed, 0x626f6f74ULL + b);
        Eigen::MatrixXd values(path.values.rows(), path.values.cols());
        values.row(0).setZero();
        std::size_t filled = 0;
        std::uint64_t draw = 0;
        while (filled < n) {
            const auto start = static_cast<std::size_t>(rng.uniform(draw++) * static_cast<double>(n - block + 1));
            const std::size_t s = std::min(start, n - block);
            for (std::size_t j = 0; j < block && filled < n; ++j, ++filled) {
                const auto r = static_cast<Eigen::Index>(filled);
                values.row(r + 1) = values.row(r) + inc.row(static_cast<Eigen::Index>(s + j));
            }
        }
        try {
            return fit_mixture(SamplePath(path.grid, values), lags, n_components, inner);
        } catch (const EstimationError&) {
            return FitReport{};
        }
    });

    const std::size_t k = rep.hursts.size();
    std::vector<std::vector<double>> hs(k), cs(k);
    for (const auto& r : replicates) {
        if (r.hursts.size() != k) continue;
        for (std::size_t j = 0; j < k; ++j) {
            hs[j].push_back(r.hursts[j]);
            cs[j].push_back(r.coeffs_sq[j]);
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        rep.bootstrap_hurst_se.push_back(std::sqrt(stats::variance(hs[j])));
        rep.bootstrap_coeffs_sq_se.push_back(std::sqrt(stats::variance(cs[j])));
    }
    const std::size_t used = hs.empty() ? 0 : hs[0].size();
    if (used < options.bootstrap)
        rep.notes.push_back(std::to_string(options.bootstrap - used) +
                            " bootstrap replicate(s) resolved a different number of components and were skipped");
    return rep;
}

}  // namespace roughmix
