#include "roughmix/lift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "roughmix/error.hpp"
#include "roughmix/parallel.hpp"
#include "roughmix/stats.hpp"

namespace roughmix {

Level2Increment Level2Increment::zero(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return {Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
}

Level2Increment Level2Increment::linear(const Eigen::VectorXd& delta) {
    return {delta, 0.5 * delta * delta.transpose()};
}

Level2Increment chen(const Level2Increment& a, const Level2Increment& b) {
    if (a.level1.size() != b.level1.size()) throw ComposabilityError("chen: dimension mismatch");
    return {a.level1 + b.level1, a.level2 + b.level2 + a.level1 * b.level1.transpose()};
}

Level2Increment Level2RoughPath::interval(std::size_t i) const {
    return {inc1.row(static_cast<Eigen::Index>(i)).transpose(), inc2.at(i)};
}

Level2Increment Level2RoughPath::over(std::size_t from, std::size_t to) const {
    if (from > to || to > intervals()) throw DomainError("Level2RoughPath::over: node range out of bounds");
    Level2Increment acc = Level2Increment::zero(dim());
    for (std::size_t i = from; i < to; ++i) {
        const auto row = inc1.row(static_cast<Eigen::Index>(i));
        acc.level2 += inc2[i] + acc.level1 * row;
        acc.level1 += row.transpose();
    }
    return acc;
}

Level2RoughPath Level2RoughPath::slice(std::size_t from, std::size_t to) const {
    if (from > to || to > intervals()) throw DomainError("Level2RoughPath::slice: node range out of bounds");
    Level2RoughPath out;
    out.times.assign(times.begin() + static_cast<std::ptrdiff_t>(from),
                     times.begin() + static_cast<std::ptrdiff_t>(to) + 1);
    out.inc1 = inc1.middleRows(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to - from));
    out.inc2.assign(inc2.begin() + static_cast<std::ptrdiff_t>(from), inc2.begin() + static_cast<std::ptrdiff_t>(to));
    out.p_exponent = p_exponent;
    return out;
}

void Level2RoughPath::validate() const {
    if (times.empty()) throw DomainError("Level2RoughPath: no partition nodes");
    if (static_cast<std::size_t>(inc1.rows()) != intervals() || times.size() != intervals() + 1)
        throw DomainError("Level2RoughPath: interval counts disagree");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw DomainError("Level2RoughPath: times must be strictly increasing");
    for (const auto& m : inc2)
        if (static_cast<std::size_t>(m.rows()) != dim() || static_cast<std::size_t>(m.cols()) != dim())
            throw DomainError("Level2RoughPath: level-2 block has the wrong shape");
}

PrefixLift::PrefixLift(const Level2RoughPath& rp) {
    const auto d = static_cast<Eigen::Index>(rp.dim());
    prefix1_.reserve(rp.intervals() + 1);
    prefix2_.reserve(rp.intervals() + 1);
    prefix1_.push_back(Eigen::VectorXd::Zero(d));
    prefix2_.push_back(Eigen::MatrixXd::Zero(d, d));
    for (std::size_t i = 0; i < rp.intervals(); ++i) {
        const Eigen::VectorXd row = rp.inc1.row(static_cast<Eigen::Index>(i)).transpose();
        prefix2_.push_back(prefix2_.back() + rp.inc2[i] + prefix1_.back() * row.transpose());
        prefix1_.push_back(prefix1_.back() + row);
    }
}

Eigen::VectorXd PrefixLift::level1(std::size_t a, std::size_t b) const { return prefix1_.at(b) - prefix1_.at(a); }

Eigen::MatrixXd PrefixLift::level2(std::size_t a, std::size_t b) const {
    return prefix2_.at(b) - prefix2_.at(a) - prefix1_.at(a) * (prefix1_.at(b) - prefix1_.at(a)).transpose();
}

namespace {

double dyadic_tolerance(double horizon, int m) { return 1e-9 * horizon / std::ldexp(1.0, m); }

// Value of the polyline through (grid, values) at time t.
Eigen::RowVectorXd polyline_at(const TimeGrid& grid, const Eigen::MatrixXd& values, double t) {
    const auto& pts = grid.points();
    if (t <= pts.front()) return values.row(0);
    if (t >= pts.back()) return values.row(values.rows() - 1);
    const auto hi = static_cast<Eigen::Index>(std::upper_bound(pts.begin(), pts.end(), t) - pts.begin());
    const double t0 = pts[static_cast<std::size_t>(hi - 1)];
    const double t1 = pts[static_cast<std::size_t>(hi)];
    const double w = (t - t0) / (t1 - t0);
    return (1.0 - w) * values.row(hi - 1) + w * values.row(hi);
}

void check_level(int m) {
    if (m < 0 || m > 40) throw DomainError("dyadic level out of range");
}

// Values at dyadic nodes k 2^{-m} T of each matrix in `mats`.
std::vector<Eigen::MatrixXd> dyadic_values(const TimeGrid& grid, const std::vector<const Eigen::MatrixXd*>& mats,
                                           int m, bool allow_interpolation) {
    const double horizon = grid.back();
    const std::size_t cells = std::size_t{1} << m;
    const double tol = dyadic_tolerance(horizon, m);
    std::vector<Eigen::MatrixXd> out;
    for (const auto* mat : mats) out.emplace_back(static_cast<Eigen::Index>(cells + 1), mat->cols());
    for (std::size_t k = 0; k <= cells; ++k) {
        const double t = horizon * static_cast<double>(k) / static_cast<double>(cells);
        const auto idx = grid.find(t, tol);
        if (!idx && !allow_interpolation)
            throw ResolutionError("dyadic point " + std::to_string(t) + " of level " + std::to_string(m) +
                                  " is not a grid point");
        for (std::size_t j = 0; j < mats.size(); ++j) {
            out[j].row(static_cast<Eigen::Index>(k)) =
                idx ? Eigen::RowVectorXd(mats[j]->row(static_cast<Eigen::Index>(*idx)))
                    : polyline_at(grid, *mats[j], t);
        }
    }
    return out;
}

std::vector<const Eigen::MatrixXd*> path_matrices(const SamplePath& path) {
    std::vector<const Eigen::MatrixXd*> mats{&path.values};
    for (const auto& c : path.components) mats.push_back(&c);
    return mats;
}

}  // namespace

SamplePath dyadic_approx(const SamplePath& path, int m, bool allow_interpolation) {
    check_level(m);
    if (path.size() < 2) throw DomainError("dyadic_approx: path needs at least two points");
    const auto mats = path_matrices(path);
    const auto anchors = dyadic_values(path.grid, mats, m, allow_interpolation);
    const double horizon = path.grid.back();
    const std::size_t cells = std::size_t{1} << m;

    SamplePath out = path;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const double t = path.grid[i];
        const double scaled = t / horizon * static_cast<double>(cells);
        auto l = static_cast<std::size_t>(std::floor(scaled));
        l = std::min(l, cells - 1);
        const double w = scaled - static_cast<double>(l);
        const auto r = static_cast<Eigen::Index>(i);
        const auto a = static_cast<Eigen::Index>(l);
        auto blend = [&](const Eigen::MatrixXd& anchor) -> Eigen::RowVectorXd {
            if (w == 0.0) return anchor.row(a);
            return anchor.row(a) + w * (anchor.row(a + 1) - anchor.row(a));
        };
        out.values.row(r) = blend(anchors[0]);
        for (std::size_t c = 0; c < out.components.size(); ++c) out.components[c].row(r) = blend(anchors[c + 1]);
    }
    return out;
}

SamplePath dyadic_nodes(const SamplePath& path, int m, bool allow_interpolation) {
    check_level(m);
    if (path.size() < 2) throw DomainError("dyadic_nodes: path needs at least two points");
    const auto anchors = dyadic_values(path.grid, path_matrices(path), m, allow_interpolation);
    SamplePath out(TimeGrid::dyadic(path.grid.back(), m), anchors[0]);
    out.spec = path.spec;
    out.seed = path.seed;
    out.method = path.method;
    out.warnings = path.warnings;
    out.components.assign(anchors.begin() + 1, anchors.end());
    return out;
}

Level2RoughPath lift_piecewise_linear(const SamplePath& path, double p_exponent) {
    if (path.size() < 2) throw DomainError("lift_piecewise_linear: need at least two grid points");
    Level2RoughPath rp;
    rp.times = path.grid.points();
    rp.p_exponent = p_exponent;
    const auto n = static_cast<Eigen::Index>(path.size()) - 1;
    rp.inc1 = path.values.bottomRows(n) - path.values.topRows(n);
    rp.inc2.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd delta = rp.inc1.row(i).transpose();
        rp.inc2.push_back(0.5 * delta * delta.transpose());
    }
    return rp;
}

Level2RoughPath chen_compose(const Level2RoughPath& a, const Level2RoughPath& b) {
    const double scale = std::max({1.0, std::abs(a.end()), std::abs(b.start())});
    if (std::abs(a.end() - b.start()) > 1e-12 * scale)
        throw ComposabilityError("chen_compose: first path ends at " + std::to_string(a.end()) +
                                 " but second starts at " + std::to_string(b.start()));
    if (a.intervals() == 0) return b;
    if (b.intervals() == 0) return a;
    if (a.dim() != b.dim()) throw ComposabilityError("chen_compose: dimension mismatch");
    Level2RoughPath out;
    out.times = a.times;
    out.times.insert(out.times.end(), b.times.begin() + 1, b.times.end());
    out.inc1.resize(a.inc1.rows() + b.inc1.rows(), a.inc1.cols());
    out.inc1 << a.inc1, b.inc1;
    out.inc2 = a.inc2;
    out.inc2.insert(out.inc2.end(), b.inc2.begin(), b.inc2.end());
    out.p_exponent = std::max(a.p_exponent, b.p_exponent);
    return out;
}

double max_chen_defect(const Level2RoughPath& rp) {
    const std::size_t n = rp.intervals();
    if (n < 2) return 0.0;
    const Level2Increment whole = rp.total();
    std::vector<Level2Increment> right(n + 1, Level2Increment::zero(rp.dim()));
    for (std::size_t k = n; k-- > 0;) right[k] = chen(rp.interval(k), right[k + 1]);
    double worst = 0.0;
    Level2Increment left = Level2Increment::zero(rp.dim());
    for (std::size_t k = 1; k < n; ++k) {
        left = chen(left, rp.interval(k - 1));
        const Level2Increment joined = chen(left, right[k]);
        worst = std::max({worst, (joined.level1 - whole.level1).cwiseAbs().maxCoeff(),
                          (joined.level2 - whole.level2).cwiseAbs().maxCoeff()});
    }
    return worst;
}

double max_geometric_defect(const Level2RoughPath& rp) {
    double worst = 0.0;
    for (std::size_t i = 0; i < rp.intervals(); ++i) {
        const Eigen::VectorXd d = rp.inc1.row(static_cast<Eigen::Index>(i)).transpose();
        const Eigen::MatrixXd sym = 0.5 * (rp.inc2[i] + rp.inc2[i].transpose());
        worst = std::max(worst, (sym - 0.5 * d * d.transpose()).cwiseAbs().maxCoeff());
    }
    return worst;
}

Eigen::MatrixXd mixed_level2(const SamplePath& path) {
    if (path.components.empty() || !path.spec)
        throw DomainError("mixed_level2: path carries no component decomposition");
    const GmfbmSpec& spec = *path.spec;
    const auto d = static_cast<Eigen::Index>(path.dim());
    const auto nk = static_cast<Eigen::Index>(path.components.size());
    Eigen::MatrixXd stacked(static_cast<Eigen::Index>(path.size()), nk * d);
    for (Eigen::Index k = 0; k < nk; ++k) stacked.middleCols(k * d, d) = path.components[static_cast<std::size_t>(k)];
    const Eigen::MatrixXd g = lift_piecewise_linear(SamplePath(path.grid, stacked)).total().level2;

    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < nk; ++i) {
        const double ai = spec.coeffs[static_cast<std::size_t>(i)];
        out += ai * ai * g.block(i * d, i * d, d, d);
        for (Eigen::Index j = i + 1; j < nk; ++j) {
            const double aj = spec.coeffs[static_cast<std::size_t>(j)];
            out += ai * aj * (g.block(i * d, j * d, d, d) + g.block(j * d, i * d, d, d));
        }
    }
    return out;
}

namespace {

int resolve_depth(std::size_t intervals, int requested) {
    if (requested >= 0) return requested;
    int depth = 0;
    while ((std::size_t{1} << depth) < intervals) ++depth;
    return depth;
}

// Node indices of the depth-j dyadic partition of nodes 0..n.
std::vector<std::size_t> dyadic_partition(std::size_t n, int j) {
    const std::size_t cells = std::size_t{1} << j;
    std::vector<std::size_t> nodes;
    nodes.reserve(std::min(cells, n) + 1);
    for (std::size_t k = 0; k <= cells; ++k) {
        const auto idx = static_cast<std::size_t>(
            std::llround(static_cast<double>(k) * static_cast<double>(n) / static_cast<double>(cells)));
        if (nodes.empty() || idx != nodes.back()) nodes.push_back(idx);
    }
    return nodes;
}

std::vector<std::vector<std::size_t>> schedule_partitions(std::size_t n, const PartitionSchedule& schedule) {
    std::vector<std::vector<std::size_t>> parts;
    if (schedule.family == PartitionSchedule::Family::dyadic) {
        const int depth = resolve_depth(n, schedule.max_depth);
        for (int j = 0; j <= depth; ++j) parts.push_back(dyadic_partition(n, j));
    } else {
        if (schedule.strides.empty()) throw ConfigError("uniform partition schedule needs at least one stride");
        for (std::size_t s : schedule.strides) {
            if (s == 0) throw ConfigError("uniform partition stride must be >= 1");
            std::vector<std::size_t> nodes;
            for (std::size_t k = 0; k < n; k += s) nodes.push_back(k);
            nodes.push_back(n);
            parts.push_back(std::move(nodes));
        }
    }
    return parts;
}

// sup over the schedule of sum_{[a,b]} cost(a, b).
template <class Cost>
double sup_additive(std::size_t n, const PartitionSchedule& schedule, Cost&& cost) {
    if (n == 0) return 0.0;
    if (schedule.family == PartitionSchedule::Family::all_subsets_dp) {
        if (n + 1 > kMaxExactVariationNodes)
            throw ConfigError("exact p-variation limited to " + std::to_string(kMaxExactVariationNodes) + " nodes");
        std::vector<double> best(n + 1, 0.0);
        for (std::size_t b = 1; b <= n; ++b) {
            double v = -std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < b; ++a) v = std::max(v, best[a] + cost(a, b));
            best[b] = v;
        }
        return best[n];
    }
    double sup = 0.0;
    for (const auto& nodes : schedule_partitions(n, schedule)) {
        double s = 0.0;
        for (std::size_t i = 1; i < nodes.size(); ++i) s += cost(nodes[i - 1], nodes[i]);
        sup = std::max(sup, s);
    }
    return sup;
}

}  // namespace

double p_variation_level(const Level2RoughPath& rp, double p, int k, const PartitionSchedule& schedule) {
    if (!(p >= 1.0)) throw DomainError("p_variation: p must be >= 1");
    if (k != 1 && k != 2) throw DomainError("p_variation: level must be 1 or 2");
    if (k == 2 && p < 2.0) throw DomainError("p_variation: the level-2 term needs p >= 2");
    const PrefixLift prefix(rp);
    const double q = p / static_cast<double>(k);
    double sup;
    if (k == 1) {
        sup = sup_additive(rp.intervals(), schedule, [&](std::size_t a, std::size_t b) {
            return std::pow(prefix.level1(a, b).cwiseAbs().maxCoeff(), q);
        });
    } else {
        sup = sup_additive(rp.intervals(), schedule, [&](std::size_t a, std::size_t b) {
            return std::pow(prefix.level2(a, b).cwiseAbs().maxCoeff(), q);
        });
    }
    return std::pow(sup, 1.0 / q);
}

double p_variation(const Level2RoughPath& rp, double p, const PartitionSchedule& schedule) {
    if (!(p >= 1.0)) throw DomainError("p_variation: p must be >= 1");
    double v = p_variation_level(rp, p, 1, schedule);
    if (p >= 2.0) v = std::max(v, p_variation_level(rp, p, 2, schedule));
    return v;
}

double dp_distance_proxy(const Level2RoughPath& a, const Level2RoughPath& b, double p, int max_depth) {
    if (a.times != b.times || a.dim() != b.dim())
        throw ComposabilityError("dp_distance_proxy: lifts live on different partitions");
    if (!(p >= 2.0)) throw DomainError("dp_distance_proxy: p must be >= 2");
    const PrefixLift pa(a), pb(b);
    double sup1 = 0.0;
    for (std::size_t k = 0; k < pa.nodes(); ++k)
        sup1 = std::max(sup1, (pa.point(k) - pb.point(k)).cwiseAbs().maxCoeff());
    const double q = p / 2.0;
    const double sup2 = sup_additive(a.intervals(), PartitionSchedule::dyadic(max_depth), [&](std::size_t s, std::size_t t) {
        return std::pow((pa.level2(s, t) - pb.level2(s, t)).cwiseAbs().maxCoeff(), q);
    });
    return sup1 + std::pow(sup2, 1.0 / q);
}

std::vector<double> cauchy_distances(const SamplePath& fine, int m_min, int m_max, double p) {
    if (m_min < 0 || m_max < m_min) throw DomainError("cauchy_distances: need 0 <= m_min <= m_max");
    const SamplePath base = dyadic_nodes(fine, m_max + 1);
    std::vector<Level2RoughPath> lifts;
    for (int m = m_min; m <= m_max + 1; ++m) lifts.push_back(lift_piecewise_linear(dyadic_approx(base, m)));
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < lifts.size(); ++i) out.push_back(dp_distance_proxy(lifts[i], lifts[i + 1], p));
    return out;
}

CauchyReport cauchy_diagnostic(const GmfbmSpec& spec, int m_max, double p, std::span<const std::uint64_t> seeds,
                               const CauchyOptions& options) {
    spec.validate();
    if (seeds.empty()) throw ConfigError("cauchy_diagnostic: no seeds");
    if (options.extra_levels < 0) throw ConfigError("cauchy_diagnostic: extra_levels must be >= 0");
    CauchyReport report;
    report.p = p;
    if (p <= 1.0 / spec.min_hurst())
        report.warnings.push_back("p <= 1/min H: outside the convergence regime");

    const int fine_level = m_max + 1 + options.extra_levels;
    const GmfbmSampler sampler(spec, TimeGrid::dyadic(spec.horizon, fine_level), options.method);
    for (const auto& w : sampler.warnings()) report.warnings.push_back(w);

    const auto per_seed = parallel_map(seeds.size(), options.threads, [&](std::size_t i) {
        return cauchy_distances(sampler.draw(seeds[i]), options.m_min, m_max, p);
    });

    for (int m = options.m_min; m <= m_max; ++m) report.levels.push_back(m);
    for (std::size_t i = 0; i < seeds.size(); ++i)
        for (std::size_t j = 0; j < report.levels.size(); ++j)
            report.rows.push_back({report.levels[j], seeds[i], per_seed[i][j]});

    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < report.levels.size(); ++j) {
        std::vector<double> col;
        for (const auto& v : per_seed) col.push_back(v[j]);
        report.median.push_back(stats::median(col));
        if (report.median.back() > 0.0) {
            xs.push_back(report.levels[j]);
            ys.push_back(std::log2(report.median.back()));
        }
    }
    report.strictly_decreasing = true;
    for (std::size_t j = 1; j < report.median.size(); ++j)
        report.strictly_decreasing = report.strictly_decreasing && report.median[j] < report.median[j - 1];
    if (xs.size() >= 2) report.log2_decay_slope = stats::fit_line(xs, ys).slope;
    return report;
}

SharpnessReport sharpness_probe(double hurst, int m_max, std::span<const std::uint64_t> seeds,
                                const SharpnessOptions& options) {
    if (!(hurst > 0.0 && hurst <= 0.5)) throw DomainError("sharpness_probe: H must lie in (0, 1/2]");
    if (options.m_min < 0 || m_max < options.m_min) throw DomainError("sharpness_probe: need 0 <= m_min <= m_max");
    if (seeds.size() < 2) throw ConfigError("sharpness_probe: need at least two seeds");

    GmfbmSpec spec{{hurst}, {1.0}, 2, options.horizon};
    const GmfbmSampler sampler(spec, TimeGrid::dyadic(options.horizon, m_max), options.method);
    const auto areas = parallel_map(seeds.size(), options.threads, [&](std::size_t i) {
        const SamplePath path = sampler.draw(seeds[i]);
        std::vector<double> out;
        for (int m = options.m_min; m <= m_max; ++m) {
            const Eigen::MatrixXd l2 = lift_piecewise_linear(dyadic_nodes(path, m)).total().level2;
            out.push_back(0.5 * (l2(0, 1) - l2(1, 0)));
        }
        return out;
    });

    SharpnessReport rep;
    rep.hurst = hurst;
    for (int m = options.m_min; m <= m_max; ++m) {
        const auto j = static_cast<std::size_t>(m - options.m_min);
        std::vector<double> col;
        for (const auto& a : areas) col.push_back(a[j]);
        rep.levels.push_back(m);
        rep.area_variance.push_back(stats::variance(col));
    }
    const auto [lo, hi] = std::minmax_element(rep.area_variance.begin(), rep.area_variance.end());
    rep.growth_ratio = rep.area_variance.back() / rep.area_variance.front();
    rep.relative_spread = (*hi - *lo) / *lo;
    rep.grows = rep.growth_ratio >= options.growth_threshold;
    rep.stabilizes = rep.relative_spread <= options.stability_threshold;
    return rep;
}

std::vector<CovarianceDecayRow> covariance_decay_table(double hurst, double h, std::span<const double> gaps) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("covariance_decay_table: H outside (0,1)");
    if (!(h > 0.0)) throw DomainError("covariance_decay_table: h must be > 0");
    const GmfbmSpec spec{{hurst}, {1.0}, 1, 1.0};
    std::vector<CovarianceDecayRow> rows;
    for (double g : gaps) {
        if (g < 0.0) throw DomainError("covariance_decay_table: negative gap");
        CovarianceDecayRow row;
        row.gap = g;
        row.covariance = increment_cross_covariance(spec, 0.0, h, h + g, 2.0 * h + g);
        row.bound_shape = g >= h ? std::pow(h, 2.0 * hurst) * std::pow(g / h, 2.0 * hurst - 2.0)
                                 : std::numeric_limits<double>::quiet_NaN();
        rows.push_back(row);
    }
    return rows;
}

}  // namespace roughmix
