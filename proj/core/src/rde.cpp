#include "roughmix/rde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "roughmix/error.hpp"
#include "roughmix/parallel.hpp"
#include "roughmix/rng.hpp"
#include "roughmix/stats.hpp"
#include "roughmix/tensor.hpp"

namespace roughmix {

VectorField linear_field(std::size_t dim) {
    VectorField f;
    f.name = "linear";
    f.state_dim = f.driver_dim = dim;
    f.eval = [](const Eigen::VectorXd& y) -> Eigen::MatrixXd { return y.asDiagonal(); };
    f.jacobian_apply = [](const Eigen::VectorXd& y, const Eigen::MatrixXd& m) -> Eigen::VectorXd {
        return y.cwiseProduct(m.diagonal());
    };
    f.bound_df = 1.0;
    f.bound_d2f = 0.0;
    return f;
}

VectorField bilinear_field(std::size_t driver_dim) {
    VectorField f;
    f.name = "bilinear";
    f.state_dim = 1;
    f.driver_dim = driver_dim;
    const auto d = static_cast<Eigen::Index>(driver_dim);
    f.eval = [d](const Eigen::VectorXd& y) -> Eigen::MatrixXd { return Eigen::MatrixXd::Constant(1, d, y(0)); };
    f.jacobian_apply = [](const Eigen::VectorXd& y, const Eigen::MatrixXd& m) -> Eigen::VectorXd {
        return Eigen::VectorXd::Constant(1, y(0) * m.sum());
    };
    f.bound_df = std::sqrt(static_cast<double>(driver_dim));
    f.bound_d2f = 0.0;
    return f;
}

VectorField bounded_sigmoid_field(std::size_t dim) {
    VectorField f;
    f.name = "bounded-sigmoid";
    f.state_dim = f.driver_dim = dim;
    f.eval = [](const Eigen::VectorXd& y) -> Eigen::MatrixXd {
        return Eigen::VectorXd(y.array().tanh()).asDiagonal();
    };
    f.jacobian_apply = [](const Eigen::VectorXd& y, const Eigen::MatrixXd& m) -> Eigen::VectorXd {
        const Eigen::ArrayXd t = y.array().tanh();
        return ((1.0 - t.square()) * t * m.diagonal().array()).matrix();
    };
    f.bound_f = 1.0;
    f.bound_df = 1.0;
    f.bound_d2f = 4.0 / (3.0 * std::sqrt(3.0));
    return f;
}

VectorField constant_field(const Eigen::MatrixXd& c) {
    VectorField f;
    f.name = "constant";
    f.state_dim = static_cast<std::size_t>(c.rows());
    f.driver_dim = static_cast<std::size_t>(c.cols());
    f.eval = [c](const Eigen::VectorXd&) -> Eigen::MatrixXd { return c; };
    f.jacobian_apply = [e = c.rows()](const Eigen::VectorXd&, const Eigen::MatrixXd&) -> Eigen::VectorXd {
        return Eigen::VectorXd::Zero(e);
    };
    f.bound_f = c.cwiseAbs().maxCoeff();
    f.bound_df = 0.0;
    f.bound_d2f = 0.0;
    return f;
}

VectorField general_linear_field(std::vector<Eigen::MatrixXd> generators) {
    if (generators.empty()) throw DomainError("general_linear_field: no generators");
    const auto e = generators.front().rows();
    for (const auto& a : generators)
        if (a.rows() != e || a.cols() != e) throw DomainError("general_linear_field: generators must be e x e");
    VectorField f;
    f.name = "general-linear";
    f.state_dim = static_cast<std::size_t>(e);
    f.driver_dim = generators.size();
    f.eval = [generators](const Eigen::VectorXd& y) -> Eigen::MatrixXd {
        Eigen::MatrixXd out(y.size(), static_cast<Eigen::Index>(generators.size()));
        for (std::size_t j = 0; j < generators.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = generators[j] * y;
        return out;
    };
    f.jacobian_apply = [generators](const Eigen::VectorXd& y, const Eigen::MatrixXd& m) -> Eigen::VectorXd {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(y.size());
        for (std::size_t i = 0; i < generators.size(); ++i) {
            const Eigen::VectorXd fi = generators[i] * y;
            for (std::size_t j = 0; j < generators.size(); ++j)
                out += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * (generators[j] * fi);
        }
        return out;
    };
    f.bound_d2f = 0.0;
    return f;
}

std::vector<std::string> field_names() { return {"linear", "bilinear", "bounded-sigmoid"}; }

VectorField make_field(const std::string& name, std::size_t driver_dim) {
    if (name == "linear") return linear_field(driver_dim);
    if (name == "bilinear") return bilinear_field(driver_dim);
    if (name == "bounded-sigmoid") return bounded_sigmoid_field(driver_dim);
    throw ConfigError("unknown vector field '" + name + "' (expected linear, bilinear or bounded-sigmoid)");
}

double jacobian_consistency(const VectorField& field, std::size_t points, std::uint64_t seed, double radius) {
    const auto e = static_cast<Eigen::Index>(field.state_dim);
    const auto d = static_cast<Eigen::Index>(field.driver_dim);
    const Philox4x32 rng(seed, 0);
    std::uint64_t counter = 0;
    auto next = [&] { return radius * rng.normal(counter++); };
    double worst = 0.0;
    for (std::size_t p = 0; p < points; ++p) {
        Eigen::VectorXd y(e);
        for (Eigen::Index i = 0; i < e; ++i) y(i) = next();
        Eigen::MatrixXd m(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) m(i, j) = next();

        const Eigen::MatrixXd fy = field.eval(y);
        Eigen::VectorXd fd = Eigen::VectorXd::Zero(e);
        for (Eigen::Index i = 0; i < d; ++i) {
            const Eigen::VectorXd dir = fy.col(i);
            const double h = 1e-6 * std::max(1.0, y.cwiseAbs().maxCoeff()) / std::max(1.0, dir.norm());
            const Eigen::MatrixXd diff = (field.eval(y + h * dir) - field.eval(y - h * dir)) / (2.0 * h);
            for (Eigen::Index j = 0; j < d; ++j) fd += m(i, j) * diff.col(j);
        }
        const Eigen::VectorXd exact = field.jacobian_apply(y, m);
        const double scale = std::max(1.0, exact.cwiseAbs().maxCoeff());
        worst = std::max(worst, (exact - fd).cwiseAbs().maxCoeff() / scale);
    }
    return worst;
}

namespace {

void check_shapes(const VectorField& field, std::size_t driver_dim, const Eigen::VectorXd& y0) {
    if (field.driver_dim != driver_dim)
        throw DomainError("vector field expects a " + std::to_string(field.driver_dim) +
                          "-dimensional driver, got " + std::to_string(driver_dim));
    if (static_cast<std::size_t>(y0.size()) != field.state_dim)
        throw DomainError("initial state has dimension " + std::to_string(y0.size()) + ", field expects " +
                          std::to_string(field.state_dim));
}

}  // namespace

Eigen::VectorXd davie_step(const Eigen::VectorXd& y, const Eigen::VectorXd& inc1, const Eigen::MatrixXd& inc2,
                           const VectorField& field) {
    Eigen::VectorXd out = y + field.eval(y) * inc1 + field.jacobian_apply(y, inc2);
    if (!out.allFinite()) throw NumericalError("davie_step: non-finite state", 0);
    return out;
}

RdeSolution solve(const Level2RoughPath& rp, const VectorField& field, const Eigen::VectorXd& y0) {
    check_shapes(field, rp.dim(), y0);
    RdeSolution sol;
    sol.times = rp.times;
    sol.scheme = "davie";
    sol.order = 2;
    sol.driver = "level-2 rough path";
    sol.states.resize(static_cast<Eigen::Index>(rp.times.size()), y0.size());
    sol.states.row(0) = y0.transpose();
    Eigen::VectorXd y = y0;
    for (std::size_t i = 0; i < rp.intervals(); ++i) {
        const Eigen::VectorXd inc1 = rp.inc1.row(static_cast<Eigen::Index>(i)).transpose();
        try {
            y = davie_step(y, inc1, rp.inc2[i], field);
        } catch (const NumericalError&) {
            throw NumericalError("solve: non-finite state after interval", i);
        }
        sol.states.row(static_cast<Eigen::Index>(i) + 1) = y.transpose();
    }
    return sol;
}

RdeSolution linear_exact(const Level2RoughPath& rp, std::span<const Eigen::MatrixXd> generators,
                         const Eigen::VectorXd& y0, int level) {
    const auto d = static_cast<int>(rp.dim());
    if (generators.size() != rp.dim()) throw DomainError("linear_exact: need one generator per driver coordinate");
    const auto e = y0.size();
    for (const auto& a : generators)
        if (a.rows() != e || a.cols() != e) throw DomainError("linear_exact: generators must be e x e");
    if (level < 1) throw DomainError("linear_exact: level must be >= 1");

    // word_maps[n][offset of w] = A_{w_n} ... A_{w_1}
    std::vector<std::vector<Eigen::MatrixXd>> word_maps(static_cast<std::size_t>(level) + 1);
    word_maps[0].push_back(Eigen::MatrixXd::Identity(e, e));
    for (int n = 1; n <= level; ++n) {
        const auto& prev = word_maps[static_cast<std::size_t>(n) - 1];
        auto& cur = word_maps[static_cast<std::size_t>(n)];
        cur.reserve(prev.size() * static_cast<std::size_t>(d));
        for (const auto& m : prev)
            for (int j = 0; j < d; ++j) cur.push_back(generators[static_cast<std::size_t>(j)] * m);
    }

    RdeSolution sol;
    sol.times = rp.times;
    sol.scheme = "rough-exponential";
    sol.order = level;
    sol.driver = "level-2 rough path";
    sol.states.resize(static_cast<Eigen::Index>(rp.times.size()), e);
    sol.states.row(0) = y0.transpose();
    Eigen::VectorXd y = y0;
    TruncatedTensor generator(d, level);
    for (std::size_t i = 0; i < rp.intervals(); ++i) {
        generator *= 0.0;
        auto l1 = generator.level_data(1);
        for (int a = 0; a < d; ++a) l1[static_cast<std::size_t>(a)] = rp.inc1(static_cast<Eigen::Index>(i), a);
        if (level >= 2) {
            auto l2 = generator.level_data(2);
            const Eigen::MatrixXd& m = rp.inc2[i];
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) l2[static_cast<std::size_t>(a * d + b)] = 0.5 * (m(a, b) - m(b, a));
        }
        const TruncatedTensor x = exp(generator);
        Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(e, e);
        for (int n = 0; n <= level; ++n) {
            const auto coeffs = x.level_data(n);
            const auto& maps = word_maps[static_cast<std::size_t>(n)];
            for (std::size_t w = 0; w < maps.size(); ++w)
                if (coeffs[w] != 0.0) phi += coeffs[w] * maps[w];
        }
        y = phi * y;
        if (!y.allFinite()) throw NumericalError("linear_exact: non-finite state after interval", i);
        sol.states.row(static_cast<Eigen::Index>(i) + 1) = y.transpose();
    }
    return sol;
}

namespace {

int dyadic_level_of(const SamplePath& path) {
    const std::size_t n = path.grid.intervals();
    int level = 0;
    while ((std::size_t{1} << level) < n) ++level;
    if ((std::size_t{1} << level) != n || !path.grid.is_uniform())
        throw ResolutionError("convergence_rate: driver must live on a dyadic grid");
    return level;
}

double slope_or_nan(const std::vector<double>& mesh, const std::vector<double>& err) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < mesh.size(); ++i)
        if (err[i] > 0.0 && std::isfinite(err[i])) {
            x.push_back(mesh[i]);
            y.push_back(err[i]);
        }
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return stats::fit_loglog(x, y).slope;
}

void check_levels(std::span<const int> levels) {
    if (levels.size() < 3) throw ConfigError("convergence_rate: need at least three mesh levels");
    for (int l : levels)
        if (l < 0 || l > 30) throw ConfigError("convergence_rate: mesh level out of range");
}

}  // namespace

RateReport convergence_rate(const SamplePath& fine, const VectorField& field, const Eigen::VectorXd& y0,
                            std::span<const int> levels) {
    check_levels(levels);
    const int ref_level = dyadic_level_of(fine);
    const int finest = *std::max_element(levels.begin(), levels.end());
    if (ref_level < finest + 1)
        throw ResolutionError("convergence_rate: reference must be finer than the finest mesh");

    const RdeSolution reference = solve(lift_piecewise_linear(fine), field, y0);
    RateReport rep;
    rep.levels.assign(levels.begin(), levels.end());
    rep.reference_level = ref_level;
    rep.predicted_exponent =
        fine.spec ? 3.0 * fine.spec->min_hurst() - 1.0 : std::numeric_limits<double>::quiet_NaN();

    std::vector<double> mesh, err;
    for (int k : levels) {
        const RdeSolution coarse = solve(lift_piecewise_linear(dyadic_nodes(fine, k)), field, y0);
        const Eigen::Index stride = Eigen::Index{1} << (ref_level - k);
        double e = 0.0;
        for (Eigen::Index i = 0; i < coarse.states.rows(); ++i)
            e = std::max(e, (coarse.states.row(i) - reference.states.row(i * stride)).cwiseAbs().maxCoeff());
        const double h = fine.grid.back() / std::ldexp(1.0, k);
        rep.rows.push_back({h, e, fine.seed});
        mesh.push_back(h);
        err.push_back(e);
    }
    rep.seed_slopes.push_back(slope_or_nan(mesh, err));
    rep.median_slope = rep.seed_slopes.front();
    return rep;
}

RateReport convergence_rate(const GmfbmSpec& spec, const VectorField& field, const Eigen::VectorXd& y0,
                            std::span<const int> levels, std::span<const std::uint64_t> seeds,
                            const RateOptions& options) {
    spec.validate();
    check_levels(levels);
    if (seeds.empty()) throw ConfigError("convergence_rate: no seeds");
    if (options.reference_extra < 1) throw ConfigError("convergence_rate: reference_extra must be >= 1");
    const int ref_level = *std::max_element(levels.begin(), levels.end()) + options.reference_extra;
    const GmfbmSampler sampler(spec, TimeGrid::dyadic(spec.horizon, ref_level), options.method);

    const auto per_seed = parallel_map(seeds.size(), options.threads, [&](std::size_t i) {
        return convergence_rate(sampler.draw(seeds[i]), field, y0, levels);
    });

    RateReport rep;
    rep.levels.assign(levels.begin(), levels.end());
    rep.reference_level = ref_level;
    rep.predicted_exponent = 3.0 * spec.min_hurst() - 1.0;
    std::vector<double> finite;
    for (const auto& r : per_seed) {
        rep.rows.insert(rep.rows.end(), r.rows.begin(), r.rows.end());
        rep.seed_slopes.push_back(r.median_slope);
        if (std::isfinite(r.median_slope)) finite.push_back(r.median_slope);
    }
    rep.median_slope = finite.empty() ? std::numeric_limits<double>::quiet_NaN() : stats::median(finite);
    return rep;
}

HolderEstimate holder_estimate(const SamplePath& path) {
    if (path.size() < 64) throw DomainError("holder_estimate: need at least 64 points");
    if (!path.grid.is_uniform()) throw DomainError("holder_estimate: needs a uniform grid");
    const std::size_t n = path.grid.intervals();
    const int log2n = static_cast<int>(std::floor(std::log2(static_cast<double>(n))));
    const int top = std::max(2, log2n - 8);
    const double dt = path.grid.step();

    HolderEstimate est;
    std::vector<double> x;
    for (int j = 0; j <= top; ++j) {
        const std::size_t lag = std::size_t{1} << j;
        if (lag >= n) break;
        const auto l = static_cast<Eigen::Index>(lag);
        const auto rows = path.values.rows() - l;
        const double m = (path.values.bottomRows(rows) - path.values.topRows(rows)).cwiseAbs().maxCoeff();
        est.lags.push_back(lag);
        est.max_increment.push_back(m);
        x.push_back(static_cast<double>(lag) * dt);
    }
    for (double m : est.max_increment)
        if (!(m > 0.0)) throw DomainError("holder_estimate: exponent undefined for a path with constant stretches");
    const auto fit = stats::fit_loglog(x, est.max_increment);
    est.exponent = fit.slope;
    est.standard_error = fit.slope_se;
    est.lower = fit.slope - 1.96 * fit.slope_se;
    est.upper = fit.slope + 1.96 * fit.slope_se;
    return est;
}

HolderEstimate holder_estimate(const RdeSolution& solution) {
    std::vector<double> times = solution.times;
    const double t0 = times.front();
    for (double& t : times) t -= t0;
    times.front() = 0.0;
    return holder_estimate(SamplePath(TimeGrid(std::move(times)), solution.states));
}

StabilityReport stability_probe(const GmfbmSpec& spec, std::span<const Perturbation> perturbations,
                                const VectorField& field, const Eigen::VectorXd& y0,
                                std::span<const std::uint64_t> seeds, const StabilityOptions& options) {
    spec.validate();
    if (seeds.empty()) throw ConfigError("stability_probe: no seeds");
    const TimeGrid grid = TimeGrid::dyadic(spec.horizon, options.level);
    const GmfbmSampler base_sampler(spec, grid, options.method);
    const auto base = parallel_map(seeds.size(), options.threads, [&](std::size_t i) {
        return solve(lift_piecewise_linear(base_sampler.draw(seeds[i])), field, y0).states;
    });

    StabilityReport rep;
    const auto k = static_cast<double>(spec.components());
    for (const auto& p : perturbations) {
        GmfbmSpec moved = spec;
        for (auto& h : moved.hursts) h += p.hurst;
        for (auto& a : moved.coeffs) a += p.coeff;
        moved.validate();
        const Eigen::VectorXd y1 = y0.array() + p.y0;
        const GmfbmSampler sampler(moved, grid, options.method);

        StabilityRow row;
        row.perturbation = p;
        row.size = k * std::abs(p.hurst) + k * std::abs(p.coeff) + static_cast<double>(y0.size()) * std::abs(p.y0);
        row.differences = parallel_map(seeds.size(), options.threads, [&](std::size_t i) {
            const Eigen::MatrixXd states = solve(lift_piecewise_linear(sampler.draw(seeds[i])), field, y1).states;
            return (states - base[i]).cwiseAbs().maxCoeff();
        });
        row.median = stats::median(row.differences);
        rep.rows.push_back(std::move(row));
    }
    std::stable_sort(rep.rows.begin(), rep.rows.end(),
                     [](const StabilityRow& a, const StabilityRow& b) { return a.size < b.size; });
    rep.monotone = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        rep.monotone = rep.monotone && rep.rows[i].median >= rep.rows[i - 1].median;
    return rep;
}

}  // namespace roughmix
