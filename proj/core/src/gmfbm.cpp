#include "roughmix/gmfbm.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <unsupported/Eigen/FFT>

#include "roughmix/error.hpp"
#include "roughmix/rng.hpp"

namespace roughmix {

void GmfbmSpec::validate() const {
    if (hursts.empty()) throw DomainError("GmfbmSpec: at least one component is required");
    if (hursts.size() != coeffs.size())
        throw DomainError("GmfbmSpec: hursts and coeffs differ in length");
    for (double h : hursts)
        if (!(h > 0.0 && h < 1.0)) throw DomainError("GmfbmSpec: Hurst parameter outside (0,1)");
    bool any_nonzero = false;
    for (double a : coeffs) {
        if (!std::isfinite(a)) throw DomainError("GmfbmSpec: non-finite coefficient");
        any_nonzero = any_nonzero || a != 0.0;
    }
    if (!any_nonzero) throw DomainError("GmfbmSpec: coefficients are all zero");
    if (dim < 1) throw DomainError("GmfbmSpec: dim must be >= 1");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("GmfbmSpec: horizon must be > 0");
}

double GmfbmSpec::min_hurst() const {
    if (hursts.empty()) throw DomainError("GmfbmSpec: no components");
    return *std::min_element(hursts.begin(), hursts.end());
}

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty()) throw DomainError("TimeGrid: empty");
    if (points_.front() != 0.0) throw DomainError("TimeGrid: must start at 0");
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i]) || !(points_[i] > points_[i - 1]))
            throw DomainError("TimeGrid: points must be strictly increasing");
    }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t intervals) {
    if (!(horizon > 0.0)) throw DomainError("TimeGrid::uniform: horizon must be > 0");
    if (intervals == 0) throw DomainError("TimeGrid::uniform: need at least one interval");
    std::vector<double> pts(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i)
        pts[i] = horizon * static_cast<double>(i) / static_cast<double>(intervals);
    pts.back() = horizon;
    return TimeGrid(std::move(pts));
}

TimeGrid TimeGrid::dyadic(double horizon, int level) {
    if (level < 0 || level > 40) throw DomainError("TimeGrid::dyadic: level out of range");
    return uniform(horizon, std::size_t{1} << level);
}

bool TimeGrid::is_uniform(double rel_tol) const {
    if (points_.size() < 3) return true;
    const double h = step();
    for (std::size_t i = 1; i < points_.size(); ++i)
        if (std::abs((points_[i] - points_[i - 1]) - h) > rel_tol * h) return false;
    return true;
}

double TimeGrid::step() const {
    if (points_.size() < 2) throw DomainError("TimeGrid: a single point has no step");
    return points_.back() / static_cast<double>(points_.size() - 1);
}

std::optional<std::size_t> TimeGrid::find(double t, double tol) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), t - tol);
    if (it != points_.end() && std::abs(*it - t) <= tol)
        return static_cast<std::size_t>(it - points_.begin());
    return std::nullopt;
}

std::string to_string(SampleMethod method) {
    return method == SampleMethod::cholesky ? "cholesky" : "circulant";
}

SampleMethod parse_sample_method(const std::string& name) {
    if (name == "cholesky") return SampleMethod::cholesky;
    if (name == "circulant") return SampleMethod::circulant;
    throw ConfigError("unknown sampling method '" + name + "'");
}

SamplePath::SamplePath(TimeGrid g, Eigen::MatrixXd v) : grid(std::move(g)), values(std::move(v)) {
    if (static_cast<std::size_t>(values.rows()) != grid.size())
        throw DomainError("SamplePath: row count differs from grid length");
    if (values.cols() < 1) throw DomainError("SamplePath: dimension must be >= 1");
}

double fbm_covariance(double hurst, double s, double t) {
    const double e = 2.0 * hurst;
    return 0.5 * (std::pow(s, e) + std::pow(t, e) - std::pow(std::abs(t - s), e));
}

double covariance(const GmfbmSpec& spec, double s, double t) {
    spec.validate();
    if (s < 0.0 || t < 0.0) throw DomainError("covariance: negative time");
    double acc = 0.0;
    for (std::size_t k = 0; k < spec.components(); ++k)
        acc += spec.coeffs[k] * spec.coeffs[k] * fbm_covariance(spec.hursts[k], s, t);
    return acc;
}

double increment_variance(const GmfbmSpec& spec, double s, double t) {
    spec.validate();
    if (s < 0.0 || s > t) throw DomainError("increment_variance: require 0 <= s <= t");
    double acc = 0.0;
    for (std::size_t k = 0; k < spec.components(); ++k)
        acc += spec.coeffs[k] * spec.coeffs[k] * std::pow(t - s, 2.0 * spec.hursts[k]);
    return acc;
}

double increment_cross_covariance(const GmfbmSpec& spec, double u, double v, double s, double t) {
    spec.validate();
    if (!(0.0 <= u && u <= v && v <= s && s <= t))
        throw DomainError("increment_cross_covariance: require 0 <= u <= v <= s <= t");
    double acc = 0.0;
    for (std::size_t k = 0; k < spec.components(); ++k) {
        const double e = 2.0 * spec.hursts[k];
        acc += spec.coeffs[k] * spec.coeffs[k] *
               (std::pow(t - u, e) + std::pow(s - v, e) - std::pow(t - v, e) - std::pow(s - u, e));
    }
    return 0.5 * acc;
}

GmfbmSpec self_similarity_rescale(const GmfbmSpec& spec, double h) {
    spec.validate();
    if (!(h > 0.0)) throw DomainError("self_similarity_rescale: h must be > 0");
    GmfbmSpec out = spec;
    for (std::size_t k = 0; k < out.components(); ++k) out.coeffs[k] *= std::pow(h, out.hursts[k]);
    return out;
}

namespace {

// Unblocked Cholesky that reports the first failing leading minor (1-based).
std::optional<std::size_t> failing_minor(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double d = a(j, j) - l.row(j).head(j).squaredNorm();
        if (!(d > 0.0) || !std::isfinite(d)) return static_cast<std::size_t>(j + 1);
        l(j, j) = std::sqrt(d);
        if (j + 1 < n) {
            l.col(j).tail(n - j - 1) =
                (a.col(j).tail(n - j - 1) - l.bottomLeftCorner(n - j - 1, j) * l.row(j).head(j).transpose()) /
                l(j, j);
        }
    }
    return std::nullopt;
}

}  // namespace

GmfbmSampler::GmfbmSampler(GmfbmSpec spec, TimeGrid grid, SampleMethod method)
    : spec_(std::move(spec)), grid_(std::move(grid)), method_(method) {
    spec_.validate();
    if (grid_.back() > spec_.horizon * (1.0 + 1e-12))
        throw DomainError("GmfbmSampler: grid extends beyond the horizon");
    if (method_ == SampleMethod::circulant && !grid_.is_uniform())
        throw DomainError("GmfbmSampler: circulant embedding needs a uniform grid");

    std::map<double, std::size_t> seen;
    for (double h : spec_.hursts) {
        auto [it, inserted] = seen.try_emplace(h, factors_.size());
        if (inserted) {
            std::optional<Factor> f;
            if (method_ == SampleMethod::circulant) {
                f = make_circulant(h);
                if (!f) {
                    warnings_.push_back("circulant embedding not nonnegative definite for H=" +
                                        std::to_string(h) + "; fell back to cholesky");
                }
            }
            factors_.push_back(f ? std::move(*f) : make_cholesky(h));
        }
        factor_index_.push_back(it->second);
    }
}

GmfbmSampler::Factor GmfbmSampler::make_cholesky(double hurst) const {
    Factor f;
    f.hurst = hurst;
    const Eigen::Index n = static_cast<Eigen::Index>(grid_.size()) - 1;
    if (n == 0) return f;
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            cov(i, j) = cov(j, i) = fbm_covariance(hurst, grid_[i + 1], grid_[j + 1]);

    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        cov.diagonal().array() += 1e-12 * cov.trace() / static_cast<double>(n);
        llt.compute(cov);
        if (llt.info() != Eigen::Success) {
            const auto minor = failing_minor(cov);
            throw NumericalError("fBm covariance is not positive definite for H=" + std::to_string(hurst),
                                 minor.value_or(static_cast<std::size_t>(n)));
        }
    }
    f.lower = llt.matrixL();
    return f;
}

std::optional<GmfbmSampler::Factor> GmfbmSampler::make_circulant(double hurst) const {
    const std::size_t n = grid_.intervals();
    if (n == 0) return std::nullopt;
    const std::size_t m = 2 * n;
    const double e = 2.0 * hurst;
    auto gamma = [e](double k) {
        return 0.5 * (std::pow(k + 1.0, e) + std::pow(std::abs(k - 1.0), e) - 2.0 * std::pow(k, e));
    };
    std::vector<std::complex<double>> row(m);
    for (std::size_t k = 0; k <= n; ++k) row[k] = gamma(static_cast<double>(k));
    for (std::size_t k = n + 1; k < m; ++k) row[k] = row[m - k];

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> lambda;
    fft.fwd(lambda, row);

    double max_eig = 0.0;
    for (const auto& l : lambda) max_eig = std::max(max_eig, l.real());
    Factor f;
    f.hurst = hurst;
    f.circulant = true;
    f.sqrt_eigen.resize(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
        double l = lambda[k].real();
        if (l < -1e-10 * max_eig) return std::nullopt;
        f.sqrt_eigen[static_cast<Eigen::Index>(k)] = std::sqrt(std::max(l, 0.0) / static_cast<double>(m));
    }
    return f;
}

Eigen::VectorXd GmfbmSampler::draw_component(std::size_t k, std::uint32_t coordinate, std::uint64_t seed) const {
    const Factor& f = factors_.at(factor_index_.at(k));
    const Philox4x32 rng(seed, component_stream(static_cast<std::uint32_t>(k), coordinate));
    const std::size_t n = grid_.size();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    if (n < 2) return out;

    if (!f.circulant) {
        Eigen::VectorXd z(static_cast<Eigen::Index>(n - 1));
        for (std::size_t i = 0; i + 1 < n; ++i) z[static_cast<Eigen::Index>(i)] = rng.normal(i);
        out.tail(static_cast<Eigen::Index>(n - 1)) = f.lower.triangularView<Eigen::Lower>() * z;
        return out;
    }

    const std::size_t m = static_cast<std::size_t>(f.sqrt_eigen.size());
    std::vector<std::complex<double>> z(m);
    for (std::size_t i = 0; i < m; ++i)
        z[i] = f.sqrt_eigen[static_cast<Eigen::Index>(i)] * std::complex<double>(rng.normal(i), rng.normal(m + i));
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> w;
    fft.fwd(w, z);
    const double scale = std::pow(grid_.step(), f.hurst);
    double acc = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        acc += w[i - 1].real() * scale;
        out[static_cast<Eigen::Index>(i)] = acc;
    }
    return out;
}

SamplePath GmfbmSampler::draw(std::uint64_t seed) const {
    const auto n = static_cast<Eigen::Index>(grid_.size());
    const auto d = static_cast<Eigen::Index>(spec_.dim);
    SamplePath path(grid_, Eigen::MatrixXd::Zero(n, d));
    path.spec = spec_;
    path.seed = seed;
    path.method = method_;
    path.warnings = warnings_;
    path.components.assign(spec_.components(), Eigen::MatrixXd::Zero(n, d));
    for (std::size_t k = 0; k < spec_.components(); ++k) {
        for (Eigen::Index c = 0; c < d; ++c) {
            path.components[k].col(c) = draw_component(k, static_cast<std::uint32_t>(c), seed);
            path.values.col(c) += spec_.coeffs[k] * path.components[k].col(c);
        }
    }
    return path;
}

SamplePath sample(const GmfbmSpec& spec, const TimeGrid& grid, std::uint64_t seed, SampleMethod method) {
    return GmfbmSampler(spec, grid, method).draw(seed);
}

}  // namespace roughmix
