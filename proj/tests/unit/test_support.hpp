#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "roughmix/gmfbm.hpp"

namespace roughmix::testing {

/// Random polyline with `segments` Gaussian steps on a uniform grid over [0, horizon].
inline SamplePath random_polyline(std::size_t segments, int dim, std::uint64_t seed, double horizon = 1.0,
                                  double scale = 1.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(segments) + 1, dim);
    for (Eigen::Index i = 1; i < values.rows(); ++i)
        for (Eigen::Index c = 0; c < dim; ++c) values(i, c) = values(i - 1, c) + normal(gen);
    return SamplePath(TimeGrid::uniform(horizon, segments), values);
}

/// The path t -> (t, t^2) sampled on a uniform grid over [0, 1].
inline SamplePath monomial_path(std::size_t segments) {
    const TimeGrid grid = TimeGrid::uniform(1.0, segments);
    Eigen::MatrixXd values(static_cast<Eigen::Index>(grid.size()), 2);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        values(static_cast<Eigen::Index>(i), 0) = grid[i];
        values(static_cast<Eigen::Index>(i), 1) = grid[i] * grid[i];
    }
    return SamplePath(grid, values);
}

/// Scalar path built from a function on a uniform grid over [0, horizon].
template <class F>
inline SamplePath scalar_path(std::size_t segments, double horizon, F&& f) {
    const TimeGrid grid = TimeGrid::uniform(horizon, segments);
    Eigen::MatrixXd values(static_cast<Eigen::Index>(grid.size()), 1);
    for (std::size_t i = 0; i < grid.size(); ++i) values(static_cast<Eigen::Index>(i), 0) = f(grid[i]);
    return SamplePath(grid, values);
}

inline double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

/// Ordinary least-squares slope of y against x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace roughmix::testing
