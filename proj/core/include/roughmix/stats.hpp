#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace roughmix::stats {

double mean(std::span<const double> xs);
/// Unbiased sample variance; 0 for fewer than two values.
double variance(std::span<const double> xs);
/// Standard error of the mean.
double standard_error(std::span<const double> xs);
double median(std::vector<double> xs);

/// Ordinary least-squares line y = intercept + slope * x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double intercept_se = 0.0;
    double rss = 0.0;
};

/// Requires at least two distinct abscissae; standard errors are zero when
/// only two points are given.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of log(y) against log(x).
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace roughmix::stats
