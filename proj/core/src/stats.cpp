#include "roughmix/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "roughmix/error.hpp"

namespace roughmix::stats {

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return acc / static_cast<double>(xs.size() - 1);
}

double standard_error(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw DomainError("median of an empty sample");
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
    const double upper = xs[mid];
    if (xs.size() % 2 == 1) return upper;
    const double lower = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("fit_line: x and y differ in length");
    if (x.size() < 2) throw DomainError("fit_line: need at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw DomainError("fit_line: abscissae are all equal");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        fit.rss += r * r;
    }
    if (x.size() > 2) {
        const double sigma2 = fit.rss / (n - 2.0);
        fit.slope_se = std::sqrt(sigma2 / sxx);
        fit.intercept_se = std::sqrt(sigma2 * (1.0 / n + mx * mx / sxx));
    }
    return fit;
}

LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("fit_loglog: non-positive value");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

}  // namespace roughmix::stats
