#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "ebpred/errors.hpp"

namespace ebpred {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// log C(n, k)
inline double log_choose(int n, int k) {
    if (k < 0 || k > n) return neg_inf;
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double log_sum_exp(std::span<const double> logs) {
    double mx = neg_inf;
    for (double v : logs) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return mx;
    double acc = 0.0;
    for (double v : logs) acc += std::exp(v - mx);
    return mx + std::log(acc);
}

inline double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

inline double normal_cdf(double x, double mean = 0.0, double sd = 1.0) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

inline double normal_quantile(double p) {
    boost::math::normal_distribution<double> d;
    return boost::math::quantile(d, p);
}

// Standard Student-t helpers (location 0, scale 1).
inline double student_t_pdf(double x, double df) {
    boost::math::students_t_distribution<double> d(df);
    return boost::math::pdf(d, x);
}

inline double student_t_cdf(double x, double df) {
    boost::math::students_t_distribution<double> d(df);
    return boost::math::cdf(d, x);
}

inline double student_t_quantile(double p, double df) {
    boost::math::students_t_distribution<double> d(df);
    return boost::math::quantile(d, p);
}

// Empirical quantile with linear interpolation between order statistics
// (R type-7). `sorted` must be ascending.
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw TooFewDraws("quantile of an empty sample");
    if (q <= 0.0) return sorted.front();
    if (q >= 1.0) return sorted.back();
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// One-sample Kolmogorov-Smirnov statistic against a CDF functor.
template <typename Cdf>
double ks_statistic(std::vector<double> draws, Cdf&& cdf) {
    std::sort(draws.begin(), draws.end());
    const double m = static_cast<double>(draws.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const double f = cdf(draws[i]);
        ks = std::max(ks, std::abs(f - static_cast<double>(i) / m));
        ks = std::max(ks, std::abs(static_cast<double>(i + 1) / m - f));
    }
    return ks;
}

}  // namespace ebpred
