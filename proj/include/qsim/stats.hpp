// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "qsim/common.hpp"

namespace qsim {

inline double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw Error("mean: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

/// Standard error of the sample mean.
inline double standard_error(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    return sample_sd(xs) / std::sqrt(static_cast<double>(xs.size()));
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw Error("median: empty sample");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return (n % 2) ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

/// Binomial standard error sqrt(p(1-p)/n).
inline double binomial_se(double p, std::size_t n) {
    if (n == 0) return 0.0;
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

struct Interval {
    double low;
    double high;
};

/// Wilson score interval for a binomial proportion (default 95%).
inline Interval wilson_interval(std::size_t successes, std::size_t n,
                                double z = 1.959963984540054) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = (z / denom) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

/// 0.999 quantile of the chi-squared distribution for the few dof used by the
/// uniformity tests.
inline double chi2_quantile_999(int dof) {
    switch (dof) {
        case 1: return 10.8276;
        case 3: return 16.2662;
        case 7: return 24.3219;
        case 15: return 37.6973;
        case 31: return 61.0983;
        case 63: return 103.442;
        default: throw Error("chi2_quantile_999: dof not tabulated");
    }
}

/// Pearson chi-squared statistic against a uniform expectation.
inline double chi2_uniform(const std::vector<std::size_t>& counts) {
    if (counts.empty()) throw Error("chi2_uniform: empty counts");
    std::size_t total = 0;
    for (auto c : counts) total += c;
    const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
    double stat = 0.0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    return stat;
}

}  // namespace qsim
