// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small statistics toolkit: sample moments, delete-one jackknife and
// ordinary least squares with Student-t intervals.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "pam/error.hpp"

namespace pam::stats {

inline double mean(const std::vector<double>& v)
{
    require(!v.empty(), ErrorKind::EmptyInput, "mean of an empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Unbiased sample variance (0 for a single observation).
inline double variance(const std::vector<double>& v)
{
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double standard_error(const std::vector<double>& v)
{
    return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

/// Two-sided quantile of the standard normal, e.g. 0.975 -> 1.95996.
inline double normal_quantile(double p)
{
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

inline double student_quantile(double p, double dof)
{
    if (!(dof > 0.0) || !std::isfinite(dof)) return normal_quantile(p);
    return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

struct JackknifeResult {
    double estimate = 0.0;
    double se = 0.0;
};

/// Delete-one jackknife. `leave_out(i)` returns the statistic without
/// observation i; `full` is the statistic on the whole sample.
template <class LeaveOut>
JackknifeResult jackknife(std::size_t n, double full, LeaveOut&& leave_out)
{
    require(n >= 2, ErrorKind::InsufficientReplicas, "jackknife needs at least two observations");
    std::vector<double> loo(n);
    double avg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        loo[i] = leave_out(i);
        avg += loo[i];
    }
    avg /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : loo) ss += (v - avg) * (v - avg);
    const double nn = static_cast<double>(n);
    return {full, std::sqrt((nn - 1.0) / nn * ss)};
}

/// Jackknife standard error of a sample mean; equals the classical SE.
inline JackknifeResult jackknife_mean(const std::vector<double>& v)
{
    const double n = static_cast<double>(v.size());
    double total = 0.0;
    for (double x : v) total += x;
    return jackknife(v.size(), total / n, [&](std::size_t i) { return (total - v[i]) / (n - 1.0); });
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double intercept_se = 0.0;
    double residual_sd = 0.0;
    std::size_t points = 0;
    double dof() const { return static_cast<double>(points) - 2.0; }
};

/// Least squares y = intercept + slope x.
inline LinearFit ols(const std::vector<double>& x, const std::vector<double>& y)
{
    require(x.size() == y.size(), ErrorKind::InvalidArgument, "x and y differ in length");
    require(x.size() >= 2, ErrorKind::EmptyInput, "need at least two points to fit a line");
    const double n = static_cast<double>(x.size());
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    require(sxx > 0.0, ErrorKind::InvalidArgument, "regressor is constant");
    LinearFit f;
    f.points = x.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        rss += r * r;
    }
    if (x.size() > 2) {
        const double s2 = rss / (n - 2.0);
        f.residual_sd = std::sqrt(s2);
        f.slope_se = std::sqrt(s2 / sxx);
        f.intercept_se = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    }
    return f;
}

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool excludes(double v) const { return v < lo || v > hi; }
};

inline Interval symmetric_interval(double centre, double se, double quantile)
{
    return {centre - quantile * se, centre + quantile * se};
}

}  // namespace pam::stats
