// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
//
// Numerical membership test for the class of nonnegative C^1 functions with
//   f'(t) <= -alpha sup_{K in [a, b t]} (f(t) - exp(-gamma K^2 / t)) / K^delta,  t >= 1,
// and the decay conclusions limsup log f(t) / t^nu < 0 (delta < 2,
// nu = (2 - delta) / (2 + delta)) and limsup log f(t) / sqrt(log t) < 0 (delta = 2).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "pam/error.hpp"

namespace pam {

struct SampledFunction {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> derivatives;
    /// Error estimate of each derivative (difference scheme, or user supplied).
    std::vector<double> derivative_error;
    /// Optional statistical standard error of each derivative.
    std::vector<double> derivative_se;
};

namespace detail {

/// Derivative at t_i of the quadratic through samples i, j, k.
inline double lagrange_derivative(const std::vector<double>& t, const std::vector<double>& f, std::size_t i,
                                  std::size_t j, std::size_t k)
{
    const double hj = t[j] - t[i], hk = t[k] - t[i];
    return f[i] * (-(hj + hk) / (hj * hk)) + f[j] * (hk / (hj * (hk - hj))) + f[k] * (-hj / (hk * (hk - hj)));
}

}  // namespace detail

/// Central differences on the (possibly log-spaced) grid, one-sided at the two
/// ends. The error estimate is the discrepancy between the narrow stencil and
/// a wider one, which tracks the leading truncation term.
inline void estimate_derivatives(SampledFunction& f)
{
    const auto& t = f.times;
    const auto& v = f.values;
    const std::size_t n = t.size();
    require(n >= 5, ErrorKind::WindowTooShort, "need at least 5 samples");
    f.derivatives.assign(n, 0.0);
    f.derivative_error.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double narrow, wide;
        if (i >= 2 && i + 2 < n) {
            narrow = detail::lagrange_derivative(t, v, i, i - 1, i + 1);
            wide = detail::lagrange_derivative(t, v, i, i - 2, i + 2);
        } else if (i == 1) {
            narrow = detail::lagrange_derivative(t, v, i, 0, 2);
            wide = detail::lagrange_derivative(t, v, i, 0, 3);
        } else if (i + 2 == n) {
            narrow = detail::lagrange_derivative(t, v, i, i - 1, i + 1);
            wide = detail::lagrange_derivative(t, v, i, i - 2, i + 1);
        } else if (i == 0) {
            narrow = detail::lagrange_derivative(t, v, 0, 1, 2);
            wide = detail::lagrange_derivative(t, v, 0, 2, 4);
        } else {
            narrow = detail::lagrange_derivative(t, v, i, i - 1, i - 2);
            wide = detail::lagrange_derivative(t, v, i, i - 2, i - 4);
        }
        f.derivatives[i] = narrow;
        f.derivative_error[i] = std::abs(narrow - wide);
    }
}

/// Samples fn on `times` and estimates derivatives by central differences.
inline SampledFunction sample_function(const std::function<double(double)>& fn, const std::vector<double>& times)
{
    SampledFunction f;
    f.times = times;
    for (double t : times) f.values.push_back(fn(t));
    estimate_derivatives(f);
    return f;
}

/// n points per decade from t0 to t1 inclusive.
inline std::vector<double> log_spaced(double t0, double t1, int per_decade)
{
    require(t0 > 0.0 && t1 > t0 && per_decade > 0, ErrorKind::InvalidArgument, "bad log grid");
    const auto m = static_cast<int>(std::ceil(std::log10(t1 / t0) * per_decade - 1e-9));
    std::vector<double> out;
    for (int i = 0; i <= m; ++i) out.push_back(t0 * std::pow(t1 / t0, static_cast<double>(i) / m));
    return out;
}

struct ClassParameters {
    double alpha = 1.0;
    double delta = 1.0;
    double gamma = 1.0;
    double a = 1.0;
    double b = 2.0;
};

struct MembershipResult {
    bool pass = true;
    /// min over t of -alpha sup(t) - f'(t) (negative: inequality violated
    /// before slack).
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_time = 0.0;
    double argmax_k = 0.0;
    /// Slack applied at the worst point.
    double worst_slack = 0.0;
    std::size_t points = 0;
    std::size_t failures = 0;
};

struct BracketMax {
    double value = -std::numeric_limits<double>::infinity();
    double k = 0.0;
};

/// sup_{K in [a, b t]} (f - exp(-gamma K^2 / t)) / K^delta by a logarithmic
/// scan, golden-section refinement around the best scan point, and both
/// endpoints.
inline BracketMax bracket_sup(double f, double t, double delta, double gamma, double a, double b)
{
    const double lo = a, hi = std::max(a, b * t);
    auto g = [&](double k) { return (f - std::exp(-gamma * k * k / t)) / std::pow(k, delta); };
    BracketMax best;
    auto consider = [&](double k) {
        const double v = g(k);
        if (v > best.value) best = {v, k};
    };
    consider(lo);
    consider(hi);
    if (hi <= lo) return best;
    constexpr int kScan = 96;
    const double ratio = std::pow(hi / lo, 1.0 / kScan);
    int best_i = 0;
    double k = lo;
    double scan_best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kScan; ++i, k *= ratio) {
        const double v = g(k);
        if (v > scan_best) {
            scan_best = v;
            best_i = i;
        }
        consider(k);
    }
    // Golden section on [k_{i-1}, k_{i+1}] in log K.
    double x0 = std::log(lo) + (best_i - 1) * std::log(ratio);
    double x1 = std::log(lo) + (best_i + 1) * std::log(ratio);
    x0 = std::max(x0, std::log(lo));
    x1 = std::min(x1, std::log(hi));
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = x1 - phi * (x1 - x0), d = x0 + phi * (x1 - x0);
    double gc = g(std::exp(c)), gd = g(std::exp(d));
    for (int it = 0; it < 80 && x1 - x0 > 1e-13; ++it) {
        if (gc > gd) {
            x1 = d;
            d = c;
            gd = gc;
            c = x1 - phi * (x1 - x0);
            gc = g(std::exp(c));
        } else {
            x0 = c;
            c = d;
            gc = gd;
            d = x0 + phi * (x1 - x0);
            gd = g(std::exp(d));
        }
    }
    consider(std::exp(c));
    consider(std::exp(d));
    return best;
}

namespace detail {

inline double slack_at(const SampledFunction& f, std::size_t i)
{
    double s = 3.0 * f.derivative_error[i];
    if (!f.derivative_se.empty()) s += 3.0 * f.derivative_se[i];
    return s;
}

inline void require_sampled(const SampledFunction& f)
{
    require(f.times.size() == f.values.size(), ErrorKind::InvalidArgument, "times and values differ in length");
    require(f.times.size() >= 5, ErrorKind::WindowTooShort, "membership check needs at least 5 samples");
    require(f.derivatives.size() == f.times.size() && f.derivative_error.size() == f.times.size(),
            ErrorKind::InvalidArgument, "derivatives missing; call estimate_derivatives");
    for (std::size_t i = 0; i < f.times.size(); ++i) {
        require(f.values[i] >= 0.0, ErrorKind::InvalidArgument, "values must be nonnegative");
        if (i > 0) require(f.times[i] > f.times[i - 1], ErrorKind::InvalidArgument, "times must increase strictly");
    }
}

}  // namespace detail

/// Verifies the class inequality at every sample with t >= 1, allowing a slack
/// of 3x the derivative error estimate (plus 3x its standard error if given).
inline MembershipResult check_membership(const SampledFunction& f, const ClassParameters& p)
{
    require(p.alpha > 0.0 && p.gamma > 0.0, ErrorKind::InvalidArgument, "alpha and gamma must be > 0");
    require(p.delta >= 0.0, ErrorKind::InvalidArgument, "delta must be >= 0");
    require(p.a > 0.0 && p.a < p.b, ErrorKind::InvalidArgument, "need 0 < a < b");
    detail::require_sampled(f);
    std::size_t in_window = 0;
    for (double t : f.times) in_window += t >= 1.0 ? 1 : 0;
    require(in_window >= 5, ErrorKind::WindowTooShort, "fewer than 5 samples with t >= 1");

    MembershipResult res;
    for (std::size_t i = 0; i < f.times.size(); ++i) {
        const double t = f.times[i];
        if (t < 1.0) continue;
        ++res.points;
        const auto sup = bracket_sup(f.values[i], t, p.delta, p.gamma, p.a, p.b);
        const double margin = -p.alpha * sup.value - f.derivatives[i];
        const double slack = detail::slack_at(f, i);
        if (margin + slack < 0.0) {
            res.pass = false;
            ++res.failures;
        }
        if (margin < res.worst_margin) {
            res.worst_margin = margin;
            res.worst_time = t;
            res.argmax_k = sup.k;
            res.worst_slack = slack;
        }
    }
    return res;
}

/// Largest alpha for which the inequality holds within slack at a given
/// gamma; 0 when no alpha > 0 works.
inline double max_feasible_alpha(const SampledFunction& f, double delta, double gamma, double a, double b)
{
    detail::require_sampled(f);
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.times.size(); ++i) {
        const double t = f.times[i];
        if (t < 1.0) continue;
        const auto sup = bracket_sup(f.values[i], t, delta, gamma, a, b);
        const double room = -f.derivatives[i] + detail::slack_at(f, i);
        if (sup.value > 0.0) {
            if (room <= 0.0) return 0.0;
            alpha = std::min(alpha, room / sup.value);
        } else if (room < 0.0) {
            // Right side is -alpha sup >= 0; alpha must be large enough.
            if (sup.value == 0.0) return 0.0;
        }
    }
    return std::isfinite(alpha) ? alpha : 1.0;
}

struct ClassFit {
    ClassParameters params;
    bool feasible = false;
};

/// Picks gamma from `gamma_grid` maximising the feasible alpha.
inline ClassFit fit_class_parameters(const SampledFunction& f, double delta, double a, double b,
                                     const std::vector<double>& gamma_grid)
{
    require(!gamma_grid.empty(), ErrorKind::EmptyInput, "empty gamma grid");
    ClassFit best;
    best.params = {0.0, delta, gamma_grid.front(), a, b};
    for (double g : gamma_grid) {
        require(g > 0.0, ErrorKind::InvalidArgument, "gamma must be > 0");
        const double alpha = max_feasible_alpha(f, delta, g, a, b);
        if (alpha > best.params.alpha) {
            best.params = {alpha, delta, g, a, b};
            best.feasible = true;
        }
    }
    return best;
}

struct ExponentDescriptor {
    enum class Kind { Power, SqrtLog };
    Kind kind = Kind::Power;
    double nu = 1.0;
};

inline ExponentDescriptor predicted_exponent(double delta)
{
    require(delta >= 0.0 && delta <= 2.0, ErrorKind::DeltaOutOfRange, "delta must lie in [0, 2]");
    if (delta == 2.0) return {ExponentDescriptor::Kind::SqrtLog, 0.0};
    return {ExponentDescriptor::Kind::Power, (2.0 - delta) / (2.0 + delta)};
}

/// Declared strictness threshold for a finite-window limsup to count as < 0.
inline constexpr double kStrictNegativity = -1e-3;

struct DecayConclusion {
    double limsup_estimate = 0.0;
    bool pass = false;
    ExponentDescriptor exponent;
};

/// max over the final decade of log f(t) / t^nu (or / sqrt(log t) when
/// delta = 2); pass iff the estimate is <= -1e-3.
inline DecayConclusion verify_decay_conclusion(const SampledFunction& f, double delta)
{
    const auto e = predicted_exponent(delta);
    require(!f.times.empty() && f.times.back() >= 100.0, ErrorKind::WindowTooShort,
            "decay conclusion needs samples up to t >= 100");
    const double t_end = f.times.back();
    DecayConclusion out;
    out.exponent = e;
    out.limsup_estimate = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.times.size(); ++i) {
        const double t = f.times[i];
        if (t < t_end / 10.0) continue;
        const double scale = e.kind == ExponentDescriptor::Kind::Power ? std::pow(t, e.nu) : std::sqrt(std::log(t));
        const double v = std::log(f.values[i]) / scale;
        out.limsup_estimate = std::max(out.limsup_estimate, v);
    }
    out.pass = out.limsup_estimate <= kStrictNegativity;
    return out;
}

}  // namespace pam
