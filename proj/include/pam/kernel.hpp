// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
//
// Transition probabilities p_t(x) = P{X_t = x} of the rate-one compound
// Poisson walk with jump law tau, and the Gaussian tail bound they satisfy.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "pam/detail/rows.hpp"
#include "pam/error.hpp"
#include "pam/model.hpp"

namespace pam {

inline constexpr double kPoissonTailThreshold = 1e-14;

struct TransitionKernel {
    double time = 0.0;
    LatticeField probabilities;
    /// Upper bound on probability not represented in the box (Poisson series
    /// cut-off plus mass that left the box during the convolutions).
    double truncation_error = 0.0;
    /// Number of Poisson terms kept (n = 0..terms-1).
    std::size_t terms = 0;

    const BoxGeometry& geometry() const noexcept { return probabilities.geometry; }
    double operator()(std::span<const int> x) const { return probabilities.value(x); }
};

namespace detail {

/// Smallest n with P{N > n} <= threshold for N ~ Poisson(t).
inline std::size_t poisson_cutoff(double t, double threshold)
{
    if (t == 0.0) return 0;
    auto n = static_cast<std::size_t>(std::floor(t));
    while (boost::math::gamma_p(static_cast<double>(n) + 1.0, t) > threshold) ++n;
    return n;
}

}  // namespace detail

/// p_t = sum_n e^{-t} t^n / n! tau^{*n}, with convolutions restricted to B(K).
inline TransitionKernel transition_kernel(const StepDistribution& tau, double t, int box_radius)
{
    require(t >= 0.0, ErrorKind::InvalidArgument, "t must be >= 0");
    require(box_radius >= 0, ErrorKind::InvalidArgument, "box radius must be >= 0");
    const int d = tau.dim();
    const BoxGeometry inner(d, box_radius);
    const BoxGeometry padded(d, box_radius + tau.range());
    const auto terms = detail::stencil(padded, tau);

    TransitionKernel k;
    k.time = t;
    k.probabilities = LatticeField(inner);

    std::vector<double> q(padded.size(), 0.0);
    std::vector<double> next(padded.size(), 0.0);
    std::vector<double> acc(padded.size(), 0.0);
    q[padded.index(Site(static_cast<std::size_t>(d), 0))] = 1.0;

    const std::size_t cutoff = detail::poisson_cutoff(t, kPoissonTailThreshold);
    double lost = 0.0;
    for (std::size_t n = 0; n <= cutoff; ++n) {
        const double w = (t == 0.0) ? (n == 0 ? 1.0 : 0.0)
                                    : std::exp(-t + static_cast<double>(n) * std::log(t)
                                               - std::lgamma(static_cast<double>(n) + 1.0));
        double mass = 0.0;
        detail::for_each_row(padded, box_radius, [&](std::size_t s, std::size_t len) {
            for (std::size_t i = s; i < s + len; ++i) {
                acc[i] += w * q[i];
                mass += q[i];
            }
        });
        lost += w * std::max(0.0, 1.0 - mass);
        if (n == cutoff) break;
        // q_{n+1}(x) = sum_y tau(y) q_n(x - y); halo stays zero.
        detail::for_each_row(padded, box_radius, [&](std::size_t s, std::size_t len) {
            for (std::size_t i = s; i < s + len; ++i) {
                double v = 0.0;
                for (const auto& term : terms) v += term.weight * q[i - term.offset];
                next[i] = v;
            }
        });
        std::swap(q, next);
    }
    const double tail = (t == 0.0) ? 0.0 : boost::math::gamma_p(static_cast<double>(cutoff) + 1.0, t);
    k.truncation_error = tail + lost;
    k.terms = cutoff + 1;
    k.probabilities.values = detail::crop(padded, acc, box_radius);
    return k;
}

/// Discrete convolution (p * q)(x) = sum_y p(y) q(x - y) on the box of `p`.
inline LatticeField convolve(const LatticeField& p, const LatticeField& q)
{
    require(p.geometry.dim() == q.geometry.dim(), ErrorKind::InvalidArgument, "dimension mismatch");
    LatticeField out(p.geometry);
    const auto& g = p.geometry;
    Site z(static_cast<std::size_t>(g.dim()));
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (p.values[i] == 0.0) continue;
        const Site y = g.site(i);
        for (std::size_t j = 0; j < q.geometry.size(); ++j) {
            if (q.values[j] == 0.0) continue;
            const Site w = q.geometry.site(j);
            for (std::size_t c = 0; c < z.size(); ++c) z[c] = y[c] + w[c];
            if (g.contains(z)) out.at(z) += p.values[i] * q.values[j];
        }
    }
    return out;
}

/// Probability mass of the kernel outside B(k), for k = 0..radius, plus the
/// kernel's truncation error. Summed from the outside in, so no cancellation.
inline std::vector<double> tail_profile(const TransitionKernel& k)
{
    const auto& g = k.geometry();
    std::vector<double> shell(static_cast<std::size_t>(g.radius()) + 1, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i)
        shell[static_cast<std::size_t>(sup_norm(g.site(i)))] += k.probabilities.values[i];
    std::vector<double> tail(shell.size(), 0.0);
    double outside = k.truncation_error;
    for (std::size_t r = shell.size(); r-- > 0;) {
        tail[r] = outside;
        outside += shell[r];
    }
    return tail;
}

/// Box radius that keeps the kernel truncation negligible around radius K.
inline int tail_box_radius(const StepDistribution& tau, double t, double K)
{
    const double spread = std::sqrt(tau.max_coordinate_variance() * t);
    return static_cast<int>(std::ceil(K)) + tau.range() * (static_cast<int>(std::ceil(8.0 * spread)) + 4);
}

/// P{||X_t|| > K}.
inline double tail_probability(const StepDistribution& tau, double t, double K)
{
    require(t > 0.0, ErrorKind::InvalidArgument, "t must be > 0");
    require(K >= 0.0, ErrorKind::InvalidArgument, "K must be >= 0");
    const auto kern = transition_kernel(tau, t, tail_box_radius(tau, t, K));
    const auto tail = tail_profile(kern);
    return tail[static_cast<std::size_t>(std::floor(K))];
}

struct HoeffdingPoint {
    double t = 0.0;
    double K = 0.0;
    double tail = 0.0;
    double bound = 0.0;
};

struct HoeffdingResult {
    double fitted_c = 0.0;
    /// Grid points that fail even at the smallest admissible c.
    std::vector<HoeffdingPoint> violations;
    std::size_t points_checked = 0;
};

/// Largest c in [1e-6, 10] with P{||X_t|| > K} <= 2d exp(-c K^2 / t) on the grid.
///
/// P{||X_t|| > K} is constant for K in [k, k+1) while the bound decreases, so
/// each integer k is tested against the bound at min(k + 1, q t).
inline HoeffdingResult check_hoeffding_bound(const StepDistribution& tau, double q,
                                             const std::vector<double>& t_grid)
{
    require(q > 0.0, ErrorKind::InvalidArgument, "q must be > 0");
    struct Point {
        double t, K, tail;
    };
    std::vector<Point> pts;
    for (double t : t_grid) {
        require(t >= 1.0, ErrorKind::InvalidArgument, "t grid must lie in [1, inf)");
        const double kmax = q * t;
        const auto kern = transition_kernel(tau, t, tail_box_radius(tau, t, kmax + 1.0));
        const auto tail = tail_profile(kern);
        for (int k = 0; k <= static_cast<int>(std::floor(kmax)); ++k) {
            const double K = std::min(static_cast<double>(k) + 1.0, kmax);
            pts.push_back({t, K, tail[static_cast<std::size_t>(k)]});
        }
    }
    const double prefactor = 2.0 * tau.dim();
    auto holds = [&](const Point& p, double c) {
        return p.tail <= prefactor * std::exp(-c * p.K * p.K / p.t);
    };
    auto all_hold = [&](double c) {
        return std::all_of(pts.begin(), pts.end(), [&](const Point& p) { return holds(p, c); });
    };

    HoeffdingResult res;
    res.points_checked = pts.size();
    constexpr double lo_c = 1e-6;
    constexpr double hi_c = 10.0;
    if (!all_hold(lo_c)) {
        for (const auto& p : pts)
            if (!holds(p, lo_c))
                res.violations.push_back({p.t, p.K, p.tail, prefactor * std::exp(-lo_c * p.K * p.K / p.t)});
        return res;
    }
    if (all_hold(hi_c)) {
        res.fitted_c = hi_c;
        return res;
    }
    double lo = lo_c;
    double hi = hi_c;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (all_hold(mid) ? lo : hi) = mid;
    }
    res.fitted_c = lo;
    return res;
}

/// CSV: a comment row with t, d and truncation error, then site coordinates and probability.
inline void write_kernel_csv(std::ostream& os, const TransitionKernel& k)
{
    const auto& g = k.geometry();
    const auto old = os.precision(17);
    os << "# t=" << k.time << ",d=" << g.dim() << ",truncationError=" << k.truncation_error << '\n';
    for (int j = 1; j <= g.dim(); ++j) os << 'x' << j << ',';
    os << "probability\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (int c : g.site(i)) os << c << ',';
        os << k.probabilities.values[i] << '\n';
    }
    os.precision(old);
}

}  // namespace pam
