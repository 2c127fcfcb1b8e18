// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
//
// Expected collision local time of two independent copies of the walk,
//   Upsilon(0) = int_0^inf P{X_t = X'_t} dt
//              = (2 pi)^{-d} int_{[-pi,pi]^d} d theta / (2 (1 - Re tau^(theta))),
// by quadrature with a Monte Carlo cross-check, and the subcritical bounds
// built from it.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "pam/error.hpp"
#include "pam/model.hpp"
#include "pam/parallel.hpp"
#include "pam/rng.hpp"
#include "pam/stats.hpp"

namespace pam {

struct QuadratureTracePoint {
    int order = 0;
    std::size_t evaluations = 0;
    double value = 0.0;
    double change = 0.0;
};

struct GreensOptions {
    /// Radius of the ball around theta = 0 replaced by its leading-order term.
    double excision_radius = 1e-3;
    double rel_tol = 1e-10;
    int max_order = 96;
    std::size_t max_evaluations = 40'000'000;
    /// Monte Carlo cross-check; replicas = 0 skips it.
    std::size_t mc_replicas = 100'000;
    double mc_horizon = 1e3;
    std::uint64_t mc_seed = 0x5eed;
    unsigned threads = 1;
};

struct GreensReport {
    int dim = 0;
    double upsilon_zero = 0.0;
    /// r = 1 - 1 / (2 Upsilon(0)).
    double return_probability = 0.0;
    double quadrature_error = 0.0;
    double ball_contribution = 0.0;
    /// Index of the lattice generated by the support in Z^d.
    long long lattice_index = 1;
    std::vector<QuadratureTracePoint> trace;

    bool has_mc = false;
    double mc_estimate = 0.0;
    double mc_se = 0.0;
    double mc_tail_correction = 0.0;
    /// Return probability of the collision chain, from returns within the
    /// horizon plus the same last-decade tail extrapolation.
    double mc_return_probability = 0.0;
    double mc_return_se = 0.0;
    std::size_t mc_replicas = 0;
    double mc_horizon = 0.0;

    /// |Upsilon - 1/(2(1 - r_mc))|, the consistency gap of the local-time law.
    double consistency_gap() const
    {
        return std::abs(upsilon_zero - 0.5 / (1.0 - mc_return_probability));
    }
};

namespace detail {

/// Upper-triangular integer basis (rows) of the lattice spanned by `vectors`.
inline std::vector<std::vector<long long>> lattice_basis(std::vector<std::vector<long long>> rows, int d)
{
    const auto D = static_cast<std::size_t>(d);
    std::size_t top = 0;
    for (std::size_t c = 0; c < D; ++c) {
        for (;;) {
            std::size_t piv = rows.size();
            for (std::size_t r = top; r < rows.size(); ++r)
                if (rows[r][c] != 0 && (piv == rows.size() || std::llabs(rows[r][c]) < std::llabs(rows[piv][c])))
                    piv = r;
            require(piv < rows.size(), ErrorKind::DegenerateSupport, "support does not span Z^d");
            std::swap(rows[top], rows[piv]);
            bool reduced = true;
            for (std::size_t r = top + 1; r < rows.size(); ++r) {
                if (rows[r][c] == 0) continue;
                const long long q = rows[r][c] / rows[top][c];
                for (std::size_t k = 0; k < D; ++k) rows[r][k] -= q * rows[top][k];
                if (rows[r][c] != 0) reduced = false;
            }
            if (reduced) break;
        }
        if (rows[top][c] < 0)
            for (auto& v : rows[top]) v = -v;
        ++top;
    }
    rows.resize(D);
    return rows;
}

/// Coordinates of x in the triangular basis (exact integer solve).
inline std::vector<long long> lattice_coordinates(const std::vector<std::vector<long long>>& basis,
                                                  std::vector<long long> x)
{
    const std::size_t d = basis.size();
    std::vector<long long> k(d, 0);
    for (std::size_t c = 0; c < d; ++c) {
        require(x[c] % basis[c][c] == 0, ErrorKind::NumericalFailure, "site is not in the lattice");
        k[c] = x[c] / basis[c][c];
        for (std::size_t j = c; j < d; ++j) x[j] -= k[c] * basis[c][j];
    }
    return k;
}

struct ReducedWalk {
    int dim = 0;
    std::vector<std::vector<double>> sites;
    std::vector<double> weights;
    std::vector<double> covariance;  // row-major, in reduced coordinates
    long long index = 1;
};

/// Rewrites tau on the lattice generated by its support, so that the only zero
/// of 1 - Re tau^ on the torus is theta = 0.
inline ReducedWalk reduce_walk(const StepDistribution& tau)
{
    const int d = tau.dim();
    const auto D = static_cast<std::size_t>(d);
    std::vector<std::vector<long long>> rows;
    for (const auto& j : tau.jumps())
        if (sup_norm(j.site) > 0) rows.emplace_back(j.site.begin(), j.site.end());
    const auto basis = lattice_basis(rows, d);
    ReducedWalk w;
    w.dim = d;
    w.covariance.assign(D * D, 0.0);
    for (std::size_t c = 0; c < D; ++c) w.index *= basis[c][c];
    for (const auto& j : tau.jumps()) {
        if (sup_norm(j.site) == 0) continue;
        const auto k = lattice_coordinates(basis, {j.site.begin(), j.site.end()});
        std::vector<double> kd(k.begin(), k.end());
        for (std::size_t a = 0; a < D; ++a)
            for (std::size_t b = 0; b < D; ++b) w.covariance[a * D + b] += j.probability * kd[a] * kd[b];
        w.sites.push_back(std::move(kd));
        w.weights.push_back(j.probability);
    }
    return w;
}

inline double determinant(std::vector<double> m, std::size_t n)
{
    double det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(m[r * n + c]) > std::abs(m[piv * n + c])) piv = r;
        if (m[piv * n + c] == 0.0) return 0.0;
        if (piv != c) {
            for (std::size_t k = 0; k < n; ++k) std::swap(m[c * n + k], m[piv * n + k]);
            det = -det;
        }
        det *= m[c * n + c];
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = m[r * n + c] / m[c * n + c];
            for (std::size_t k = c; k < n; ++k) m[r * n + k] -= f * m[c * n + k];
        }
    }
    return det;
}

/// int_{|theta| < rho} d theta / (theta^T C theta)
///   = rho^{d-2} / (d-2) * 2 pi^{d/2} / Gamma((d-2)/2) * int_0^inf det(I + s C)^{-1/2} ds.
inline double excised_ball(const std::vector<double>& cov, int d, double rho)
{
    const auto D = static_cast<std::size_t>(d);
    auto f = [&](double s) {
        std::vector<double> m(cov);
        for (auto& v : m) v *= s;
        for (std::size_t a = 0; a < D; ++a) m[a * D + a] += 1.0;
        return 1.0 / std::sqrt(determinant(m, D));
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    const double radial = integrator.integrate(f);
    const double pi = boost::math::constants::pi<double>();
    const double sphere = 2.0 * std::pow(pi, 0.5 * d) / boost::math::tgamma(0.5 * (d - 2)) * radial;
    return std::pow(rho, d - 2) / (d - 2) * sphere;
}

struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

/// Gauss-Legendre rule of order n on [-1, 1].
inline GaussRule gauss_legendre(int n)
{
    GaussRule g;
    for (double z : boost::math::legendre_p_zeros<double>(n)) {
        const double dp = boost::math::legendre_p_prime(n, z);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        g.x.push_back(z);
        g.w.push_back(w);
        if (z != 0.0) {
            g.x.push_back(-z);
            g.w.push_back(w);
        }
    }
    return g;
}

/// Integral of 1 / (2 (1 - Re tau^)) over the cube minus the ball, by a
/// pyramid (Duffy) decomposition with apex at theta = 0 and tensor
/// Gauss-Legendre of order n in each pyramid coordinate.
inline double outer_integral(const ReducedWalk& w, double rho, int n, std::size_t* evaluations)
{
    const int d = w.dim;
    const auto D = static_cast<std::size_t>(d);
    const double pi = boost::math::constants::pi<double>();
    const auto rule = gauss_legendre(n);
    const std::size_t m = rule.x.size();
    const std::size_t J = w.sites.size();
    double total = 0.0;
    std::size_t evals = 0;
    std::vector<std::size_t> idx(D - 1, 0);
    std::vector<double> dir(D);
    std::vector<double> proj(J);
    for (std::size_t axis = 0; axis < D; ++axis) {
        // Re tau^ is even, so the pyramid on the -axis face equals this one.
        std::fill(idx.begin(), idx.end(), 0);
        double face = 0.0;
        for (;;) {
            double wu = 1.0, norm2 = 1.0;
            for (std::size_t a = 0, k = 0; a < D; ++a) {
                if (a == axis) {
                    dir[a] = 1.0;
                } else {
                    dir[a] = rule.x[idx[k]];
                    wu *= rule.w[idx[k]];
                    norm2 += dir[a] * dir[a];
                    ++k;
                }
            }
            for (std::size_t j = 0; j < J; ++j) {
                double p = 0.0;
                for (std::size_t a = 0; a < D; ++a) p += dir[a] * w.sites[j][a];
                proj[j] = pi * p;
            }
            const double s0 = std::min(1.0, rho / (pi * std::sqrt(norm2)));
            const double half = 0.5 * (1.0 - s0), mid = 0.5 * (1.0 + s0);
            double radial = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double s = mid + half * rule.x[i];
                double re = 0.0;
                for (std::size_t j = 0; j < J; ++j) re += w.weights[j] * (1.0 - std::cos(s * proj[j]));
                radial += rule.w[i] * std::pow(s, d - 1) / (2.0 * re);
            }
            evals += m;
            face += wu * half * radial;
            std::size_t k = 0;
            for (; k + 1 < D; ++k) {
                if (++idx[k] < m) break;
                idx[k] = 0;
            }
            if (k + 1 >= D) break;
        }
        total += 2.0 * face * std::pow(pi, d);
    }
    if (evaluations) *evaluations = evals;
    return total;
}

}  // namespace detail

struct CollisionEstimate {
    double estimate = 0.0;
    double se = 0.0;
    double tail_correction = 0.0;
    double return_probability = 0.0;
    double return_se = 0.0;
};

/// Monte Carlo estimate of Upsilon(0) from the difference walk Z = X - X',
/// which jumps at rate 2 by +Y or -Y with Y ~ tau. The occupation time of 0 is
/// Rao-Blackwellised over jump times, accumulated up to `horizon` and extended
/// by a geometric tail fitted to the last decade (P{Z_t = 0} ~ t^{-d/2}).
inline CollisionEstimate collision_local_time_mc(const StepDistribution& tau, std::size_t replicas,
                                                 double horizon, std::uint64_t seed, unsigned threads = 1)
{
    require(replicas >= 2, ErrorKind::InsufficientReplicas, "need at least two replicas");
    require(horizon > 0.0, ErrorKind::InvalidArgument, "horizon must be > 0");
    const int d = tau.dim();
    require(d >= 3, ErrorKind::RecurrentWalk, "the difference walk is recurrent for d <= 2");
    const auto D = static_cast<std::size_t>(d);
    std::vector<double> cum;
    std::vector<std::vector<int>> steps;
    double acc = 0.0;
    for (const auto& j : tau.jumps()) {
        acc += j.probability;
        cum.push_back(acc);
        steps.emplace_back(j.site.begin(), j.site.end());
    }
    const double tail_factor = 1.0 / (std::pow(10.0, 0.5 * d - 1.0) - 1.0);
    std::vector<double> est(replicas), tail(replicas), returned(replicas);
    parallel_for(replicas, threads, [&](std::size_t r) {
        rng::Stream s(seed, rng::StreamTag::CollisionWalk, r, 0);
        std::vector<long long> z(D, 0);
        bool back = false;
        auto stage = [&](double duration) {
            boost::random::poisson_distribution<long long, double> pois(2.0 * duration);
            const long long k = pois(s);
            long long visits = 1;
            for (std::size_t a = 0; a < D; ++a) visits = visits && z[a] == 0;
            for (long long i = 0; i < k; ++i) {
                const std::uint64_t u = s.next_u64();
                const double pick = static_cast<double>(u >> 11) * 0x1.0p-53;
                std::size_t j = 0;
                while (j + 1 < cum.size() && pick >= cum[j]) ++j;
                const long long sign = (u & 1u) ? 1 : -1;
                bool zero = true;
                for (std::size_t a = 0; a < D; ++a) {
                    z[a] += sign * steps[j][a];
                    zero = zero && z[a] == 0;
                }
                if (zero) {
                    ++visits;
                    back = true;
                }
            }
            return duration * static_cast<double>(visits) / static_cast<double>(k + 1);
        };
        const double first = stage(horizon / 10.0);
        const bool back_early = back;
        const double total = first + stage(horizon - horizon / 10.0);
        tail[r] = (total - first) * tail_factor;
        est[r] = total + tail[r];
        // First returns are extrapolated past the horizon like the occupation time.
        returned[r] = (back ? 1.0 : 0.0) + ((back && !back_early) ? tail_factor : 0.0);
    });
    CollisionEstimate out;
    out.estimate = stats::mean(est);
    out.se = stats::standard_error(est);
    out.tail_correction = stats::mean(tail);
    out.return_probability = stats::mean(returned);
    out.return_se = stats::standard_error(returned);
    return out;
}

/// Upsilon(0) for a transient walk (d >= 3); RecurrentWalk otherwise.
inline GreensReport upsilon_zero(const StepDistribution& tau, const GreensOptions& opt = {})
{
    const int d = tau.dim();
    require(d >= 3, ErrorKind::RecurrentWalk,
            "Upsilon(0) is infinite: the symmetrized walk is recurrent in d <= 2");
    const auto w = detail::reduce_walk(tau);
    const double pi = boost::math::constants::pi<double>();
    const double norm = std::pow(2.0 * pi, -d);

    GreensReport rep;
    rep.dim = d;
    rep.lattice_index = w.index;
    rep.ball_contribution = detail::excised_ball(w.covariance, d, opt.excision_radius);

    double prev = std::numeric_limits<double>::quiet_NaN();
    double value = 0.0, change = std::numeric_limits<double>::infinity();
    for (int n : {8, 12, 16, 24, 32, 48, 64, 96, 128}) {
        if (n > opt.max_order) break;
        if (std::pow(static_cast<double>(n), d) * d > static_cast<double>(opt.max_evaluations)) break;
        std::size_t evals = 0;
        value = norm * (rep.ball_contribution + detail::outer_integral(w, opt.excision_radius, n, &evals));
        change = std::isnan(prev) ? std::numeric_limits<double>::infinity() : std::abs(value - prev);
        rep.trace.push_back({n, evals, value, change});
        if (change <= opt.rel_tol * std::abs(value)) break;
        prev = value;
    }
    require(std::isfinite(value) && value > 0.0, ErrorKind::NumericalFailure, "quadrature failed");
    rep.upsilon_zero = value;
    // Refinement change plus the O(rho^2) relative size of the neglected
    // higher-order terms inside the excised ball.
    rep.quadrature_error = (std::isfinite(change) ? change : value)
                           + norm * rep.ball_contribution * opt.excision_radius * opt.excision_radius;
    rep.return_probability = 1.0 - 1.0 / (2.0 * value);

    if (opt.mc_replicas > 0) {
        const auto mc = collision_local_time_mc(tau, opt.mc_replicas, opt.mc_horizon, opt.mc_seed, opt.threads);
        rep.has_mc = true;
        rep.mc_estimate = mc.estimate;
        rep.mc_se = mc.se;
        rep.mc_tail_correction = mc.tail_correction;
        rep.mc_return_probability = mc.return_probability;
        rep.mc_return_se = mc.return_se;
        rep.mc_replicas = opt.mc_replicas;
        rep.mc_horizon = opt.mc_horizon;
    }
    return rep;
}

/// 1 / (Lip_sigma sqrt(Upsilon(0))), a certified lower bound on lambda_c.
inline double lambda_lower_bound(double lip, double upsilon)
{
    require(lip > 0.0, ErrorKind::InvalidArgument, "Lip_sigma must be > 0");
    require(std::isfinite(upsilon) && upsilon > 0.0, ErrorKind::RecurrentWalk, "Upsilon(0) must be finite");
    return 1.0 / (lip * std::sqrt(upsilon));
}

inline double lambda_lower_bound(const Nonlinearity& sigma, const GreensReport& rep)
{
    return lambda_lower_bound(sigma.lip(), rep.upsilon_zero);
}

/// 2 c_0^2 (1 + eps) / (1 - eps) with eps = lambda^2 Lip^2 Upsilon(0) in (0, 1).
inline double second_moment_bound(double lambda, double lip, double upsilon, double c0)
{
    const double eps = lambda * lambda * lip * lip * upsilon;
    require(eps > 0.0 && eps < 1.0, ErrorKind::EpsilonOutOfRange,
            "eps = lambda^2 Lip^2 Upsilon(0) must lie in (0, 1), got " + std::to_string(eps));
    return 2.0 * c0 * c0 * (1.0 + eps) / (1.0 - eps);
}

inline double second_moment_bound(double lambda, const Nonlinearity& sigma, const GreensReport& rep, double c0)
{
    return second_moment_bound(lambda, sigma.lip(), rep.upsilon_zero, c0);
}

/// Paley-Zygmund floor c_0^2 / (4 E W^2) for P{W >= c_0 / 2}.
inline double paley_zygmund_floor(double c0, double second_moment)
{
    require(second_moment >= c0 * c0 * (1.0 - 1e-12), ErrorKind::InvalidMoment,
            "second moment must be >= c0^2");
    return c0 * c0 / (4.0 * second_moment);
}

/// Refinement trace rows: order,evaluations,value,change.
inline void write_quadrature_trace_csv(std::ostream& os, const GreensReport& rep)
{
    const auto old = os.precision(17);
    os << "order,evaluations,value,change\n";
    for (const auto& p : rep.trace)
        os << p.order << ',' << p.evaluations << ',' << p.value << ',' << p.change << '\n';
    os.precision(old);
}

}  // namespace pam
