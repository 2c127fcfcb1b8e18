// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
//
// Explicit finite-difference solver for the one-dimensional stochastic heat
// equation d psi = (1/2) psi'' dt + lambda sigma(psi) xi on [-L, L] with
// Dirichlet boundaries, and its L^1 mass M_t = int psi_t(x) dx.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "pam/error.hpp"
#include "pam/model.hpp"
#include "pam/parallel.hpp"
#include "pam/rng.hpp"
#include "pam/sde.hpp"

namespace pam {

/// (2 pi t)^{-1/2} exp(-x^2 / (2 t)).
inline double heat_kernel(double t, double x)
{
    require(t > 0.0, ErrorKind::NonPositiveTime, "heat kernel needs t > 0");
    return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
}

/// (G_t * psi0)(x) by the trapezoid rule over [x - w, x + w], w = 20 sqrt(t) + 20,
/// with `points` nodes.
inline double heat_convolution(const std::function<double(double)>& psi0, double t, double x,
                               std::size_t points = 20001)
{
    require(t > 0.0, ErrorKind::NonPositiveTime, "heat flow needs t > 0");
    require(points >= 3, ErrorKind::InvalidArgument, "need at least 3 quadrature nodes");
    const double w = 20.0 * std::sqrt(t) + 20.0;
    const double h = 2.0 * w / static_cast<double>(points - 1);
    double s = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        const double y = x - w + h * static_cast<double>(i);
        const double v = heat_kernel(t, x - y) * psi0(y);
        s += (i == 0 || i + 1 == points) ? 0.5 * v : v;
    }
    return s * h;
}

/// Nonnegative field on the grid x_j = -L + j dx, j = 0..cells; the two end
/// points carry the zero boundary condition.
struct ContinuumField {
    double half_width = 0.0;
    double dx = 0.0;
    std::vector<double> values;

    std::size_t cells() const noexcept { return values.empty() ? 0 : values.size() - 1; }
    double x(std::size_t j) const noexcept { return -half_width + dx * static_cast<double>(j); }
    double mass() const noexcept
    {
        double m = 0.0;
        for (double v : values) m += v;
        return m * dx;
    }
    /// Mass carried within `width` of either end.
    double boundary_mass(double width) const noexcept
    {
        double m = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j)
            if (x(j) <= -half_width + width + 1e-12 || x(j) >= half_width - width - 1e-12) m += values[j];
        return m * dx;
    }
};

/// Grid of spacing dx over [-L, L], L rounded up to a multiple of dx.
inline ContinuumField make_continuum_field(double half_width, double dx,
                                           const std::function<double(double)>& psi0)
{
    require(half_width > 0.0 && dx > 0.0, ErrorKind::InvalidArgument, "L and dx must be > 0");
    const auto n_half = static_cast<std::size_t>(std::ceil(half_width / dx - 1e-9));
    require(n_half >= 2, ErrorKind::InvalidArgument, "dx must be smaller than L / 2");
    ContinuumField f;
    f.dx = dx;
    f.half_width = static_cast<double>(n_half) * dx;
    f.values.assign(2 * n_half + 1, 0.0);
    for (std::size_t j = 1; j + 1 < f.values.size(); ++j) {
        const double v = psi0(f.x(j));
        require(std::isfinite(v) && v >= 0.0, ErrorKind::InvalidArgument, "initial field must be finite and >= 0");
        f.values[j] = v;
    }
    return f;
}

inline double default_continuum_half_width(double horizon) { return 5.0 * std::sqrt(horizon) + 10.0; }

struct ContinuumStepStats {
    std::uint64_t clamps = 0;
    /// sum_j sigma(psi_j)^2 dx (before the update).
    double sigma_sq = 0.0;
};

namespace detail {

template <class Sigma>
ContinuumStepStats continuum_update(const std::vector<double>& cur, std::vector<double>& next, const Sigma& sigma,
                                    double lambda, double dt, double dx, rng::Stream* noise)
{
    ContinuumStepStats st;
    const std::size_t n = cur.size();
    const double r = dt / (2.0 * dx * dx);
    const double centre = 1.0 - 2.0 * r;
    const double amp = lambda * std::sqrt(dt / dx);
    const bool noisy = lambda != 0.0 && noise != nullptr;
    next[0] = 0.0;
    next[n - 1] = 0.0;
    double sq = 0.0;
    std::uint64_t clamps = 0;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double u = cur[j];
        double v = centre * u + r * (cur[j - 1] + cur[j + 1]);
        if (noisy) {
            const double z = noise->normal();
            const double s = sigma(u);
            sq += s * s;
            v += amp * s * z;
        }
        if (v < 0.0) {
            v = 0.0;
            ++clamps;
        }
        next[j] = v;
    }
    st.clamps = clamps;
    st.sigma_sq = sq * dx;
    return st;
}

}  // namespace detail

/// One explicit step of size dt. Requires dt <= dx^2 / 2. `lambda` scales the
/// noise; the stream supplies one normal per interior grid point.
inline ContinuumStepStats step_continuum(ContinuumField& field, const Nonlinearity& sigma, double dt,
                                         rng::Stream& noise, double lambda = 1.0)
{
    require(dt > 0.0, ErrorKind::InvalidArgument, "dt must be > 0");
    require(dt <= 0.5 * field.dx * field.dx * (1.0 + 1e-12), ErrorKind::StabilityViolated,
            "explicit scheme needs dt <= dx^2 / 2");
    require(field.values.size() >= 3, ErrorKind::InvalidArgument, "field needs at least 3 grid points");
    for (double v : field.values) require(v >= 0.0, ErrorKind::InvalidArgument, "field must be nonnegative");
    std::vector<double> next(field.values.size());
    const auto st = detail::with_sigma(sigma, [&](auto s) {
        return detail::continuum_update(field.values, next, s, lambda, dt, field.dx, &noise);
    });
    field.values = std::move(next);
    return st;
}

struct ContinuumParams {
    double lambda = 1.0;
    double dx = 0.1;
    /// 0 selects dx^2 / 2.
    double dt = 0.0;
    double horizon = 1.0;
    /// 0 selects 5 sqrt(T) + 10.
    double half_width = 0.0;
    std::size_t replicas = 1;
    std::uint64_t seed = 0;
    int samples_per_decade = 30;
    double first_sample = 1e-2;
    std::vector<double> snapshot_times;

    double step() const { return dt > 0.0 ? dt : 0.5 * dx * dx; }
    double width() const { return half_width > 0.0 ? half_width : default_continuum_half_width(horizon); }

    void validate() const
    {
        require(lambda >= 0.0, ErrorKind::InvalidArgument, "lambda must be >= 0");
        require(dx > 0.0 && horizon > 0.0, ErrorKind::InvalidArgument, "dx and T must be > 0");
        require(step() <= 0.5 * dx * dx * (1.0 + 1e-12), ErrorKind::StabilityViolated,
                "explicit scheme needs dt <= dx^2 / 2");
        require(step() <= horizon, ErrorKind::InvalidArgument, "dt must be <= T");
        require(replicas >= 1, ErrorKind::InvalidArgument, "need at least one replica");
        require(samples_per_decade >= 1, ErrorKind::InvalidArgument, "samples per decade >= 1");
    }

    /// Sample grid shared with the lattice simulator.
    std::vector<std::size_t> sample_steps() const
    {
        SimParams p;
        p.dt = step();
        p.horizon = horizon;
        p.samples_per_decade = samples_per_decade;
        p.first_sample = first_sample;
        return pam::sample_steps(p);
    }
};

struct ContinuumSnapshot {
    double time = 0.0;
    ContinuumField field;
};

struct ContinuumTrajectory {
    MassTrajectory path;
    std::vector<ContinuumSnapshot> snapshots;
};

inline double gaussian_bump(double x) { return std::exp(-x * x); }

/// Simulates one replica. Mass within 5 dx of either end above 1e-6 M_t at a
/// sample time raises the boundary flag (`box_overflow`) with a diagnostic.
inline ContinuumTrajectory simulate_continuum_path(const ContinuumParams& p, const Nonlinearity& sigma,
                                                   const std::function<double(double)>& psi0,
                                                   std::size_t replica_id)
{
    p.validate();
    const double dt = p.step();
    auto field = make_continuum_field(p.width(), p.dx, psi0);
    const double m0 = field.mass();
    require(m0 > 0.0, ErrorKind::InvalidArgument, "initial mass must be > 0");
    const auto n_steps = static_cast<std::size_t>(std::llround(p.horizon / dt));
    const auto samples = p.sample_steps();
    std::vector<std::size_t> snap_steps;
    for (double t : p.snapshot_times)
        snap_steps.push_back(std::min(n_steps, static_cast<std::size_t>(std::llround(t / dt))));

    ContinuumTrajectory out;
    auto& tr = out.path;
    tr.replica_id = replica_id;
    tr.seed = p.seed;
    double qv = 0.0;
    double l2int = 0.0;
    std::vector<double> next(field.values.size());

    auto l2_sq = [&] {
        double s = 0.0;
        for (double v : field.values) s += v * v;
        return s * p.dx;
    };
    auto record = [&](std::size_t step) {
        const double m = field.mass();
        tr.times.push_back(static_cast<double>(step) * dt);
        tr.mass.push_back(m);
        tr.qv.push_back(qv);
        tr.l2_integral.push_back(l2int);
        tr.l2_norm.push_back(std::sqrt(l2_sq()));
        if (!std::isfinite(m)) {
            tr.aborted = true;
            tr.diagnostic = "non-finite mass at t=" + std::to_string(tr.times.back());
        }
        if (m > 0.0 && !tr.box_overflow && field.boundary_mass(5.0 * p.dx) > 1e-6 * m) {
            tr.box_overflow = true;
            tr.diagnostic = "BoundaryMassWarning: mass near +-L exceeds 1e-6 M_t at t=" +
                            std::to_string(tr.times.back());
        }
    };
    auto snapshot = [&](std::size_t step) {
        for (std::size_t k = 0; k < snap_steps.size(); ++k)
            if (snap_steps[k] == step) out.snapshots.push_back({p.snapshot_times[k], field});
    };

    record(0);
    snapshot(0);
    std::size_t next_sample = 1;
    detail::with_sigma(sigma, [&](auto s) {
        for (std::size_t n = 0; n < n_steps && !tr.aborted; ++n) {
            rng::Stream noise(p.seed, rng::StreamTag::ContinuumNoise, replica_id, static_cast<std::uint32_t>(n));
            const double l2 = l2_sq();
            const auto st = detail::continuum_update(field.values, next, s, p.lambda, dt, p.dx, &noise);
            std::swap(field.values, next);
            qv += p.lambda * p.lambda * st.sigma_sq * dt;
            l2int += l2 * dt;
            tr.clamp_count += st.clamps;
            tr.site_steps += field.values.size() - 2;
            if (next_sample < samples.size() && samples[next_sample] == n + 1) {
                record(n + 1);
                ++next_sample;
            }
            if (!snap_steps.empty()) snapshot(n + 1);
        }
    });
    return out;
}

/// Runs `p.replicas` replicas from psi0; ordered by replica id and identical
/// for any thread count.
inline std::vector<ContinuumTrajectory> simulate_continuum(const ContinuumParams& p, const Nonlinearity& sigma,
                                                           const std::function<double(double)>& psi0,
                                                           unsigned threads = 0)
{
    p.validate();
    std::vector<ContinuumTrajectory> out(p.replicas);
    parallel_for(p.replicas, threads,
                 [&](std::size_t r) { out[r] = simulate_continuum_path(p, sigma, psi0, r); });
    return out;
}

inline std::vector<MassTrajectory> mass_paths(const std::vector<ContinuumTrajectory>& trs)
{
    std::vector<MassTrajectory> out;
    out.reserve(trs.size());
    for (const auto& t : trs) out.push_back(t.path);
    return out;
}

struct ContinuumMeanFieldReport {
    std::size_t replicas = 0;
    std::size_t probes = 0;
    double max_abs_z = 0.0;
    double worst_x = 0.0;
    double max_abs_deviation = 0.0;
};

/// Compares the sample mean of psi_t at the probe points with (G_t * psi0)(x).
inline ContinuumMeanFieldReport continuum_mean_field_check(const std::vector<ContinuumField>& fields,
                                                           const std::function<double(double)>& psi0, double t,
                                                           const std::vector<double>& probes)
{
    require(fields.size() >= 100, ErrorKind::InsufficientReplicas,
            "mean-field check needs at least 100 replicas, got " + std::to_string(fields.size()));
    const auto& g = fields.front();
    ContinuumMeanFieldReport rep;
    rep.replicas = fields.size();
    const double n = static_cast<double>(fields.size());
    for (double x : probes) {
        const auto j = static_cast<std::size_t>(std::llround((x + g.half_width) / g.dx));
        require(j < g.values.size(), ErrorKind::InvalidArgument, "probe outside the grid");
        double s1 = 0.0;
        for (const auto& f : fields) s1 += f.values[j];
        const double mean = s1 / n;
        double s2 = 0.0;
        for (const auto& f : fields) s2 += (f.values[j] - mean) * (f.values[j] - mean);
        const double se = std::sqrt(s2 / (n - 1.0) / n);
        const double dev = mean - heat_convolution(psi0, t, g.x(j));
        ++rep.probes;
        rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(dev));
        const double z = se > 0.0 ? std::abs(dev) / se : 0.0;
        if (z > rep.max_abs_z) {
            rep.max_abs_z = z;
            rep.worst_x = g.x(j);
        }
    }
    return rep;
}

/// Same columns as the lattice trajectory CSV; the model tag ("continuum")
/// is carried by the run manifest.
inline void write_continuum_csv(std::ostream& os, const std::vector<ContinuumTrajectory>& trs)
{
    write_trajectory_csv(os, mass_paths(trs));
}

}  // namespace pam
