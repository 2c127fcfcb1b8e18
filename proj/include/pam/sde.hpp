// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
//
// Time stepping of du_t(x) = (G u_t)(x) dt + lambda sigma(u_t(x)) dB_t(x) on a
// truncated box, started from c_0 delta_0, with total-mass bookkeeping.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pam/detail/rows.hpp"
#include "pam/error.hpp"
#include "pam/kernel.hpp"
#include "pam/model.hpp"
#include "pam/parallel.hpp"
#include "pam/rng.hpp"

namespace pam {

struct FieldSnapshot {
    double time = 0.0;
    LatticeField field;
};

/// Total mass m_t(lambda) of one replica at the sample times.
struct MassTrajectory {
    std::vector<double> times;
    std::vector<double> mass;
    /// Running quadratic variation lambda^2 int sum_y sigma(u_s(y))^2 ds.
    std::vector<double> qv;
    /// int ||u_s||_{l2}^2 ds, for the quadratic-variation sandwich.
    std::vector<double> l2_integral;
    /// ||u_t||_{l2} at the sample times.
    std::vector<double> l2_norm;
    std::uint64_t clamp_count = 0;
    std::uint64_t site_steps = 0;
    std::size_t replica_id = 0;
    std::uint64_t seed = 0;
    /// Mass within R_0 of the boundary exceeded 1e-6 m_t at some sample time.
    bool box_overflow = false;
    /// Time at which the mass reached SimParams::extinction_mass, or -1.
    double extinct_at = -1.0;
    bool aborted = false;
    std::string diagnostic;
    std::vector<FieldSnapshot> snapshots;
};

/// Step indices of the sample grid: 0, then t_i = T r^{M-i} at `samples_per_decade`
/// points per decade from `first_sample` up to T, rounded to the step grid.
inline std::vector<std::size_t> sample_steps(const SimParams& p)
{
    const auto n_steps = static_cast<std::size_t>(std::llround(p.horizon / p.dt));
    std::vector<std::size_t> steps{0};
    const double t_first = std::clamp(p.first_sample, p.dt, p.horizon);
    const double decades = std::log10(p.horizon / t_first);
    const auto m = static_cast<std::size_t>(std::ceil(decades * p.samples_per_decade - 1e-9));
    const double r = m > 0 ? std::pow(10.0, -1.0 / p.samples_per_decade) : 1.0;
    for (std::size_t i = 0; i <= m; ++i) {
        const double t = p.horizon * std::pow(r, static_cast<double>(m - i));
        auto s = static_cast<std::size_t>(std::llround(t / p.dt));
        s = std::clamp<std::size_t>(s, 1, n_steps);
        if (s > steps.back()) steps.push_back(s);
    }
    if (steps.back() != n_steps) steps.push_back(n_steps);
    return steps;
}

namespace detail {

/// Padded double-buffered field driven one step at a time over a centred
/// active box. Storage outside the active box stays zero and acts as the
/// absorbing boundary.
class LatticeStepper {
  public:
    LatticeStepper(const StepDistribution& tau, int max_radius)
        : storage_(tau.dim(), max_radius + tau.range()),
          max_radius_(max_radius),
          range_(tau.range()),
          stencil_(stencil(storage_, tau)),
          cur_(storage_.size(), 0.0),
          next_(storage_.size(), 0.0)
    {
    }

    const BoxGeometry& storage() const noexcept { return storage_; }
    int max_radius() const noexcept { return max_radius_; }
    std::vector<double>& values() noexcept { return cur_; }
    const std::vector<double>& values() const noexcept { return cur_; }

    struct StepStats {
        std::uint64_t clamps = 0;
        double sigma_sq = 0.0;  // sum_y sigma(u(y))^2
        double l2_sq = 0.0;     // sum_y u(y)^2
        double mass_after = 0.0;
        std::size_t sites = 0;
    };

    /// Advances the active box of radius `radius` by dt.
    template <class Sigma>
    StepStats step(int radius, const Sigma& sigma, double lambda, double dt, Scheme scheme,
                   rng::Stream* noise)
    {
        StepStats st;
        const bool noisy = lambda != 0.0 && noise != nullptr;
        for_each_row(storage_, radius, [&](std::size_t start, std::size_t len) {
            if (z_.size() < len) z_.resize(len);
            if (noisy)
                for (std::size_t i = 0; i < len; ++i) z_[i] = noise->normal();
            else
                std::fill_n(z_.begin(), len, 0.0);
            if (scheme == Scheme::MultiplicativeSplit)
                split_row(start, len, sigma.slope(), lambda, dt, st);
            else
                euler_row(start, len, sigma, lambda, dt, st);
            st.sites += len;
        });
        std::swap(cur_, next_);
        return st;
    }

    double mass(int radius) const
    {
        double m = 0.0;
        for_each_row(storage_, radius, [&](std::size_t s, std::size_t len) {
            for (std::size_t i = s; i < s + len; ++i) m += cur_[i];
        });
        return m;
    }

    double l2_sq(int radius) const
    {
        double m = 0.0;
        for_each_row(storage_, radius, [&](std::size_t s, std::size_t len) {
            for (std::size_t i = s; i < s + len; ++i) m += cur_[i] * cur_[i];
        });
        return m;
    }

    /// Mass on sites within R_0 of the boundary of the active box.
    double boundary_mass(int radius) const
    {
        const int inner = radius - range_;
        if (inner < 0) return mass(radius);
        return mass(radius) - mass(inner);
    }

    LatticeField field(int radius) const
    {
        LatticeField f(BoxGeometry(storage_.dim(), radius));
        f.values = crop(storage_, cur_, radius);
        return f;
    }

    void load(const LatticeField& f)
    {
        std::fill(cur_.begin(), cur_.end(), 0.0);
        const auto& g = f.geometry;
        for (std::size_t i = 0; i < g.size(); ++i) cur_[storage_.index(g.site(i))] = f.values[i];
    }

  private:
    double drift(const double* u, std::size_t i, double dt) const noexcept
    {
        double conv = 0.0;
        for (const auto& term : stencil_) conv += term.weight * u[i + term.offset];
        return u[i] + dt * (conv - u[i]);
    }

    template <class Sigma>
    void euler_row(std::size_t start, std::size_t len, const Sigma& sigma, double lambda, double dt,
                   StepStats& st)
    {
        const double* u = cur_.data();
        double* out = next_.data();
        const double* z = z_.data();
        const double scale = lambda * std::sqrt(dt);
        double sigma_sq = 0.0, l2_sq = 0.0, mass = 0.0;
        std::uint64_t clamps = 0;
        for (std::size_t k = 0; k < len; ++k) {
            const std::size_t i = start + k;
            const double ui = u[i];
            const double s = sigma(ui);
            sigma_sq += s * s;
            l2_sq += ui * ui;
            double v = drift(u, i, dt) + scale * s * z[k];
            if (v < 0.0) {
                v = 0.0;
                ++clamps;
            }
            out[i] = v;
            mass += v;
        }
        st.mass_after += mass;
        st.sigma_sq += sigma_sq;
        st.l2_sq += l2_sq;
        st.clamps += clamps;
    }

    void split_row(std::size_t start, std::size_t len, double slope, double lambda, double dt,
                   StepStats& st)
    {
        const double* u = cur_.data();
        double* out = next_.data();
        const double* z = z_.data();
        const double a = lambda * slope * std::sqrt(dt);
        const double ito = 0.5 * a * a;
        double l2_sq = 0.0, mass = 0.0;
        for (std::size_t k = 0; k < len; ++k) {
            const std::size_t i = start + k;
            const double ui = u[i];
            l2_sq += ui * ui;
            const double v = drift(u, i, dt) * std::exp(a * z[k] - ito);
            out[i] = v;
            mass += v;
        }
        st.mass_after += mass;
        st.sigma_sq += slope * slope * l2_sq;
        st.l2_sq += l2_sq;
    }

    BoxGeometry storage_;
    int max_radius_;
    int range_;
    std::vector<StencilTerm> stencil_;
    std::vector<double> cur_;
    std::vector<double> next_;
    std::vector<double> z_;
};

/// Adapts Nonlinearity for the stepper: linear sigma avoids the dispatch.
struct LinearSigma {
    double k;
    double operator()(double z) const noexcept { return k * z; }
    double slope() const noexcept { return k; }
};

struct GeneralSigma {
    const Nonlinearity* s;
    double operator()(double z) const { return (*s)(z); }
    double slope() const noexcept { return s->is_linear() ? s->slope() : 0.0; }
};

template <class Fn>
decltype(auto) with_sigma(const Nonlinearity& s, Fn&& fn)
{
    if (s.is_linear()) return fn(LinearSigma{s.slope()});
    return fn(GeneralSigma{&s});
}

}  // namespace detail

struct StepResult {
    LatticeField field;
    std::uint64_t clamps = 0;
};

/// One Euler-Maruyama step on the whole box of `field`, with positivity clamping:
/// u'(x) = max(0, u(x) + (G u)(x) dt + lambda sigma(u(x)) sqrt(dt) Z_x).
/// Normals are drawn from `noise` in site order.
inline StepResult step_euler_maruyama(const LatticeField& field, const StepDistribution& tau,
                                      const Nonlinearity& sigma, double lambda, double dt,
                                      rng::Stream& noise)
{
    require(dt > 0.0, ErrorKind::InvalidArgument, "dt must be > 0");
    require(field.geometry.dim() == tau.dim(), ErrorKind::InvalidArgument, "dimension mismatch");
    for (double v : field.values)
        require(v >= 0.0, ErrorKind::InvalidArgument, "field must be nonnegative");
    const int radius = field.geometry.radius();
    detail::LatticeStepper stepper(tau, radius);
    stepper.load(field);
    const auto st = detail::with_sigma(sigma, [&](auto s) {
        return stepper.step(radius, s, lambda, dt, Scheme::EulerMaruyama, &noise);
    });
    auto out = stepper.field(radius);
    for (double v : out.values) require(std::isfinite(v), ErrorKind::NumericalFailure, "non-finite state");
    return {std::move(out), st.clamps};
}

/// Simulates one replica from u_0 = c_0 delta_0 to the horizon.
inline MassTrajectory simulate_path(const SimParams& p, const Model& model, std::size_t replica_id)
{
    const auto& tau = model.tau;
    p.validate(tau);
    if (p.scheme == Scheme::MultiplicativeSplit)
        require(model.sigma.is_linear(), ErrorKind::InvalidArgument,
                "the multiplicative split scheme needs a linear sigma");
    const int kmax = p.max_box_radius(tau);
    const auto n_steps = static_cast<std::size_t>(std::llround(p.horizon / p.dt));
    const auto samples = sample_steps(p);

    std::vector<std::size_t> snap_steps;
    for (double t : p.snapshot_times)
        snap_steps.push_back(std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(t / p.dt)), 0, n_steps));

    detail::LatticeStepper stepper(tau, kmax);
    stepper.values()[stepper.storage().index(Site(static_cast<std::size_t>(tau.dim()), 0))] = p.c0;

    auto radius_at = [&](std::size_t step) {
        if (p.box.kind != BoxPolicy::Kind::Growth) return kmax;
        return std::min(kmax, default_box_radius(tau, static_cast<double>(step) * p.dt));
    };

    MassTrajectory tr;
    tr.replica_id = replica_id;
    tr.seed = p.seed;
    double qv = 0.0;
    double l2int = 0.0;
    std::size_t next_sample = 0;
    int radius = radius_at(0);

    auto record = [&](std::size_t step) {
        const double m = stepper.mass(radius);
        tr.times.push_back(static_cast<double>(step) * p.dt);
        tr.mass.push_back(m);
        tr.qv.push_back(qv);
        tr.l2_integral.push_back(l2int);
        tr.l2_norm.push_back(std::sqrt(stepper.l2_sq(radius)));
        if (!std::isfinite(m)) {
            tr.aborted = true;
            tr.diagnostic = "non-finite mass at t=" + std::to_string(tr.times.back());
        }
        if (m > 0.0 && stepper.boundary_mass(radius) > 1e-6 * m) tr.box_overflow = true;
    };
    auto snapshot = [&](std::size_t step) {
        for (std::size_t k = 0; k < snap_steps.size(); ++k)
            if (snap_steps[k] == step)
                tr.snapshots.push_back({p.snapshot_times[k], stepper.field(kmax)});
    };

    record(0);
    snapshot(0);
    ++next_sample;
    detail::with_sigma(model.sigma, [&](auto sigma) {
        for (std::size_t n = 0; n < n_steps && !tr.aborted; ++n) {
            radius = radius_at(n + 1);
            double mass_now = 0.0;
            if (tr.extinct_at < 0.0) {
                rng::Stream noise(p.seed, rng::StreamTag::LatticeNoise, replica_id,
                                  static_cast<std::uint32_t>(n));
                const auto st = stepper.step(radius, sigma, p.lambda, p.dt, p.scheme, &noise);
                mass_now = st.mass_after;
                qv += p.lambda * p.lambda * st.sigma_sq * p.dt;
                l2int += st.l2_sq * p.dt;
                tr.clamp_count += st.clamps;
                tr.site_steps += st.sites;
            }
            if (next_sample < samples.size() && samples[next_sample] == n + 1) {
                record(n + 1);
                ++next_sample;
            }
            if (!snap_steps.empty()) snapshot(n + 1);
            if (tr.extinct_at < 0.0 && p.extinction_mass > 0.0 && mass_now <= p.extinction_mass)
                tr.extinct_at = static_cast<double>(n + 1) * p.dt;
        }
    });
    return tr;
}

/// Runs `p.replicas` independent replicas; the result is ordered by replica id
/// and identical for any thread count.
inline std::vector<MassTrajectory> simulate_campaign(const SimParams& p, const Model& model,
                                                     unsigned threads = 0)
{
    p.validate(model.tau);
    std::vector<MassTrajectory> out(p.replicas);
    parallel_for(p.replicas, threads, [&](std::size_t r) { out[r] = simulate_path(p, model, r); });
    return out;
}

struct MeanFieldReport {
    std::size_t replicas = 0;
    double max_abs_z = 0.0;
    Site worst_site;
    double max_abs_deviation = 0.0;
    std::size_t sites_compared = 0;
};

/// Compares the site-wise sample mean of u_t(x) with c_0 p_t(-x).
///
/// With `dt` > 0 the reference is instead the mean of the explicit scheme,
/// c_0 (I + dt G)^{t/dt} delta_0, which removes the O(dt) time-stepping bias
/// that dominates the z-scores far from the origin.
/// Sites whose sample variance vanishes are compared absolutely (deviation
/// must stay within `exact_tol`); otherwise a z-score is formed.
inline MeanFieldReport mean_field_check(const std::vector<LatticeField>& fields,
                                        const StepDistribution& tau, double t, double c0,
                                        double exact_tol = 1e-9, double dt = 0.0)
{
    require(fields.size() >= 100, ErrorKind::InsufficientReplicas,
            "mean-field check needs at least 100 replicas, got " + std::to_string(fields.size()));
    require(dt >= 0.0, ErrorKind::InvalidArgument, "dt must be >= 0");
    const auto& g = fields.front().geometry;
    const int kbox = g.radius() + tau.range() * 4 + static_cast<int>(std::ceil(8 * std::sqrt(t)));
    std::function<double(const Site&)> reference;
    std::optional<TransitionKernel> kern;
    std::optional<detail::LatticeStepper> heat;
    if (dt > 0.0) {
        heat.emplace(tau, kbox);
        heat->values()[heat->storage().index(Site(static_cast<std::size_t>(g.dim()), 0))] = c0;
        const auto steps = static_cast<std::size_t>(std::llround(t / dt));
        for (std::size_t k = 0; k < steps; ++k)
            heat->step(kbox, detail::LinearSigma{0.0}, 0.0, dt, Scheme::EulerMaruyama, nullptr);
        reference = [&](const Site& x) { return heat->values()[heat->storage().index(x)]; };
    } else {
        kern = transition_kernel(tau, t, kbox);
        reference = [&](const Site& x) {
            Site neg(x);
            for (int& v : neg) v = -v;
            return c0 * (*kern)(neg);
        };
    }
    const double n = static_cast<double>(fields.size());

    MeanFieldReport rep;
    rep.replicas = fields.size();
    for (std::size_t i = 0; i < g.size(); ++i) {
        double s1 = 0.0;
        bool constant = true;
        for (const auto& f : fields) {
            s1 += f.values[i];
            constant = constant && f.values[i] == fields.front().values[i];
        }
        const double mean = constant ? fields.front().values[i] : s1 / n;
        double s2 = 0.0;
        if (!constant)
            for (const auto& f : fields) s2 += (f.values[i] - mean) * (f.values[i] - mean);
        const double var = s2 / (n - 1.0);
        const Site x = g.site(i);
        const double expected = reference(x);
        const double dev = mean - expected;
        rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(dev));
        ++rep.sites_compared;
        const double se = std::sqrt(var / n);
        double z = 0.0;
        if (se > 0.0) {
            z = dev / se;
        } else if (std::abs(dev) > exact_tol) {
            z = std::numeric_limits<double>::infinity();
        }
        if (std::abs(z) > rep.max_abs_z) {
            rep.max_abs_z = std::abs(z);
            rep.worst_site = x;
        }
    }
    return rep;
}

/// Trajectory CSV rows: replicaId,t,mass,qv.
inline void write_trajectory_csv(std::ostream& os, const std::vector<MassTrajectory>& trs)
{
    const auto old = os.precision(17);
    os << "replicaId,t,mass,qv\n";
    for (const auto& tr : trs)
        for (std::size_t i = 0; i < tr.times.size(); ++i)
            os << tr.replica_id << ',' << tr.times[i] << ',' << tr.mass[i] << ',' << tr.qv[i] << '\n';
    os.precision(old);
}

}  // namespace pam
