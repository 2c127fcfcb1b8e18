// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
//
// Post-processing of simulated mass trajectories: fractional moments,
// decay-law fits, survival sweeps over lambda, Laplace-functional
// monotonicity, the finite-time lower bound and local decay of u_t(x).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "pam/error.hpp"
#include "pam/model.hpp"
#include "pam/odeclass.hpp"
#include "pam/sde.hpp"
#include "pam/stats.hpp"

namespace pam {

/// Sample estimates of E[m_t^eta] on the shared sample grid.
struct MomentSeries {
    double eta = 1.0;
    std::vector<double> times;
    std::vector<double> estimates;
    std::vector<double> se;
    /// Mean of ||u_t||_2 / ||u_t||_1 across replicas (diagnostic).
    std::vector<double> l2_l1_ratio;
};

namespace detail {

inline void require_shared_grid(const std::vector<MassTrajectory>& trs)
{
    require(!trs.empty(), ErrorKind::EmptyInput, "no trajectories");
    for (const auto& tr : trs)
        require(tr.times == trs.front().times, ErrorKind::InvalidArgument,
                "trajectories do not share the sample grid");
}

}  // namespace detail

inline MomentSeries fractional_moment(const std::vector<MassTrajectory>& trs, double eta)
{
    require(eta > 0.0 && eta <= 1.0, ErrorKind::InvalidArgument, "eta must lie in (0, 1]");
    detail::require_shared_grid(trs);
    MomentSeries s;
    s.eta = eta;
    s.times = trs.front().times;
    const std::size_t n = trs.size();
    std::vector<double> col(n);
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        double ratio = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double m = trs[r].mass[k];
            col[r] = eta == 1.0 ? m : std::pow(m, eta);
            if (!trs[r].l2_norm.empty() && m > 0.0) ratio += trs[r].l2_norm[k] / m;
        }
        const auto jk = n >= 2 ? stats::jackknife_mean(col) : stats::JackknifeResult{col[0], 0.0};
        s.estimates.push_back(jk.estimate);
        s.se.push_back(jk.se);
        s.l2_l1_ratio.push_back(ratio / static_cast<double>(n));
    }
    return s;
}

/// scale * E[m_t^eta] as a sampled function. Derivatives use the same
/// stencils as estimate_derivatives; since they are linear in the sample mean,
/// their standard error is that of the per-replica derivative column.
inline SampledFunction moment_function(const std::vector<MassTrajectory>& trs, double eta, double scale = 1.0)
{
    require(scale > 0.0, ErrorKind::InvalidArgument, "scale must be > 0");
    require(trs.size() >= 2, ErrorKind::InsufficientReplicas, "need at least 2 replicas");
    const auto series = fractional_moment(trs, eta);
    SampledFunction f;
    f.times = series.times;
    for (double v : series.estimates) f.values.push_back(scale * v);
    estimate_derivatives(f);
    const std::size_t n = trs.size(), k = f.times.size();
    std::vector<std::vector<double>> per(k, std::vector<double>(n));
    SampledFunction one;
    one.times = f.times;
    one.values.resize(k);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < k; ++i) one.values[i] = scale * std::pow(trs[r].mass[i], eta);
        estimate_derivatives(one);
        for (std::size_t i = 0; i < k; ++i) per[i][r] = one.derivatives[i];
    }
    for (std::size_t i = 0; i < k; ++i) f.derivative_se.push_back(stats::standard_error(per[i]));
    return f;
}

/// Regressors for the two decay laws: t^{1/3} (one dimension) and
/// sqrt(log t) (two dimensions).
enum class DecayLaw { CubeRoot, SqrtLog };

inline double decay_regressor(DecayLaw law, double t)
{
    return law == DecayLaw::CubeRoot ? std::cbrt(t) : std::sqrt(std::log(t));
}

struct DecayFit {
    DecayLaw law = DecayLaw::CubeRoot;
    /// Rate v in E m_t^eta ~ exp(intercept - v x(t)).
    double v = 0.0;
    double intercept = 0.0;
    double v_se = 0.0;
    stats::Interval ci;
    double level = 0.95;
    std::size_t points = 0;
    bool ci_excludes_zero() const { return ci.excludes(0.0); }
};

namespace detail {

struct DecayDesign {
    std::vector<std::size_t> idx;
    std::vector<double> x;
};

inline DecayDesign decay_design(const std::vector<double>& times, DecayLaw law, double t_min)
{
    require(t_min >= 1.0, ErrorKind::InvalidArgument, "decay fits use t >= 1");
    DecayDesign d;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < t_min) continue;
        // sqrt(log t) vanishes at t = 1 and is not a usable regressor there.
        if (law == DecayLaw::SqrtLog && times[k] <= 1.0) continue;
        d.idx.push_back(k);
        d.x.push_back(decay_regressor(law, times[k]));
    }
    require(d.idx.size() >= 10, ErrorKind::WindowTooShort,
            "decay fit needs at least 10 time points with t >= 1, got " + std::to_string(d.idx.size()));
    return d;
}

inline stats::LinearFit log_fit(const DecayDesign& d, const std::vector<double>& values)
{
    std::vector<double> y;
    y.reserve(d.idx.size());
    for (std::size_t k : d.idx) {
        require(values[k] > 0.0, ErrorKind::NonPositiveEstimates,
                "cannot take the log of a non-positive moment estimate");
        y.push_back(std::log(values[k]));
    }
    return stats::ols(d.x, y);
}

}  // namespace detail

/// Least squares of log(estimate) on the law's regressor over t >= t_min;
/// the interval uses the regression residuals.
inline DecayFit fit_decay(const MomentSeries& series, DecayLaw law, double t_min = 1.0,
                          double level = 0.95)
{
    const auto d = detail::decay_design(series.times, law, t_min);
    const auto f = detail::log_fit(d, series.estimates);
    DecayFit out;
    out.law = law;
    out.v = -f.slope;
    out.intercept = f.intercept;
    out.v_se = f.slope_se;
    out.level = level;
    out.points = f.points;
    out.ci = stats::symmetric_interval(out.v, out.v_se,
                                       stats::student_quantile(0.5 + level / 2.0, f.dof()));
    return out;
}

/// As fit_decay on the fractional moment of `trs`, with the standard error of
/// v from a delete-one jackknife over replicas.
inline DecayFit fit_decay_replicas(const std::vector<MassTrajectory>& trs, double eta, DecayLaw law,
                                   double t_min = 1.0, double level = 0.95)
{
    const auto series = fractional_moment(trs, eta);
    const auto d = detail::decay_design(series.times, law, t_min);
    const auto full = detail::log_fit(d, series.estimates);
    const std::size_t n = trs.size();
    std::vector<double> totals(series.times.size(), 0.0);
    std::vector<std::vector<double>> powed(n);
    for (std::size_t r = 0; r < n; ++r) {
        powed[r].resize(series.times.size());
        for (std::size_t k : d.idx) {
            powed[r][k] = std::pow(trs[r].mass[k], eta);
            totals[k] += powed[r][k];
        }
    }
    std::vector<double> loo(series.times.size(), 0.0);
    const auto jk = stats::jackknife(n, full.slope, [&](std::size_t i) {
        for (std::size_t k : d.idx) loo[k] = (totals[k] - powed[i][k]) / static_cast<double>(n - 1);
        return detail::log_fit(d, loo).slope;
    });
    DecayFit out;
    out.law = law;
    out.v = -full.slope;
    out.intercept = full.intercept;
    out.v_se = jk.se;
    out.level = level;
    out.points = full.points;
    out.ci = stats::symmetric_interval(
        out.v, out.v_se, stats::student_quantile(0.5 + level / 2.0, static_cast<double>(n - 1)));
    return out;
}

/// E[m_t^2] for linear sigma(z) = s z from the closed equation of the two-point
/// function M_t(x, y) = E[u_t(x) u_t(y)] on a box with absorbing boundary:
///   dM/dt = (G (x) I + I (x) G) M + lambda^2 s^2 1{x = y} M,
/// integrated by classical RK4 with step dt.
inline double pam_second_moment_oracle(const StepDistribution& tau, double lambda, double c0,
                                       int box_radius, double t, double dt = 1e-4,
                                       double slope = 1.0)
{
    require(box_radius >= tau.range(), ErrorKind::BoxTooSmall, "box radius must be >= R_0");
    require(t >= 0.0 && dt > 0.0, ErrorKind::InvalidArgument, "need t >= 0 and dt > 0");
    const BoxGeometry g(tau.dim(), box_radius);
    const std::size_t n = g.size();
    // Neighbour table: nb[i * J + j] = index of i + jump j, or n when outside.
    const auto& jumps = tau.jumps();
    const std::size_t J = jumps.size();
    std::vector<std::size_t> nb(n * J);
    Site y(static_cast<std::size_t>(tau.dim()));
    for (std::size_t i = 0; i < n; ++i) {
        const Site x = g.site(i);
        for (std::size_t j = 0; j < J; ++j) {
            for (std::size_t c = 0; c < y.size(); ++c) y[c] = x[c] + jumps[j].site[c];
            nb[i * J + j] = g.contains(y) ? g.index(y) : n;
        }
    }
    const double diag = lambda * lambda * slope * slope;
    auto rhs = [&](const std::vector<double>& m, std::vector<double>& out) {
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                const double mab = m[a * n + b];
                double v = 0.0;
                for (std::size_t j = 0; j < J; ++j) {
                    const double p = jumps[j].probability;
                    const std::size_t na = nb[a * J + j], nbb = nb[b * J + j];
                    v += p * ((na < n ? m[na * n + b] : 0.0) - mab);
                    v += p * ((nbb < n ? m[a * n + nbb] : 0.0) - mab);
                }
                if (a == b) v += diag * mab;
                out[a * n + b] = v;
            }
        }
    };
    std::vector<double> m(n * n, 0.0), k1(n * n), k2(n * n), k3(n * n), k4(n * n), tmp(n * n);
    const std::size_t o = g.index(Site(static_cast<std::size_t>(tau.dim()), 0));
    m[o * n + o] = c0 * c0;
    const auto steps = static_cast<std::size_t>(std::ceil(t / dt - 1e-9));
    const double h = steps > 0 ? t / static_cast<double>(steps) : 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
        rhs(m, k1);
        for (std::size_t i = 0; i < m.size(); ++i) tmp[i] = m[i] + 0.5 * h * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < m.size(); ++i) tmp[i] = m[i] + 0.5 * h * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < m.size(); ++i) tmp[i] = m[i] + h * k3[i];
        rhs(tmp, k4);
        for (std::size_t i = 0; i < m.size(); ++i)
            m[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    double total = 0.0;
    for (double v : m) total += v;
    return total;
}

/// Survival statistics over a lambda grid with paired replicas: every lambda
/// uses the same seed, so replica r sees the same noise at every lambda.
struct SweepResult {
    std::vector<double> lambdas;
    double threshold = 0.0;
    double horizon = 0.0;
    std::size_t replicas = 0;
    std::vector<double> survival;
    std::vector<double> survival_se;
    std::vector<double> laplace;
    std::vector<double> laplace_se;
    /// Final masses m_T, indexed [lambda][replica].
    std::vector<std::vector<double>> final_mass;
    std::vector<std::size_t> overflow_count;
    /// Interpolated lambda where survival crosses 1/2 (NaN if it never does).
    double lambda_c = std::numeric_limits<double>::quiet_NaN();
};

/// Logistic interpolation of the first downward crossing of 1/2.
inline double survival_crossing(const std::vector<double>& lambdas, const std::vector<double>& survival,
                                std::size_t replicas)
{
    const double eps = 0.5 / static_cast<double>(std::max<std::size_t>(replicas, 1));
    auto logit = [eps](double p) {
        p = std::clamp(p, eps, 1.0 - eps);
        return std::log(p / (1.0 - p));
    };
    for (std::size_t k = 0; k + 1 < lambdas.size(); ++k) {
        if (survival[k] >= 0.5 && survival[k + 1] < 0.5) {
            const double a = logit(survival[k]), b = logit(survival[k + 1]);
            if (a == b) return 0.5 * (lambdas[k] + lambdas[k + 1]);
            return lambdas[k] + a / (a - b) * (lambdas[k + 1] - lambdas[k]);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

/// Summarises final masses per lambda (rows must be paired by replica).
inline SweepResult summarize_sweep(std::vector<double> lambdas, std::vector<std::vector<double>> final_mass,
                                   double threshold, double horizon)
{
    require(lambdas.size() == final_mass.size(), ErrorKind::InvalidArgument, "one mass row per lambda");
    require(!lambdas.empty() && !final_mass.front().empty(), ErrorKind::EmptyInput, "empty sweep");
    SweepResult s;
    s.threshold = threshold;
    s.horizon = horizon;
    s.replicas = final_mass.front().size();
    const double n = static_cast<double>(s.replicas);
    for (const auto& row : final_mass) {
        require(row.size() == s.replicas, ErrorKind::InvalidArgument, "unpaired sweep rows");
        double alive = 0.0, lap = 0.0, lap2 = 0.0;
        for (double m : row) {
            alive += m > threshold ? 1.0 : 0.0;
            const double e = std::exp(-m);
            lap += e;
            lap2 += e * e;
        }
        const double p = alive / n;
        s.survival.push_back(p);
        s.survival_se.push_back(std::sqrt(p * (1.0 - p) / n));
        const double lm = lap / n;
        s.laplace.push_back(lm);
        s.laplace_se.push_back(n > 1 ? std::sqrt(std::max(0.0, (lap2 / n - lm * lm) * n / (n - 1.0)) / n) : 0.0);
    }
    s.lambdas = std::move(lambdas);
    s.final_mass = std::move(final_mass);
    s.overflow_count.assign(s.lambdas.size(), 0);
    s.lambda_c = survival_crossing(s.lambdas, s.survival, s.replicas);
    return s;
}

inline SweepResult survival_sweep(const Model& model, const SimParams& base, const std::vector<double>& lambdas,
                                  double threshold, unsigned threads = 0)
{
    require(!lambdas.empty(), ErrorKind::EmptyInput, "empty lambda grid");
    for (std::size_t k = 1; k < lambdas.size(); ++k)
        require(lambdas[k] > lambdas[k - 1], ErrorKind::InvalidArgument, "lambda grid must increase strictly");
    require(threshold > 0.0 && threshold < base.c0, ErrorKind::InvalidArgument,
            "threshold must lie in (0, c0)");
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> overflow;
    for (double lambda : lambdas) {
        SimParams p = base;
        p.lambda = lambda;
        const auto trs = simulate_campaign(p, model, threads);
        std::vector<double> row;
        std::size_t of = 0;
        for (const auto& tr : trs) {
            row.push_back(tr.mass.back());
            of += tr.box_overflow ? 1 : 0;
        }
        rows.push_back(std::move(row));
        overflow.push_back(of);
    }
    auto s = summarize_sweep(lambdas, std::move(rows), threshold, base.horizon);
    s.overflow_count = std::move(overflow);
    return s;
}

struct MonotonicityViolation {
    std::size_t index = 0;  // between lambdas[index] and lambdas[index + 1]
    double difference = 0.0;
    double se = 0.0;
};

struct MonotonicityReport {
    bool pass = true;
    double bands = 3.0;
    std::vector<double> differences;
    std::vector<double> se;
    std::vector<MonotonicityViolation> violations;
};

namespace detail {

/// Paired differences f(m_{k+1}) - f(m_k); `sign` = +1 checks nondecreasing,
/// -1 checks nonincreasing.
template <class F>
MonotonicityReport paired_monotonicity(const SweepResult& s, F&& f, double sign, double bands)
{
    MonotonicityReport rep;
    rep.bands = bands;
    const std::size_t n = s.replicas;
    std::vector<double> d(n);
    for (std::size_t k = 0; k + 1 < s.lambdas.size(); ++k) {
        for (std::size_t r = 0; r < n; ++r)
            d[r] = sign * (f(s.final_mass[k + 1][r]) - f(s.final_mass[k][r]));
        const double mean = stats::mean(d);
        const double se = stats::standard_error(d);
        rep.differences.push_back(sign * mean);
        rep.se.push_back(se);
        if (mean < -bands * se) {
            rep.pass = false;
            rep.violations.push_back({k, sign * mean, se});
        }
    }
    return rep;
}

}  // namespace detail

/// Checks that E exp(-m_T(lambda)) is nondecreasing in lambda up to `bands`
/// paired standard errors.
inline MonotonicityReport laplace_monotonicity_test(const SweepResult& s, double bands = 3.0)
{
    require(s.lambdas.size() >= 3, ErrorKind::InvalidArgument, "need at least three lambda values");
    return detail::paired_monotonicity(s, [](double m) { return std::exp(-m); }, 1.0, bands);
}

/// Checks that the survival fraction is nonincreasing in lambda up to `bands`
/// paired standard errors.
inline MonotonicityReport survival_monotonicity_test(const SweepResult& s, double bands = 3.0)
{
    require(s.lambdas.size() >= 2, ErrorKind::InvalidArgument, "need at least two lambda values");
    const double th = s.threshold;
    return detail::paired_monotonicity(s, [th](double m) { return m > th ? 1.0 : 0.0; }, -1.0, bands);
}

struct LowerBoundRow {
    double t = 0.0;
    double bound = 0.0;
    double empirical = 0.0;
    double se = 0.0;
    double margin = 0.0;  // empirical - bound
    bool pass = false;    // empirical >= bound - bands * se
};

struct LowerBoundReport {
    double asymptotic_bound = 0.0;
    double bands = 3.0;
    std::vector<LowerBoundRow> rows;
    bool pass = true;

    const LowerBoundRow& at(double t) const
    {
        require(!rows.empty(), ErrorKind::EmptyInput, "no rows");
        auto best = rows.begin();
        for (auto it = rows.begin(); it != rows.end(); ++it)
            if (std::abs(it->t - t) < std::abs(best->t - t)) best = it;
        return *best;
    }
};

/// c_0^{1/(1-t)} [exp(-lambda^2 Lip^2 / 2) - e^{-c}]^{t/(t-1)} for t > 1.
inline double survival_lower_bound(double c0, double lambda, double lip, double c, double t)
{
    require(c > 0.5 * lambda * lambda * lip * lip, ErrorKind::InvalidC,
            "c must exceed lambda^2 Lip^2 / 2");
    require(t > 1.0, ErrorKind::InvalidArgument, "the bound is stated for t > 1");
    const double base = std::exp(-0.5 * lambda * lambda * lip * lip) - std::exp(-c);
    return std::pow(c0, 1.0 / (1.0 - t)) * std::pow(base, t / (t - 1.0));
}

/// Compares the empirical P{m_t >= e^{-ct}} with survival_lower_bound at every
/// sampled t > 1.
inline LowerBoundReport lower_bound_check(const std::vector<MassTrajectory>& trs, double lambda, double lip,
                                          double c, double c0, double bands = 3.0)
{
    require(c > 0.5 * lambda * lambda * lip * lip, ErrorKind::InvalidC,
            "c must exceed lambda^2 Lip^2 / 2");
    detail::require_shared_grid(trs);
    LowerBoundReport rep;
    rep.bands = bands;
    rep.asymptotic_bound = std::exp(-0.5 * lambda * lambda * lip * lip) - std::exp(-c);
    const auto& times = trs.front().times;
    const double n = static_cast<double>(trs.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        if (t <= 1.0) continue;
        LowerBoundRow row;
        row.t = t;
        row.bound = survival_lower_bound(c0, lambda, lip, c, t);
        const double level = std::exp(-c * t);
        double hits = 0.0;
        for (const auto& tr : trs) hits += tr.mass[k] >= level ? 1.0 : 0.0;
        row.empirical = hits / n;
        row.se = std::sqrt(row.empirical * (1.0 - row.empirical) / n);
        row.margin = row.empirical - row.bound;
        row.pass = row.empirical >= row.bound - bands * row.se;
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

struct LocalDecayRow {
    double c = 0.0;
    bool pass = false;
    /// max over t of sup_x P{u_t(x) > e^{-t/c}} - c e^{-t/c}.
    double worst_excess = -std::numeric_limits<double>::infinity();
    double worst_t = 0.0;
};

struct LocalDecayReport {
    std::string status;  // "PASS", "FAIL" or "no data"
    double best_c = std::numeric_limits<double>::quiet_NaN();
    std::vector<LocalDecayRow> rows;
};

/// Tests sup_x P{u_t(x) > e^{-t/c}} <= c e^{-t/c} on the snapshot times within
/// [t_min, t_max], for each c in the grid; reports the smallest c that holds.
inline LocalDecayReport local_decay_check(const std::vector<MassTrajectory>& trs, const std::vector<double>& c_grid,
                                          double t_min = 0.0,
                                          double t_max = std::numeric_limits<double>::infinity())
{
    LocalDecayReport rep;
    std::size_t snaps = 0;
    if (!trs.empty()) {
        snaps = trs.front().snapshots.size();
        for (const auto& tr : trs)
            require(tr.snapshots.size() == snaps, ErrorKind::InvalidArgument, "replicas differ in snapshots");
    }
    std::vector<std::size_t> use;
    for (std::size_t k = 0; k < snaps; ++k) {
        const double t = trs.front().snapshots[k].time;
        if (t >= t_min && t <= t_max && t > 0.0) use.push_back(k);
    }
    if (use.empty() || c_grid.empty()) {
        rep.status = "no data";
        return rep;
    }
    const double n = static_cast<double>(trs.size());
    for (double c : c_grid) {
        require(c > 0.0, ErrorKind::InvalidArgument, "c must be > 0");
        LocalDecayRow row;
        row.c = c;
        row.pass = true;
        for (std::size_t k : use) {
            const double t = trs.front().snapshots[k].time;
            const double level = std::exp(-t / c);
            const auto& g = trs.front().snapshots[k].field.geometry;
            double sup = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                double hits = 0.0;
                for (const auto& tr : trs) hits += tr.snapshots[k].field.values[i] > level ? 1.0 : 0.0;
                sup = std::max(sup, hits / n);
            }
            const double excess = sup - c * level;
            if (excess > row.worst_excess) {
                row.worst_excess = excess;
                row.worst_t = t;
            }
            if (excess > 0.0) row.pass = false;
        }
        rep.rows.push_back(row);
        if (row.pass && !(rep.best_c <= c)) rep.best_c = c;
    }
    rep.status = std::isnan(rep.best_c) ? "FAIL" : "PASS";
    return rep;
}

}  // namespace pam
