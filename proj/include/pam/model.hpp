// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
//
// Lattice model: jump law of the underlying walk, its generator, and the
// noise nonlinearity.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pam/error.hpp"

namespace pam {

using Site = std::vector<int>;

/// Sup norm; used for box membership and the range R_0.
inline int sup_norm(std::span<const int> x) noexcept
{
    int m = 0;
    for (int v : x) m = std::max(m, std::abs(v));
    return m;
}

//---------------------------------------------------------------------------//
// Box geometry
//---------------------------------------------------------------------------//

/// The hypercube B(K) = {x : ||x|| <= K}, stored row-major with the first
/// coordinate fastest.
class BoxGeometry {
  public:
    BoxGeometry() = default;
    BoxGeometry(int dim, int radius) : dim_(dim), radius_(radius)
    {
        require(dim >= 1, ErrorKind::InvalidArgument, "dimension must be >= 1");
        require(radius >= 0, ErrorKind::InvalidArgument, "box radius must be >= 0");
        side_ = 2 * radius + 1;
        size_ = 1;
        for (int j = 0; j < dim; ++j) size_ *= static_cast<std::size_t>(side_);
    }

    int dim() const noexcept { return dim_; }
    int radius() const noexcept { return radius_; }
    int side() const noexcept { return side_; }
    std::size_t size() const noexcept { return size_; }

    bool contains(std::span<const int> x) const noexcept { return sup_norm(x) <= radius_; }

    std::size_t index(std::span<const int> x) const noexcept
    {
        std::size_t idx = 0;
        for (int j = dim_ - 1; j >= 0; --j)
            idx = idx * static_cast<std::size_t>(side_) + static_cast<std::size_t>(x[j] + radius_);
        return idx;
    }

    Site site(std::size_t idx) const
    {
        Site x(static_cast<std::size_t>(dim_));
        for (int j = 0; j < dim_; ++j) {
            x[j] = static_cast<int>(idx % static_cast<std::size_t>(side_)) - radius_;
            idx /= static_cast<std::size_t>(side_);
        }
        return x;
    }

    /// Flat-index displacement of a lattice vector (valid when both ends are inside).
    std::ptrdiff_t offset(std::span<const int> y) const noexcept
    {
        std::ptrdiff_t off = 0;
        for (int j = dim_ - 1; j >= 0; --j) off = off * side_ + y[j];
        return off;
    }

    friend bool operator==(const BoxGeometry&, const BoxGeometry&) = default;

  private:
    int dim_ = 1;
    int radius_ = 0;
    int side_ = 1;
    std::size_t size_ = 1;
};

//---------------------------------------------------------------------------//
// Step distribution
//---------------------------------------------------------------------------//

struct Jump {
    Site site;
    double probability = 0.0;
};

struct ValidationTolerance {
    double normalization = 1e-12;
    double mean = 1e-12;
};

/// Validated jump law tau of a mean-zero finite-range walk on Z^d.
class StepDistribution {
  public:
    int dim() const noexcept { return dim_; }
    int range() const noexcept { return range_; }
    const std::vector<Jump>& jumps() const noexcept { return jumps_; }

    double self_loop() const noexcept
    {
        for (const auto& j : jumps_)
            if (sup_norm(j.site) == 0) return j.probability;
        return 0.0;
    }

    bool symmetric(double tol = 1e-15) const
    {
        for (const auto& j : jumps_) {
            Site neg(j.site);
            for (int& v : neg) v = -v;
            double p = 0.0;
            for (const auto& k : jumps_)
                if (k.site == neg) p = k.probability;
            if (std::abs(p - j.probability) > tol) return false;
        }
        return true;
    }

    /// Second-moment matrix C_ij = sum_x x_i x_j tau(x), row-major d x d.
    std::vector<double> covariance() const
    {
        const auto d = static_cast<std::size_t>(dim_);
        std::vector<double> c(d * d, 0.0);
        for (const auto& j : jumps_)
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b)
                    c[a * d + b] += j.probability * j.site[a] * j.site[b];
        return c;
    }

    /// Largest per-coordinate variance per unit time.
    double max_coordinate_variance() const
    {
        const auto c = covariance();
        const auto d = static_cast<std::size_t>(dim_);
        double v = 0.0;
        for (std::size_t a = 0; a < d; ++a) v = std::max(v, c[a * d + a]);
        return v;
    }

  private:
    friend StepDistribution validate_step_distribution(std::vector<Jump>, int, ValidationTolerance);
    int dim_ = 1;
    int range_ = 1;
    std::vector<Jump> jumps_;
};

namespace detail {

inline int numeric_rank(std::vector<std::vector<double>> rows, int dim)
{
    int rank = 0;
    for (int col = 0; col < dim && rank < static_cast<int>(rows.size()); ++col) {
        std::size_t pivot = static_cast<std::size_t>(rank);
        for (std::size_t r = pivot; r < rows.size(); ++r)
            if (std::abs(rows[r][col]) > std::abs(rows[pivot][col])) pivot = r;
        if (std::abs(rows[pivot][col]) < 1e-9) continue;
        std::swap(rows[pivot], rows[static_cast<std::size_t>(rank)]);
        const auto& p = rows[static_cast<std::size_t>(rank)];
        for (std::size_t r = static_cast<std::size_t>(rank) + 1; r < rows.size(); ++r) {
            const double f = rows[r][col] / p[col];
            for (int c = col; c < dim; ++c) rows[r][c] -= f * p[c];
        }
        ++rank;
    }
    return rank;
}

}  // namespace detail

/// Checks the structural assumptions on tau. Probabilities are never renormalized.
inline StepDistribution validate_step_distribution(std::vector<Jump> raw, int dim,
                                                   ValidationTolerance tol = {})
{
    require(dim >= 1, ErrorKind::InvalidArgument, "dimension must be >= 1");
    require(!raw.empty(), ErrorKind::InvalidArgument, "support is empty");
    double total = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& j = raw[i];
        require(static_cast<int>(j.site.size()) == dim, ErrorKind::InvalidArgument,
                "support site has wrong dimension");
        require(j.probability > 0.0 && j.probability <= 1.0, ErrorKind::InvalidArgument,
                "probabilities must lie in (0,1]");
        for (std::size_t k = 0; k < i; ++k)
            require(raw[k].site != j.site, ErrorKind::InvalidArgument, "duplicate support site");
        total += j.probability;
    }
    require(std::abs(total - 1.0) <= tol.normalization, ErrorKind::NotNormalized,
            "probabilities sum to " + std::to_string(total));

    std::vector<std::vector<double>> rows;
    double loop = 0.0;
    int range = 0;
    for (const auto& j : raw) {
        const int n = sup_norm(j.site);
        if (n == 0) loop = j.probability;
        range = std::max(range, n);
        rows.emplace_back(j.site.begin(), j.site.end());
    }
    require(loop < 1.0 - tol.normalization, ErrorKind::SelfLoopOnly, "tau(0) must be < 1");

    for (int c = 0; c < dim; ++c) {
        double mean = 0.0;
        for (const auto& j : raw) mean += j.probability * j.site[static_cast<std::size_t>(c)];
        require(std::abs(mean) <= tol.mean, ErrorKind::NonzeroMean,
                "coordinate " + std::to_string(c + 1) + " has mean " + std::to_string(mean));
    }
    require(detail::numeric_rank(std::move(rows), dim) == dim, ErrorKind::DegenerateSupport,
            "support does not span R^" + std::to_string(dim));

    StepDistribution tau;
    tau.dim_ = dim;
    tau.range_ = range;
    tau.jumps_ = std::move(raw);
    return tau;
}

/// Simple random walk: uniform on the 2d nearest neighbours.
inline StepDistribution builtin_laplacian(int dim)
{
    require(dim >= 1, ErrorKind::InvalidArgument, "dimension must be >= 1");
    std::vector<Jump> jumps;
    const double p = 1.0 / (2.0 * dim);
    for (int j = 0; j < dim; ++j) {
        for (int s : {-1, 1}) {
            Site x(static_cast<std::size_t>(dim), 0);
            x[static_cast<std::size_t>(j)] = s;
            jumps.push_back({std::move(x), p});
        }
    }
    return validate_step_distribution(std::move(jumps), dim);
}

/// Lazy version (1-p) delta_0 + p tau.
inline StepDistribution lazy(const StepDistribution& tau, double p)
{
    require(p > 0.0 && p <= 1.0, ErrorKind::InvalidArgument, "laziness p must be in (0,1]");
    std::vector<Jump> jumps;
    double loop = 1.0 - p;
    for (const auto& j : tau.jumps()) {
        if (sup_norm(j.site) == 0) loop += p * j.probability;
        else jumps.push_back({j.site, p * j.probability});
    }
    if (loop > 0.0) jumps.push_back({Site(static_cast<std::size_t>(tau.dim()), 0), loop});
    return validate_step_distribution(std::move(jumps), tau.dim(), {1e-11, 1e-12});
}

/// phi(z) = E exp(z . Y_1).
inline double mgf(const StepDistribution& tau, std::span<const double> z)
{
    require(static_cast<int>(z.size()) == tau.dim(), ErrorKind::InvalidArgument,
            "mgf argument has wrong dimension");
    double acc = 0.0;
    for (const auto& j : tau.jumps()) {
        double dot = 0.0;
        for (std::size_t c = 0; c < z.size(); ++c) dot += z[c] * j.site[c];
        acc += j.probability * std::exp(dot);
    }
    return acc;
}

//---------------------------------------------------------------------------//
// Nonlinearity
//---------------------------------------------------------------------------//

/// sigma with certified constants L_sigma <= |sigma(z)/z| <= Lip_sigma.
class Nonlinearity {
  public:
    enum class Kind { Linear, Tabulated, Custom };

    /// sigma(z) = slope * z; both constants equal |slope|.
    static Nonlinearity linear(double slope = 1.0)
    {
        Nonlinearity s;
        s.kind_ = Kind::Linear;
        s.slope_ = slope;
        s.lip_ = std::abs(slope);
        s.lower_ = std::abs(slope);
        return s;
    }

    /// Piecewise-linear interpolation through (z, sigma) knots, extended
    /// linearly beyond the outermost knots. (0, 0) is added if absent.
    static Nonlinearity tabulated(std::vector<std::pair<double, double>> knots, double lip,
                                  double lower)
    {
        require(knots.size() >= 2, ErrorKind::InvalidNonlinearity, "need at least two knots");
        std::sort(knots.begin(), knots.end());
        if (std::none_of(knots.begin(), knots.end(), [](auto& k) { return k.first == 0.0; }))
            knots.insert(std::upper_bound(knots.begin(), knots.end(), std::pair{0.0, 0.0}),
                         {0.0, 0.0});
        for (std::size_t i = 1; i < knots.size(); ++i)
            require(knots[i].first > knots[i - 1].first, ErrorKind::InvalidNonlinearity,
                    "knot abscissae must be distinct");
        Nonlinearity s;
        s.kind_ = Kind::Tabulated;
        s.knots_ = std::move(knots);
        s.lip_ = lip;
        s.lower_ = lower;
        return s;
    }

    static Nonlinearity custom(std::function<double(double)> f, double lip, double lower)
    {
        Nonlinearity s;
        s.kind_ = Kind::Custom;
        s.custom_ = std::move(f);
        s.lip_ = lip;
        s.lower_ = lower;
        return s;
    }

    double operator()(double z) const
    {
        switch (kind_) {
        case Kind::Linear: return slope_ * z;
        case Kind::Tabulated: return interpolate(z);
        case Kind::Custom: return custom_(z);
        }
        return 0.0;
    }

    Kind kind() const noexcept { return kind_; }
    bool is_linear() const noexcept { return kind_ == Kind::Linear; }
    double slope() const noexcept { return slope_; }
    double lip() const noexcept { return lip_; }
    double lower() const noexcept { return lower_; }
    const std::vector<std::pair<double, double>>& knots() const noexcept { return knots_; }

  private:
    double interpolate(double z) const
    {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), z,
                                   [](double v, const auto& k) { return v < k.first; });
        std::size_t hi = static_cast<std::size_t>(it - knots_.begin());
        hi = std::clamp<std::size_t>(hi, 1, knots_.size() - 1);
        const auto& [z0, s0] = knots_[hi - 1];
        const auto& [z1, s1] = knots_[hi];
        return s0 + (s1 - s0) * (z - z0) / (z1 - z0);
    }

    Kind kind_ = Kind::Linear;
    double slope_ = 1.0;
    double lip_ = 1.0;
    double lower_ = 1.0;
    std::vector<std::pair<double, double>> knots_;
    std::function<double(double)> custom_;
};

struct NonlinearityCheck {
    double grid_half_width = 1e3;
    std::size_t grid_points = 100000;
    double relative_slack = 1e-12;
};

/// Certifies sigma(0) = 0 and the two-sided linear bounds on a sampled grid.
inline void validate_nonlinearity(const Nonlinearity& sigma, NonlinearityCheck check = {})
{
    require(sigma.lower() > 0.0, ErrorKind::InvalidNonlinearity, "L_sigma must be > 0");
    require(sigma.lip() >= sigma.lower(), ErrorKind::InvalidNonlinearity,
            "Lip_sigma must be >= L_sigma");
    require(sigma(0.0) == 0.0, ErrorKind::InvalidNonlinearity, "sigma(0) must be exactly 0");
    const double h = 2.0 * check.grid_half_width / static_cast<double>(check.grid_points - 1);
    for (std::size_t i = 0; i < check.grid_points; ++i) {
        const double z = -check.grid_half_width + h * static_cast<double>(i);
        const double s = std::abs(sigma(z));
        const double az = std::abs(z);
        const double slack = check.relative_slack * az;
        require(s >= sigma.lower() * az - slack, ErrorKind::InvalidNonlinearity,
                "|sigma(z)| < L_sigma |z| at z = " + std::to_string(z));
        require(s <= sigma.lip() * az + slack, ErrorKind::InvalidNonlinearity,
                "|sigma(z)| > Lip_sigma |z| at z = " + std::to_string(z));
    }
}

//---------------------------------------------------------------------------//
// Lattice field and generator
//---------------------------------------------------------------------------//

/// Nonnegative field on B(K); sites outside read as zero.
struct LatticeField {
    BoxGeometry geometry;
    std::vector<double> values;

    LatticeField() = default;
    explicit LatticeField(BoxGeometry g) : geometry(g), values(g.size(), 0.0) {}

    static LatticeField delta(int dim, int radius, double mass)
    {
        LatticeField f(BoxGeometry(dim, radius));
        f.at(Site(static_cast<std::size_t>(dim), 0)) = mass;
        return f;
    }

    double& at(std::span<const int> x) { return values[geometry.index(x)]; }
    double value(std::span<const int> x) const
    {
        return geometry.contains(x) ? values[geometry.index(x)] : 0.0;
    }

    double total_mass() const { return std::accumulate(values.begin(), values.end(), 0.0); }
};

/// (G h)(x) = sum_y [h(x+y) - h(x)] tau(y) for every x in the box, with
/// h = 0 outside the box. Linear in h; the input need not be nonnegative.
inline LatticeField apply_generator(const LatticeField& field, const StepDistribution& tau)
{
    const auto& g = field.geometry;
    require(g.dim() == tau.dim(), ErrorKind::InvalidArgument, "dimension mismatch");
    require(g.radius() >= tau.range(), ErrorKind::BoxTooSmall,
            "box radius " + std::to_string(g.radius()) + " < R_0 = " + std::to_string(tau.range()));
    LatticeField out(g);
    Site y(static_cast<std::size_t>(g.dim()));
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Site x = g.site(i);
        double acc = 0.0;
        for (const auto& j : tau.jumps()) {
            for (std::size_t c = 0; c < y.size(); ++c) y[c] = x[c] + j.site[c];
            acc += j.probability * (field.value(y) - field.values[i]);
        }
        out.values[i] = acc;
    }
    return out;
}

//---------------------------------------------------------------------------//
// Model bundle and simulation parameters
//---------------------------------------------------------------------------//

struct Model {
    StepDistribution tau;
    Nonlinearity sigma = Nonlinearity::linear(1.0);
};

/// Box used by the lattice simulator.
struct BoxPolicy {
    /// Horizon: static box of radius default_box_radius(tau, T).
    /// Fixed: static box of the given radius.
    /// Growth: active box follows default_box_radius(tau, t), capped at `radius`
    /// (0 = the horizon value).
    enum class Kind { Horizon, Fixed, Growth };
    Kind kind = Kind::Horizon;
    int radius = 0;

    static BoxPolicy horizon() { return {Kind::Horizon, 0}; }
    static BoxPolicy fixed(int radius) { return {Kind::Fixed, radius}; }
    static BoxPolicy growth(int cap = 0) { return {Kind::Growth, cap}; }
};

/// ceil(4 R_0 sqrt(Var_1 t)) + 8, where Var_1 is the per-unit-time coordinate variance.
inline int default_box_radius(const StepDistribution& tau, double t)
{
    const double spread = 4.0 * tau.range() * std::sqrt(tau.max_coordinate_variance() * std::max(t, 0.0));
    return std::max(static_cast<int>(std::ceil(spread - 1e-12)) + 8, tau.range());
}

enum class Scheme {
    /// u' = max(0, u + G u dt + lambda sigma(u) sqrt(dt) Z).
    EulerMaruyama,
    /// u' = (u + G u dt) exp(lambda s sqrt(dt) Z - lambda^2 s^2 dt / 2); linear sigma only.
    MultiplicativeSplit,
};

struct SimParams {
    double lambda = 1.0;
    double c0 = 1.0;
    double dt = 1e-3;
    double horizon = 1.0;
    BoxPolicy box = BoxPolicy::horizon();
    std::size_t replicas = 1;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::EulerMaruyama;
    int samples_per_decade = 60;
    double first_sample = 1e-2;
    /// Times at which full field snapshots are kept (rounded to the step grid).
    std::vector<double> snapshot_times;
    /// A replica whose mass drops to this level stops stepping and holds its
    /// state for the remaining samples. A nonnegative martingale started at m
    /// reaches level L with probability at most m / L, so the effect on
    /// survival at level L is bounded by extinction_mass / L. 0 disables.
    double extinction_mass = 0.0;

    void validate(const StepDistribution& tau) const
    {
        require(lambda >= 0.0, ErrorKind::InvalidArgument, "lambda must be >= 0");
        require(c0 > 0.0, ErrorKind::InvalidArgument, "c0 must be > 0");
        require(dt > 0.0 && horizon > 0.0, ErrorKind::InvalidArgument, "dt and T must be > 0");
        require(dt <= horizon, ErrorKind::InvalidArgument, "dt must be <= T");
        require(replicas >= 1, ErrorKind::InvalidArgument, "need at least one replica");
        require(extinction_mass >= 0.0 && extinction_mass < c0, ErrorKind::InvalidArgument,
                "extinction mass must lie in [0, c0)");
        require(samples_per_decade >= 1, ErrorKind::InvalidArgument, "samples per decade >= 1");
        if (box.kind == BoxPolicy::Kind::Fixed || box.radius > 0)
            require(box.radius >= tau.range(), ErrorKind::BoxTooSmall, "box radius must be >= R_0");
        if (scheme == Scheme::MultiplicativeSplit)
            require(dt * (1.0 - tau.self_loop()) <= 1.0, ErrorKind::StabilityViolated,
                    "dt (1 - tau(0)) must be <= 1 for the split scheme");
    }

    int max_box_radius(const StepDistribution& tau) const
    {
        if (box.kind != BoxPolicy::Kind::Horizon && box.radius > 0) return box.radius;
        return default_box_radius(tau, horizon);
    }
};

}  // namespace pam
