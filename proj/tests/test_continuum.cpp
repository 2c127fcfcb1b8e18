// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pam/continuum.hpp"
#include "pam/stats.hpp"

using namespace pam;

namespace {

ErrorKind kind_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected pam::Error";
    return ErrorKind::InvalidArgument;
}

// Heat flow of exp(-x^2) in closed form.
double bump_flow(double t, double x) { return std::exp(-x * x / (1.0 + 2.0 * t)) / std::sqrt(1.0 + 2.0 * t); }

std::vector<double> final_masses(const std::vector<ContinuumTrajectory>& trs)
{
    std::vector<double> m;
    for (const auto& t : trs) m.push_back(t.path.mass.back());
    return m;
}

}  // namespace

TEST(HeatKernel, ClosedFormNormalizationSymmetry)
{
    EXPECT_NEAR(heat_kernel(1.0, 0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
    for (double t : {0.1, 1.0, 7.5}) {
        const double w = 20.0 * std::sqrt(t);
        const int n = 40000;
        const double h = 2.0 * w / n;
        double s = 0.0;
        for (int i = 0; i <= n; ++i) s += (i == 0 || i == n ? 0.5 : 1.0) * heat_kernel(t, -w + h * i);
        EXPECT_NEAR(s * h, 1.0, 1e-10);
        EXPECT_DOUBLE_EQ(heat_kernel(t, 1.3), heat_kernel(t, -1.3));
    }
    EXPECT_EQ(kind_of([] { heat_kernel(0.0, 1.0); }), ErrorKind::NonPositiveTime);
    EXPECT_EQ(kind_of([] { heat_kernel(-1.0, 1.0); }), ErrorKind::NonPositiveTime);
}

TEST(HeatKernel, ConvolutionOfGaussianBump)
{
    for (double t : {0.1, 1.0, 10.0})
        for (double x : {0.0, 0.7, -2.5})
            EXPECT_NEAR(heat_convolution(gaussian_bump, t, x), bump_flow(t, x), 1e-10);
}

TEST(StepContinuum, DeterministicStepIsExplicitHeatUpdate)
{
    auto f = make_continuum_field(3.0, 0.1, gaussian_bump);
    const auto before = f.values;
    rng::Stream noise(1, rng::StreamTag::Test, 0, 0);
    step_continuum(f, Nonlinearity::linear(1.0), 0.004, noise, 0.0);
    const double r = 0.004 / (2.0 * 0.01);
    EXPECT_EQ(f.values.front(), 0.0);
    EXPECT_EQ(f.values.back(), 0.0);
    for (std::size_t j = 1; j + 1 < f.values.size(); ++j)
        EXPECT_DOUBLE_EQ(f.values[j], (1.0 - 2.0 * r) * before[j] + r * (before[j - 1] + before[j + 1]));
}

TEST(StepContinuum, ZeroStaysZeroAndStabilityEnforced)
{
    auto f = make_continuum_field(2.0, 0.1, [](double) { return 0.0; });
    rng::Stream noise(1, rng::StreamTag::Test, 0, 0);
    for (int k = 0; k < 10; ++k) step_continuum(f, Nonlinearity::linear(1.0), 0.005, noise);
    for (double v : f.values) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(kind_of([&] { step_continuum(f, Nonlinearity::linear(1.0), 0.0051, noise); }),
              ErrorKind::StabilityViolated);
    ContinuumParams p;
    p.dt = 0.01;
    EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::StabilityViolated);
}

TEST(StepContinuum, PositivityUnderStrongNoise)
{
    auto f = make_continuum_field(3.0, 0.05, gaussian_bump);
    rng::Stream noise(9, rng::StreamTag::Test, 0, 0);
    std::uint64_t clamps = 0;
    for (int k = 0; k < 200; ++k) clamps += step_continuum(f, Nonlinearity::linear(1.0), 0.00125, noise, 5.0).clamps;
    for (double v : f.values) EXPECT_GE(v, 0.0);
    EXPECT_GT(clamps, 0u);
}

TEST(StepContinuum, DeterministicRunIsSecondOrderInSpace)
{
    auto sup_error = [](double dx) {
        ContinuumParams p;
        p.lambda = 0.0;
        p.dx = dx;
        p.horizon = 1.0;
        p.half_width = 15.0;
        p.snapshot_times = {1.0};
        auto tr = simulate_continuum_path(p, Nonlinearity::linear(1.0), gaussian_bump, 0);
        const auto& f = tr.snapshots.at(0).field;
        double e = 0.0;
        for (std::size_t j = 0; j < f.values.size(); j += 1)
            e = std::max(e, std::abs(f.values[j] - heat_convolution(gaussian_bump, 1.0, f.x(j), 4001)));
        return e;
    };
    const double e1 = sup_error(0.2), e2 = sup_error(0.1);
    EXPECT_LT(e2, 2e-3);
    EXPECT_GT(e1 / e2, 3.0);
    EXPECT_LT(e1 / e2, 5.0);
}

TEST(SimulateContinuum, DeterministicMassConserved)
{
    ContinuumParams p;
    p.lambda = 0.0;
    p.horizon = 5.0;
    auto tr = simulate_continuum_path(p, Nonlinearity::linear(1.0), gaussian_bump, 0);
    const double m0 = tr.path.mass.front();
    EXPECT_NEAR(m0, std::sqrt(std::numbers::pi), 1e-12);
    for (double m : tr.path.mass) EXPECT_NEAR(m, m0, 1e-10);
    EXPECT_FALSE(tr.path.box_overflow);
    EXPECT_EQ(tr.path.clamp_count, 0u);
}

TEST(SimulateContinuum, BoundaryMassFlag)
{
    ContinuumParams p;
    p.lambda = 0.0;
    p.horizon = 1.0;
    p.half_width = 2.0;
    auto tr = simulate_continuum_path(p, Nonlinearity::linear(1.0), gaussian_bump, 0);
    EXPECT_TRUE(tr.path.box_overflow);
    EXPECT_NE(tr.path.diagnostic.find("BoundaryMassWarning"), std::string::npos);
    EXPECT_LT(tr.path.mass.back(), tr.path.mass.front());
}

TEST(SimulateContinuum, MartingaleMeanFieldAndDeterminism)
{
    ContinuumParams p;
    p.horizon = 1.0;
    p.replicas = 200;
    p.seed = 42;
    p.snapshot_times = {0.5};
    auto trs = simulate_continuum(p, Nonlinearity::linear(1.0), gaussian_bump, 1);
    const auto m = final_masses(trs);
    const double m0 = trs.front().path.mass.front();
    EXPECT_LE(std::abs(stats::mean(m) - m0), 4.0 * stats::standard_error(m));

    std::vector<ContinuumField> fields;
    for (const auto& t : trs) fields.push_back(t.snapshots.at(0).field);
    auto mf = continuum_mean_field_check(fields, gaussian_bump, 0.5, {-2.0, -1.0, 0.0, 0.5, 1.0, 2.0});
    EXPECT_EQ(mf.probes, 6u);
    EXPECT_LT(mf.max_abs_z, 4.0);

    for (const auto& t : trs) {
        for (std::size_t i = 1; i < t.path.qv.size(); ++i) EXPECT_GE(t.path.qv[i], t.path.qv[i - 1]);
        EXPECT_GT(t.path.qv.back(), 0.0);
    }

    auto again = simulate_continuum(p, Nonlinearity::linear(1.0), gaussian_bump, 3);
    for (std::size_t r = 0; r < trs.size(); ++r) EXPECT_EQ(again[r].path.mass, trs[r].path.mass);
    EXPECT_EQ(kind_of([&] { continuum_mean_field_check({fields.begin(), fields.begin() + 50}, gaussian_bump, 0.5, {0.0}); }),
              ErrorKind::InsufficientReplicas);
}

TEST(SimulateContinuum, GridRefinementConsistency)
{
    ContinuumParams p;
    p.horizon = 1.0;
    p.replicas = 200;
    p.seed = 5;
    p.dx = 0.2;
    const auto coarse = final_masses(simulate_continuum(p, Nonlinearity::linear(1.0), gaussian_bump, 1));
    p.dx = 0.1;
    const auto fine = final_masses(simulate_continuum(p, Nonlinearity::linear(1.0), gaussian_bump, 1));
    const double se = std::hypot(stats::standard_error(coarse), stats::standard_error(fine));
    EXPECT_LT(std::abs(stats::mean(coarse) - stats::mean(fine)), 4.0 * se);
}
