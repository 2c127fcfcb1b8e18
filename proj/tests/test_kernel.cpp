// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pam/kernel.hpp"

using namespace pam;

namespace {

// Independent oracle: for the one-dimensional simple walk, X_t is the
// difference of two Poisson(t/2) variables, so p_t(x) = e^{-t} I_|x|(t).
double skellam_pmf(int x, double t)
{
    const int n = std::abs(x);
    double sum = 0.0;
    for (int k = 0; k < 400; ++k) {
        const double lt = (2.0 * k + n) * std::log(t / 2.0) - std::lgamma(k + 1.0) - std::lgamma(k + n + 1.0);
        sum += std::exp(lt - t);
    }
    return sum;
}

}  // namespace

TEST(TransitionKernel, TimeZeroIsDelta)
{
    auto k = transition_kernel(builtin_laplacian(2), 0.0, 3);
    EXPECT_EQ(k.probabilities.value(Site{0, 0}), 1.0);
    EXPECT_EQ(k.probabilities.total_mass(), 1.0);
    EXPECT_EQ(k.truncation_error, 0.0);
}

TEST(TransitionKernel, BesselValueAtOrigin)
{
    auto k = transition_kernel(builtin_laplacian(1), 1.0, 20);
    // e^{-1} I_0(1), frozen from an independent series evaluation.
    EXPECT_NEAR(k(Site{0}), 0.4657596075936405, 1e-12);
    for (int x = -6; x <= 6; ++x) EXPECT_NEAR(k(Site{x}), skellam_pmf(x, 1.0), 1e-13);
}

TEST(TransitionKernel, NormalizationAndSymmetry)
{
    for (int d = 1; d <= 3; ++d) {
        auto tau = builtin_laplacian(d);
        for (double t : {0.3, 1.0, 4.0}) {
            const int radius = d == 3 ? 8 : 14;
            auto k = transition_kernel(tau, t, radius);
            const double total = k.probabilities.total_mass() + k.truncation_error;
            EXPECT_GE(total, 1.0 - 1e-9);
            EXPECT_LE(total, 1.0 + 1e-9);
            const auto& g = k.geometry();
            for (std::size_t i = 0; i < g.size(); ++i) {
                auto x = g.site(i);
                for (int& v : x) v = -v;
                EXPECT_NEAR(k.probabilities.values[i], k(x), 1e-12);
                EXPECT_GE(k.probabilities.values[i], 0.0);
                EXPECT_LE(k.probabilities.values[i], 1.0);
            }
        }
    }
}

TEST(TransitionKernel, SmallBoxAccountsForLostMass)
{
    auto k = transition_kernel(builtin_laplacian(1), 9.0, 3);
    EXPECT_GT(k.truncation_error, 0.1);
    const double total = k.probabilities.total_mass() + k.truncation_error;
    EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(TransitionKernel, MeanAndVariance)
{
    auto tau = validate_step_distribution({{{-2, 0}, 0.2}, {{1, 0}, 0.4}, {{0, 1}, 0.2}, {{0, -1}, 0.2}}, 2);
    const double t = 2.5;
    auto k = transition_kernel(tau, t, 40);
    const auto& g = k.geometry();
    double m0 = 0, m1 = 0, v0 = 0, v1 = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto x = g.site(i);
        const double p = k.probabilities.values[i];
        m0 += p * x[0];
        m1 += p * x[1];
        v0 += p * x[0] * x[0];
        v1 += p * x[1] * x[1];
    }
    EXPECT_NEAR(m0, 0.0, 1e-9);
    EXPECT_NEAR(m1, 0.0, 1e-9);
    EXPECT_NEAR(v0, t * (4 * 0.2 + 0.4), 1e-8);
    EXPECT_NEAR(v1, t * 0.4, 1e-8);
}

TEST(TransitionKernel, ChapmanKolmogorov)
{
    auto tau = builtin_laplacian(1);
    const int radius = 40;
    for (auto [s, t] : {std::pair{0.5, 0.5}, std::pair{1.0, 2.0}}) {
        auto ps = transition_kernel(tau, s, radius);
        auto pt = transition_kernel(tau, t, radius);
        auto pst = transition_kernel(tau, s + t, radius);
        auto conv = convolve(ps.probabilities, pt.probabilities);
        const auto& g = pst.geometry();
        double worst = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            worst = std::max(worst, std::abs(conv.values[i] - pst.probabilities.values[i]));
        EXPECT_LE(worst, 1e-8);
    }
}

TEST(TailProbability, ValuesAndMonotonicity)
{
    auto tau = builtin_laplacian(1);
    EXPECT_NEAR(tail_probability(tau, 1.0, 0.0), 0.5342403924063595, 1e-12);
    double prev = 1.0;
    for (double K = 0.0; K <= 30.0; K += 0.5) {
        const double p = tail_probability(tau, 4.0, K);
        EXPECT_LE(p, prev + 1e-16);
        prev = p;
    }
    // Beyond every jump the series can make, only truncation remains.
    auto k = transition_kernel(tau, 1.0, 200);
    EXPECT_LE(tail_probability(tau, 1.0, 150.0), k.truncation_error + 1e-300);
}

TEST(Hoeffding, SimpleWalkFitsWithoutViolations)
{
    auto res = check_hoeffding_bound(builtin_laplacian(1), 1.0, {1, 2, 4, 8, 16});
    EXPECT_TRUE(res.violations.empty());
    // Frozen from exhaustive evaluation with the Bessel oracle.
    EXPECT_NEAR(res.fitted_c, 0.5912236234234668, 1e-4);
}

TEST(Hoeffding, DoubledStepsScaleConstantDown)
{
    auto srw = check_hoeffding_bound(builtin_laplacian(1), 1.0, {1, 2, 4, 8, 16});
    auto wide = check_hoeffding_bound(validate_step_distribution({{{-2}, 0.5}, {{2}, 0.5}}, 1), 1.0,
                                      {1, 2, 4, 8, 16});
    EXPECT_TRUE(wide.violations.empty());
    EXPECT_NEAR(wide.fitted_c, 0.2186285241180337, 1e-4);
    EXPECT_NEAR(srw.fitted_c / wide.fitted_c, 2.704, 0.05);
}

TEST(Hoeffding, KZeroIsVacuous)
{
    // With q tiny only K = 0 ... q t points exist; the bound 2d >= 1 always holds.
    auto res = check_hoeffding_bound(builtin_laplacian(2), 1e-3, {1, 2});
    EXPECT_TRUE(res.violations.empty());
    EXPECT_GT(res.fitted_c, 0.0);
}

TEST(KernelCsv, HeaderAndRows)
{
    auto k = transition_kernel(builtin_laplacian(1), 1.0, 2);
    std::ostringstream os;
    write_kernel_csv(os, k);
    const auto s = os.str();
    EXPECT_EQ(s.rfind("# t=1,d=1,truncationError=", 0), 0u);
    EXPECT_NE(s.find("x1,probability\n-2,"), std::string::npos);
}
