// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pam/model.hpp"

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

}  // namespace

TEST(StepDistribution, SymmetricNearestNeighbour)
{
    auto tau = validate_step_distribution({{{-1}, 0.5}, {{1}, 0.5}}, 1);
    EXPECT_EQ(tau.range(), 1);
    EXPECT_EQ(tau.dim(), 1);
    EXPECT_TRUE(tau.symmetric());
    EXPECT_DOUBLE_EQ(tau.self_loop(), 0.0);
}

TEST(StepDistribution, Rejections)
{
    EXPECT_EQ(kind_of([] { validate_step_distribution({{{1}, 1.0}}, 1); }), ErrorKind::NonzeroMean);
    EXPECT_EQ(kind_of([] { validate_step_distribution({{{-1, 0}, 0.5}, {{1, 0}, 0.5}}, 2); }),
              ErrorKind::DegenerateSupport);
    EXPECT_EQ(kind_of([] { validate_step_distribution({{{-1}, 0.5}, {{1}, 0.49}}, 1); }),
              ErrorKind::NotNormalized);
    EXPECT_EQ(kind_of([] { validate_step_distribution({{{0}, 1.0}}, 1); }), ErrorKind::SelfLoopOnly);
    EXPECT_EQ(kind_of([] { validate_step_distribution({}, 1); }), ErrorKind::InvalidArgument);
    // Within 1e-12 is accepted, beyond is not; nothing is renormalized.
    auto ok = validate_step_distribution({{{-1}, 0.5}, {{1}, 0.5 + 5e-13}}, 1,
                                         {1e-12, 1e-12});
    EXPECT_DOUBLE_EQ(ok.jumps()[1].probability, 0.5 + 5e-13);
    EXPECT_EQ(kind_of([] { validate_step_distribution({{{-1}, 0.5}, {{1}, 0.5 + 1e-11}}, 1); }),
              ErrorKind::NotNormalized);
}

TEST(StepDistribution, BuiltinLaplacian)
{
    auto t1 = builtin_laplacian(1);
    ASSERT_EQ(t1.jumps().size(), 2u);
    for (const auto& j : t1.jumps()) EXPECT_DOUBLE_EQ(j.probability, 0.5);
    auto t3 = builtin_laplacian(3);
    ASSERT_EQ(t3.jumps().size(), 6u);
    for (const auto& j : t3.jumps()) {
        EXPECT_DOUBLE_EQ(j.probability, 1.0 / 6.0);
        EXPECT_EQ(std::abs(j.site[0]) + std::abs(j.site[1]) + std::abs(j.site[2]), 1);
    }
    for (int d = 1; d <= 4; ++d) {
        auto tau = builtin_laplacian(d);
        // Revalidating the builtin law must succeed.
        auto again = validate_step_distribution(tau.jumps(), d);
        EXPECT_EQ(again.range(), 1);
        EXPECT_NEAR(tau.max_coordinate_variance(), 1.0 / d, 1e-15);
    }
}

TEST(StepDistribution, LazyModification)
{
    auto tau = lazy(builtin_laplacian(3), 0.25);
    EXPECT_NEAR(tau.self_loop(), 0.75, 1e-15);
    EXPECT_NEAR(tau.max_coordinate_variance(), 0.25 / 3.0, 1e-15);
}

TEST(Mgf, ValuesAndConvexity)
{
    auto t1 = builtin_laplacian(1);
    const std::vector<double> zero{0.0};
    EXPECT_DOUBLE_EQ(mgf(t1, zero), 1.0);
    for (double z : {-2.0, -0.3, 0.7, 3.0}) {
        const std::vector<double> v{z};
        EXPECT_NEAR(mgf(t1, v), std::cosh(z), 1e-14);
    }
    auto t3 = builtin_laplacian(3);
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd(0.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> z{nd(gen), nd(gen), nd(gen)};
        EXPECT_GE(mgf(t3, z), 1.0);
    }
}

TEST(Nonlinearity, ValidationOnGrid)
{
    validate_nonlinearity(Nonlinearity::linear(1.0));
    validate_nonlinearity(Nonlinearity::linear(-2.0));
    auto tab = Nonlinearity::tabulated({{-1.0, -1.0}, {1.0, 2.0}, {2.0, 3.0}}, 2.0, 1.0);
    EXPECT_DOUBLE_EQ(tab(0.5), 1.0);
    EXPECT_DOUBLE_EQ(tab(-3.0), -3.0);
    validate_nonlinearity(tab);
    // Lower constant too optimistic.
    auto bad = Nonlinearity::tabulated({{-1.0, -1.0}, {1.0, 2.0}}, 2.0, 1.5);
    EXPECT_EQ(kind_of([&] { validate_nonlinearity(bad); }), ErrorKind::InvalidNonlinearity);
    // sigma(0) != 0.
    auto shifted = Nonlinearity::custom([](double z) { return z + 1e-3; }, 1.0, 0.5);
    EXPECT_EQ(kind_of([&] { validate_nonlinearity(shifted); }), ErrorKind::InvalidNonlinearity);
    // Lipschitz constant too small.
    auto steep = Nonlinearity::custom([](double z) { return 3.0 * z; }, 2.0, 1.0);
    EXPECT_EQ(kind_of([&] { validate_nonlinearity(steep); }), ErrorKind::InvalidNonlinearity);
}

TEST(Generator, DeltaAtOrigin)
{
    auto tau = builtin_laplacian(1);
    auto h = LatticeField::delta(1, 3, 1.0);
    auto g = apply_generator(h, tau);
    EXPECT_DOUBLE_EQ(g.value(Site{0}), -1.0);
    EXPECT_DOUBLE_EQ(g.value(Site{1}), 0.5);
    EXPECT_DOUBLE_EQ(g.value(Site{-1}), 0.5);
    EXPECT_DOUBLE_EQ(g.value(Site{2}), 0.0);
}

TEST(Generator, ConstantsAndLinearFunctions)
{
    auto tau = validate_step_distribution({{{-2}, 0.25}, {{1}, 0.5}, {{0}, 0.25}}, 1);
    LatticeField h(BoxGeometry(1, 10));
    for (std::size_t i = 0; i < h.values.size(); ++i) h.values[i] = 3.5;
    auto g = apply_generator(h, tau);
    // Away from the absorbing boundary.
    for (int x = -8; x <= 9; ++x) EXPECT_NEAR(g.value(Site{x}), 0.0, 1e-15);

    for (std::size_t i = 0; i < h.values.size(); ++i)
        h.values[i] = static_cast<double>(h.geometry.site(i)[0]);
    g = apply_generator(h, tau);
    for (int x = -8; x <= 9; ++x) EXPECT_NEAR(g.value(Site{x}), 0.0, 1e-14);
}

TEST(Generator, BoxTooSmall)
{
    auto tau = validate_step_distribution({{{-2}, 0.5}, {{2}, 0.5}}, 1);
    EXPECT_EQ(kind_of([&] { apply_generator(LatticeField::delta(1, 1, 1.0), tau); }),
              ErrorKind::BoxTooSmall);
}

TEST(GeneratorProperty, MassPreservedAndLinear)
{
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int d = 1; d <= 3; ++d) {
        auto tau = builtin_laplacian(d);
        const int radius = 6;
        for (int trial = 0; trial < 20; ++trial) {
            LatticeField h(BoxGeometry(d, radius)), k(BoxGeometry(d, radius));
            for (std::size_t i = 0; i < h.values.size(); ++i) {
                // Compact support with margin R_0 from the boundary.
                if (sup_norm(h.geometry.site(i)) <= radius - tau.range()) {
                    h.values[i] = u(gen);
                    k.values[i] = u(gen);
                }
            }
            const auto gh = apply_generator(h, tau);
            EXPECT_NEAR(gh.total_mass(), 0.0, 1e-10);

            const double a = u(gen) * 4 - 2, b = u(gen) * 4 - 2;
            LatticeField comb(h.geometry);
            for (std::size_t i = 0; i < comb.values.size(); ++i)
                comb.values[i] = a * h.values[i] + b * k.values[i];
            const auto lhs = apply_generator(comb, tau);
            const auto gk = apply_generator(k, tau);
            for (std::size_t i = 0; i < comb.values.size(); ++i)
                EXPECT_NEAR(lhs.values[i], a * gh.values[i] + b * gk.values[i], 1e-12);
        }
    }
}

TEST(SimParams, Validation)
{
    auto tau = builtin_laplacian(1);
    SimParams p;
    p.horizon = 1.0;
    p.dt = 2.0;
    EXPECT_EQ(kind_of([&] { p.validate(tau); }), ErrorKind::InvalidArgument);
    p.dt = 1e-3;
    p.validate(tau);
    p.box = BoxPolicy::fixed(0);
    EXPECT_EQ(kind_of([&] { p.validate(tau); }), ErrorKind::BoxTooSmall);
    // Default box: ceil(4 R_0 sqrt(Var_1 T)) + 8.
    EXPECT_EQ(default_box_radius(tau, 5.0), 9 + 8);
    EXPECT_EQ(default_box_radius(builtin_laplacian(3), 50.0), 17 + 8);
}
