// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "pam/odeclass.hpp"

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

// Decay rate that satisfies theta^{1 + delta/2} nu >= alpha gamma^{delta/2}
// with room to spare (alpha = gamma = 1).
double planted_theta(double delta)
{
    const double nu = predicted_exponent(delta).nu;
    return 1.5 * std::pow(1.0 / nu, 1.0 / (1.0 + 0.5 * delta));
}

}  // namespace

TEST(Exponent, PowerAndSqrtLog)
{
    EXPECT_DOUBLE_EQ(predicted_exponent(0.0).nu, 1.0);
    EXPECT_DOUBLE_EQ(predicted_exponent(1.0).nu, 1.0 / 3.0);
    EXPECT_EQ(predicted_exponent(2.0).kind, ExponentDescriptor::Kind::SqrtLog);
    EXPECT_EQ(kind_of([] { predicted_exponent(2.5); }), ErrorKind::DeltaOutOfRange);
    EXPECT_EQ(kind_of([] { predicted_exponent(-0.1); }), ErrorKind::DeltaOutOfRange);
    double prev = 2.0;
    for (double d = 0.0; d < 2.0; d += 0.05) {
        const double nu = predicted_exponent(d).nu;
        EXPECT_LT(nu, prev);
        prev = nu;
    }
    EXPECT_LT(predicted_exponent(2.0 - 1e-9).nu, 1e-9);
}

TEST(Derivatives, ExactForQuadratics)
{
    auto f = sample_function([](double t) { return 3.0 * t * t - t + 2.0; }, log_spaced(1.0, 100.0, 10));
    for (std::size_t i = 0; i < f.times.size(); ++i) {
        EXPECT_NEAR(f.derivatives[i], 6.0 * f.times[i] - 1.0, 1e-8 * (1.0 + f.times[i]));
        EXPECT_LT(f.derivative_error[i], 1e-6 * (1.0 + f.times[i]));
    }
}

TEST(Derivatives, ErrorEstimateBoundsTrueError)
{
    auto f = sample_function([](double t) { return std::exp(-2.0 * std::cbrt(t)); }, log_spaced(1.0, 1e3, 20));
    for (std::size_t i = 0; i < f.times.size(); ++i) {
        const double t = f.times[i];
        const double exact = -2.0 / 3.0 * std::pow(t, -2.0 / 3.0) * std::exp(-2.0 * std::cbrt(t));
        EXPECT_LE(std::abs(f.derivatives[i] - exact), 3.0 * f.derivative_error[i] + 1e-300) << t;
    }
}

TEST(Membership, ZeroFunctionPasses)
{
    auto f = sample_function([](double) { return 0.0; }, log_spaced(1.0, 1e3, 10));
    auto r = check_membership(f, {1.0, 1.0, 1.0, 1.0, 2.0});
    EXPECT_TRUE(r.pass);
    EXPECT_GE(r.worst_margin, 0.0);
}

TEST(Membership, ConstantTwoFails)
{
    auto f = sample_function([](double) { return 2.0; }, log_spaced(1.0, 1e3, 10));
    auto r = check_membership(f, {1.0, 1.0, 1.0, 1.0, 2.0});
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.failures, r.points);
    // Largest bracket is at t = 1, K = a: 2 - e^{-1}.
    EXPECT_NEAR(r.worst_margin, -(2.0 - std::exp(-1.0)), 1e-9);
    EXPECT_DOUBLE_EQ(r.worst_time, 1.0);
    EXPECT_DOUBLE_EQ(r.argmax_k, 1.0);
}

TEST(Membership, PlantedStretchedExponentials)
{
    const auto grid = log_spaced(1.0, 1e3, 40);
    for (double delta : {0.0, 0.5, 1.0, 1.5}) {
        const double nu = predicted_exponent(delta).nu;
        const double theta = planted_theta(delta);
        auto f = sample_function([&](double t) { return std::exp(-theta * std::pow(t, nu)); }, grid);
        EXPECT_TRUE(check_membership(f, {1.0, delta, 1.0, 1.0, 2.0}).pass) << delta;
        auto c = verify_decay_conclusion(f, delta);
        EXPECT_TRUE(c.pass) << delta;
        EXPECT_NEAR(c.limsup_estimate, -theta, 1e-12);
    }
}

TEST(Membership, SlowDecayRejected)
{
    // theta = 0.1 is too slow for the bracket at K = a when t is near 1.
    auto f = sample_function([](double t) { return std::exp(-0.1 * std::cbrt(t)); }, log_spaced(1.0, 1e3, 20));
    EXPECT_FALSE(check_membership(f, {1.0, 1.0, 1.0, 1.0, 2.0}).pass);
}

TEST(Membership, SqrtLogLaw)
{
    auto f = sample_function([](double t) { return std::exp(-2.0 * std::sqrt(std::log(t))); },
                             log_spaced(2.0, 1e3, 40));
    EXPECT_TRUE(check_membership(f, {1.0, 2.0, 1.0, 1.0, 2.0}).pass);
    auto c = verify_decay_conclusion(f, 2.0);
    EXPECT_TRUE(c.pass);
    EXPECT_NEAR(c.limsup_estimate, -2.0, 1e-12);
}

TEST(Membership, InputValidation)
{
    auto small = sample_function([](double t) { return 1.0 / t; }, {1.0, 2.0, 3.0, 4.0, 5.0});
    small.times.resize(4);
    small.values.resize(4);
    small.derivatives.resize(4);
    small.derivative_error.resize(4);
    EXPECT_EQ(kind_of([&] { check_membership(small, {}); }), ErrorKind::WindowTooShort);
    auto ok = sample_function([](double t) { return 1.0 / t; }, log_spaced(1.0, 10.0, 5));
    EXPECT_EQ(kind_of([&] { check_membership(ok, {1.0, 1.0, 1.0, 2.0, 1.0}); }), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([&] { check_membership(ok, {0.0, 1.0, 1.0, 1.0, 2.0}); }), ErrorKind::InvalidArgument);
    auto neg = ok;
    neg.values[2] = -1.0;
    EXPECT_EQ(kind_of([&] { check_membership(neg, {}); }), ErrorKind::InvalidArgument);
}

TEST(DecayConclusion, Examples)
{
    auto g = log_spaced(1.0, 1e4, 20);
    auto a = sample_function([](double t) { return std::exp(-2.0 * std::cbrt(t)); }, g);
    auto ra = verify_decay_conclusion(a, 1.0);
    EXPECT_TRUE(ra.pass);
    EXPECT_NEAR(ra.limsup_estimate, -2.0, 1e-12);

    auto b = sample_function([](double t) { return std::exp(-3.0 * std::sqrt(std::log(t))); }, g);
    auto rb = verify_decay_conclusion(b, 2.0);
    EXPECT_TRUE(rb.pass);
    EXPECT_NEAR(rb.limsup_estimate, -3.0, 1e-12);

    // log(1/t) / t^{1/3} tends to 0 from below; over [1e19, 1e20] it is above -1e-3.
    auto c = sample_function([](double t) { return 1.0 / t; }, log_spaced(1.0, 1e20, 5));
    auto rc = verify_decay_conclusion(c, 1.0);
    EXPECT_LT(rc.limsup_estimate, 0.0);
    EXPECT_GT(rc.limsup_estimate, -1e-3);
    EXPECT_FALSE(rc.pass);

    auto shortw = sample_function([](double t) { return 1.0 / t; }, log_spaced(1.0, 50.0, 5));
    EXPECT_EQ(kind_of([&] { verify_decay_conclusion(shortw, 1.0); }), ErrorKind::WindowTooShort);
}

TEST(ClassFit, RecoversFeasibleParameters)
{
    auto f = sample_function([](double t) { return std::exp(-planted_theta(1.0) * std::cbrt(t)); },
                             log_spaced(1.0, 1e3, 20));
    auto fit = fit_class_parameters(f, 1.0, 1.0, 2.0, {0.25, 0.5, 1.0, 2.0});
    ASSERT_TRUE(fit.feasible);
    EXPECT_GT(fit.params.alpha, 0.0);
    EXPECT_TRUE(check_membership(f, fit.params).pass);

    auto flat = sample_function([](double) { return 2.0; }, log_spaced(1.0, 1e3, 10));
    EXPECT_FALSE(fit_class_parameters(flat, 1.0, 1.0, 2.0, {0.5, 1.0}).feasible);
}
