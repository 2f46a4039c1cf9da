#include <gtest/gtest.h>

#include "risp/diagnostics.hpp"
#include "risp/rician.hpp"
#include "test_util.hpp"

using risp::RunTrace;
using risp::Rng;
using risp::Signal;
using risp::TraceRecord;

namespace {

RunTrace synthetic_trace(const std::vector<double>& grads) {
    RunTrace trace;
    for (std::size_t i = 0; i < grads.size(); ++i) {
        TraceRecord rec;
        rec.global_iter = i;
        rec.grad_norm = grads[i];
        rec.residual = 0.5 * grads[i];
        trace.records.push_back(rec);
    }
    trace.x0_norm = 2.0;
    return trace;
}

}  // namespace

TEST(FdGradientCheck, LinearFunctionIsExact) {
    Rng rng(1);
    const Signal c = rng.normal_signal(12);
    // FD is exact on linear functions for any step; a larger step keeps the
    // value-rounding contribution below the 1e-12 bar
    const auto err = risp::fd_gradient_check(
        [&c](const Signal& x) { return risp::dot(c, x); },
        [&c](const Signal&) { return c; }, rng.normal_signal(12), 1e-3);
    EXPECT_LT(err, 1e-12);
}

TEST(FdGradientCheck, QuadraticWithinExpectedTolerance) {
    Rng rng(2);
    const auto err = risp::fd_gradient_check(
        [](const Signal& x) { return 0.5 * risp::norm2(x); },
        [](const Signal& x) { return x; }, rng.normal_signal(20), 1e-5);
    EXPECT_LT(err, 1e-7);
}

TEST(FdGradientCheck, RicianFidelityWithinBound) {
    Rng rng(3);
    risp::RicianFidelity fid(risp::RicianSpec{rng.uniform_signal(32, 0.0, 1.2), 0.3});
    const Signal x = rng.uniform_signal(32, 0.05, 1.4);
    const auto err = risp::fd_gradient_check(
        [&fid](const Signal& p) { return fid.value(p); },
        [&fid](const Signal& p) { return fid.grad(p); }, x);
    EXPECT_LT(err, 1e-6);
}

TEST(FdGradientCheck, UsesRandomDirectionsAboveDimension64) {
    Rng rng(4);
    const Signal c = rng.normal_signal(256);
    const auto err = risp::fd_gradient_check(
        [&c](const Signal& x) { return risp::dot(c, x); },
        [&c](const Signal&) { return c; }, rng.normal_signal(256));
    EXPECT_LT(err, 1e-10);
}

TEST(Psnr, Sentinels) {
    Rng rng(5);
    const Signal x = rng.uniform_signal(64, 0.0, 1.0);
    EXPECT_TRUE(std::isinf(risp::psnr(x, x)));

    Signal ref = x;
    Signal off = x;
    for (double& v : off.data) v += 1.0;  // mse = peak^2
    EXPECT_NEAR(risp::psnr(off, ref, 1.0), 0.0, 1e-12);
}

TEST(Psnr, UniformTenthErrorIsTwentyDb) {
    Signal x(100), ref(100);
    for (double& v : x.data) v = 0.1;
    EXPECT_NEAR(risp::psnr(x, ref, 1.0), 20.0, 1e-12);
}

TEST(Psnr, SymmetricExactly) {
    Rng rng(6);
    const Signal x = rng.uniform_signal(32, 0.0, 1.0);
    const Signal ref = rng.uniform_signal(32, 0.0, 1.0);
    EXPECT_EQ(risp::psnr(x, ref), risp::psnr(ref, x));
}

TEST(Psnr, DimMismatchRejected) {
    EXPECT_THROW(risp::psnr(Signal(4), Signal(5)), risp::ShapeError);
}

TEST(RelativeErrorSeries, MatchesResidualColumnExactly) {
    const RunTrace trace = synthetic_trace({4.0, 2.0, 1.0, 0.5});
    const auto series = risp::relative_error_series(trace);
    for (std::size_t i = 0; i < series.size(); ++i)
        EXPECT_EQ(series[i], trace.records[i].residual / 2.0);
}

TEST(RelativeErrorSeries, StationaryTrajectoryAllZeros) {
    RunTrace trace = synthetic_trace({1.0, 1.0, 1.0});
    for (auto& rec : trace.records) rec.residual = 0.0;
    for (double v : risp::relative_error_series(trace)) EXPECT_EQ(v, 0.0);
}

TEST(RelativeErrorSeries, ZeroInitialNormRejected) {
    RunTrace trace = synthetic_trace({1.0});
    trace.x0_norm = 0.0;
    EXPECT_THROW(risp::relative_error_series(trace), std::invalid_argument);
}

TEST(MinEnvelope, NonIncreasing) {
    const auto env = risp::min_envelope({3.0, 5.0, 2.0, 4.0, 1.0});
    const std::vector<double> want = {3.0, 3.0, 2.0, 2.0, 1.0};
    EXPECT_EQ(env, want);
}

TEST(FitRate, RecoversExactPowerLaws) {
    for (const double expo : {-0.5, -4.0 / 7.0}) {
        std::vector<double> grads;
        for (std::size_t n = 0; n < 2000; ++n)
            grads.push_back(n == 0 ? 10.0 : std::pow(static_cast<double>(n), expo));
        const auto fit = risp::fit_rate(synthetic_trace(grads), {});
        EXPECT_NEAR(fit.slope, expo, 1e-6);
        EXPECT_GT(fit.r2, 1.0 - 1e-9);
    }
}

TEST(FitRate, ScaleInvariantSlope) {
    std::vector<double> grads;
    for (std::size_t n = 0; n < 500; ++n)
        grads.push_back(std::pow(static_cast<double>(n + 1), -0.7));
    const auto base = risp::fit_rate(synthetic_trace(grads), {});
    for (double& g : grads) g *= 137.5;
    const auto scaled = risp::fit_rate(synthetic_trace(grads), {});
    EXPECT_NEAR(base.slope, scaled.slope, 1e-12);
}

TEST(FitRate, WindowExcludesFirstTenPercent) {
    std::vector<double> grads(1000, 1.0);
    // junk early region decays fast, then a clean -1/2 law
    for (std::size_t n = 0; n < 1000; ++n)
        grads[n] = std::pow(static_cast<double>(n + 1), -0.5);
    const auto fit = risp::fit_rate(synthetic_trace(grads), {});
    EXPECT_GE(fit.window_lo, 99u);
}

TEST(FitRate, TooFewPointsRejected) {
    std::vector<double> grads(30, 1.0);
    EXPECT_THROW(risp::fit_rate(synthetic_trace(grads), {}), std::invalid_argument);
}

TEST(IterationsToTarget, FindsFirstCrossing) {
    const RunTrace trace = synthetic_trace({5.0, 3.0, 0.9, 0.5});
    const auto it = risp::iterations_to_target(trace, 1.0);
    ASSERT_TRUE(it.has_value());
    EXPECT_EQ(*it, 2.0);
    EXPECT_FALSE(risp::iterations_to_target(trace, 1e-9).has_value());
}
