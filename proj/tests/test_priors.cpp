#include <gtest/gtest.h>

#include "risp/priors.hpp"
#include "test_util.hpp"

using risp::GaussianPrior;
using risp::MixtureComponent;
using risp::MixturePrior;
using risp::Rng;
using risp::ScorePrior;
using risp::Signal;
using risp::SoftplusNetPrior;

namespace {

// central finite differences of reg_value against the analytic score
double fd_score_error(const ScorePrior& prior, const Signal& x, double h = 1e-6) {
    const Signal s = prior.score(x);
    double worst = 0.0;
    const double scale = std::max(risp::norm(s), 1e-10);
    for (std::size_t i = 0; i < x.size(); ++i) {
        Signal xp = x;
        xp[i] += h;
        Signal xm = x;
        xm[i] -= h;
        const double fd = (prior.reg_value(xp) - prior.reg_value(xm)) / (2.0 * h);
        worst = std::max(worst, std::abs(-fd - s[i]) / scale);
    }
    return worst;
}

double hessian_symmetry_defect(const ScorePrior& prior, const Signal& x, Rng& rng,
                               double h = 1e-5) {
    Signal u = rng.normal_signal(x.size());
    Signal v = rng.normal_signal(x.size());
    u = (1.0 / risp::norm(u)) * u;
    v = (1.0 / risp::norm(v)) * v;
    const Signal hu = risp::detail::fd_hessian_vec(prior, x, u, h);
    const Signal hv = risp::detail::fd_hessian_vec(prior, x, v, h);
    const double lhs = risp::dot(hu, v);
    const double rhs = risp::dot(u, hv);
    return std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs));
}

std::vector<MixtureComponent> three_components(std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<MixtureComponent> comps(3);
    for (std::size_t i = 0; i < 3; ++i) {
        comps[i].weight = 0.2 + 0.3 * static_cast<double>(i);
        comps[i].mean = rng.normal_signal(d);
        comps[i].variance = 0.5 + 0.4 * static_cast<double>(i);
    }
    return comps;
}

}  // namespace

TEST(GaussianPrior, ScoreVanishesAtMean) {
    Rng rng(1);
    Signal mu = rng.normal_signal(12);
    Signal prec = rng.uniform_signal(12, 0.2, 3.0);
    GaussianPrior prior(mu, prec);
    EXPECT_EQ(risp::norm(prior.score(mu)), 0.0);
}

TEST(GaussianPrior, IdentityPrecisionGivesMinusX) {
    Signal mu(8);
    Signal prec(8);
    for (double& p : prec.data) p = 1.0;
    GaussianPrior prior(mu, prec);
    Rng rng(2);
    const Signal x = rng.normal_signal(8);
    const Signal s = prior.score(x);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(s[i], -x[i]);
}

TEST(GaussianPrior, ScoreMatchesFiniteDifferences) {
    Rng rng(3);
    GaussianPrior prior(rng.normal_signal(10), rng.uniform_signal(10, 0.1, 4.0));
    for (int t = 0; t < 5; ++t)
        EXPECT_LT(fd_score_error(prior, rng.normal_signal(10)), 1e-7);
}

TEST(GaussianPrior, ConstantsAreExact) {
    Rng rng(4);
    Signal prec = rng.uniform_signal(6, 0.1, 2.0);
    prec[3] = 5.5;
    GaussianPrior prior(Signal(6), prec);
    const auto c = prior.constants();
    EXPECT_EQ(c.lipschitz_grad.value, 5.5);
    EXPECT_EQ(c.lipschitz_grad.tag, risp::ConstantTag::exact);
    EXPECT_EQ(c.lipschitz_hess.value, 0.0);
    EXPECT_EQ(c.weak_convexity.value, 0.0);
}

TEST(GaussianPrior, RejectsNegativePrecision) {
    Signal prec(4);
    prec[1] = -0.5;
    EXPECT_THROW(GaussianPrior(Signal(4), prec), std::invalid_argument);
}

TEST(MixturePrior, SingleComponentReducesToGaussian) {
    Rng rng(5);
    MixtureComponent c;
    c.weight = 1.0;
    c.mean = rng.normal_signal(9);
    c.variance = 0.7;
    MixturePrior mixture({c}, 0.0);
    Signal prec(9);
    for (double& p : prec.data) p = 1.0 / 0.7;
    GaussianPrior gaussian(c.mean, prec);
    for (int t = 0; t < 5; ++t) {
        const Signal x = rng.normal_signal(9);
        EXPECT_LT(risp::norm(mixture.score(x) - gaussian.score(x)), 1e-12);
    }
}

TEST(MixturePrior, SymmetricPairHasZeroScoreAtMidpoint) {
    Signal m1(4), m2(4);
    for (std::size_t i = 0; i < 4; ++i) {
        m1[i] = 1.0 + static_cast<double>(i);
        m2[i] = -m1[i];
    }
    MixturePrior prior({{0.5, m1, 1.0}, {0.5, m2, 1.0}}, 0.0);
    EXPECT_LT(risp::norm(prior.score(Signal(4))), 1e-14);
}

TEST(MixturePrior, ScoreMatchesFiniteDifferences) {
    MixturePrior prior(three_components(16, 6), 0.2);
    Rng rng(7);
    for (int t = 0; t < 5; ++t)
        EXPECT_LT(fd_score_error(prior, rng.normal_signal(16)), 1e-6);
}

TEST(MixturePrior, EmptyMixtureRejected) {
    EXPECT_THROW(MixturePrior({}, 0.0), std::invalid_argument);
}

TEST(MixturePrior, StableForHugeInputs) {
    MixturePrior prior(three_components(8, 8), 0.1);
    Signal x(8);
    for (double& v : x.data) v = 1e6;
    const Signal s = prior.score(x);
    EXPECT_TRUE(risp::all_finite(s));
    EXPECT_TRUE(std::isfinite(prior.reg_value(x)));
}

TEST(SoftplusNetPrior, ConstantMapGivesScaledResidualScore) {
    // zero W2: N(x) = b2, a constant map with zero Jacobian
    const std::size_t d = 6, w = 4;
    std::vector<double> w1(w * d, 0.0), w2(d * w, 0.0), b1(w, 0.0), b2(d);
    for (std::size_t i = 0; i < d; ++i) b2[i] = 0.3 + 0.1 * static_cast<double>(i);
    const double sigma = 0.5;
    SoftplusNetPrior prior(d, w, w1, b1, w2, b2, sigma);
    Rng rng(9);
    const Signal x = rng.normal_signal(d);
    const Signal s = prior.score(x);
    for (std::size_t i = 0; i < d; ++i)
        EXPECT_DOUBLE_EQ(s[i], -(x[i] - b2[i]) / (sigma * sigma));
}

TEST(SoftplusNetPrior, ScoreMatchesFiniteDifferences) {
    SoftplusNetPrior prior(8, 16, 1234, 0.3);
    Rng rng(10);
    for (int t = 0; t < 5; ++t)
        EXPECT_LT(fd_score_error(prior, rng.normal_signal(8), 1e-6), 1e-6);
}

TEST(SoftplusNetPrior, HessianSymmetryProbe) {
    SoftplusNetPrior prior(8, 16, 1235, 0.3);
    Rng rng(11);
    for (int t = 0; t < 10; ++t)
        EXPECT_LT(hessian_symmetry_defect(prior, rng.normal_signal(8), rng), 1e-6);
}

TEST(SoftplusNetPrior, RejectsNonPositiveSigma) {
    EXPECT_THROW(SoftplusNetPrior(4, 8, 1, 0.0), std::invalid_argument);
}

TEST(GradientFieldProperty, HessianSymmetricForAllShippedPriors) {
    Rng rng(12);
    GaussianPrior gaussian(rng.normal_signal(10), rng.uniform_signal(10, 0.5, 2.0));
    MixturePrior mixture(three_components(10, 13), 0.15);
    SoftplusNetPrior net(10, 20, 77, 0.4);
    const ScorePrior* priors[] = {&gaussian, &mixture, &net};
    for (const ScorePrior* prior : priors) {
        Rng probe_rng(14);
        for (int t = 0; t < 100; ++t) {
            const Signal x = probe_rng.normal_signal(10);
            EXPECT_LT(hessian_symmetry_defect(*prior, x, probe_rng), 1e-6);
        }
    }
}

TEST(MmseDenoiser, ZeroScoreGivesIdentity) {
    GaussianPrior prior(Signal(5), Signal(5), 0.2);  // zero precision: S == 0
    Rng rng(15);
    const Signal x = rng.normal_signal(5);
    const Signal d = risp::mmse_denoiser_from_score(prior, x);
    EXPECT_EQ(risp::norm(d - x), 0.0);
}

TEST(MmseDenoiser, TweedieMatchesPosteriorMean) {
    // prior X ~ N(0, s^2), observation x = X + N(0, sigma^2). The score of
    // the smoothed density is -x/(s^2 + sigma^2); the posterior mean is
    // x s^2/(s^2 + sigma^2).
    const double s2 = 0.8, sigma = 0.35;
    Signal prec(6);
    for (double& p : prec.data) p = 1.0 / (s2 + sigma * sigma);
    GaussianPrior prior(Signal(6), prec, sigma);
    Rng rng(16);
    const Signal x = rng.normal_signal(6);
    const Signal d = risp::mmse_denoiser_from_score(prior, x);
    for (std::size_t i = 0; i < 6; ++i)
        EXPECT_NEAR(d[i], x[i] * s2 / (s2 + sigma * sigma), 1e-12);
}

TEST(MmseDenoiser, ScoreDenoiserRoundTrip) {
    SoftplusNetPrior prior(8, 12, 21, 0.25);
    Rng rng(17);
    const Signal x = rng.uniform_signal(8, 0.0, 1.0);
    const Signal s = prior.score(x);
    const Signal d = risp::mmse_denoiser_from_score(prior, x);
    const double sigma2 = 0.25 * 0.25;
    for (std::size_t i = 0; i < 8; ++i)
        EXPECT_NEAR((d[i] - x[i]) / sigma2, s[i], 1e-15 * std::max(1.0, std::abs(s[i])));
}

TEST(MmseDenoiser, PriorWithoutSigmaIsAnError) {
    GaussianPrior prior(Signal(4), Signal(4));
    EXPECT_THROW(risp::mmse_denoiser_from_score(prior, Signal(4)), std::invalid_argument);
}

TEST(EstimateConstants, GaussianIdentityRecovered) {
    Signal prec(8);
    for (double& p : prec.data) p = 1.0;
    GaussianPrior prior(Signal(8), prec);
    const auto est = risp::estimate_constants(prior, {8, -2.0, 2.0}, 200, 100);
    EXPECT_LE(est.lipschitz_grad, 1.0 + 1e-10);
    EXPECT_GT(est.lipschitz_grad, 1.0 - 1e-10);  // linear score: exact on any pair
    EXPECT_LT(est.lipschitz_hess, 1e-6);
    EXPECT_LT(est.weak_convexity, 1e-6);
}

TEST(EstimateConstants, GaussianAnalyticLipschitzWithinTwoPercent) {
    Rng rng(18);
    Signal prec = rng.uniform_signal(6, 0.3, 2.4);
    GaussianPrior prior(Signal(6), prec);
    const auto est = risp::estimate_constants(prior, {6, -1.5, 1.5}, 1000, 101);
    EXPECT_NEAR(est.lipschitz_grad, prior.constants().lipschitz_grad.value,
                0.02 * prior.constants().lipschitz_grad.value);
}

TEST(EstimateConstants, MixtureHessianLipschitzPositive) {
    MixturePrior prior(three_components(4, 19), 0.1);
    const auto est = risp::estimate_constants(prior, {4, -2.0, 2.0}, 500, 102);
    EXPECT_GT(est.lipschitz_hess, 0.0);

    // dense-Hessian oracle at d = 4: any sampled pair slope lower-bounds rho
    Rng rng(20);
    const Signal x = rng.uniform_signal(4, -2.0, 2.0);
    const Signal y = rng.uniform_signal(4, -2.0, 2.0);
    oracle::Matrix hx(4, 4), hy(4, 4);
    const double h = 1e-5;
    for (std::size_t j = 0; j < 4; ++j) {
        Signal e(4);
        e[j] = 1.0;
        const Signal cx = risp::detail::fd_hessian_vec(prior, x, e, h);
        const Signal cy = risp::detail::fd_hessian_vec(prior, y, e, h);
        for (std::size_t i = 0; i < 4; ++i) {
            hx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cx[i];
            hy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cy[i];
        }
    }
    const double pair_slope = (hx - hy).norm() / risp::norm(x - y);
    EXPECT_GT(pair_slope, 0.0);
}

TEST(EstimateConstants, SoftplusNetAllFinite) {
    SoftplusNetPrior prior(6, 12, 22, 0.3);
    const auto est = risp::estimate_constants(prior, {6, -1.0, 2.0}, 200, 103);
    EXPECT_TRUE(std::isfinite(est.lipschitz_grad));
    EXPECT_TRUE(std::isfinite(est.lipschitz_hess));
    EXPECT_TRUE(std::isfinite(est.weak_convexity));
    EXPECT_GT(est.lipschitz_grad, 0.0);
}

TEST(EstimateConstants, DegenerateBoxRejected) {
    GaussianPrior prior(Signal(4), Signal(4));
    EXPECT_THROW(risp::estimate_constants(prior, {4, 1.0, 1.0}, 10, 1), std::invalid_argument);
    EXPECT_THROW(risp::estimate_constants(prior, {4, 0.0, 1.0}, 1, 1), std::invalid_argument);
}

TEST(MixturePrior, WeakConvexityEstimateBelowLipschitzEstimate) {
    MixturePrior prior(three_components(6, 23), 0.1);
    const auto est = risp::estimate_constants(prior, {6, -2.0, 2.0}, 400, 104);
    EXPECT_LE(est.weak_convexity, est.lipschitz_grad + 1e-9);
}
