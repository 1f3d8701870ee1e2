#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "reefseg/cluster/gmm.hpp"
#include "reefseg/error.hpp"

using namespace reefseg;

namespace {

SampleMatrix mixture(SplitMix64& rng, std::size_t n, std::size_t d, std::size_t components) {
    SampleMatrix m(n, d);
    std::vector<double> centres(components * d);
    for (double& c : centres) c = rng.uniform() * 4.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = rng.below(components);
        for (std::size_t j = 0; j < d; ++j) {
            const double u1 = std::max(rng.uniform(), 1e-300), u2 = rng.uniform();
            m(i, j) = centres[c * d + j] + 0.3 * std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
        }
    }
    return m;
}

}  // namespace

TEST(Gmm, SingleComponentIsClosedForm) {
    SplitMix64 rng(1);
    const auto m = oracle::random_matrix(rng, 60, 2);
    GmmConfig cfg;
    const auto fit = gmm_fit(m, 1, cfg);
    std::vector<double> mean(2, 0.0);
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j < 2; ++j) mean[j] += m(i, j) / static_cast<double>(m.n);
    }
    for (std::size_t a = 0; a < 2; ++a) {
        EXPECT_NEAR(fit.model.mean(0)[a], mean[a], 1e-12);
        for (std::size_t b = 0; b < 2; ++b) {
            double cov = 0.0;
            for (std::size_t i = 0; i < m.n; ++i) cov += (m(i, a) - mean[a]) * (m(i, b) - mean[b]);
            cov /= static_cast<double>(m.n);
            if (a == b) cov += cfg.reg;
            EXPECT_NEAR(fit.model.covariance(0)[a * 2 + b], cov, 1e-12);
        }
    }
    EXPECT_DOUBLE_EQ(fit.model.weights[0], 1.0);
}

TEST(Gmm, TwoPointHandComputedLikelihood) {
    const auto m = SampleMatrix::from_rows({{0}, {2}});
    GmmConfig cfg;
    cfg.reg = 1e-6;
    const auto fit = gmm_fit(m, 1, cfg);
    const double var = 1.0 + 1e-6;
    const double per_point = -0.5 * std::log(2 * M_PI * var) - 0.5 * 1.0 / var;
    EXPECT_NEAR(fit.model.mean(0)[0], 1.0, 1e-12);
    EXPECT_NEAR(fit.model.covariance(0)[0], var, 1e-12);
    EXPECT_NEAR(fit.model.log_likelihood, 2 * per_point, 1e-9);
    EXPECT_NEAR(gmm_log_likelihood(fit.model, m), 2 * per_point, 1e-9);
}

TEST(Gmm, LikelihoodMonotoneAndNormalisationsHold) {
    SplitMix64 rng(2);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t d = 1 + rng.below(3);
        const auto m = mixture(rng, 80 + rng.below(150), d, 1 + rng.below(4));
        const std::size_t k = 1 + rng.below(5);
        GmmConfig cfg;
        cfg.seed = rng.next();
        const auto fit = gmm_fit(m, k, cfg);
        const auto& hist = fit.model.log_likelihood_history;
        for (std::size_t t = 1; t < hist.size(); ++t) EXPECT_GE(hist[t] - hist[t - 1], -1e-8);
        EXPECT_NEAR(std::accumulate(fit.model.weights.begin(), fit.model.weights.end(), 0.0), 1.0, 1e-9);
        for (double w : fit.model.weights) EXPECT_GE(w, 0.0);
        for (std::size_t i = 0; i < m.n; ++i) {
            double s = 0.0;
            for (std::size_t c = 0; c < k; ++c) s += fit.responsibilities[i * k + c];
            EXPECT_NEAR(s, 1.0, 1e-9);
        }
        for (std::size_t c = 0; c < k; ++c) {
            const auto cov = fit.model.covariance(c);
            for (std::size_t a = 0; a < d; ++a) {
                for (std::size_t b = 0; b < d; ++b) EXPECT_EQ(cov[a * d + b], cov[b * d + a]);
                EXPECT_GE(cov[a * d + a], cfg.reg);
            }
        }
    }
}

// Uniform noise with tol = 0 runs EM right up to its fixed point, where the
// diagonal ridge can make a plain M-step lose a little likelihood.
TEST(Gmm, RidgeNeverLowersLikelihoodAtTheFixedPoint) {
    SplitMix64 rng(7001);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 40 + rng.below(160);
        const std::size_t d = 1 + rng.below(3);
        const std::size_t k = 1 + rng.below(4);
        const auto m = oracle::random_matrix(rng, n, d);
        GmmConfig cfg;
        cfg.seed = rng.next();
        cfg.tol = 0.0;
        cfg.max_iter = 60;
        const auto fit = gmm_fit(m, k, cfg);
        const auto& hist = fit.model.log_likelihood_history;
        for (std::size_t i = 1; i < hist.size(); ++i) ASSERT_GE(hist[i], hist[i - 1] - 1e-8) << "fit " << t;
        EXPECT_DOUBLE_EQ(fit.model.log_likelihood, hist.back());
        EXPECT_NEAR(gmm_log_likelihood(fit.model, m), fit.model.log_likelihood, 1e-9 * std::abs(hist.back()));
    }
}

TEST(Gmm, LabelsAreArgmaxOfResponsibilitiesAndDeterministic) {
    SplitMix64 rng(3);
    const auto m = mixture(rng, 200, 2, 3);
    GmmConfig cfg;
    cfg.seed = 4;
    const auto a = gmm_fit(m, 3, cfg);
    const auto b = gmm_fit(m, 3, cfg);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.model.means, b.model.means);
    EXPECT_EQ(a.labels, argmax_rows(a.responsibilities, 3));
}

TEST(Gmm, ArgmaxInvariantUnderUniformScaling) {
    SplitMix64 rng(6);
    const auto m = mixture(rng, 150, 2, 3);
    const auto fit = gmm_fit(m, 3);
    auto scores = weighted_log_densities(fit.model, m);
    const auto base = argmax_rows(scores, 3);
    for (double& s : scores) s += std::log(7.5);  // every density times 7.5
    EXPECT_EQ(argmax_rows(scores, 3), base);
}

TEST(Gmm, ArgmaxTiesGoToLowestIndex) {
    const std::vector<double> scores{0.5, 0.5, 0.1, 0.2, 0.9, 0.9};
    EXPECT_EQ(argmax_rows(scores, 3), (std::vector<int>{0, 1}));
}

TEST(Gmm, Errors) {
    const auto m = SampleMatrix::from_rows({{0, 0}, {1, 1}, {2, 0}});
    EXPECT_THROW(gmm_fit(m, 0), ContractError);
    EXPECT_THROW(gmm_fit(m, 4), ContractError);
    const auto thin = SampleMatrix::from_rows({{0, 0}, {1, 1}});
    EXPECT_THROW(gmm_fit(thin, 1), ContractError);  // n must exceed d
}
