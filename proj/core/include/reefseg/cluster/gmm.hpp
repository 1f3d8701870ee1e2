#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "reefseg/prep.hpp"

namespace reefseg {

struct GmmConfig {
    std::size_t max_iter = 200;
    double tol = 1e-6;   ///< stop when mean per-sample log-likelihood improves less than this
    double reg = 1e-6;   ///< added to every covariance diagonal
    std::uint64_t seed = 0;
    std::size_t init_restarts = 8;  ///< k-means restarts used for initialisation
};

/// Full-covariance Gaussian mixture.
struct GmmModel {
    std::size_t k = 0;
    std::size_t d = 0;
    std::vector<double> means;        ///< k×d
    std::vector<double> covariances;  ///< k×d×d, symmetric positive definite
    std::vector<double> weights;      ///< k, sums to 1
    double log_likelihood = 0.0;      ///< total over the training samples
    std::size_t iterations = 0;
    bool converged = false;
    /// Total log-likelihood after every E-step, ending with `log_likelihood`.
    std::vector<double> log_likelihood_history;

    std::span<const double> mean(std::size_t c) const { return {means.data() + c * d, d}; }
    std::span<const double> covariance(std::size_t c) const { return {covariances.data() + c * d * d, d * d}; }
};

struct GmmResult {
    GmmModel model;
    std::vector<int> labels;
    std::vector<double> responsibilities;  ///< n×k row-major
};

/// EM initialised from k-means: means are the centroids, weights the cluster
/// fractions, covariances the within-cluster scatter plus reg·I.
/// Throws ContractError for k = 0, k > n or n ≤ d; NumericalError when the
/// likelihood stops being finite.
GmmResult gmm_fit(const SampleMatrix& m, std::size_t k, const GmmConfig& cfg = {});

/// n×k matrix of log(π_c · N(x_i | μ_c, Σ_c)).
std::vector<double> weighted_log_densities(const GmmModel& model, const SampleMatrix& m);

/// Σ_i log Σ_c π_c N(x_i | μ_c, Σ_c).
double gmm_log_likelihood(const GmmModel& model, const SampleMatrix& m);

/// argmax over each row of an n×k score matrix, ties → lowest column.
std::vector<int> argmax_rows(std::span<const double> scores, std::size_t k);

}  // namespace reefseg
