#include "reefseg/cluster/gmm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "reefseg/cluster/kmeans.hpp"
#include "reefseg/error.hpp"
#include "reefseg/parallel.hpp"

namespace reefseg {
namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Cholesky factors and log-determinants of every component covariance.
struct Factorization {
    std::vector<Eigen::LLT<Matrix>> llt;
    std::vector<double> log_det;
};

Factorization factorize(const GmmModel& model) {
    Factorization f;
    f.llt.reserve(model.k);
    f.log_det.reserve(model.k);
    for (std::size_t c = 0; c < model.k; ++c) {
        const Eigen::Map<const Matrix> sigma(model.covariance(c).data(), static_cast<Eigen::Index>(model.d),
                                             static_cast<Eigen::Index>(model.d));
        Eigen::LLT<Matrix> llt(sigma);
        if (llt.info() != Eigen::Success) {
            throw NumericalError("GMM: covariance of component " + std::to_string(c) + " is not positive definite");
        }
        double log_det = 0.0;
        const Matrix& l = llt.matrixLLT();
        for (Eigen::Index j = 0; j < l.rows(); ++j) log_det += 2.0 * std::log(l(j, j));
        f.llt.push_back(std::move(llt));
        f.log_det.push_back(log_det);
    }
    return f;
}

void fill_log_densities(const GmmModel& model, const Factorization& f, const SampleMatrix& m,
                        std::vector<double>& out) {
    const std::size_t k = model.k;
    const std::size_t d = model.d;
    const double log_2pi = std::log(2.0 * std::numbers::pi);
    std::vector<double> log_weight(k);
    for (std::size_t c = 0; c < k; ++c) {
        log_weight[c] = model.weights[c] > 0.0 ? std::log(model.weights[c]) : -std::numeric_limits<double>::infinity();
    }
    out.resize(m.n * k);
    parallel_for(m.n, [&](std::size_t begin, std::size_t end) {
        Vector diff(static_cast<Eigen::Index>(d));
        for (std::size_t i = begin; i < end; ++i) {
            const auto x = m.row(i);
            for (std::size_t c = 0; c < k; ++c) {
                const auto mu = model.mean(c);
                for (std::size_t j = 0; j < d; ++j) diff[static_cast<Eigen::Index>(j)] = x[j] - mu[j];
                f.llt[c].matrixL().solveInPlace(diff);
                const double maha = diff.squaredNorm();
                out[i * k + c] = log_weight[c] - 0.5 * (static_cast<double>(d) * log_2pi + f.log_det[c] + maha);
            }
        }
    });
}

// Turns weighted log densities into responsibilities in place and returns
// the total log-likelihood.
double normalize_rows(std::vector<double>& scores, std::size_t n, std::size_t k) {
    std::vector<double> row_ll(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double* row = scores.data() + i * k;
            double hi = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) hi = std::max(hi, row[c]);
            if (!std::isfinite(hi)) {
                row_ll[i] = hi;
                continue;
            }
            double sum = 0.0;
            for (std::size_t c = 0; c < k; ++c) sum += std::exp(row[c] - hi);
            const double lse = hi + std::log(sum);
            for (std::size_t c = 0; c < k; ++c) row[c] = std::exp(row[c] - lse);
            row_ll[i] = lse;
        }
    });
    double total = 0.0;
    for (double v : row_ll) total += v;
    if (!std::isfinite(total)) throw NumericalError("GMM: log-likelihood is not finite");
    return total;
}

void m_step(const SampleMatrix& m, const std::vector<double>& resp, double reg, GmmModel& model) {
    const std::size_t k = model.k;
    const std::size_t d = model.d;
    for (std::size_t c = 0; c < k; ++c) {
        double mass = 0.0;
        std::vector<double> mean(d, 0.0);
        for (std::size_t i = 0; i < m.n; ++i) {
            const double r = resp[i * k + c];
            mass += r;
            const auto x = m.row(i);
            for (std::size_t j = 0; j < d; ++j) mean[j] += r * x[j];
        }
        model.weights[c] = mass / static_cast<double>(m.n);
        if (mass <= 0.0) continue;  // dead component keeps its last shape
        for (std::size_t j = 0; j < d; ++j) mean[j] /= mass;

        std::vector<double> cov(d * d, 0.0);
        std::vector<double> diff(d);
        for (std::size_t i = 0; i < m.n; ++i) {
            const double r = resp[i * k + c];
            const auto x = m.row(i);
            for (std::size_t j = 0; j < d; ++j) diff[j] = x[j] - mean[j];
            for (std::size_t a = 0; a < d; ++a) {
                for (std::size_t b = a; b < d; ++b) cov[a * d + b] += r * diff[a] * diff[b];
            }
        }
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = a; b < d; ++b) {
                const double v = cov[a * d + b] / mass + (a == b ? reg : 0.0);
                cov[a * d + b] = v;
                cov[b * d + a] = v;
            }
        }
        std::copy(mean.begin(), mean.end(), model.means.begin() + static_cast<std::ptrdiff_t>(c * d));
        std::copy(cov.begin(), cov.end(), model.covariances.begin() + static_cast<std::ptrdiff_t>(c * d * d));
    }
    // Renormalise so rounding in the masses cannot drift the weight sum.
    double total = 0.0;
    for (double w : model.weights) total += w;
    for (double& w : model.weights) w /= total;
}

GmmModel init_from_kmeans(const SampleMatrix& m, std::size_t k, const GmmConfig& cfg) {
    KMeansConfig kcfg;
    kcfg.seed = cfg.seed;
    kcfg.restarts = cfg.init_restarts;
    const auto km = kmeans_fit(m, k, kcfg);

    GmmModel model;
    model.k = k;
    model.d = m.d;
    model.means = km.model.centroids;
    model.weights.assign(k, 0.0);
    model.covariances.assign(k * m.d * m.d, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < m.n; ++i) {
        const auto c = static_cast<std::size_t>(km.labels[i]);
        ++counts[c];
        const auto x = m.row(i);
        const auto mu = model.mean(c);
        double* cov = model.covariances.data() + c * m.d * m.d;
        for (std::size_t a = 0; a < m.d; ++a) {
            for (std::size_t b = 0; b < m.d; ++b) cov[a * m.d + b] += (x[a] - mu[a]) * (x[b] - mu[b]);
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        model.weights[c] = static_cast<double>(counts[c]) / static_cast<double>(m.n);
        double* cov = model.covariances.data() + c * m.d * m.d;
        for (std::size_t a = 0; a < m.d; ++a) {
            for (std::size_t b = 0; b < m.d; ++b) {
                cov[a * m.d + b] = counts[c] > 0 ? cov[a * m.d + b] / static_cast<double>(counts[c]) : 0.0;
            }
            cov[a * m.d + a] += cfg.reg;
        }
    }
    return model;
}

}  // namespace

std::vector<double> weighted_log_densities(const GmmModel& model, const SampleMatrix& m) {
    if (m.d != model.d) throw ContractError("GMM: sample dimension does not match model");
    std::vector<double> out;
    fill_log_densities(model, factorize(model), m, out);
    return out;
}

double gmm_log_likelihood(const GmmModel& model, const SampleMatrix& m) {
    auto scores = weighted_log_densities(model, m);
    return normalize_rows(scores, m.n, model.k);
}

std::vector<int> argmax_rows(std::span<const double> scores, std::size_t k) {
    const std::size_t n = k == 0 ? 0 : scores.size() / k;
    std::vector<int> labels(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < k; ++c) {
            if (scores[i * k + c] > scores[i * k + best]) best = c;
        }
        labels[i] = static_cast<int>(best);
    }
    return labels;
}

GmmResult gmm_fit(const SampleMatrix& m, std::size_t k, const GmmConfig& cfg) {
    if (k == 0) throw ContractError("GMM: k must be at least 1");
    if (k > m.n) throw ContractError("GMM: k = " + std::to_string(k) + " exceeds sample count " + std::to_string(m.n));
    if (m.n <= m.d) throw ContractError("GMM: need more samples than features");
    if (!(cfg.reg >= 0.0)) throw ContractError("GMM: regularisation must be non-negative");

    GmmResult result;
    GmmModel& model = result.model;
    model = init_from_kmeans(m, k, cfg);

    std::vector<double>& resp = result.responsibilities;
    fill_log_densities(model, factorize(model), m, resp);
    double ll = normalize_rows(resp, m.n, k);
    model.log_likelihood_history.push_back(ll);

    const double n = static_cast<double>(m.n);
    for (std::size_t iter = 0; iter < cfg.max_iter; ++iter) {
        GmmModel previous_model = model;
        std::vector<double> previous_resp = resp;
        m_step(m, resp, cfg.reg, model);
        fill_log_densities(model, factorize(model), m, resp);
        const double next = normalize_rows(resp, m.n, k);
        // The ridge makes the M-step only approximately maximising, so near
        // the fixed point a step can lose likelihood. Keep the better model.
        if (next < ll) {
            previous_model.log_likelihood_history = std::move(model.log_likelihood_history);
            model = std::move(previous_model);
            resp = std::move(previous_resp);
            model.converged = true;
            break;
        }
        model.log_likelihood_history.push_back(next);
        model.iterations = iter + 1;
        const double gain = (next - ll) / n;
        ll = next;
        if (gain < cfg.tol) {
            model.converged = true;
            break;
        }
    }
    model.log_likelihood = ll;
    result.labels = argmax_rows(resp, k);
    return result;
}

}  // namespace reefseg
