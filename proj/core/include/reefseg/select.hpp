#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "reefseg/cluster/gmm.hpp"
#include "reefseg/cluster/kmeans.hpp"
#include "reefseg/prep.hpp"

namespace reefseg {

enum class CurveMethod { Wcss, Bic };

struct CurvePoint {
    std::size_t k = 0;
    double score = 0.0;
};

/// Score-vs-k curve for model-order selection. `proposed_k` is advisory.
struct SelectionCurve {
    CurveMethod method = CurveMethod::Wcss;
    std::vector<CurvePoint> points;  ///< strictly increasing k
    std::optional<std::size_t> proposed_k;
};

struct KRange {
    std::size_t min = 1;
    std::size_t max = 1;
};

/// Knee distances below this (on the normalised axes) count as "no knee".
inline constexpr double kKneeThreshold = 0.05;

/// One k-means fit per k. Each fit after the first is nested on the previous
/// one (see kmeans_fit_nested), so scores never increase with k.
SelectionCurve wcss_curve(const SampleMatrix& m, KRange range, const KMeansConfig& cfg = {});

/// Number of free parameters of a full-covariance mixture:
/// (k-1) + k·d + k·d(d+1)/2.
std::size_t gmm_free_parameters(std::size_t k, std::size_t d);

/// p·ln(n) − 2·L̂ for a model fitted on `m` (lower is better).
double bic(const GmmModel& model, const SampleMatrix& m);
/// Same formula from its ingredients.
double bic_score(double log_likelihood, std::size_t free_parameters, std::size_t n);

/// One gmm_fit + bic per k.
SelectionCurve bic_curve(const SampleMatrix& m, KRange range, const GmmConfig& cfg = {});

/// Max-distance-to-chord knee on axes normalised to [0,1]; nullopt when the
/// farthest point lies closer than kKneeThreshold to the chord.
/// Throws ContractError for fewer than 3 points.
std::optional<std::size_t> detect_knee(const SelectionCurve& curve);

/// CSV with header "k,score" and LF line endings. Scores use the shortest
/// round-trip decimal representation.
std::string curve_to_csv(const SelectionCurve& curve);

std::string to_string(CurveMethod method);
CurveMethod parse_curve_method(const std::string& name);

}  // namespace reefseg
