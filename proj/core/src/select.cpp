#include "reefseg/select.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "reefseg/detail/knee.hpp"
#include "reefseg/error.hpp"

namespace reefseg {
namespace {

void check_range(const SampleMatrix& m, KRange range) {
    if (range.min == 0 || range.max < range.min) {
        throw ContractError("curve: empty k range [" + std::to_string(range.min) + ", " + std::to_string(range.max) +
                            "]");
    }
    if (range.max > m.n) throw ContractError("curve: k range exceeds sample count " + std::to_string(m.n));
}

// A single candidate is its own proposal; two points carry no knee.
std::optional<std::size_t> propose(const SelectionCurve& curve) {
    if (curve.points.size() == 1) return curve.points.front().k;
    if (curve.points.size() < 3) return std::nullopt;
    return detect_knee(curve);
}

}  // namespace

SelectionCurve wcss_curve(const SampleMatrix& m, KRange range, const KMeansConfig& cfg) {
    check_range(m, range);
    SelectionCurve curve;
    curve.method = CurveMethod::Wcss;
    KMeansResult previous = kmeans_fit(m, range.min, cfg);
    curve.points.push_back({range.min, previous.model.wcss});
    for (std::size_t k = range.min + 1; k <= range.max; ++k) {
        previous = kmeans_fit_nested(m, previous, cfg);
        curve.points.push_back({k, previous.model.wcss});
    }
    curve.proposed_k = propose(curve);
    return curve;
}

std::size_t gmm_free_parameters(std::size_t k, std::size_t d) { return (k - 1) + k * d + k * d * (d + 1) / 2; }

double bic_score(double log_likelihood, std::size_t free_parameters, std::size_t n) {
    if (n == 0) throw ContractError("BIC: no samples");
    return static_cast<double>(free_parameters) * std::log(static_cast<double>(n)) - 2.0 * log_likelihood;
}

double bic(const GmmModel& model, const SampleMatrix& m) {
    if (m.n == 0) throw ContractError("BIC: no samples");
    return bic_score(model.log_likelihood, gmm_free_parameters(model.k, model.d), m.n);
}

SelectionCurve bic_curve(const SampleMatrix& m, KRange range, const GmmConfig& cfg) {
    check_range(m, range);
    SelectionCurve curve;
    curve.method = CurveMethod::Bic;
    for (std::size_t k = range.min; k <= range.max; ++k) {
        const auto fit = gmm_fit(m, k, cfg);
        curve.points.push_back({k, bic(fit.model, m)});
    }
    curve.proposed_k = propose(curve);
    return curve;
}

std::optional<std::size_t> detect_knee(const SelectionCurve& curve) {
    if (curve.points.size() < 3) throw ContractError("detect_knee: need at least 3 points");
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& p : curve.points) {
        x.push_back(static_cast<double>(p.k));
        y.push_back(p.score);
    }
    const auto index = detail::chord_knee(x, y, kKneeThreshold);
    if (!index) return std::nullopt;
    return curve.points[*index].k;
}

std::string curve_to_csv(const SelectionCurve& curve) {
    std::string out = "k,score\n";
    char buffer[64];
    for (const auto& p : curve.points) {
        out += std::to_string(p.k);
        out += ',';
        const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), p.score);
        out.append(buffer, ec == std::errc{} ? end : buffer);
        out += '\n';
    }
    return out;
}

std::string to_string(CurveMethod method) { return method == CurveMethod::Wcss ? "wcss" : "bic"; }

CurveMethod parse_curve_method(const std::string& name) {
    if (name == "wcss" || name == "kmeans") return CurveMethod::Wcss;
    if (name == "bic" || name == "gmm") return CurveMethod::Bic;
    throw ContractError("unknown curve method '" + name + "'");
}

}  // namespace reefseg
