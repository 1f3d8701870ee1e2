#include "reefseg/detail/knee.hpp"

#include <algorithm>
#include <cmath>

#include "reefseg/error.hpp"

namespace reefseg::detail {

std::optional<std::size_t> chord_knee(std::span<const double> x, std::span<const double> y, double min_distance) {
    if (x.size() != y.size()) throw ContractError("chord_knee: axis length mismatch");
    if (x.size() < 3) return std::nullopt;
    const auto [x_lo, x_hi] = std::minmax_element(x.begin(), x.end());
    const auto [y_lo, y_hi] = std::minmax_element(y.begin(), y.end());
    const double x_span = *x_hi - *x_lo;
    const double y_span = *y_hi - *y_lo;
    if (!(x_span > 0.0) || !(y_span > 0.0)) return std::nullopt;

    auto nx = [&](std::size_t i) { return (x[i] - *x_lo) / x_span; };
    auto ny = [&](std::size_t i) { return (y[i] - *y_lo) / y_span; };
    const std::size_t last = x.size() - 1;
    const double x0 = nx(0), y0 = ny(0);
    const double dx = nx(last) - x0, dy = ny(last) - y0;
    const double chord = std::hypot(dx, dy);
    if (chord == 0.0) return std::nullopt;

    std::size_t best = 0;
    double best_distance = -1.0;
    for (std::size_t i = 0; i <= last; ++i) {
        const double distance = std::abs(dx * (ny(i) - y0) - dy * (nx(i) - x0)) / chord;
        if (distance > best_distance) {
            best_distance = distance;
            best = i;
        }
    }
    if (best_distance < min_distance) return std::nullopt;
    return best;
}

}  // namespace reefseg::detail
