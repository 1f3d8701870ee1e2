#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace reefseg::detail {

/// Max-distance-to-chord knee. Both axes are rescaled to [0,1] by their
/// min/max, the chord joins the first and last points, and the index of the
/// point farthest from it is returned (ties → lowest index). Returns nullopt
/// when the farthest distance is below `min_distance` or an axis is
/// degenerate.
std::optional<std::size_t> chord_knee(std::span<const double> x, std::span<const double> y, double min_distance);

}  // namespace reefseg::detail
