#pragma once

#include <cstdint>

#include "reefseg/label_map.hpp"
#include "reefseg/raster.hpp"

namespace reefseg {

/// Zones of the synthetic atoll, innermost first.
enum class ReefZone : int { SandCay = 0, Lagoon = 1, ReefFlat = 2, ReefSlope = 3, Ocean = 4 };

/// Deterministic stand-in for a reef mosaic: an RGB image in [0,1], a
/// co-registered bathymetry band in metres, and the zone map that generated
/// them. Zones are concentric with a wavy outline; depth ramps across the
/// slope and the open ocean. A small square of the mosaic is masked out to
/// mimic a cloud gap.
struct ReefScene {
    Raster mosaic;
    Raster bathymetry;
    LabelMap zones;
};

ReefScene make_reef_scene(std::uint32_t size = 128, std::uint64_t seed = 7);

}  // namespace reefseg
