#include "reefseg/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "reefseg/random.hpp"

namespace reefseg {
namespace {

struct ZoneLook {
    std::array<double, 3> rgb;
    double depth;
};

double gaussian(SplitMix64& rng) {
    // Box–Muller on the library's own uniform stream keeps output platform-stable.
    const double u1 = std::max(rng.uniform(), 0x1.0p-53);
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

ReefScene make_reef_scene(std::uint32_t size, std::uint64_t seed) {
    ReefScene scene{Raster(size, size, 3), Raster(size, size, 1), LabelMap(size, size, 0)};
    SplitMix64 rng(seed);
    const double centre = (static_cast<double>(size) - 1.0) / 2.0;
    const double half = static_cast<double>(size) / 2.0;

    constexpr std::array<double, 3> kCay{0.93, 0.88, 0.70};
    constexpr std::array<double, 3> kLagoon{0.30, 0.70, 0.72};
    constexpr std::array<double, 3> kFlat{0.46, 0.38, 0.27};
    constexpr std::array<double, 3> kSlopeTop{0.18, 0.42, 0.52};
    constexpr std::array<double, 3> kOcean{0.04, 0.15, 0.35};

    for (std::uint32_t y = 0; y < size; ++y) {
        for (std::uint32_t x = 0; x < size; ++x) {
            const double dx = (static_cast<double>(x) - centre) / half;
            const double dy = (static_cast<double>(y) - centre) / half;
            const double theta = std::atan2(dy, dx);
            const double r = std::hypot(dx, dy) / (1.0 + 0.06 * std::sin(3.0 * theta) + 0.04 * std::cos(5.0 * theta));

            ReefZone zone;
            std::array<double, 3> rgb{};
            double depth = 0.0;
            if (r < 0.16) {
                zone = ReefZone::SandCay;
                rgb = kCay;
                depth = 0.4;
            } else if (r < 0.36) {
                zone = ReefZone::Lagoon;
                rgb = kLagoon;
                depth = 6.0;
            } else if (r < 0.50) {
                zone = ReefZone::ReefFlat;
                rgb = kFlat;
                depth = 1.2;
            } else if (r < 0.66) {
                zone = ReefZone::ReefSlope;
                const double t = (r - 0.50) / 0.16;
                for (int c = 0; c < 3; ++c) rgb[c] = kSlopeTop[c] + t * (kOcean[c] - kSlopeTop[c]);
                depth = 2.0 + t * 23.0;
            } else {
                zone = ReefZone::Ocean;
                rgb = kOcean;
                depth = 25.0 + std::min(1.0, (r - 0.66) / 0.75) * 30.0;
            }

            const std::size_t p = std::size_t{y} * size + x;
            scene.zones.labels[p] = static_cast<int>(zone);
            for (std::uint32_t c = 0; c < 3; ++c) {
                scene.mosaic.at(c, p) = static_cast<float>(std::clamp(rgb[c] + 0.015 * gaussian(rng), 0.0, 1.0));
            }
            scene.bathymetry.data[p] = static_cast<float>(depth + 0.3 * gaussian(rng));
        }
    }

    // Cloud gap near the top-left corner (open ocean).
    const std::uint32_t gap = std::max<std::uint32_t>(1, size / 25);
    for (std::uint32_t y = 2; y < std::min(size, 2 + gap); ++y) {
        for (std::uint32_t x = 2; x < std::min(size, 2 + gap); ++x) {
            const std::size_t p = std::size_t{y} * size + x;
            scene.mosaic.invalidate(p);
            scene.zones.labels[p] = kInvalid;
        }
    }
    return scene;
}

}  // namespace reefseg
