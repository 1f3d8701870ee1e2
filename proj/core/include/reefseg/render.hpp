#pragma once

#include "reefseg/label_map.hpp"
#include "reefseg/raster.hpp"

namespace reefseg {

/// Paints each label with its palette colour. Sentinel pixels get the
/// palette background colour. Output is a 3-band raster with samples c/255,
/// every pixel valid, same width and height as `labels`.
/// Throws ContractError naming the first label that has no palette entry.
Raster render_labels(const LabelMap& labels, const Palette& palette);

}  // namespace reefseg
