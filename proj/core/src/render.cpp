#include "reefseg/render.hpp"

#include "reefseg/error.hpp"

namespace reefseg {

Raster render_labels(const LabelMap& labels, const Palette& palette) {
    Raster out(labels.width, labels.height, 3);
    const Rgb background = palette.background();
    for (std::size_t p = 0; p < labels.size(); ++p) {
        const int label = labels.labels[p];
        Rgb color = background;
        if (!is_sentinel(label)) {
            const PaletteEntry* entry = palette.find(label);
            if (!entry) throw ContractError("label " + std::to_string(label) + " has no palette entry");
            color = entry->color;
        }
        out.at(0, p) = static_cast<float>(color.r) / 255.0f;
        out.at(1, p) = static_cast<float>(color.g) / 255.0f;
        out.at(2, p) = static_cast<float>(color.b) / 255.0f;
    }
    return out;
}

}  // namespace reefseg
