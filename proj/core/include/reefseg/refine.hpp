#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "reefseg/error.hpp"
#include "reefseg/label_map.hpp"
#include "reefseg/raster.hpp"

namespace reefseg {

enum class Connectivity { Four = 4, Eight = 8 };

Connectivity parse_connectivity(int value);

struct Component {
    int label = 0;
    std::size_t size = 0;
    std::uint32_t min_x = 0, min_y = 0, max_x = 0, max_y = 0;  ///< inclusive bounding box
    std::size_t first_pixel = 0;                              ///< row-major index of its first pixel
};

/// Component id per pixel (-1 on sentinels); ids are dense and ordered by
/// each component's first pixel in row-major scan.
struct ComponentMap {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<int> ids;
    std::vector<Component> components;
};

/// Two-pass union-find labelling of equal-label regions. Sentinel pixels
/// belong to no component.
ComponentMap connected_components(const LabelMap& lm, Connectivity connectivity);

/// Repeatedly relabels the smallest component below `min_size` (ties → the
/// one whose first pixel comes first) to the modal label of the distinct
/// non-sentinel pixels bordering it (ties → lowest label), until every
/// component that has a non-sentinel neighbour reaches `min_size`.
/// Components touching only sentinels or the image edge are left alone.
LabelMap merge_small_components(const LabelMap& lm, std::size_t min_size, Connectivity connectivity);

struct Remap {
    int from = 0;
    int to = 0;
};

/// Single-pass substitution: chains are not followed (3→1, 1→0 sends 3 to 1).
/// Throws ContractError when a `from` label is absent, from == to, a `from`
/// repeats, or a label is a sentinel.
LabelMap remap_labels(const LabelMap& lm, const std::vector<Remap>& mapping);

/// Renumbers surviving labels to 0..L-1 by first row-major occurrence.
/// Returns the new map and the old→new table.
std::pair<LabelMap, std::map<int, int>> compact(const LabelMap& lm);

struct LegendEntry {
    int label = 0;
    std::string class_name;
    Rgb color;

    friend bool operator==(const LegendEntry&, const LegendEntry&) = default;
};

/// Free-form record of how a map was produced (method, k, seed, refinement
/// parameters). Kept as string pairs so it serialises without schema.
using Provenance = std::map<std::string, std::string>;

struct HabitatMap {
    LabelMap labelmap;
    std::vector<LegendEntry> legend;  ///< sorted by label
    Provenance provenance;

    Palette palette() const;
};

/// Checks that every surviving label has exactly one legend entry. Entries
/// for labels absent from the map are dropped. Throws LegendError listing
/// every uncovered label, or ContractError on a duplicate legend label.
HabitatMap assign_legend(const LabelMap& lm, const std::vector<LegendEntry>& legend, Provenance provenance = {});

/// Raised when surviving labels lack legend entries.
class LegendError : public ContractError {
public:
    explicit LegendError(std::vector<int> uncovered);
    const std::vector<int>& uncovered() const noexcept { return uncovered_; }

private:
    std::vector<int> uncovered_;
};

struct LegendClass {
    std::string name;
    Rgb color;
};

/// Benthic classes: ocean, sand, rock/rubble.
const std::vector<LegendClass>& benthic_preset();
/// Geomorphic classes: reef flat, lagoon/plateau, reef slope, ocean.
const std::vector<LegendClass>& geomorphic_preset();

/// Pairs `classes` with `labels` in order. Throws ContractError when the
/// counts differ.
std::vector<LegendEntry> legend_from_preset(const std::vector<int>& labels, const std::vector<LegendClass>& classes);
/// "cluster N" entries coloured with categorical_color.
std::vector<LegendEntry> categorical_legend(const std::vector<int>& labels);

/// Applies an old→new table (from `compact`) to legend labels.
std::vector<LegendEntry> relabel_legend(const std::vector<LegendEntry>& legend, const std::map<int, int>& table);

/// JSON array of {"label": int, "class": string, "color": "#RRGGBB"}.
std::string legend_to_json(const std::vector<LegendEntry>& legend);
std::vector<LegendEntry> legend_from_json(const std::string& text);

}  // namespace reefseg
