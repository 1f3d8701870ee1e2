#include "reefseg/refine.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "reefseg/error.hpp"

namespace reefseg {
namespace {

class UnionFind {
public:
    std::size_t make() {
        parent_.push_back(parent_.size());
        return parent_.size() - 1;
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

// Neighbour offsets for the chosen connectivity.
struct Offsets {
    std::vector<std::pair<int, int>> all;
    std::vector<std::pair<int, int>> preceding;  ///< already visited in a row-major scan
};

Offsets offsets_for(Connectivity connectivity) {
    Offsets o;
    o.all = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
    o.preceding = {{-1, 0}, {0, -1}};
    if (connectivity == Connectivity::Eight) {
        o.all.insert(o.all.end(), {{-1, -1}, {1, -1}, {-1, 1}, {1, 1}});
        o.preceding.insert(o.preceding.end(), {{-1, -1}, {1, -1}});
    }
    return o;
}

template <typename Fn>
void for_each_neighbour(std::uint32_t w, std::uint32_t h, std::size_t p, const std::vector<std::pair<int, int>>& offs,
                        Fn&& fn) {
    const auto x = static_cast<std::int64_t>(p % w);
    const auto y = static_cast<std::int64_t>(p / w);
    for (const auto& [dx, dy] : offs) {
        const std::int64_t nx = x + dx;
        const std::int64_t ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        fn(static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx));
    }
}

}  // namespace

Connectivity parse_connectivity(int value) {
    if (value == 4) return Connectivity::Four;
    if (value == 8) return Connectivity::Eight;
    throw ContractError("connectivity must be 4 or 8, got " + std::to_string(value));
}

ComponentMap connected_components(const LabelMap& lm, Connectivity connectivity) {
    const auto offs = offsets_for(connectivity);
    ComponentMap out;
    out.width = lm.width;
    out.height = lm.height;
    out.ids.assign(lm.size(), -1);

    UnionFind sets;
    std::vector<std::size_t> provisional(lm.size(), 0);
    for (std::size_t p = 0; p < lm.size(); ++p) {
        const int label = lm.labels[p];
        if (is_sentinel(label)) continue;
        bool assigned = false;
        for_each_neighbour(lm.width, lm.height, p, offs.preceding, [&](std::size_t q) {
            if (lm.labels[q] != label) return;
            if (!assigned) {
                provisional[p] = provisional[q];
                assigned = true;
            } else {
                sets.unite(provisional[p], provisional[q]);
            }
        });
        if (!assigned) provisional[p] = sets.make();
    }

    std::vector<int> dense;
    for (std::size_t p = 0; p < lm.size(); ++p) {
        if (is_sentinel(lm.labels[p])) continue;
        const std::size_t root = sets.find(provisional[p]);
        if (root >= dense.size()) dense.resize(root + 1, -1);
        if (dense[root] < 0) {
            dense[root] = static_cast<int>(out.components.size());
            const auto x = static_cast<std::uint32_t>(p % lm.width);
            const auto y = static_cast<std::uint32_t>(p / lm.width);
            out.components.push_back({lm.labels[p], 0, x, y, x, y, p});
        }
        const int id = dense[root];
        out.ids[p] = id;
        auto& c = out.components[static_cast<std::size_t>(id)];
        ++c.size;
        const auto x = static_cast<std::uint32_t>(p % lm.width);
        const auto y = static_cast<std::uint32_t>(p / lm.width);
        c.min_x = std::min(c.min_x, x);
        c.max_x = std::max(c.max_x, x);
        c.min_y = std::min(c.min_y, y);
        c.max_y = std::max(c.max_y, y);
    }
    return out;
}

LabelMap merge_small_components(const LabelMap& lm, std::size_t min_size, Connectivity connectivity) {
    if (min_size == 0) throw ContractError("merge_small_components: min_size must be at least 1");
    LabelMap out = lm;
    if (min_size == 1) return out;

    const auto offs = offsets_for(connectivity);
    const auto cc = connected_components(lm, connectivity);

    struct Region {
        int label;
        std::size_t first_pixel;
        std::vector<std::size_t> pixels;
        bool alive = true;
    };
    std::vector<Region> regions(cc.components.size());
    for (std::size_t i = 0; i < regions.size(); ++i) {
        regions[i].label = cc.components[i].label;
        regions[i].first_pixel = cc.components[i].first_pixel;
        regions[i].pixels.reserve(cc.components[i].size);
    }
    std::vector<int> owner = cc.ids;
    for (std::size_t p = 0; p < owner.size(); ++p) {
        if (owner[p] >= 0) regions[static_cast<std::size_t>(owner[p])].pixels.push_back(p);
    }

    using Key = std::tuple<std::size_t, std::size_t, std::size_t>;  // size, first pixel, region
    std::priority_queue<Key, std::vector<Key>, std::greater<>> queue;
    for (std::size_t i = 0; i < regions.size(); ++i) {
        if (regions[i].pixels.size() < min_size) queue.emplace(regions[i].pixels.size(), regions[i].first_pixel, i);
    }

    std::vector<std::size_t> stamp(out.size(), 0);
    std::size_t round = 0;
    std::map<int, std::size_t> votes;
    std::vector<std::size_t> border;
    while (!queue.empty()) {
        const auto [size, first, id] = queue.top();
        queue.pop();
        Region& region = regions[id];
        if (!region.alive || region.pixels.size() != size || region.first_pixel != first) continue;

        ++round;
        votes.clear();
        border.clear();
        for (std::size_t p : region.pixels) stamp[p] = round;
        for (std::size_t p : region.pixels) {
            for_each_neighbour(out.width, out.height, p, offs.all, [&](std::size_t q) {
                if (stamp[q] == round || is_sentinel(out.labels[q])) return;
                stamp[q] = round;
                ++votes[out.labels[q]];
                border.push_back(q);
            });
        }
        if (votes.empty()) continue;  // enclosed by sentinels: kept as is

        int target = votes.begin()->first;
        std::size_t best = 0;
        for (const auto& [label, count] : votes) {
            if (count > best) {
                best = count;
                target = label;
            }
        }

        for (std::size_t p : region.pixels) out.labels[p] = target;

        // Absorb every bordering region that already carries the target label.
        std::vector<std::size_t> group{id};
        for (std::size_t q : border) {
            if (out.labels[q] != target || owner[q] == static_cast<int>(id)) continue;
            const auto other = static_cast<std::size_t>(owner[q]);
            if (std::find(group.begin(), group.end(), other) == group.end()) group.push_back(other);
        }
        const std::size_t keeper = *std::max_element(group.begin(), group.end(), [&](std::size_t a, std::size_t b) {
            return regions[a].pixels.size() < regions[b].pixels.size();
        });
        Region& merged = regions[keeper];
        for (std::size_t member : group) {
            if (member == keeper) continue;
            Region& source = regions[member];
            for (std::size_t p : source.pixels) owner[p] = static_cast<int>(keeper);
            merged.pixels.insert(merged.pixels.end(), source.pixels.begin(), source.pixels.end());
            merged.first_pixel = std::min(merged.first_pixel, source.first_pixel);
            source.pixels.clear();
            source.alive = false;
        }
        merged.label = target;
        if (merged.pixels.size() < min_size) queue.emplace(merged.pixels.size(), merged.first_pixel, keeper);
    }
    return out;
}

LabelMap remap_labels(const LabelMap& lm, const std::vector<Remap>& mapping) {
    if (mapping.empty()) return lm;
    const auto present = lm.distinct_labels();
    std::map<int, int> table;
    for (const auto& r : mapping) {
        if (is_sentinel(r.from) || is_sentinel(r.to)) throw ContractError("remap: sentinel labels cannot be remapped");
        if (r.from == r.to) throw ContractError("remap: label " + std::to_string(r.from) + " mapped onto itself");
        if (!std::binary_search(present.begin(), present.end(), r.from)) {
            throw ContractError("remap: label " + std::to_string(r.from) + " does not occur in the map");
        }
        if (!table.emplace(r.from, r.to).second) {
            throw ContractError("remap: label " + std::to_string(r.from) + " mapped more than once");
        }
    }
    LabelMap out = lm;
    for (int& label : out.labels) {
        if (const auto it = table.find(label); it != table.end()) label = it->second;
    }
    return out;
}

std::pair<LabelMap, std::map<int, int>> compact(const LabelMap& lm) {
    std::map<int, int> table;
    LabelMap out = lm;
    int next = 0;
    for (int& label : out.labels) {
        if (is_sentinel(label)) continue;
        auto [it, inserted] = table.emplace(label, next);
        if (inserted) ++next;
        label = it->second;
    }
    return {std::move(out), std::move(table)};
}

LegendError::LegendError(std::vector<int> uncovered)
    : ContractError([&] {
          std::string msg = "legend does not cover label(s)";
          for (int label : uncovered) msg += " " + std::to_string(label);
          return msg;
      }()),
      uncovered_(std::move(uncovered)) {}

Palette HabitatMap::palette() const {
    std::vector<PaletteEntry> entries;
    for (const auto& e : legend) entries.push_back({e.label, e.color, e.class_name, false});
    return Palette(std::move(entries));
}

HabitatMap assign_legend(const LabelMap& lm, const std::vector<LegendEntry>& legend, Provenance provenance) {
    std::set<int> seen;
    for (const auto& e : legend) {
        if (!seen.insert(e.label).second) throw ContractError("legend lists label " + std::to_string(e.label) + " twice");
    }
    const auto present = lm.distinct_labels();
    std::vector<int> uncovered;
    for (int label : present) {
        if (!seen.contains(label)) uncovered.push_back(label);
    }
    if (!uncovered.empty()) throw LegendError(std::move(uncovered));

    HabitatMap map;
    map.labelmap = lm;
    for (const auto& e : legend) {
        if (std::binary_search(present.begin(), present.end(), e.label)) map.legend.push_back(e);
    }
    std::sort(map.legend.begin(), map.legend.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
    map.provenance = std::move(provenance);
    return map;
}

const std::vector<LegendClass>& benthic_preset() {
    static const std::vector<LegendClass> classes{
        {"ocean", {11, 60, 140}},
        {"sand", {245, 227, 92}},
        {"rock/rubble", {176, 127, 79}},
    };
    return classes;
}

const std::vector<LegendClass>& geomorphic_preset() {
    static const std::vector<LegendClass> classes{
        {"reef flat", {217, 178, 111}},
        {"lagoon/plateau", {79, 195, 217}},
        {"reef slope", {46, 139, 87}},
        {"ocean", {11, 60, 140}},
    };
    return classes;
}

std::vector<LegendEntry> legend_from_preset(const std::vector<int>& labels, const std::vector<LegendClass>& classes) {
    if (labels.size() != classes.size()) {
        throw ContractError("legend preset has " + std::to_string(classes.size()) + " classes but the map has " +
                            std::to_string(labels.size()) + " labels");
    }
    std::vector<LegendEntry> legend;
    for (std::size_t i = 0; i < labels.size(); ++i) legend.push_back({labels[i], classes[i].name, classes[i].color});
    return legend;
}

std::vector<LegendEntry> categorical_legend(const std::vector<int>& labels) {
    std::vector<LegendEntry> legend;
    for (int label : labels) legend.push_back({label, "cluster " + std::to_string(label), categorical_color(label)});
    return legend;
}

std::vector<LegendEntry> relabel_legend(const std::vector<LegendEntry>& legend, const std::map<int, int>& table) {
    std::vector<LegendEntry> out;
    for (const auto& e : legend) {
        if (const auto it = table.find(e.label); it != table.end()) out.push_back({it->second, e.class_name, e.color});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
    return out;
}

std::string legend_to_json(const std::vector<LegendEntry>& legend) {
    auto array = nlohmann::json::array();
    for (const auto& e : legend) {
        array.push_back({{"label", e.label}, {"class", e.class_name}, {"color", to_hex(e.color)}});
    }
    return array.dump(2) + "\n";
}

std::vector<LegendEntry> legend_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("legend JSON: ") + e.what());
    }
    if (!doc.is_array()) throw FormatError("legend JSON must be an array");
    std::vector<LegendEntry> legend;
    for (const auto& item : doc) {
        if (!item.is_object() || !item.contains("label") || !item.contains("class") || !item.contains("color") ||
            !item["label"].is_number_integer() || !item["class"].is_string() || !item["color"].is_string()) {
            throw FormatError("legend entries need integer \"label\", string \"class\" and \"color\"");
        }
        legend.push_back({item["label"].get<int>(), item["class"].get<std::string>(),
                          parse_hex_color(item["color"].get<std::string>())});
    }
    return legend;
}

}  // namespace reefseg
