#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "reefseg/error.hpp"
#include "reefseg/pipeline.hpp"

namespace reefseg {
namespace {

using nlohmann::json;

// Collects every violation instead of stopping at the first one.
class Checker {
public:
    std::vector<std::string> problems;

    void fail(const std::string& message) { problems.push_back(message); }

    void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
        for (const auto& [key, value] : obj.items()) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
                fail(where + ": unknown key \"" + key + "\"");
            }
        }
    }

    const json* object(const json& parent, const char* key, const std::string& where) {
        if (!parent.contains(key) || parent[key].is_null()) return nullptr;
        if (!parent[key].is_object()) {
            fail(where + "." + key + " must be an object");
            return nullptr;
        }
        return &parent[key];
    }

    template <typename T>
    void uint_field(const json& obj, const char* key, const std::string& where, T& out, std::uint64_t min = 0) {
        if (!obj.contains(key) || obj[key].is_null()) return;
        const auto& v = obj[key];
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            fail(where + key + " must be a non-negative integer");
            return;
        }
        const auto value = v.get<std::uint64_t>();
        if (value < min) {
            fail(where + key + " must be at least " + std::to_string(min));
            return;
        }
        out = static_cast<T>(value);
    }

    void number_field(const json& obj, const char* key, const std::string& where, double& out, bool positive) {
        if (!obj.contains(key) || obj[key].is_null()) return;
        const auto& v = obj[key];
        if (!v.is_number()) {
            fail(where + key + " must be a number");
            return;
        }
        const double value = v.get<double>();
        if (!std::isfinite(value) || (positive && !(value > 0.0)) || (!positive && value < 0.0)) {
            fail(where + key + (positive ? " must be positive" : " must be non-negative"));
            return;
        }
        out = value;
    }

    std::optional<std::string> string_field(const json& obj, const char* key, const std::string& where) {
        if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
        if (!obj[key].is_string()) {
            fail(where + key + " must be a string");
            return std::nullopt;
        }
        return obj[key].get<std::string>();
    }
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    if (base.empty() || p.is_absolute()) return p;
    return base / p;
}

std::string position_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

std::string to_string(MappingMode mode) { return mode == MappingMode::Benthic ? "benthic" : "geomorphic"; }

std::string to_string(Method method) {
    switch (method) {
        case Method::KMeans: return "kmeans";
        case Method::Gmm: return "gmm";
        case Method::Agnes: return "agnes";
        case Method::Dbscan: return "dbscan";
    }
    return "kmeans";
}

std::string to_string(Normalization scheme) { return scheme == Normalization::MinMax ? "minmax" : "zscore"; }

PipelineConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
    Checker check;
    PipelineConfig cfg;
    if (!doc.is_object()) throw ConfigError({"config must be a JSON object"});
    check.only_keys(doc, "config", {"mode", "inputs", "method", "k", "dbscan", "normalization", "kmeans", "gmm",
                                    "agnes", "refine", "legend", "curves", "seed", "output_dir"});

    if (auto mode = check.string_field(doc, "mode", "")) {
        if (*mode == "benthic") cfg.mode = MappingMode::Benthic;
        else if (*mode == "geomorphic") cfg.mode = MappingMode::Geomorphic;
        else check.fail("mode must be \"benthic\" or \"geomorphic\", got \"" + *mode + "\"");
    }

    if (const json* inputs = check.object(doc, "inputs", "config")) {
        check.only_keys(*inputs, "inputs", {"mosaic", "bathymetry"});
        if (auto mosaic = check.string_field(*inputs, "mosaic", "inputs.")) cfg.mosaic = resolve(base_dir, *mosaic);
        if (auto bathy = check.string_field(*inputs, "bathymetry", "inputs.")) cfg.bathymetry = resolve(base_dir, *bathy);
    }
    if (cfg.mosaic.empty()) check.fail("inputs.mosaic is required");
    if (cfg.mode == MappingMode::Geomorphic && !cfg.bathymetry) {
        check.fail("bathymetry required: geomorphic mode needs inputs.bathymetry");
    }

    if (auto method = check.string_field(doc, "method", "")) {
        if (*method == "kmeans") cfg.method = Method::KMeans;
        else if (*method == "gmm") cfg.method = Method::Gmm;
        else if (*method == "agnes") cfg.method = Method::Agnes;
        else if (*method == "dbscan") cfg.method = Method::Dbscan;
        else check.fail("method must be one of kmeans, gmm, agnes, dbscan; got \"" + *method + "\"");
    }

    const bool has_k = doc.contains("k") && !doc["k"].is_null();
    if (cfg.method == Method::Dbscan) {
        if (has_k) check.fail("k conflicts with method dbscan (use dbscan.eps / dbscan.min_pts)");
    } else if (!has_k) {
        check.fail("k is required for method " + to_string(cfg.method));
    } else {
        std::size_t k = 0;
        check.uint_field(doc, "k", "", k, 1);
        if (k >= 1) cfg.k = k;
    }

    if (const json* db = check.object(doc, "dbscan", "config")) {
        check.only_keys(*db, "dbscan", {"eps", "min_pts"});
        if (cfg.method != Method::Dbscan && !db->empty()) check.fail("dbscan settings given for method " + to_string(cfg.method));
        double eps = 0.0;
        check.number_field(*db, "eps", "dbscan.", eps, true);
        if (eps > 0.0) cfg.eps = eps;
        std::size_t min_pts = 0;
        check.uint_field(*db, "min_pts", "dbscan.", min_pts, 1);
        if (min_pts > 0) cfg.min_pts = min_pts;
    }

    if (auto scheme = check.string_field(doc, "normalization", "")) {
        if (*scheme == "minmax") cfg.normalization = Normalization::MinMax;
        else if (*scheme == "zscore") cfg.normalization = Normalization::ZScore;
        else check.fail("normalization must be \"minmax\" or \"zscore\", got \"" + *scheme + "\"");
    }

    if (const json* km = check.object(doc, "kmeans", "config")) {
        check.only_keys(*km, "kmeans", {"max_iter", "tol", "restarts"});
        check.uint_field(*km, "max_iter", "kmeans.", cfg.kmeans.max_iter, 1);
        check.number_field(*km, "tol", "kmeans.", cfg.kmeans.tol, false);
        check.uint_field(*km, "restarts", "kmeans.", cfg.kmeans.restarts, 1);
    }
    if (const json* gm = check.object(doc, "gmm", "config")) {
        check.only_keys(*gm, "gmm", {"max_iter", "tol", "reg", "covariance", "init_restarts"});
        check.uint_field(*gm, "max_iter", "gmm.", cfg.gmm.max_iter, 1);
        check.number_field(*gm, "tol", "gmm.", cfg.gmm.tol, false);
        check.number_field(*gm, "reg", "gmm.", cfg.gmm.reg, false);
        check.uint_field(*gm, "init_restarts", "gmm.", cfg.gmm.init_restarts, 1);
        if (auto cov = check.string_field(*gm, "covariance", "gmm."); cov && *cov != "full") {
            check.fail("gmm.covariance must be \"full\" (the only supported type), got \"" + *cov + "\"");
        }
    }
    if (const json* ag = check.object(doc, "agnes", "config")) {
        check.only_keys(*ag, "agnes", {"downsample", "linkage", "max_samples"});
        check.uint_field(*ag, "downsample", "agnes.", cfg.agnes_downsample, 1);
        check.uint_field(*ag, "max_samples", "agnes.", cfg.agnes_max_samples, 1);
        if (auto linkage = check.string_field(*ag, "linkage", "agnes.")) {
            try {
                cfg.linkage = parse_linkage(*linkage);
            } catch (const ContractError&) {
                check.fail("agnes.linkage must be ward, complete or average; got \"" + *linkage + "\"");
            }
        }
    }

    if (const json* rf = check.object(doc, "refine", "config")) {
        check.only_keys(*rf, "refine", {"min_size", "connectivity", "remaps"});
        check.uint_field(*rf, "min_size", "refine.", cfg.refine.min_size, 1);
        if (rf->contains("connectivity")) {
            const auto& c = (*rf)["connectivity"];
            if (c.is_number_integer() && (c.get<int>() == 4 || c.get<int>() == 8)) {
                cfg.refine.connectivity = parse_connectivity(c.get<int>());
            } else {
                check.fail("refine.connectivity must be 4 or 8");
            }
        }
        if (rf->contains("remaps")) {
            const auto& remaps = (*rf)["remaps"];
            if (!remaps.is_array()) {
                check.fail("refine.remaps must be an array of {\"from\", \"to\"}");
            } else {
                std::set<int> froms;
                for (const auto& item : remaps) {
                    if (!item.is_object() || !item.contains("from") || !item.contains("to") ||
                        !item["from"].is_number_integer() || !item["to"].is_number_integer()) {
                        check.fail("refine.remaps entries need integer \"from\" and \"to\"");
                        continue;
                    }
                    const Remap r{item["from"].get<int>(), item["to"].get<int>()};
                    if (r.from < 0 || r.to < 0) check.fail("refine.remaps labels must be non-negative");
                    else if (r.from == r.to) check.fail("refine.remaps maps label " + std::to_string(r.from) + " onto itself");
                    else if (!froms.insert(r.from).second) check.fail("refine.remaps lists label " + std::to_string(r.from) + " twice");
                    else cfg.refine.remaps.push_back(r);
                }
            }
        }
    }

    if (doc.contains("legend") && !doc["legend"].is_null()) {
        const auto& legend = doc["legend"];
        if (legend.is_string()) {
            const auto preset = legend.get<std::string>();
            if (preset == "benthic" || preset == "geomorphic" || preset == "categorical") {
                cfg.refine.legend.preset = preset;
            } else {
                check.fail("legend preset must be benthic, geomorphic or categorical; got \"" + preset + "\"");
            }
        } else if (legend.is_array()) {
            try {
                cfg.refine.legend.entries = legend_from_json(legend.dump());
                cfg.refine.legend.preset.clear();
                std::set<int> labels;
                for (const auto& e : cfg.refine.legend.entries) {
                    if (!labels.insert(e.label).second) check.fail("legend lists label " + std::to_string(e.label) + " twice");
                }
            } catch (const Error& e) {
                check.fail(std::string("legend: ") + e.what());
            }
        } else {
            check.fail("legend must be a preset name or an array of entries");
        }
    }

    if (const json* cv = check.object(doc, "curves", "config")) {
        check.only_keys(*cv, "curves", {"k_min", "k_max"});
        KRange range{1, 8};
        check.uint_field(*cv, "k_min", "curves.", range.min, 1);
        check.uint_field(*cv, "k_max", "curves.", range.max, 1);
        if (range.max < range.min) check.fail("curves.k_max must be >= curves.k_min");
        else cfg.curves = range;
    }

    check.uint_field(doc, "seed", "", cfg.seed);
    cfg.kmeans.seed = cfg.seed;
    cfg.gmm.seed = cfg.seed;

    if (auto out = check.string_field(doc, "output_dir", "")) cfg.output_dir = resolve(base_dir, *out);
    else if (!base_dir.empty()) cfg.output_dir = base_dir / cfg.output_dir;

    if (!check.problems.empty()) throw ConfigError(std::move(check.problems));
    return cfg;
}

PipelineConfig validate_config(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({"syntax error at " + position_of(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what()});
    }
    return config_from_json(doc, base_dir);
}

json config_to_json(const PipelineConfig& c) {
    json doc;
    doc["mode"] = to_string(c.mode);
    doc["inputs"] = {{"mosaic", c.mosaic.string()}};
    if (c.bathymetry) doc["inputs"]["bathymetry"] = c.bathymetry->string();
    doc["method"] = to_string(c.method);
    if (c.k) doc["k"] = *c.k;
    if (c.method == Method::Dbscan) {
        doc["dbscan"] = json::object();
        if (c.eps) doc["dbscan"]["eps"] = *c.eps;
        if (c.min_pts) doc["dbscan"]["min_pts"] = *c.min_pts;
    }
    doc["normalization"] = to_string(c.normalization);
    doc["kmeans"] = {{"max_iter", c.kmeans.max_iter}, {"tol", c.kmeans.tol}, {"restarts", c.kmeans.restarts}};
    doc["gmm"] = {{"max_iter", c.gmm.max_iter},
                  {"tol", c.gmm.tol},
                  {"reg", c.gmm.reg},
                  {"covariance", "full"},
                  {"init_restarts", c.gmm.init_restarts}};
    doc["agnes"] = {{"downsample", c.agnes_downsample},
                    {"linkage", std::string(to_string(c.linkage))},
                    {"max_samples", c.agnes_max_samples}};
    auto remaps = json::array();
    for (const auto& r : c.refine.remaps) remaps.push_back({{"from", r.from}, {"to", r.to}});
    doc["refine"] = {{"min_size", c.refine.min_size},
                     {"connectivity", static_cast<int>(c.refine.connectivity)},
                     {"remaps", remaps}};
    if (!c.refine.legend.preset.empty()) {
        doc["legend"] = c.refine.legend.preset;
    } else {
        doc["legend"] = json::parse(legend_to_json(c.refine.legend.entries));
    }
    if (c.curves) doc["curves"] = {{"k_min", c.curves->min}, {"k_max", c.curves->max}};
    doc["seed"] = c.seed;
    doc["output_dir"] = c.output_dir.string();
    return doc;
}

}  // namespace reefseg
