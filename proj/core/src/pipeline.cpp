#include "reefseg/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <string>

#include "reefseg/cluster/dbscan.hpp"
#include "reefseg/error.hpp"
#include "reefseg/raster_io.hpp"
#include "reefseg/render.hpp"

namespace reefseg {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

class StageTimer {
public:
    explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}

    template <typename Fn>
    auto time(const std::string& stage, Fn&& fn) {
        const auto start = Clock::now();
        auto record = [&] {
            sink_[stage] += std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        };
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                record();
            } else {
                auto result = fn();
                record();
                return result;
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const NumericalError& e) {
            throw NumericalError(stage + ": " + e.what());
        } catch (const FormatError& e) {
            throw FormatError(stage + ": " + e.what());
        } catch (const IoError& e) {
            throw IoError(stage + ": " + e.what());
        } catch (const ContractError& e) {
            throw ContractError(stage + ": " + e.what());
        }
    }

private:
    std::map<std::string, double>& sink_;
};

std::size_t required_k(const PipelineConfig& config) {
    if (!config.k) throw ConfigError({"k is required for method " + to_string(config.method)});
    return *config.k;
}

}  // namespace

PreparedInputs prepare_inputs(const PipelineConfig& config) {
    PreparedInputs inputs;
    inputs.display = load_raster(config.mosaic);
    if (config.mode == MappingMode::Geomorphic) {
        if (!config.bathymetry) throw ConfigError({"bathymetry required: geomorphic mode needs inputs.bathymetry"});
        Raster depth = load_raster(*config.bathymetry);
        if (depth.width != inputs.display.width || depth.height != inputs.display.height) {
            throw ContractError("mosaic is " + std::to_string(inputs.display.width) + "x" +
                                std::to_string(inputs.display.height) + " but bathymetry is " +
                                std::to_string(depth.width) + "x" + std::to_string(depth.height));
        }
        const Raster parts[] = {inputs.display, depth};
        inputs.features = stack_bands(parts);
    } else {
        inputs.features = inputs.display;
    }
    return inputs;
}

NormalizedSamples prepare_samples(const PreparedInputs& inputs, Normalization scheme) {
    return normalize(to_samples(inputs.features), scheme);
}

std::vector<ClusterStats> cluster_stats(const LabelMap& labels, const Raster& features, const Raster& display) {
    std::map<int, ClusterStats> acc;
    std::map<int, std::array<double, 3>> color_sums;
    std::map<int, std::vector<double>> feature_sums;
    for (std::size_t p = 0; p < labels.size(); ++p) {
        const int label = labels.labels[p];
        if (is_sentinel(label)) continue;
        auto& s = acc[label];
        s.label = label;
        ++s.size;
        auto& fs = feature_sums[label];
        fs.resize(features.bands, 0.0);
        for (std::uint32_t b = 0; b < features.bands; ++b) fs[b] += features.at(b, p);
        auto& cs = color_sums[label];
        for (std::uint32_t c = 0; c < 3; ++c) cs[c] += display.at(display.bands >= 3 ? c : 0, p);
    }
    std::vector<ClusterStats> out;
    for (auto& [label, s] : acc) {
        const double n = static_cast<double>(s.size);
        for (double v : feature_sums[label]) s.mean_features.push_back(v / n);
        const auto& cs = color_sums[label];
        auto channel = [&](int c) {
            return static_cast<std::uint8_t>(std::lround(std::clamp(cs[c] / n, 0.0, 1.0) * 255.0));
        };
        s.mean_color = {channel(0), channel(1), channel(2)};
        out.push_back(std::move(s));
    }
    return out;
}

FitOutput run_fit(const PipelineConfig& config) {
    FitOutput out;
    StageTimer timer(out.timings_ms);
    const auto inputs = timer.time("load", [&] { return prepare_inputs(config); });
    auto fit = run_fit(config, inputs);
    fit.timings_ms.insert(out.timings_ms.begin(), out.timings_ms.end());
    return fit;
}

FitOutput run_fit(const PipelineConfig& config, const PreparedInputs& inputs) {
    FitOutput out;
    StageTimer timer(out.timings_ms);
    const Raster& full = inputs.features;
    const bool pooled = config.method == Method::Agnes && config.agnes_downsample > 1;

    const Raster grid = pooled ? timer.time("downsample", [&] { return downsample(full, config.agnes_downsample); })
                               : full;
    const SampleMatrix samples = timer.time("to_samples", [&] { return to_samples(grid); });
    const NormalizedSamples norm = timer.time("normalize", [&] { return normalize(samples, config.normalization); });

    std::vector<int> labels;
    auto& metrics = out.metrics;
    timer.time("fit", [&] {
        switch (config.method) {
            case Method::KMeans: {
                KMeansConfig kcfg = config.kmeans;
                kcfg.seed = config.seed;
                auto r = kmeans_fit(norm.samples, required_k(config), kcfg);
                metrics.wcss = r.model.wcss;
                metrics.iterations = r.model.iterations;
                metrics.clusters = r.model.k;
                labels = std::move(r.labels);
                break;
            }
            case Method::Gmm: {
                GmmConfig gcfg = config.gmm;
                gcfg.seed = config.seed;
                auto r = gmm_fit(norm.samples, required_k(config), gcfg);
                metrics.log_likelihood = r.model.log_likelihood;
                metrics.bic = bic(r.model, norm.samples);
                metrics.iterations = r.model.iterations;
                metrics.clusters = r.model.k;
                labels = std::move(r.labels);
                break;
            }
            case Method::Agnes: {
                AgnesConfig acfg;
                acfg.linkage = config.linkage;
                acfg.max_samples = config.agnes_max_samples;
                auto r = agnes_fit(norm.samples, required_k(config), acfg);
                metrics.iterations = r.dendrogram.merges.size();
                metrics.clusters = required_k(config);
                labels = std::move(r.labels);
                break;
            }
            case Method::Dbscan: {
                DbscanParams params;
                if (!config.eps || !config.min_pts) {
                    params = suggest_dbscan_params(norm.samples, config.min_pts.value_or(0), config.seed);
                }
                if (config.eps) params.eps = *config.eps;
                if (config.min_pts) params.min_pts = *config.min_pts;
                auto r = dbscan_fit(norm.samples, params.eps, params.min_pts);
                metrics.eps = r.eps;
                metrics.min_pts = r.min_pts;
                metrics.clusters = r.cluster_count;
                metrics.noise_pixels = static_cast<std::size_t>(std::count(r.labels.begin(), r.labels.end(), kNoise));
                labels = std::move(r.labels);
                break;
            }
        }
    });

    out.raw = timer.time("scatter", [&] {
        LabelMap lm = from_labels(labels, samples, grid.width, grid.height);
        if (pooled) lm = upsample_labels(lm, config.agnes_downsample, full.width, full.height, full.mask);
        return lm;
    });
    out.stats = timer.time("stats", [&] { return cluster_stats(out.raw, full, inputs.display); });
    return out;
}

RefineOutput run_refine(const LabelMap& raw, const RefineOptions& options, Provenance provenance) {
    RefineOutput out;
    const LabelMap merged = merge_small_components(raw, options.min_size, options.connectivity);

    const auto present = merged.distinct_labels();
    std::vector<Remap> applicable;
    for (const auto& r : options.remaps) {
        if (std::binary_search(present.begin(), present.end(), r.from)) applicable.push_back(r);
        else out.skipped_remaps.push_back(r);
    }
    const LabelMap remapped = remap_labels(merged, applicable);
    const auto surviving = remapped.distinct_labels();

    std::vector<LegendEntry> legend;
    if (options.legend.preset == "benthic") legend = legend_from_preset(surviving, benthic_preset());
    else if (options.legend.preset == "geomorphic") legend = legend_from_preset(surviving, geomorphic_preset());
    else if (options.legend.preset == "categorical" || (options.legend.preset.empty() && options.legend.entries.empty()))
        legend = categorical_legend(surviving);
    else legend = options.legend.entries;

    const HabitatMap checked = assign_legend(remapped, legend);
    auto [dense, table] = compact(remapped);
    out.map = assign_legend(dense, relabel_legend(checked.legend, table), std::move(provenance));
    out.renumbering = std::move(table);
    return out;
}

SelectionCurve compute_curve(const PipelineConfig& config, KRange range) {
    const auto inputs = prepare_inputs(config);
    const auto norm = prepare_samples(inputs, config.normalization);
    if (config.method == Method::Gmm) {
        GmmConfig gcfg = config.gmm;
        gcfg.seed = config.seed;
        return bic_curve(norm.samples, range, gcfg);
    }
    KMeansConfig kcfg = config.kmeans;
    kcfg.seed = config.seed;
    return wcss_curve(norm.samples, range, kcfg);
}

json stats_to_json(const std::vector<ClusterStats>& stats) {
    auto array = json::array();
    for (const auto& s : stats) {
        array.push_back({{"label", s.label},
                         {"size", s.size},
                         {"mean_features", s.mean_features},
                         {"mean_color", to_hex(s.mean_color)}});
    }
    return array;
}

json metrics_to_json(const FitMetrics& m) {
    json doc = {{"iterations", m.iterations}, {"clusters", m.clusters}};
    if (m.wcss) doc["wcss"] = *m.wcss;
    if (m.bic) doc["bic"] = *m.bic;
    if (m.log_likelihood) doc["log_likelihood"] = *m.log_likelihood;
    if (m.noise_pixels) doc["noise_pixels"] = *m.noise_pixels;
    if (m.eps) doc["eps"] = *m.eps;
    if (m.min_pts) doc["min_pts"] = *m.min_pts;
    return doc;
}

json curve_to_json(const SelectionCurve& curve) {
    auto points = json::array();
    for (const auto& p : curve.points) points.push_back({{"k", p.k}, {"score", p.score}});
    json doc = {{"method", to_string(curve.method)}, {"points", points}};
    doc["proposed_k"] = curve.proposed_k ? json(*curve.proposed_k) : json(nullptr);
    return doc;
}

ExportPaths write_export(const std::filesystem::path& dir, const RefineOutput& refined, const json& provenance) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
    ExportPaths paths{dir / "map.png", dir / "labels.bnd", dir / "legend.json", dir / "provenance.json"};
    const auto& map = refined.map;
    write_file_atomic(paths.map_png, encode_png(render_labels(map.labelmap, map.palette())));
    write_file_atomic(paths.labels_bnd, encode_bnd(labels_to_raster(map.labelmap)));
    write_file_atomic(paths.legend_json, legend_to_json(map.legend));
    write_file_atomic(paths.provenance_json, provenance.dump(2) + "\n");
    return paths;
}

RunArtifacts run_pipeline(const PipelineConfig& config) {
    RunArtifacts artifacts;
    std::map<std::string, double> timings;
    StageTimer timer(timings);

    const auto inputs = timer.time("load", [&] { return prepare_inputs(config); });
    artifacts.fit = run_fit(config, inputs);
    timings.insert(artifacts.fit.timings_ms.begin(), artifacts.fit.timings_ms.end());

    Provenance provenance{{"method", to_string(config.method)},
                          {"mode", to_string(config.mode)},
                          {"seed", std::to_string(config.seed)}};
    if (config.k) provenance["k"] = std::to_string(*config.k);
    provenance["min_size"] = std::to_string(config.refine.min_size);
    provenance["connectivity"] = std::to_string(static_cast<int>(config.refine.connectivity));

    artifacts.refined = timer.time("refine", [&] { return run_refine(artifacts.fit.raw, config.refine, provenance); });

    std::optional<SelectionCurve> curve;
    if (config.curves) curve = timer.time("curves", [&] { return compute_curve(config, *config.curves); });

    json remaps_applied = json::array();
    json remaps_skipped = json::array();
    for (const auto& r : config.refine.remaps) {
        const bool skipped = std::any_of(artifacts.refined.skipped_remaps.begin(), artifacts.refined.skipped_remaps.end(),
                                         [&](const Remap& s) { return s.from == r.from; });
        (skipped ? remaps_skipped : remaps_applied).push_back({{"from", r.from}, {"to", r.to}});
    }
    json renumbering = json::object();
    for (const auto& [from, to] : artifacts.refined.renumbering) renumbering[std::to_string(from)] = to;

    json provenance_doc = {
        {"config", config_to_json(config)},
        {"method", to_string(config.method)},
        {"mode", to_string(config.mode)},
        {"seed", config.seed},
        {"metrics", metrics_to_json(artifacts.fit.metrics)},
        {"clusters", stats_to_json(artifacts.fit.stats)},
        {"refinement", {{"remaps_applied", remaps_applied}, {"remaps_skipped", remaps_skipped}, {"renumbering", renumbering}}},
        {"legend", json::parse(legend_to_json(artifacts.refined.map.legend))},
        {"timings_ms", timings},
    };
    if (config.k) provenance_doc["k"] = *config.k;

    const auto paths = timer.time("write", [&] { return write_export(config.output_dir, artifacts.refined, provenance_doc); });
    artifacts.map_png = paths.map_png;
    artifacts.labels_bnd = paths.labels_bnd;
    artifacts.legend_json = paths.legend_json;
    artifacts.provenance_json = paths.provenance_json;
    if (curve) {
        artifacts.curves_csv = config.output_dir / "curves.csv";
        write_file_atomic(*artifacts.curves_csv, curve_to_csv(*curve));
    }
    return artifacts;
}

int exit_code_for(const Error& error) {
    switch (error.kind()) {
        case Error::Kind::Config: return 2;
        case Error::Kind::Data: return 3;
        case Error::Kind::Numerical: return 4;
    }
    return 1;
}

}  // namespace reefseg
