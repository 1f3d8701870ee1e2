#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reefseg/cluster/agnes.hpp"
#include "reefseg/cluster/gmm.hpp"
#include "reefseg/cluster/kmeans.hpp"
#include "reefseg/label_map.hpp"
#include "reefseg/prep.hpp"
#include "reefseg/raster.hpp"
#include "reefseg/refine.hpp"
#include "reefseg/select.hpp"

namespace reefseg {

enum class MappingMode { Benthic, Geomorphic };
enum class Method { KMeans, Gmm, Agnes, Dbscan };

std::string to_string(MappingMode mode);
std::string to_string(Method method);
std::string to_string(Normalization scheme);

/// Either a named preset ("benthic", "geomorphic", "categorical") or
/// explicit entries. Legend labels refer to cluster ids after merging and
/// remapping, before renumbering.
struct LegendSpec {
    std::string preset = "categorical";
    std::vector<LegendEntry> entries;  ///< used when preset is empty
};

struct RefineOptions {
    std::size_t min_size = 50;
    Connectivity connectivity = Connectivity::Eight;
    std::vector<Remap> remaps;
    LegendSpec legend;
};

struct PipelineConfig {
    MappingMode mode = MappingMode::Benthic;
    std::filesystem::path mosaic;
    std::optional<std::filesystem::path> bathymetry;
    Method method = Method::KMeans;
    std::optional<std::size_t> k;
    std::optional<double> eps;
    std::optional<std::size_t> min_pts;
    Normalization normalization = Normalization::MinMax;
    KMeansConfig kmeans;
    GmmConfig gmm;
    std::uint32_t agnes_downsample = 5;
    Linkage linkage = Linkage::Ward;
    std::size_t agnes_max_samples = 20000;
    RefineOptions refine;
    std::optional<KRange> curves;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
};

/// Parses a JSON config document and checks every rule, collecting all
/// violations into one ConfigError. Relative input and output paths are
/// resolved against `base_dir` when it is non-empty. Syntax errors report
/// line and column.
PipelineConfig validate_config(const std::string& text, const std::filesystem::path& base_dir = {});
PipelineConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Canonical JSON echo of a config with every default spelled out.
/// validate_config(config_to_json(c).dump()) reproduces c.
nlohmann::json config_to_json(const PipelineConfig& config);

struct ClusterStats {
    int label = 0;
    std::size_t size = 0;
    std::vector<double> mean_features;  ///< in input units (before normalisation)
    Rgb mean_color;                     ///< mean mosaic colour of the cluster
};

struct FitMetrics {
    std::optional<double> wcss;
    std::optional<double> bic;
    std::optional<double> log_likelihood;
    std::size_t iterations = 0;
    std::size_t clusters = 0;
    std::optional<std::size_t> noise_pixels;
    std::optional<double> eps;
    std::optional<std::size_t> min_pts;
};

/// Loaded and stacked inputs for a config.
struct PreparedInputs {
    Raster features;  ///< RGB, or RGB+depth in geomorphic mode
    Raster display;   ///< mosaic used for colour statistics
};

PreparedInputs prepare_inputs(const PipelineConfig& config);

/// Normalised sample matrix of the prepared features (no downsampling).
NormalizedSamples prepare_samples(const PreparedInputs& inputs, Normalization scheme);

struct FitOutput {
    LabelMap raw;  ///< full resolution, kNoise/kInvalid sentinels
    FitMetrics metrics;
    std::vector<ClusterStats> stats;
    std::map<std::string, double> timings_ms;
};

/// Fit stage: prepare → (downsample for AGNES) → to_samples → normalize →
/// cluster → scatter back to the full grid.
FitOutput run_fit(const PipelineConfig& config);
FitOutput run_fit(const PipelineConfig& config, const PreparedInputs& inputs);

struct RefineOutput {
    HabitatMap map;
    std::vector<Remap> skipped_remaps;  ///< sources that vanished while merging small regions
    std::map<int, int> renumbering;     ///< raw id → final id
};

/// Refinement stage: merge small regions → remaps → legend → compact.
RefineOutput run_refine(const LabelMap& raw, const RefineOptions& options, Provenance provenance = {});

/// Per-cluster size, mean input features and mean display colour.
std::vector<ClusterStats> cluster_stats(const LabelMap& labels, const Raster& features, const Raster& display);

/// Raw clustering curve for the config's method: BIC for gmm, WCSS otherwise.
SelectionCurve compute_curve(const PipelineConfig& config, KRange range);

struct RunArtifacts {
    std::filesystem::path map_png;
    std::filesystem::path labels_bnd;
    std::filesystem::path legend_json;
    std::filesystem::path provenance_json;
    std::optional<std::filesystem::path> curves_csv;
    FitOutput fit;
    RefineOutput refined;
};

/// Writes map.png, labels.bnd, legend.json, provenance.json and, when
/// requested, curves.csv into `output_dir`, each atomically.
RunArtifacts run_pipeline(const PipelineConfig& config);

/// Writes the export bundle for an already fitted map. Shared by the CLI and
/// the service so both produce identical bytes.
struct ExportPaths {
    std::filesystem::path map_png;
    std::filesystem::path labels_bnd;
    std::filesystem::path legend_json;
    std::filesystem::path provenance_json;
};
ExportPaths write_export(const std::filesystem::path& dir, const RefineOutput& refined,
                         const nlohmann::json& provenance);

nlohmann::json stats_to_json(const std::vector<ClusterStats>& stats);
nlohmann::json metrics_to_json(const FitMetrics& metrics);
nlohmann::json curve_to_json(const SelectionCurve& curve);

/// Process exit code for an error: 2 config, 3 data, 4 numerical.
int exit_code_for(const Error& error);

}  // namespace reefseg
