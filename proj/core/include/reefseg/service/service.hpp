#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "reefseg/pipeline.hpp"

namespace reefseg::service {

/// Error carrying an HTTP status and the {"error", "details"} body fields.
class HttpError : public std::runtime_error {
public:
    HttpError(int status, const std::string& message, nlohmann::json details = nlohmann::json::array())
        : std::runtime_error(message), status_(status), details_(std::move(details)) {}

    int status() const noexcept { return status_; }
    const nlohmann::json& details() const noexcept { return details_; }
    nlohmann::json body() const { return {{"error", what()}, {"details", details_}}; }

private:
    int status_;
    nlohmann::json details_;
};

enum class JobState { Queued, Running, Done, Failed };

std::string to_string(JobState state);
JobState parse_job_state(const std::string& text);
/// queued→running→{done|failed}; plus queued→failed for jobs that never start.
bool legal_transition(JobState from, JobState to);

struct Dataset {
    std::string id;
    std::filesystem::path mosaic;
    std::optional<std::filesystem::path> bathymetry;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t bands = 0;
    std::string created;

    nlohmann::json to_json() const;
};

struct Job {
    std::string id;
    std::string dataset_id;
    nlohmann::json request;
    nlohmann::json config;  ///< canonical PipelineConfig echo
    JobState state = JobState::Queued;
    std::vector<JobState> history{JobState::Queued};
    std::optional<std::string> error;
    std::optional<FitMetrics> metrics;
    std::vector<ClusterStats> stats;
    std::string created;
    std::optional<std::string> finished;
    std::vector<std::string> revisions;

    nlohmann::json to_json() const;
};

struct ServiceOptions {
    std::filesystem::path data_root = "reefseg-data";
    std::size_t workers = 1;
    bool allow_local_paths = true;  ///< accept server-side file paths in POST /datasets
};

/// Job registry and worker pool behind the HTTP API. Every operation is
/// thread-safe. State lives in directories under `data_root`:
///   datasets/<id>/dataset.json (+ uploaded rasters)
///   jobs/<id>/job.json, raw_labels.bnd, map.png
///   jobs/<id>/revisions/<rid>/{map.png, labels.bnd, legend.json, provenance.json}
/// A new instance rescans the root; interrupted running jobs are marked
/// failed and queued ones are resubmitted.
class Service {
public:
    explicit Service(ServiceOptions options);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Registers rasters already on the server. Throws HttpError 400 when
    /// they cannot be read or their dimensions differ.
    Dataset add_dataset_from_paths(const std::filesystem::path& mosaic,
                                   const std::optional<std::filesystem::path>& bathymetry);
    /// Stores uploaded PNG/BND1 bytes under the dataset directory.
    Dataset add_dataset_from_bytes(const std::string& mosaic, const std::optional<std::string>& bathymetry);
    /// JSON body {"mosaic": path, "bathymetry": path?}.
    Dataset add_dataset(const nlohmann::json& body);

    /// Validates and enqueues {dataset_id, mode, method, params, seed}.
    /// 404 unknown dataset, 422 invalid parameters.
    std::string submit_job(const nlohmann::json& body);

    Job job(const std::string& id) const;
    std::vector<Job> jobs() const;
    Dataset dataset(const std::string& id) const;

    /// Raw clustering preview in the categorical palette. 409 unless done.
    std::vector<std::uint8_t> job_map_png(const std::string& id) const;
    nlohmann::json job_clusters(const std::string& id) const;

    /// SelectionCurve JSON, cached per (dataset, mode, method, normalization, range).
    nlohmann::json dataset_curves(const std::string& id, const std::string& method, std::size_t k_min,
                                  std::size_t k_max, const std::string& normalization, const std::string& mode);

    /// Applies {min_size, connectivity, remaps, legend} to the job's raw
    /// labels and stores an immutable revision. 409 unless done; 422 when
    /// the legend leaves labels uncovered (details list them).
    std::string refine(const std::string& job_id, const nlohmann::json& body);

    /// Export bundle: {"map.png", "labels.bnd"} base64 plus parsed
    /// "legend.json" and "provenance.json".
    nlohmann::json export_revision(const std::string& job_id, const std::string& revision_id) const;
    std::vector<std::uint8_t> revision_file(const std::string& job_id, const std::string& revision_id,
                                            const std::string& name) const;

    /// Blocks until no job is queued or running, or the timeout expires.
    bool wait_idle(std::chrono::milliseconds timeout) const;

    const std::filesystem::path& data_root() const noexcept { return options_.data_root; }

private:
    void worker_loop();
    void execute(const std::string& job_id);
    void persist_job(const Job& job) const;
    void transition(Job& job, JobState to);
    void recover();
    Dataset register_dataset(Dataset dataset);
    std::filesystem::path job_dir(const std::string& id) const;
    Job& job_locked(const std::string& id);
    const Job& job_locked(const std::string& id) const;

    ServiceOptions options_;
    mutable std::mutex mutex_;
    mutable std::condition_variable idle_cv_;
    std::condition_variable queue_cv_;
    std::deque<std::string> queue_;
    std::size_t running_ = 0;
    bool stopping_ = false;
    std::map<std::string, Dataset> datasets_;
    std::map<std::string, Job> jobs_;
    std::map<std::string, nlohmann::json> curve_cache_;
    std::size_t next_dataset_ = 1;
    std::size_t next_job_ = 1;
    std::vector<std::thread> workers_;
};

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace reefseg::service
