#include "reefseg/service/service.hpp"

#include <algorithm>
#include <array>
#include <ctime>
#include <fstream>
#include <sstream>

#include "reefseg/error.hpp"
#include "reefseg/raster_io.hpp"
#include "reefseg/render.hpp"

namespace reefseg::service {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof(out), "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

std::string make_id(const char* prefix, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-%06zu", prefix, n);
    return buf;
}

std::string read_text(const fs::path& path) {
    const auto bytes = read_file(path);
    return {bytes.begin(), bytes.end()};
}

json metrics_from_json(const json& doc, FitMetrics& m) {
    m.iterations = doc.value("iterations", std::size_t{0});
    m.clusters = doc.value("clusters", std::size_t{0});
    if (doc.contains("wcss")) m.wcss = doc["wcss"].get<double>();
    if (doc.contains("bic")) m.bic = doc["bic"].get<double>();
    if (doc.contains("log_likelihood")) m.log_likelihood = doc["log_likelihood"].get<double>();
    if (doc.contains("noise_pixels")) m.noise_pixels = doc["noise_pixels"].get<std::size_t>();
    if (doc.contains("eps")) m.eps = doc["eps"].get<double>();
    if (doc.contains("min_pts")) m.min_pts = doc["min_pts"].get<std::size_t>();
    return doc;
}

std::vector<ClusterStats> stats_from_json(const json& doc) {
    std::vector<ClusterStats> stats;
    for (const auto& item : doc) {
        ClusterStats s;
        s.label = item.at("label").get<int>();
        s.size = item.at("size").get<std::size_t>();
        s.mean_features = item.at("mean_features").get<std::vector<double>>();
        s.mean_color = parse_hex_color(item.at("mean_color").get<std::string>());
        stats.push_back(std::move(s));
    }
    return stats;
}

json shape_of(const Raster& r) { return {{"width", r.width}, {"height", r.height}, {"bands", r.bands}}; }

// Job request params → PipelineConfig keys.
void apply_params(const json& params, const std::string& method, json& doc, std::vector<std::string>& problems) {
    for (const auto& [key, value] : params.items()) {
        if (key == "k") doc["k"] = value;
        else if (key == "eps" || key == "min_pts") doc["dbscan"][key] = value;
        else if (key == "normalization") doc["normalization"] = value;
        else if (key == "downsample" || key == "linkage" || key == "max_samples") doc["agnes"][key] = value;
        else if (key == "restarts") doc["kmeans"]["restarts"] = value;
        else if (key == "reg" || key == "covariance" || key == "init_restarts") doc["gmm"][key] = value;
        else if (key == "max_iter" || key == "tol") doc[method == "gmm" ? "gmm" : "kmeans"][key] = value;
        else problems.push_back("params: unknown key \"" + key + "\"");
    }
}

constexpr std::array<const char*, 4> kExportFiles{"map.png", "labels.bnd", "legend.json", "provenance.json"};

}  // namespace

std::string to_string(JobState state) {
    switch (state) {
        case JobState::Queued: return "queued";
        case JobState::Running: return "running";
        case JobState::Done: return "done";
        case JobState::Failed: return "failed";
    }
    return "failed";
}

JobState parse_job_state(const std::string& text) {
    if (text == "queued") return JobState::Queued;
    if (text == "running") return JobState::Running;
    if (text == "done") return JobState::Done;
    if (text == "failed") return JobState::Failed;
    throw FormatError("unknown job state '" + text + "'");
}

bool legal_transition(JobState from, JobState to) {
    switch (from) {
        case JobState::Queued: return to == JobState::Running || to == JobState::Failed;
        case JobState::Running: return to == JobState::Done || to == JobState::Failed;
        default: return false;
    }
}

json Dataset::to_json() const {
    json doc = {{"dataset_id", id},
                {"mosaic", mosaic.string()},
                {"width", width},
                {"height", height},
                {"bands", bands},
                {"has_bathymetry", bathymetry.has_value()},
                {"created", created}};
    if (bathymetry) doc["bathymetry"] = bathymetry->string();
    return doc;
}

json Job::to_json() const {
    json doc = {{"job_id", id},          {"dataset_id", dataset_id}, {"state", reefseg::service::to_string(state)},
                {"request", request},    {"config", config},         {"created", created},
                {"revisions", revisions}};
    auto hist = json::array();
    for (auto s : history) hist.push_back(reefseg::service::to_string(s));
    doc["history"] = hist;
    doc["finished"] = finished ? json(*finished) : json(nullptr);
    if (error) doc["error"] = *error;
    if (metrics) doc["metrics"] = metrics_to_json(*metrics);
    return doc;
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {
    std::error_code ec;
    fs::create_directories(options_.data_root / "datasets", ec);
    fs::create_directories(options_.data_root / "jobs", ec);
    if (ec) throw IoError("cannot create data root '" + options_.data_root.string() + "'");
    options_.data_root = fs::absolute(options_.data_root);
    recover();
    const std::size_t workers = std::max<std::size_t>(options_.workers, 1);
    for (std::size_t i = 0; i < workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

Service::~Service() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    queue_cv_.notify_all();
    for (auto& t : workers_) t.join();
}

fs::path Service::job_dir(const std::string& id) const { return options_.data_root / "jobs" / id; }

void Service::recover() {
    for (const auto& entry : fs::directory_iterator(options_.data_root / "datasets")) {
        const auto meta = entry.path() / "dataset.json";
        if (!fs::exists(meta)) continue;
        const auto doc = json::parse(read_text(meta));
        Dataset ds;
        ds.id = doc.at("dataset_id");
        ds.mosaic = doc.at("mosaic").get<std::string>();
        if (doc.contains("bathymetry")) ds.bathymetry = doc["bathymetry"].get<std::string>();
        ds.width = doc.at("width");
        ds.height = doc.at("height");
        ds.bands = doc.at("bands");
        ds.created = doc.value("created", "");
        next_dataset_ = std::max(next_dataset_, std::stoul(ds.id.substr(ds.id.find('-') + 1)) + 1);
        datasets_[ds.id] = std::move(ds);
    }
    std::vector<std::string> requeue;
    for (const auto& entry : fs::directory_iterator(options_.data_root / "jobs")) {
        const auto meta = entry.path() / "job.json";
        if (!fs::exists(meta)) continue;
        const auto doc = json::parse(read_text(meta));
        Job job;
        job.id = doc.at("job_id");
        job.dataset_id = doc.at("dataset_id");
        job.request = doc.at("request");
        job.config = doc.at("config");
        job.state = parse_job_state(doc.at("state"));
        job.history.clear();
        for (const auto& s : doc.at("history")) job.history.push_back(parse_job_state(s));
        if (doc.contains("error")) job.error = doc["error"].get<std::string>();
        if (doc.contains("metrics")) {
            FitMetrics m;
            metrics_from_json(doc["metrics"], m);
            job.metrics = m;
        }
        if (doc.contains("clusters")) job.stats = stats_from_json(doc["clusters"]);
        job.created = doc.value("created", "");
        if (doc.contains("finished") && doc["finished"].is_string()) job.finished = doc["finished"].get<std::string>();
        job.revisions = doc.value("revisions", std::vector<std::string>{});
        next_job_ = std::max(next_job_, std::stoul(job.id.substr(job.id.find('-') + 1)) + 1);
        if (job.state == JobState::Running) {
            job.error = "interrupted by service restart";
            transition(job, JobState::Failed);
            job.finished = now_iso8601();
            persist_job(job);
        } else if (job.state == JobState::Queued) {
            requeue.push_back(job.id);
        }
        jobs_[job.id] = std::move(job);
    }
    std::sort(requeue.begin(), requeue.end());
    queue_.insert(queue_.end(), requeue.begin(), requeue.end());
}

void Service::persist_job(const Job& job) const {
    auto doc = job.to_json();
    doc["clusters"] = stats_to_json(job.stats);
    const auto dir = job_dir(job.id);
    std::error_code ec;
    fs::create_directories(dir, ec);
    write_file_atomic(dir / "job.json", doc.dump(2) + "\n");
}

void Service::transition(Job& job, JobState to) {
    if (!legal_transition(job.state, to)) {
        throw std::logic_error("illegal job transition " + to_string(job.state) + " -> " + to_string(to));
    }
    job.state = to;
    job.history.push_back(to);
}

Dataset Service::register_dataset(Dataset dataset) {
    std::lock_guard lock(mutex_);
    if (dataset.id.empty()) dataset.id = make_id("ds", next_dataset_++);
    dataset.created = now_iso8601();
    const auto dir = options_.data_root / "datasets" / dataset.id;
    fs::create_directories(dir);
    write_file_atomic(dir / "dataset.json", dataset.to_json().dump(2) + "\n");
    datasets_[dataset.id] = dataset;
    return dataset;
}

Dataset Service::add_dataset_from_paths(const fs::path& mosaic, const std::optional<fs::path>& bathymetry) {
    if (!options_.allow_local_paths) throw HttpError(400, "server-local paths are disabled; upload files instead");
    Raster image;
    try {
        image = load_raster(mosaic);
    } catch (const Error& e) {
        throw HttpError(400, "unreadable mosaic", json::array({e.what()}));
    }
    Dataset ds;
    ds.mosaic = fs::absolute(mosaic);
    ds.width = image.width;
    ds.height = image.height;
    ds.bands = image.bands;
    if (bathymetry) {
        Raster depth;
        try {
            depth = load_raster(*bathymetry);
        } catch (const Error& e) {
            throw HttpError(400, "unreadable bathymetry", json::array({e.what()}));
        }
        if (depth.width != image.width || depth.height != image.height) {
            throw HttpError(400, "mosaic and bathymetry dimensions differ",
                            json::array({json{{"mosaic", shape_of(image)}}, json{{"bathymetry", shape_of(depth)}}}));
        }
        if (depth.bands != 1) throw HttpError(400, "bathymetry must have exactly one band", json::array({shape_of(depth)}));
        ds.bathymetry = fs::absolute(*bathymetry);
    }
    return register_dataset(std::move(ds));
}

Dataset Service::add_dataset_from_bytes(const std::string& mosaic, const std::optional<std::string>& bathymetry) {
    auto as_span = [](const std::string& s) {
        return std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
    };
    Raster image;
    try {
        image = decode_raster(as_span(mosaic));
    } catch (const Error& e) {
        throw HttpError(400, "unreadable mosaic", json::array({e.what()}));
    }
    std::optional<Raster> depth;
    if (bathymetry) {
        try {
            depth = decode_raster(as_span(*bathymetry));
        } catch (const Error& e) {
            throw HttpError(400, "unreadable bathymetry", json::array({e.what()}));
        }
        if (depth->width != image.width || depth->height != image.height) {
            throw HttpError(400, "mosaic and bathymetry dimensions differ",
                            json::array({json{{"mosaic", shape_of(image)}}, json{{"bathymetry", shape_of(*depth)}}}));
        }
        if (depth->bands != 1) throw HttpError(400, "bathymetry must have exactly one band", json::array({shape_of(*depth)}));
    }

    Dataset ds;
    {
        std::lock_guard lock(mutex_);
        ds.id = make_id("ds", next_dataset_++);
    }
    const auto dir = options_.data_root / "datasets" / ds.id;
    fs::create_directories(dir);
    const bool png = mosaic.size() >= 8 && static_cast<unsigned char>(mosaic[0]) == 0x89;
    ds.mosaic = dir / (png ? "mosaic.png" : "mosaic.bnd");
    write_file_atomic(ds.mosaic, mosaic);
    if (bathymetry) {
        ds.bathymetry = dir / "bathymetry.bnd";
        write_file_atomic(*ds.bathymetry, *bathymetry);
    }
    ds.width = image.width;
    ds.height = image.height;
    ds.bands = image.bands;
    return register_dataset(std::move(ds));
}

Dataset Service::add_dataset(const json& body) {
    if (!body.is_object() || !body.contains("mosaic") || !body["mosaic"].is_string()) {
        throw HttpError(400, "body must be {\"mosaic\": path, \"bathymetry\": path?}");
    }
    std::optional<fs::path> bathy;
    if (body.contains("bathymetry") && !body["bathymetry"].is_null()) {
        if (!body["bathymetry"].is_string()) throw HttpError(400, "bathymetry must be a path string");
        bathy = body["bathymetry"].get<std::string>();
    }
    return add_dataset_from_paths(body["mosaic"].get<std::string>(), bathy);
}

std::string Service::submit_job(const json& body) {
    if (!body.is_object()) throw HttpError(400, "job request must be a JSON object");
    if (!body.contains("dataset_id") || !body["dataset_id"].is_string()) {
        throw HttpError(422, "invalid job parameters", json::array({"dataset_id is required"}));
    }
    const Dataset ds = dataset(body["dataset_id"].get<std::string>());

    std::vector<std::string> problems;
    const std::string mode = body.contains("mode") && body["mode"].is_string() ? body["mode"].get<std::string>() : "benthic";
    const std::string method =
        body.contains("method") && body["method"].is_string() ? body["method"].get<std::string>() : "kmeans";
    json doc = {{"mode", body.value("mode", json("benthic"))},
                {"method", body.value("method", json("kmeans"))},
                {"inputs", {{"mosaic", ds.mosaic.string()}}},
                {"seed", body.value("seed", json(0))},
                {"refine", {{"min_size", 1}}},
                {"legend", "categorical"}};
    if (mode == "geomorphic" && ds.bathymetry) doc["inputs"]["bathymetry"] = ds.bathymetry->string();
    // Parameters may sit under "params" or at the top level of the request.
    json params = json::object();
    for (const auto& [key, value] : body.items()) {
        if (key == "dataset_id" || key == "mode" || key == "method" || key == "seed") continue;
        if (key == "params") {
            if (!value.is_object()) problems.push_back("params must be an object");
            else params.update(value);
        } else {
            params[key] = value;
        }
    }
    apply_params(params, method, doc, problems);

    PipelineConfig cfg;
    try {
        cfg = config_from_json(doc);
    } catch (const ConfigError& e) {
        problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    }
    if (!problems.empty()) throw HttpError(422, "invalid job parameters", problems);

    std::lock_guard lock(mutex_);
    Job job;
    job.id = make_id("job", next_job_++);
    job.dataset_id = ds.id;
    job.request = body;
    cfg.output_dir = job_dir(job.id);
    job.config = config_to_json(cfg);
    job.created = now_iso8601();
    persist_job(job);
    jobs_[job.id] = job;
    queue_.push_back(job.id);
    queue_cv_.notify_one();
    return job.id;
}

Job& Service::job_locked(const std::string& id) {
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) throw HttpError(404, "no such job: " + id);
    return it->second;
}

const Job& Service::job_locked(const std::string& id) const {
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) throw HttpError(404, "no such job: " + id);
    return it->second;
}

Job Service::job(const std::string& id) const {
    std::lock_guard lock(mutex_);
    return job_locked(id);
}

std::vector<Job> Service::jobs() const {
    std::lock_guard lock(mutex_);
    std::vector<Job> out;
    for (const auto& [id, job] : jobs_) out.push_back(job);
    return out;
}

Dataset Service::dataset(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = datasets_.find(id);
    if (it == datasets_.end()) throw HttpError(404, "no such dataset: " + id);
    return it->second;
}

void Service::worker_loop() {
    while (true) {
        std::string id;
        {
            std::unique_lock lock(mutex_);
            queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (stopping_) return;
            id = queue_.front();
            queue_.pop_front();
            ++running_;
        }
        execute(id);
        {
            std::lock_guard lock(mutex_);
            --running_;
        }
        idle_cv_.notify_all();
    }
}

void Service::execute(const std::string& job_id) {
    json config_doc;
    {
        std::lock_guard lock(mutex_);
        Job& job = job_locked(job_id);
        transition(job, JobState::Running);
        persist_job(job);
        config_doc = job.config;
    }
    std::optional<FitOutput> fit;
    std::string failure;
    try {
        const auto cfg = config_from_json(config_doc);
        fit = run_fit(cfg);
        const auto dir = job_dir(job_id);
        write_file_atomic(dir / "raw_labels.bnd", encode_bnd(labels_to_raster(fit->raw)));
        const auto labels = fit->raw.distinct_labels();
        write_file_atomic(dir / "map.png", encode_png(render_labels(fit->raw, categorical_palette(labels))));
    } catch (const std::exception& e) {
        failure = e.what();
        fit.reset();
    }
    std::lock_guard lock(mutex_);
    Job& job = job_locked(job_id);
    if (fit) {
        job.metrics = fit->metrics;
        job.stats = fit->stats;
        transition(job, JobState::Done);
    } else {
        job.error = failure;
        transition(job, JobState::Failed);
    }
    job.finished = now_iso8601();
    persist_job(job);
}

bool Service::wait_idle(std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mutex_);
    return idle_cv_.wait_for(lock, timeout, [this] { return queue_.empty() && running_ == 0; });
}

std::vector<std::uint8_t> Service::job_map_png(const std::string& id) const {
    {
        std::lock_guard lock(mutex_);
        const Job& job = job_locked(id);
        if (job.state != JobState::Done) throw HttpError(409, "job " + id + " is " + to_string(job.state));
    }
    return read_file(job_dir(id) / "map.png");
}

json Service::job_clusters(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const Job& job = job_locked(id);
    if (job.state != JobState::Done) throw HttpError(409, "job " + id + " is " + to_string(job.state));
    return {{"job_id", id}, {"clusters", stats_to_json(job.stats)}};
}

json Service::dataset_curves(const std::string& id, const std::string& method, std::size_t k_min, std::size_t k_max,
                             const std::string& normalization, const std::string& mode) {
    const Dataset ds = dataset(id);
    std::vector<std::string> problems;
    if (method != "kmeans" && method != "gmm") problems.push_back("method must be kmeans or gmm");
    if (normalization != "minmax" && normalization != "zscore") problems.push_back("normalization must be minmax or zscore");
    if (mode != "benthic" && mode != "geomorphic") problems.push_back("mode must be benthic or geomorphic");
    if (mode == "geomorphic" && !ds.bathymetry) problems.push_back("bathymetry required: dataset has none");
    if (k_min < 1 || k_max < k_min) problems.push_back("need 1 <= kmin <= kmax");
    if (!problems.empty()) throw HttpError(422, "invalid curve request", problems);

    const std::string key = id + "|" + mode + "|" + method + "|" + normalization + "|" + std::to_string(k_min) + "|" +
                            std::to_string(k_max);
    {
        std::lock_guard lock(mutex_);
        if (const auto it = curve_cache_.find(key); it != curve_cache_.end()) return it->second;
    }
    PipelineConfig cfg;
    cfg.mode = mode == "geomorphic" ? MappingMode::Geomorphic : MappingMode::Benthic;
    cfg.mosaic = ds.mosaic;
    if (cfg.mode == MappingMode::Geomorphic) cfg.bathymetry = ds.bathymetry;
    cfg.method = method == "gmm" ? Method::Gmm : Method::KMeans;
    cfg.normalization = normalization == "zscore" ? Normalization::ZScore : Normalization::MinMax;
    json doc;
    try {
        doc = curve_to_json(compute_curve(cfg, {k_min, k_max}));
    } catch (const Error& e) {
        throw HttpError(422, "curve computation failed", json::array({e.what()}));
    }
    doc["dataset_id"] = id;
    std::lock_guard lock(mutex_);
    curve_cache_.emplace(key, doc);
    return doc;
}

std::string Service::refine(const std::string& job_id, const json& body) {
    if (!body.is_object()) throw HttpError(400, "refine request must be a JSON object");
    json doc;
    std::string revision_id;
    Job snapshot;
    {
        std::lock_guard lock(mutex_);
        Job& job = job_locked(job_id);
        if (job.state != JobState::Done) throw HttpError(409, "job " + job_id + " is " + to_string(job.state));
        snapshot = job;
        revision_id = make_id("rev", job.revisions.size() + 1);
        job.revisions.push_back(revision_id);  // reserve; removed again on failure
    }
    auto release = [&] {
        std::lock_guard lock(mutex_);
        auto& revs = job_locked(job_id).revisions;
        revs.erase(std::remove(revs.begin(), revs.end(), revision_id), revs.end());
    };

    std::vector<std::string> problems;
    doc = snapshot.config;
    json refine = json::object();
    for (const auto& [key, value] : body.items()) {
        if (key == "min_size" || key == "connectivity" || key == "remaps") refine[key] = value;
        else if (key == "legend") doc["legend"] = value;
        else problems.push_back("unknown key \"" + key + "\"");
    }
    if (!body.contains("legend")) doc["legend"] = "categorical";
    doc["refine"] = refine;
    const auto rev_dir = job_dir(job_id) / "revisions" / revision_id;
    doc["output_dir"] = rev_dir.string();

    PipelineConfig cfg;
    try {
        cfg = config_from_json(doc);
    } catch (const ConfigError& e) {
        problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    }
    if (!problems.empty()) {
        release();
        throw HttpError(422, "invalid refinement", problems);
    }

    try {
        const LabelMap raw = raster_to_labels(load_bnd(job_dir(job_id) / "raw_labels.bnd"));
        Provenance provenance{{"job_id", job_id}, {"revision_id", revision_id}};
        const auto refined = run_refine(raw, cfg.refine, provenance);

        json remaps_skipped = json::array();
        for (const auto& r : refined.skipped_remaps) remaps_skipped.push_back({{"from", r.from}, {"to", r.to}});
        json renumbering = json::object();
        for (const auto& [from, to] : refined.renumbering) renumbering[std::to_string(from)] = to;
        json provenance_doc = {
            {"config", config_to_json(cfg)},
            {"job_id", job_id},
            {"revision_id", revision_id},
            {"dataset_id", snapshot.dataset_id},
            {"method", to_string(cfg.method)},
            {"mode", to_string(cfg.mode)},
            {"seed", cfg.seed},
            {"metrics", snapshot.metrics ? metrics_to_json(*snapshot.metrics) : json(nullptr)},
            {"clusters", stats_to_json(snapshot.stats)},
            {"refinement", {{"remaps_skipped", remaps_skipped}, {"renumbering", renumbering}}},
            {"legend", json::parse(legend_to_json(refined.map.legend))},
        };
        if (cfg.k) provenance_doc["k"] = *cfg.k;
        write_export(rev_dir, refined, provenance_doc);
    } catch (const LegendError& e) {
        release();
        throw HttpError(422, "legend leaves labels uncovered", e.uncovered());
    } catch (const Error& e) {
        release();
        throw HttpError(422, "refinement failed", json::array({e.what()}));
    }

    std::lock_guard lock(mutex_);
    persist_job(job_locked(job_id));
    return revision_id;
}

std::vector<std::uint8_t> Service::revision_file(const std::string& job_id, const std::string& revision_id,
                                                 const std::string& name) const {
    {
        std::lock_guard lock(mutex_);
        const Job& job = job_locked(job_id);
        if (std::find(job.revisions.begin(), job.revisions.end(), revision_id) == job.revisions.end() ||
            !fs::exists(job_dir(job_id) / "revisions" / revision_id / "provenance.json")) {
            throw HttpError(404, "no such revision: " + revision_id);
        }
    }
    if (std::find(kExportFiles.begin(), kExportFiles.end(), name) == kExportFiles.end()) {
        throw HttpError(404, "no such export file: " + name);
    }
    return read_file(job_dir(job_id) / "revisions" / revision_id / name);
}

json Service::export_revision(const std::string& job_id, const std::string& revision_id) const {
    json bundle = {{"job_id", job_id}, {"revision_id", revision_id}};
    bundle["map.png"] = base64_encode(revision_file(job_id, revision_id, "map.png"));
    bundle["labels.bnd"] = base64_encode(revision_file(job_id, revision_id, "labels.bnd"));
    for (const char* name : {"legend.json", "provenance.json"}) {
        const auto bytes = revision_file(job_id, revision_id, name);
        bundle[name] = json::parse(bytes.begin(), bytes.end());
    }
    return bundle;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    static constexpr char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
        for (int s = 18; s >= 0; s -= 6) out += table[(v >> s) & 0x3F];
    }
    if (i + 1 == bytes.size()) {
        const std::uint32_t v = std::uint32_t{bytes[i]} << 16;
        out += table[(v >> 18) & 0x3F];
        out += table[(v >> 12) & 0x3F];
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8);
        out += table[(v >> 18) & 0x3F];
        out += table[(v >> 12) & 0x3F];
        out += table[(v >> 6) & 0x3F];
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    std::uint32_t buffer = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=') break;
        const int v = value(c);
        if (v < 0) throw FormatError("invalid base64 character");
        buffer = (buffer << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((buffer >> bits) & 0xFF));
        }
    }
    return out;
}

}  // namespace reefseg::service
