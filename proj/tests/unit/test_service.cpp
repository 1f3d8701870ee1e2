#include <chrono>
#include <set>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "reefseg/raster_io.hpp"
#include "reefseg/refine.hpp"
#include "reefseg/service/http_server.hpp"
#include "reefseg/service/service.hpp"
#include "reefseg/synthetic.hpp"
#include "scratch.hpp"

using namespace reefseg;
using namespace reefseg::service;
namespace fs = std::filesystem;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

struct Fixture {
    fs::path dir = testing_support::scratch_dir("service");
    fs::path mosaic = dir / "mosaic.png";
    fs::path bathymetry = dir / "bathymetry.bnd";

    explicit Fixture(std::uint32_t size = 40) {
        const auto scene = make_reef_scene(size, 7);
        save_png(scene.mosaic, mosaic);
        save_bnd(scene.bathymetry, bathymetry);
    }
};

Job wait_finished(const Service& s, const std::string& id) {
    for (int i = 0; i < 3000; ++i) {
        const Job job = s.job(id);
        if (job.state == JobState::Done || job.state == JobState::Failed) return job;
        std::this_thread::sleep_for(10ms);
    }
    return s.job(id);
}

int status_of(const std::function<void()>& call) {
    try {
        call();
    } catch (const HttpError& e) {
        return e.status();
    }
    return 0;
}

void expect_legal_history(const Job& job) {
    ASSERT_FALSE(job.history.empty());
    EXPECT_EQ(job.history.front(), JobState::Queued);
    for (std::size_t i = 1; i < job.history.size(); ++i) {
        EXPECT_TRUE(legal_transition(job.history[i - 1], job.history[i]));
    }
    EXPECT_EQ(job.history.back(), job.state);
    EXPECT_EQ(job.metrics.has_value(), job.state == JobState::Done);
}

}  // namespace

TEST(JobStateMachine, OnlyForwardTransitions) {
    EXPECT_TRUE(legal_transition(JobState::Queued, JobState::Running));
    EXPECT_TRUE(legal_transition(JobState::Running, JobState::Done));
    EXPECT_TRUE(legal_transition(JobState::Running, JobState::Failed));
    EXPECT_FALSE(legal_transition(JobState::Done, JobState::Running));
    EXPECT_FALSE(legal_transition(JobState::Queued, JobState::Done));
    EXPECT_FALSE(legal_transition(JobState::Failed, JobState::Queued));
}

TEST(Base64, RoundTrip) {
    for (std::size_t n = 0; n < 10; ++n) {
        std::vector<std::uint8_t> bytes(n);
        for (std::size_t i = 0; i < n; ++i) bytes[i] = static_cast<std::uint8_t>(i * 37 + 250);
        EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
    }
    EXPECT_EQ(base64_encode({'M', 'a'}), "TWE=");
}

TEST(Datasets, RegisterAndReject) {
    Fixture f;
    Service s({f.dir / "root"});
    const auto ds = s.add_dataset({{"mosaic", f.mosaic.string()}, {"bathymetry", f.bathymetry.string()}});
    EXPECT_EQ(ds.width, 40u);
    EXPECT_EQ(ds.bands, 3u);
    EXPECT_TRUE(ds.bathymetry.has_value());

    save_bnd(Raster(39, 40, 1), f.dir / "small.bnd");
    try {
        s.add_dataset({{"mosaic", f.mosaic.string()}, {"bathymetry", (f.dir / "small.bnd").string()}});
        FAIL() << "expected 400";
    } catch (const HttpError& e) {
        EXPECT_EQ(e.status(), 400);
        const auto body = e.body().dump();
        EXPECT_NE(body.find("\"width\":40"), std::string::npos);
        EXPECT_NE(body.find("\"width\":39"), std::string::npos);
    }
    EXPECT_EQ(status_of([&] { s.add_dataset({{"mosaic", (f.dir / "nope.png").string()}}); }), 400);
    EXPECT_EQ(status_of([&] { s.add_dataset({{"mosaic", 5}}); }), 400);
}

TEST(Jobs, ValidationErrors) {
    Fixture f;
    Service s({f.dir / "root"});
    const auto rgb_only = s.add_dataset({{"mosaic", f.mosaic.string()}});
    EXPECT_EQ(status_of([&] { s.submit_job({{"dataset_id", "ds-999999"}, {"method", "kmeans"}, {"k", 3}}); }), 404);
    EXPECT_EQ(status_of([&] { s.submit_job({{"dataset_id", rgb_only.id}, {"method", "dbscan"}, {"k", 4}}); }), 422);
    EXPECT_EQ(status_of([&] {
                  s.submit_job({{"dataset_id", rgb_only.id}, {"mode", "geomorphic"}, {"method", "kmeans"}, {"k", 7}});
              }),
              422);
    try {
        s.submit_job({{"dataset_id", rgb_only.id}, {"method", "gmm"}, {"params", {{"k", 2}, {"wiggle", 1}}}});
        FAIL() << "expected 422";
    } catch (const HttpError& e) {
        EXPECT_NE(e.body().dump().find("wiggle"), std::string::npos);
    }
    EXPECT_TRUE(s.jobs().empty());
}

TEST(Jobs, GmmJobCompletesWithRequestedClusters) {
    Fixture f;
    Service s({f.dir / "root"});
    const auto ds = s.add_dataset({{"mosaic", f.mosaic.string()}});
    const auto id = s.submit_job({{"dataset_id", ds.id}, {"method", "gmm"}, {"k", 4}, {"mode", "benthic"}});
    const Job job = wait_finished(s, id);
    ASSERT_EQ(job.state, JobState::Done) << job.error.value_or("");
    expect_legal_history(job);
    EXPECT_EQ(job.stats.size(), 4u);
    EXPECT_EQ(s.job_clusters(id)["clusters"].size(), 4u);
    ASSERT_TRUE(job.metrics->bic.has_value());
    EXPECT_TRUE(job.finished.has_value());
}

TEST(Jobs, PreviewHasOneColourPerLabelPlusBackground) {
    Fixture f;
    Service s({f.dir / "root"});
    const auto ds = s.add_dataset({{"mosaic", f.mosaic.string()}});
    const auto id = s.submit_job({{"dataset_id", ds.id}, {"method", "kmeans"}, {"k", 2}, {"seed", 1}});
    ASSERT_EQ(wait_finished(s, id).state, JobState::Done);
    const Raster png = decode_png(s.job_map_png(id));
    std::set<std::tuple<float, float, float>> colours;
    for (std::size_t p = 0; p < png.pixel_count(); ++p) colours.emplace(png.at(0, p), png.at(1, p), png.at(2, p));
    EXPECT_EQ(colours.size(), 3u);  // the scene has a cloud gap
}

TEST(Jobs, NotDoneMeansConflict) {
    Fixture f(96);
    Service s({f.dir / "root"});
    const auto ds = s.add_dataset({{"mosaic", f.mosaic.string()}});
    const auto first = s.submit_job({{"dataset_id", ds.id}, {"method", "gmm"}, {"k", 6}});
    const auto second = s.submit_job({{"dataset_id", ds.id}, {"method", "gmm"}, {"k", 5}});
    EXPECT_EQ(status_of([&] { s.job_map_png(second); }), 409);
    EXPECT_EQ(status_of([&] { s.job_clusters(second); }), 409);
    EXPECT_EQ(status_of([&] { s.refine(second, json::object()); }), 409);
    EXPECT_TRUE(s.wait_idle(120s));
    EXPECT_EQ(s.job(first).state, JobState::Done);
    EXPECT_EQ(status_of([&] { s.job("job-424242"); }), 404);
}

TEST(Jobs, AgnesOverCapFailsWithCapError) {
    Fixture f;
    Service s({f.dir / "root"});
    const auto ds = s.add_dataset({{"mosaic", f.mosaic.string()}});
    const auto id = s.submit_job(
        {{"dataset_id", ds.id}, {"method", "agnes"}, {"k", 3}, {"params", {{"downsample", 1}, {"max_samples", 500}}}});
    const Job job = wait_finished(s, id);
    ASSERT_EQ(job.state, JobState::Failed);
    ASSERT_TRUE(job.error);
    EXPECT_NE(job.error->find("cap"), std::string::npos) << *job.error;
    expect_legal_history(job);
}

TEST(Curves, KMeansCurveIsNonIncreasingAndCached) {
    Fixture f(32);
    Service s({f.dir / "root"});
    const auto ds = s.add_dataset({{"mosaic", f.mosaic.string()}});
    const auto curve = s.dataset_curves(ds.id, "kmeans", 1, 8, "minmax", "benthic");
    ASSERT_EQ(curve["points"].size(), 8u);
    for (std::size_t i = 1; i < 8; ++i) {
        EXPECT_LE(curve["points"][i]["score"].get<double>(), curve["points"][i - 1]["score"].get<double>());
    }
    EXPECT_EQ(s.dataset_curves(ds.id, "kmeans", 1, 8, "minmax", "benthic"), curve);
    EXPECT_EQ(status_of([&] { s.dataset_curves(ds.id, "kmeans", 5, 2, "minmax", "benthic"); }), 422);
    EXPECT_EQ(status_of([&] { s.dataset_curves(ds.id, "kmeans", 1, 3, "minmax", "geomorphic"); }), 422);
}

TEST(Refine, RevisionsAreImmutableAndLegendGapsRejected) {
    Fixture f;
    Service s({f.dir / "root"});
    const auto ds = s.add_dataset({{"mosaic", f.mosaic.string()}});
    const auto id = s.submit_job({{"dataset_id", ds.id}, {"method", "kmeans"}, {"k", 3}});
    ASSERT_EQ(wait_finished(s, id).state, JobState::Done);

    // Identity refinement reproduces the raw clustering.
    const auto r1 = s.refine(id, {{"min_size", 1}, {"remaps", json::array()}});
    const auto raw = raster_to_labels(load_bnd(s.data_root() / "jobs" / id / "raw_labels.bnd"));
    const auto exported = raster_to_labels(decode_bnd(s.revision_file(id, r1, "labels.bnd")));
    EXPECT_EQ(exported, compact(raw).first);
    EXPECT_EQ(s.export_revision(id, r1).dump(), s.export_revision(id, r1).dump());

    const auto r2 = s.refine(id, {{"min_size", 30}});
    EXPECT_NE(r1, r2);
    EXPECT_EQ(s.job(id).revisions.size(), 2u);

    try {
        s.refine(id, {{"min_size", 1}, {"legend", json::array({{{"label", 0}, {"class", "sand"}, {"color", "#F5E35C"}},
                                                               {{"label", 1}, {"class", "ocean"}, {"color", "#0B3C8C"}}})}});
        FAIL() << "expected 422";
    } catch (const HttpError& e) {
        EXPECT_EQ(e.status(), 422);
        EXPECT_EQ(e.details(), json::array({2}));
    }
    EXPECT_EQ(s.job(id).revisions.size(), 2u);
    EXPECT_EQ(status_of([&] { s.export_revision(id, "rev-009"); }), 404);
    EXPECT_EQ(status_of([&] { s.revision_file(id, r1, "../job.json"); }), 404);
}

TEST(Recovery, InterruptedJobsFailAndQueuedJobsResume) {
    Fixture f(24);
    const fs::path root = f.dir / "root";
    std::string done_id;
    {
        Service s({root});
        const auto ds = s.add_dataset({{"mosaic", f.mosaic.string()}});
        done_id = s.submit_job({{"dataset_id", ds.id}, {"method", "kmeans"}, {"k", 2}});
        ASSERT_EQ(wait_finished(s, done_id).state, JobState::Done);
    }
    // Fake a crash: one job caught mid-run and one never started.
    const auto stored = read_file(root / "jobs" / done_id / "job.json");
    const auto doc = json::parse(stored.begin(), stored.end());
    auto running = doc;
    running["job_id"] = "job-000050";
    running["state"] = "running";
    running["history"] = {"queued", "running"};
    running.erase("metrics");
    fs::create_directories(root / "jobs" / "job-000050");
    write_file_atomic(root / "jobs" / "job-000050" / "job.json", running.dump());
    auto queued = running;
    queued["job_id"] = "job-000051";
    queued["state"] = "queued";
    queued["history"] = {"queued"};
    fs::create_directories(root / "jobs" / "job-000051");
    write_file_atomic(root / "jobs" / "job-000051" / "job.json", queued.dump());

    Service s({root});
    EXPECT_EQ(s.job(done_id).state, JobState::Done);
    const Job interrupted = s.job("job-000050");
    EXPECT_EQ(interrupted.state, JobState::Failed);
    expect_legal_history(interrupted);
    EXPECT_EQ(wait_finished(s, "job-000051").state, JobState::Done);
    const auto ds = s.jobs().front().dataset_id;
    EXPECT_EQ(s.submit_job({{"dataset_id", ds}, {"method", "kmeans"}, {"k", 2}}), "job-000052");
}

TEST(Http, RoutesErrorsAndCors) {
    Fixture f(32);
    Service s({f.dir / "root"});
    HttpServer server(s, {"127.0.0.1", 0, "http://studio.local"});
    const int port = server.start_background();
    httplib::Client client("127.0.0.1", port);

    auto res = client.Post("/datasets", json{{"mosaic", f.mosaic.string()}}.dump(), "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 201);
    EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "http://studio.local");
    const auto ds = json::parse(res->body)["dataset_id"].get<std::string>();

    res = client.Post("/jobs", json{{"dataset_id", ds}, {"method", "dbscan"}, {"k", 4}}.dump(), "application/json");
    EXPECT_EQ(res->status, 422);
    const auto err = json::parse(res->body);
    EXPECT_TRUE(err["error"].is_string());
    EXPECT_TRUE(err["details"].is_array());

    res = client.Post("/jobs", "{not json", "application/json");
    EXPECT_EQ(res->status, 400);

    res = client.Post("/jobs", json{{"dataset_id", ds}, {"method", "kmeans"}, {"k", 3}}.dump(), "application/json");
    ASSERT_EQ(res->status, 202);
    const auto job = json::parse(res->body)["job_id"].get<std::string>();
    ASSERT_TRUE(s.wait_idle(60s));

    res = client.Get("/jobs/" + job);
    EXPECT_EQ(json::parse(res->body)["state"], "done");
    res = client.Get("/jobs/" + job + "/map.png");
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->get_header_value("Content-Type"), "image/png");
    res = client.Get("/jobs/" + job + "/clusters");
    EXPECT_EQ(json::parse(res->body)["clusters"].size(), 3u);
    res = client.Get("/datasets/" + ds + "/curves?method=kmeans&kmin=1&kmax=4");
    EXPECT_EQ(json::parse(res->body)["points"].size(), 4u);
    res = client.Get("/datasets/" + ds + "/curves?kmin=x");
    EXPECT_EQ(res->status, 422);

    res = client.Post("/jobs/" + job + "/refine", json{{"min_size", 5}}.dump(), "application/json");
    ASSERT_EQ(res->status, 201);
    const auto rev = json::parse(res->body)["revision_id"].get<std::string>();
    const auto first = client.Get("/jobs/" + job + "/revisions/" + rev + "/export");
    const auto again = client.Get("/jobs/" + job + "/revisions/" + rev + "/export");
    EXPECT_EQ(first->body, again->body);
    const auto bundle = json::parse(first->body);
    for (const char* key : {"map.png", "labels.bnd", "legend.json", "provenance.json"}) EXPECT_TRUE(bundle.contains(key));
    res = client.Get("/jobs/" + job + "/revisions/" + rev + "/files/labels.bnd");
    EXPECT_EQ(std::vector<std::uint8_t>(res->body.begin(), res->body.end()),
              base64_decode(bundle["labels.bnd"].get<std::string>()));

    res = client.Get("/jobs/job-777777");
    EXPECT_EQ(res->status, 404);
    EXPECT_TRUE(json::parse(res->body).contains("error"));
    res = client.Get("/no/such/route");
    EXPECT_EQ(res->status, 404);
    EXPECT_TRUE(json::parse(res->body)["details"].is_array());

    res = client.Options("/jobs");
    EXPECT_EQ(res->status, 204);
    EXPECT_FALSE(res->get_header_value("Access-Control-Allow-Methods").empty());
    server.stop();
}

TEST(Http, MultipartUpload) {
    Fixture f(24);
    Service s({f.dir / "root"});
    HttpServer server(s, {"127.0.0.1", 0, "*"});
    const int port = server.start_background();
    httplib::Client client("127.0.0.1", port);
    const auto png = read_file(f.mosaic);
    const auto bnd = read_file(f.bathymetry);
    httplib::MultipartFormDataItems items{
        {"mosaic", std::string(png.begin(), png.end()), "mosaic.png", "image/png"},
        {"bathymetry", std::string(bnd.begin(), bnd.end()), "bathymetry.bnd", "application/octet-stream"},
    };
    auto res = client.Post("/datasets", items);
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 201) << res->body;
    const auto ds = json::parse(res->body);
    EXPECT_EQ(ds["has_bathymetry"], true);
    EXPECT_EQ(ds["width"], 24);
    server.stop();
}

TEST(Http, EnvironmentOverrides) {
    ServerOptions server;
    ServiceOptions service;
    ::setenv("REEFSEG_BIND", "0.0.0.0:9191", 1);
    ::setenv("REEFSEG_DATA_ROOT", "/tmp/reefseg-env-root", 1);
    apply_environment(server, service);
    ::unsetenv("REEFSEG_BIND");
    ::unsetenv("REEFSEG_DATA_ROOT");
    EXPECT_EQ(server.host, "0.0.0.0");
    EXPECT_EQ(server.port, 9191);
    EXPECT_EQ(service.data_root, fs::path("/tmp/reefseg-env-root"));
}
