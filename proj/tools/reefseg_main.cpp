// reefseg command-line front end: run, curves, validate, serve, synth.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "reefseg/error.hpp"
#include "reefseg/pipeline.hpp"
#include "reefseg/raster_io.hpp"
#include "reefseg/select.hpp"
#include "reefseg/service/http_server.hpp"
#include "reefseg/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kConfigExit = 2;

reefseg::PipelineConfig load_config(const fs::path& path) {
    std::string text;
    try {
        const auto bytes = reefseg::read_file(path);
        text.assign(bytes.begin(), bytes.end());
    } catch (const reefseg::Error& e) {
        throw reefseg::ConfigError({std::string("cannot read config: ") + e.what()});
    }
    return reefseg::validate_config(text, fs::absolute(path).parent_path());
}

int report(const reefseg::Error& e) {
    if (const auto* config = dynamic_cast<const reefseg::ConfigError*>(&e)) {
        std::cerr << "config error:\n";
        for (const auto& problem : config->problems()) std::cerr << "  - " << problem << "\n";
    } else {
        std::cerr << "error: " << e.what() << "\n";
    }
    return reefseg::exit_code_for(e);
}

int cmd_run(const fs::path& config_path, std::optional<std::uint64_t> seed, std::optional<fs::path> out) {
    auto config = load_config(config_path);
    if (seed) config.seed = *seed;
    if (out) config.output_dir = fs::absolute(*out);
    const auto artifacts = reefseg::run_pipeline(config);
    std::cout << "map:        " << artifacts.map_png.string() << "\n"
              << "labels:     " << artifacts.labels_bnd.string() << "\n"
              << "legend:     " << artifacts.legend_json.string() << "\n"
              << "provenance: " << artifacts.provenance_json.string() << "\n";
    if (artifacts.curves_csv) std::cout << "curves:     " << artifacts.curves_csv->string() << "\n";
    std::cout << "classes:    " << artifacts.refined.map.legend.size() << "\n";
    return 0;
}

int cmd_curves(const fs::path& config_path, std::size_t k_min, std::size_t k_max, std::optional<fs::path> out) {
    auto config = load_config(config_path);
    if (out) config.output_dir = fs::absolute(*out);
    if (k_min < 1 || k_max < k_min) throw reefseg::ConfigError({"need 1 <= --k-min <= --k-max"});
    const auto curve = reefseg::compute_curve(config, {k_min, k_max});
    fs::create_directories(config.output_dir);
    const auto path = config.output_dir / "curves.csv";
    reefseg::write_file_atomic(path, reefseg::curve_to_csv(curve));
    std::cout << "curves:     " << path.string() << "\n";
    if (curve.proposed_k) std::cout << "proposed k: " << *curve.proposed_k << "\n";
    else std::cout << "proposed k: none (no clear knee)\n";
    return 0;
}

int cmd_validate(const fs::path& config_path) {
    const auto config = load_config(config_path);
    std::cout << reefseg::config_to_json(config).dump(2) << "\n";
    return 0;
}

reefseg::service::HttpServer* g_server = nullptr;

int cmd_serve(std::optional<std::string> bind, std::optional<fs::path> data_root, std::size_t workers,
              bool uploads_only) {
    reefseg::service::ServerOptions server_options;
    reefseg::service::ServiceOptions service_options;
    reefseg::service::apply_environment(server_options, service_options);
    if (bind) {
        const auto colon = bind->rfind(':');
        if (colon == std::string::npos) throw reefseg::ConfigError({"--bind must be host:port"});
        server_options.host = bind->substr(0, colon);
        server_options.port = std::stoi(bind->substr(colon + 1));
    }
    if (data_root) service_options.data_root = *data_root;
    service_options.workers = workers;
    service_options.allow_local_paths = !uploads_only;

    reefseg::service::Service service(service_options);
    reefseg::service::HttpServer server(service, server_options);
    const int port = server.bind();
    std::cout << "listening on " << server_options.host << ":" << port << " (data root "
              << service.data_root().string() << ")" << std::endl;
    g_server = &server;
    std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
    std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
    server.listen();
    g_server = nullptr;
    return 0;
}

int cmd_synth(const fs::path& out, std::uint32_t size, std::uint64_t seed) {
    const auto scene = reefseg::make_reef_scene(size, seed);
    fs::create_directories(out);
    reefseg::save_png(scene.mosaic, out / "mosaic.png");
    reefseg::save_bnd(scene.bathymetry, out / "bathymetry.bnd");
    reefseg::save_bnd(reefseg::labels_to_raster(scene.zones), out / "zones.bnd");
    std::cout << "wrote " << (out / "mosaic.png").string() << ", bathymetry.bnd, zones.bnd\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reefseg: unsupervised reef habitat segmentation"};
    app.require_subcommand(1);

    fs::path config_path;
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> out;

    auto* run = app.add_subcommand("run", "Cluster, refine and export a habitat map");
    run->add_option("--config", config_path, "Pipeline config JSON")->required();
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out, "Override the output directory");

    std::size_t k_min = 1, k_max = 10;
    auto* curves = app.add_subcommand("curves", "Write the WCSS or BIC curve as CSV");
    curves->add_option("--config", config_path, "Pipeline config JSON")->required();
    curves->add_option("--k-min", k_min, "Smallest k")->required();
    curves->add_option("--k-max", k_max, "Largest k")->required();
    curves->add_option("--out", out, "Override the output directory");

    auto* validate = app.add_subcommand("validate", "Check a config and print it with defaults filled in");
    validate->add_option("--config", config_path, "Pipeline config JSON")->required();

    std::optional<std::string> bind;
    std::optional<fs::path> data_root;
    std::size_t workers = 1;
    bool uploads_only = false;
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--bind", bind, "host:port (default from REEFSEG_BIND or 127.0.0.1:8080)");
    serve->add_option("--data-root", data_root, "Job store directory (default from REEFSEG_DATA_ROOT)");
    serve->add_option("--workers", workers, "Concurrent job workers")->check(CLI::PositiveNumber);
    serve->add_flag("--uploads-only", uploads_only, "Reject server-local dataset paths");

    fs::path synth_out = "data";
    std::uint32_t size = 128;
    std::uint64_t synth_seed = 7;
    auto* synth = app.add_subcommand("synth", "Write the synthetic reef scene used by the examples");
    synth->add_option("--out", synth_out, "Output directory");
    synth->add_option("--size", size, "Edge length in pixels")->check(CLI::Range(16u, 4096u));
    synth->add_option("--seed", synth_seed, "Noise seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigExit;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, seed, out);
        if (curves->parsed()) return cmd_curves(config_path, k_min, k_max, out);
        if (validate->parsed()) return cmd_validate(config_path);
        if (serve->parsed()) return cmd_serve(bind, data_root, workers, uploads_only);
        if (synth->parsed()) return cmd_synth(synth_out, size, synth_seed);
    } catch (const reefseg::Error& e) {
        return report(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
