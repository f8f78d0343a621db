#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "rsnpe/io.hpp"
#include "rsnpe/pipeline.hpp"

using namespace rsnpe;
namespace fs = std::filesystem;

namespace {

/// Small end-to-end configuration at low altitude.
pipeline::RunConfig fast_run(const std::string& out_dir) {
    pipeline::RunConfig cfg;
    cfg.radar.altitude_km = 0.5;
    cfg.n_primary = 30;
    cfg.n_reference = 15;
    cfg.n_train_pairs = 360;
    cfg.n_val_pairs = 90;
    cfg.datagen_seed = 5;
    cfg.train_cfg.max_epochs = 3;
    cfg.train_cfg.batch_size = 128;
    cfg.train_cfg.seed = 6;
    cfg.n_sbc_points = 40;
    cfg.sbc_posterior_samples = 20;
    cfg.validate_seed = 7;
    cfg.infer_samples = 300;
    cfg.infer_seed = 8;
    cfg.output_dir = out_dir;
    return cfg;
}

std::string slurp(const std::string& path) { return io::read_text_file(path); }

}  // namespace

TEST_CASE("missing artifacts raise actionable errors") {
    const std::string dir = (fs::temp_directory_path() / "rsnpe_missing").string();
    fs::remove_all(dir);
    auto cfg = fast_run(dir);
    try {
        pipeline::cmd_train(cfg);
        FAIL("expected a missing-artifact error");
    } catch (const std::exception& ex) {
        const std::string msg = ex.what();
        CHECK(msg.find("rsnpe generate") != std::string::npos);
    }
    try {
        pipeline::cmd_validate(cfg);
        FAIL("expected a missing-artifact error");
    } catch (const std::exception& ex) {
        CHECK(std::string(ex.what()).find("rsnpe train") != std::string::npos);
    }
}

TEST_CASE("pipeline commands produce coherent artifacts") {
    const std::string dir = (fs::temp_directory_path() / "rsnpe_pipeline").string();
    fs::remove_all(dir);
    auto cfg = fast_run(dir);

    pipeline::cmd_generate(cfg);
    CHECK(fs::exists(dir + "/primary.csv"));
    CHECK(fs::exists(dir + "/reference.csv"));
    CHECK(fs::exists(dir + "/train_pairs.csv"));
    CHECK(fs::exists(dir + "/val_pairs.csv"));
    CHECK(fs::exists(dir + "/config.resolved.json"));
    CHECK(io::read_primary_csv(dir + "/primary.csv").size() == cfg.n_primary);
    CHECK(io::read_pairs_csv(dir + "/train_pairs.csv").size() == cfg.n_train_pairs);

    // Byte-identical regeneration under the same seeds.
    const std::string before = slurp(dir + "/train_pairs.csv");
    pipeline::cmd_generate(cfg);
    CHECK(slurp(dir + "/train_pairs.csv") == before);

    // Metadata carries the config hash.
    const auto meta = nlohmann::json::parse(slurp(dir + "/datasets.meta.json"));
    CHECK(meta.at("config_hash").get<std::string>() == pipeline::config_hash(cfg));

    const auto train_outcome = pipeline::cmd_train(cfg);
    CHECK(fs::exists(dir + "/model.json"));
    CHECK(fs::exists(dir + "/model.bin"));
    CHECK(fs::exists(dir + "/history.csv"));
    CHECK(!train_outcome.result.history.empty());

    const auto report = pipeline::cmd_validate(cfg);
    CHECK(fs::exists(dir + "/calibration.json"));
    CHECK(fs::exists(dir + "/ranks.csv"));
    for (int d = 0; d < 3; ++d) {
        CHECK(report.ks_p[d] >= 0.0);
        CHECK(report.ks_p[d] <= 1.0);
    }

    inference::Observation obs;
    obs.p_obs_db = 34.73;
    obs.p_ref_obs_db = 32.62;
    obs.r_obs_km = 300.0;
    obs.r_ref_obs_km = 250.0;
    const auto infer_outcome = pipeline::cmd_infer(cfg, obs, {2.0, 3.1, 4.0});
    REQUIRE(infer_outcome.results.size() == 3);
    CHECK(infer_outcome.results[0].h_used < infer_outcome.results[1].h_used);
    CHECK(infer_outcome.results[1].h_used < infer_outcome.results[2].h_used);
    CHECK(fs::exists(dir + "/posterior_epsref_3.1.json"));
    CHECK(fs::exists(dir + "/posterior_epsref_3.1.csv"));

    pipeline::cmd_plot(cfg);
    CHECK(fs::exists(dir + "/posterior_epsref_3.1_corner.png"));
    CHECK(fs::exists(dir + "/rank_hist.png"));

    // PNG signature sanity.
    std::ifstream png(dir + "/rank_hist.png", std::ios::binary);
    unsigned char sig[8];
    png.read(reinterpret_cast<char*>(sig), 8);
    CHECK(sig[0] == 0x89);
    CHECK(sig[1] == 'P');
}

TEST_CASE("cli binary runs the simulate subcommand") {
    const std::string dir = (fs::temp_directory_path() / "rsnpe_cli").string();
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cfg_path = dir + "/cli.json";
    io::write_text_file(cfg_path, R"({"radar": {"altitude_km": 0.5}})");
    const std::string binary = RSNPE_CLI_PATH;
    const std::string cmd = binary + " --config " + cfg_path + " --out " + dir +
                            " simulate --eps 4 --no-noise --dump-mesh --seed 3 > " + dir + "_stdout.txt 2>&1";
    const int rc = std::system(cmd.c_str());
    CHECK(rc == 0);
    const std::string output = slurp(dir + "_stdout.txt");
    CHECK(output.find("peak power:") != std::string::npos);
    CHECK(fs::exists(dir + "/rangeline_seed3.bin"));
    CHECK(fs::exists(dir + "/rangeline_seed3.json"));
    CHECK(fs::exists(dir + "/mesh_seed3.bin"));
    CHECK(fs::exists(dir + "/mesh_seed3.json"));

    // Same invocation must produce an identical rangeline dump.
    const std::string first = slurp(dir + "/rangeline_seed3.bin");
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(slurp(dir + "/rangeline_seed3.bin") == first);

    // Unknown flags exit nonzero.
    const int bad = std::system((binary + " simulate --definitely-not-a-flag 2> /dev/null").c_str());
    CHECK(bad != 0);
}

TEST_CASE("run config json round trip") {
    const std::string dir = (fs::temp_directory_path() / "rsnpe_cfg").string();
    fs::create_directories(dir);
    const std::string cfg_path = dir + "/cfg.json";
    io::write_text_file(cfg_path, R"({
      "radar": {"altitude_km": 2.0, "snr_db": 25.0},
      "datagen": {"n_primary": 77},
      "train": {"max_epochs": 9},
      "output_dir": ")" + dir + R"("
    })");
    const auto cfg = pipeline::load_run_config(cfg_path);
    CHECK(cfg.radar.altitude_km == 2.0);
    CHECK(cfg.radar.snr_db == 25.0);
    CHECK(cfg.radar.fc_mhz == 20.0);  // untouched default
    CHECK(cfg.n_primary == 77);
    CHECK(cfg.train_cfg.max_epochs == 9);
    CHECK(cfg.output_dir == dir);

    CHECK_THROWS_AS(pipeline::load_run_config(std::string("/nonexistent/cfg.json")), ConfigError);
}

TEST_CASE("output root falls back to the environment variable") {
    setenv("RSNPE_OUT", "/tmp/rsnpe_env_root", 1);
    const auto cfg = pipeline::load_run_config(std::nullopt);
    CHECK(cfg.output_dir == "/tmp/rsnpe_env_root");
    unsetenv("RSNPE_OUT");
    const auto fallback = pipeline::load_run_config(std::nullopt);
    CHECK(fallback.output_dir == "rsnpe_out");
}
