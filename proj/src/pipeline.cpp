#include "rsnpe/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "rsnpe/io.hpp"
#include "rsnpe/physics.hpp"
#include "rsnpe/plot.hpp"
#include "rsnpe/surface.hpp"

namespace rsnpe::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void require_artifact(const std::string& path, const std::string& producer) {
    if (!fs::exists(path)) {
        throw std::runtime_error("missing artifact " + path + "; run `rsnpe " + producer +
                                 "` first");
    }
}

void write_meta(const RunConfig& cfg, const std::string& path, const std::string& command,
                uint64_t seed) {
    json j;
    j["command"] = command;
    j["config_hash"] = config_hash(cfg);
    j["seed"] = seed;
    j["format_version"] = 1;
    io::write_text_file(path, j.dump(2) + "\n");
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
    radar.validate();
    prior.validate();
    flow_cfg.validate();
    train_cfg.validate();
    if (n_primary < 1) throw ConfigError("datagen.n_primary: must be >= 1");
    if (n_reference < 1) throw ConfigError("datagen.n_reference: must be >= 1");
    if (n_train_pairs < 1 || n_val_pairs < 1) {
        throw ConfigError("datagen.n_train_pairs/n_val_pairs: must be >= 1");
    }
    if (n_sbc_points < 20) throw ConfigError("validate.n_sbc_points: must be >= 20");
    if (sbc_posterior_samples < 20) {
        throw ConfigError("validate.sbc_posterior_samples: must be >= 20");
    }
    if (infer_samples < 1) throw ConfigError("infer.n_samples: must be >= 1");
    if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
}

RunConfig load_run_config(const std::optional<std::string>& config_path) {
    RunConfig cfg;
    const char* env_root = std::getenv("RSNPE_OUT");
    cfg.output_dir = env_root != nullptr ? env_root : "rsnpe_out";

    if (!config_path.has_value()) return cfg;

    std::ifstream in(*config_path);
    if (!in) throw ConfigError("config file not found: " + *config_path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& ex) {
        throw ConfigError("config file " + *config_path + ": " + ex.what());
    }

    if (j.contains("radar")) {
        const auto& r = j.at("radar");
        maybe(r, "fc_mhz", cfg.radar.fc_mhz);
        maybe(r, "altitude_km", cfg.radar.altitude_km);
        maybe(r, "dx_m", cfg.radar.dx_m);
        maybe(r, "footprint_radius_m", cfg.radar.footprint_radius_m);
        maybe(r, "fs_mhz", cfg.radar.fs_mhz);
        maybe(r, "n_samples", cfg.radar.n_samples);
        maybe(r, "noise_alpha", cfg.radar.noise_alpha);
        maybe(r, "snr_db", cfg.radar.snr_db);
        maybe(r, "tx_amplitude", cfg.radar.tx_amplitude);
        maybe(r, "noise_enabled", cfg.radar.noise_enabled);
    }
    if (j.contains("prior")) {
        const auto& p = j.at("prior");
        maybe(p, "eps_lo", cfg.prior.eps_lo);
        maybe(p, "eps_hi", cfg.prior.eps_hi);
        maybe(p, "sigma_lo", cfg.prior.sigma_lo);
        maybe(p, "sigma_hi", cfg.prior.sigma_hi);
        maybe(p, "slope_lo", cfg.prior.slope_lo);
        maybe(p, "slope_hi", cfg.prior.slope_hi);
        maybe(p, "eps_ref_lo", cfg.prior.eps_ref_lo);
        maybe(p, "eps_ref_hi", cfg.prior.eps_ref_hi);
    }
    if (j.contains("flow")) {
        const auto& f = j.at("flow");
        maybe(f, "n_transforms", cfg.flow_cfg.n_transforms);
        maybe(f, "hidden_units", cfg.flow_cfg.hidden_units);
        maybe(f, "hidden_layers", cfg.flow_cfg.hidden_layers);
        maybe(f, "n_bins", cfg.flow_cfg.n_bins);
        maybe(f, "tail_bound", cfg.flow_cfg.tail_bound);
        maybe(f, "context_dim", cfg.flow_cfg.context_dim);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        maybe(t, "max_epochs", cfg.train_cfg.max_epochs);
        maybe(t, "batch_size", cfg.train_cfg.batch_size);
        maybe(t, "learning_rate", cfg.train_cfg.learning_rate);
        maybe(t, "patience", cfg.train_cfg.patience);
        maybe(t, "seed", cfg.train_cfg.seed);
    }
    if (j.contains("datagen")) {
        const auto& d = j.at("datagen");
        maybe(d, "n_primary", cfg.n_primary);
        maybe(d, "n_reference", cfg.n_reference);
        maybe(d, "n_train_pairs", cfg.n_train_pairs);
        maybe(d, "n_val_pairs", cfg.n_val_pairs);
        maybe(d, "seed", cfg.datagen_seed);
    }
    if (j.contains("validate")) {
        const auto& v = j.at("validate");
        maybe(v, "n_sbc_points", cfg.n_sbc_points);
        maybe(v, "posterior_samples", cfg.sbc_posterior_samples);
        maybe(v, "seed", cfg.validate_seed);
    }
    if (j.contains("infer")) {
        const auto& i = j.at("infer");
        maybe(i, "n_samples", cfg.infer_samples);
        maybe(i, "seed", cfg.infer_seed);
        maybe(i, "altitude_exponent", cfg.altitude_exponent);
        maybe(i, "max_support_violation_frac", cfg.max_support_violation_frac);
    }
    maybe(j, "output_dir", cfg.output_dir);
    return cfg;
}

std::string resolved_config_json(const RunConfig& cfg) {
    json j;
    j["radar"] = {{"fc_mhz", cfg.radar.fc_mhz},
                  {"altitude_km", cfg.radar.altitude_km},
                  {"dx_m", cfg.radar.facet_size_m()},
                  {"footprint_radius_m", cfg.radar.footprint_m()},
                  {"fs_mhz", cfg.radar.fs_mhz},
                  {"n_samples", cfg.radar.n_samples},
                  {"noise_alpha", cfg.radar.noise_alpha},
                  {"snr_db", cfg.radar.snr_db},
                  {"tx_amplitude", cfg.radar.tx_amplitude},
                  {"noise_enabled", cfg.radar.noise_enabled}};
    j["prior"] = {{"eps_lo", cfg.prior.eps_lo},         {"eps_hi", cfg.prior.eps_hi},
                  {"sigma_lo", cfg.prior.sigma_lo},     {"sigma_hi", cfg.prior.sigma_hi},
                  {"slope_lo", cfg.prior.slope_lo},     {"slope_hi", cfg.prior.slope_hi},
                  {"eps_ref_lo", cfg.prior.eps_ref_lo}, {"eps_ref_hi", cfg.prior.eps_ref_hi}};
    j["flow"] = {{"n_transforms", cfg.flow_cfg.n_transforms},
                 {"hidden_units", cfg.flow_cfg.hidden_units},
                 {"hidden_layers", cfg.flow_cfg.hidden_layers},
                 {"n_bins", cfg.flow_cfg.n_bins},
                 {"tail_bound", cfg.flow_cfg.tail_bound},
                 {"context_dim", cfg.flow_cfg.context_dim}};
    j["train"] = {{"max_epochs", cfg.train_cfg.max_epochs},
                  {"batch_size", cfg.train_cfg.batch_size},
                  {"learning_rate", cfg.train_cfg.learning_rate},
                  {"patience", cfg.train_cfg.patience},
                  {"seed", cfg.train_cfg.seed}};
    j["datagen"] = {{"n_primary", cfg.n_primary},
                    {"n_reference", cfg.n_reference},
                    {"n_train_pairs", cfg.n_train_pairs},
                    {"n_val_pairs", cfg.n_val_pairs},
                    {"seed", cfg.datagen_seed}};
    j["validate"] = {{"n_sbc_points", cfg.n_sbc_points},
                     {"posterior_samples", cfg.sbc_posterior_samples},
                     {"seed", cfg.validate_seed}};
    j["infer"] = {{"n_samples", cfg.infer_samples},
                  {"seed", cfg.infer_seed},
                  {"altitude_exponent", cfg.altitude_exponent},
                  {"max_support_violation_frac", cfg.max_support_violation_frac}};
    j["output_dir"] = cfg.output_dir;
    return j.dump(2);
}

std::string config_hash(const RunConfig& cfg) {
    return to_hex(fnv1a64(resolved_config_json(cfg)));
}

void persist_resolved_config(const RunConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    io::write_text_file(join(cfg.output_dir, "config.resolved.json"),
                        resolved_config_json(cfg) + "\n");
}

SimulateOutcome cmd_simulate(const RunConfig& cfg, const simulator::TerrainParams& theta,
                             uint64_t seed, bool dump_mesh) {
    cfg.validate();
    persist_resolved_config(cfg);
    if (!cfg.prior.contains(theta)) {
        std::cerr << "notice: theta lies outside the configured prior box; simulating anyway\n";
    }

    const auto line = simulator::simulate_rangeline(theta, cfg.radar, seed);
    const Real peak = simulator::peak_power(line);

    SimulateOutcome out;
    out.peak_db = physics::linear_to_db(peak);
    out.rangeline_base = join(cfg.output_dir, "rangeline_seed" + std::to_string(seed));
    io::write_rangeline(out.rangeline_base, line, theta, seed, config_hash(cfg));

    if (dump_mesh) {
        const auto spec = simulator::simulation_mesh_spec(theta, cfg.radar, seed);
        io::write_mesh(join(cfg.output_dir, "mesh_seed" + std::to_string(seed)),
                       surface::synthesize_grf(spec), seed);
    }
    return out;
}

void cmd_generate(const RunConfig& cfg) {
    cfg.validate();
    persist_resolved_config(cfg);

    const auto primary = datagen::generate_primary(cfg.n_primary, cfg.prior, cfg.radar,
                                                   derive_seed(cfg.datagen_seed, 1));
    io::write_primary_csv(join(cfg.output_dir, "primary.csv"), primary);

    const auto reference = datagen::generate_reference(cfg.n_reference, cfg.prior, cfg.radar,
                                                       derive_seed(cfg.datagen_seed, 2));
    io::write_reference_csv(join(cfg.output_dir, "reference.csv"), reference);

    const auto [train, val] = datagen::build_pairs(primary, reference, cfg.n_train_pairs,
                                                   cfg.n_val_pairs,
                                                   derive_seed(cfg.datagen_seed, 3));
    io::write_pairs_csv(join(cfg.output_dir, "train_pairs.csv"), train);
    io::write_pairs_csv(join(cfg.output_dir, "val_pairs.csv"), val);
    write_meta(cfg, join(cfg.output_dir, "datasets.meta.json"), "generate", cfg.datagen_seed);
}

TrainOutcome cmd_train(const RunConfig& cfg) {
    cfg.validate();
    persist_resolved_config(cfg);
    const std::string train_path = join(cfg.output_dir, "train_pairs.csv");
    const std::string val_path = join(cfg.output_dir, "val_pairs.csv");
    require_artifact(train_path, "generate");
    require_artifact(val_path, "generate");

    const auto train = io::read_pairs_csv(train_path);
    const auto val = io::read_pairs_csv(val_path);

    TrainOutcome out;
    out.result = flow::train_flow(train, val, cfg.flow_cfg, cfg.train_cfg);
    out.model_json = join(cfg.output_dir, "model.json");
    flow::save_flow(out.result.model, out.model_json, join(cfg.output_dir, "model.bin"));
    io::write_history_csv(join(cfg.output_dir, "history.csv"), out.result.history);
    write_meta(cfg, join(cfg.output_dir, "train.meta.json"), "train", cfg.train_cfg.seed);
    return out;
}

calibration::CalibrationReport cmd_validate(const RunConfig& cfg) {
    cfg.validate();
    persist_resolved_config(cfg);
    const std::string model_path = join(cfg.output_dir, "model.json");
    const std::string val_path = join(cfg.output_dir, "val_pairs.csv");
    require_artifact(model_path, "train");
    require_artifact(val_path, "generate");

    const auto model = flow::load_flow(model_path);
    auto val = io::read_pairs_csv(val_path);
    if (val.size() < cfg.n_sbc_points) {
        throw std::runtime_error("validate: need " + std::to_string(cfg.n_sbc_points) +
                                 " held-out pairs but val_pairs.csv has " +
                                 std::to_string(val.size()));
    }
    val.resize(cfg.n_sbc_points);

    const auto report =
        calibration::calibrate(calibration::make_flow_sampler(model), val,
                               cfg.sbc_posterior_samples, cfg.prior, cfg.validate_seed);

    json j;
    j["ks_p"] = report.ks_p;
    j["c2st_rank"] = report.c2st_rank;
    j["c2st_dap"] = report.c2st_dap;
    j["n_test"] = report.n_test;
    j["posterior_samples"] = report.L;
    j["seed"] = cfg.validate_seed;
    j["config_hash"] = config_hash(cfg);
    io::write_text_file(join(cfg.output_dir, "calibration.json"), j.dump(2) + "\n");
    io::write_rank_csv(join(cfg.output_dir, "ranks.csv"), report.ranks[0].ranks,
                       report.ranks[1].ranks, report.ranks[2].ranks, report.L);
    return report;
}

InferOutcome cmd_infer(const RunConfig& cfg, const inference::Observation& obs,
                       const std::vector<Real>& eps_values) {
    cfg.validate();
    persist_resolved_config(cfg);
    const std::string model_path = join(cfg.output_dir, "model.json");
    require_artifact(model_path, "train");
    const auto model = flow::load_flow(model_path);

    inference::Observation base = obs;
    base.altitude_exponent = cfg.altitude_exponent;
    const std::vector<Real> sweep =
        eps_values.empty() ? std::vector<Real>{obs.eps_ref_assumed} : eps_values;

    InferOutcome out;
    out.results =
        inference::eps_ref_sweep(model, base, sweep, cfg.infer_samples, cfg.infer_seed,
                                 cfg.prior);

    for (const auto& r : out.results) {
        char tag[32];
        std::snprintf(tag, sizeof(tag), "%.4g", r.eps_ref_used);
        const std::string base_name = "posterior_epsref_" + std::string(tag);
        json j;
        j["eps_ref"] = r.eps_ref_used;
        j["h"] = r.h_used;
        j["ctx_std"] = r.ctx_std_used;
        j["extrapolation"] = r.extrapolation;
        j["support_violation_frac"] = r.support_violation_frac;
        j["n_samples"] = r.samples.size();
        j["seed"] = cfg.infer_seed;
        j["config_hash"] = config_hash(cfg);
        const char* names[3] = {"eps", "sigma", "slope"};
        for (int d = 0; d < 3; ++d) {
            j["summary"][names[d]] = {{"mean", r.summary[d].mean}, {"std", r.summary[d].stddev},
                                      {"q05", r.summary[d].q05},   {"q25", r.summary[d].q25},
                                      {"q50", r.summary[d].q50},   {"q75", r.summary[d].q75},
                                      {"q95", r.summary[d].q95}};
        }
        j["correlation"] = r.correlation;
        io::write_text_file(join(cfg.output_dir, base_name + ".json"), j.dump(2) + "\n");
        io::write_samples_csv(join(cfg.output_dir, base_name + ".csv"), r.samples);
        if (r.support_violation_frac > cfg.max_support_violation_frac) {
            out.warnings_exceeded = true;
        }
        if (r.extrapolation) {
            std::cerr << "warning: h = " << r.h_used << " at eps_ref = " << r.eps_ref_used
                      << " lies outside the training-support envelope (|ctx| = "
                      << std::abs(r.ctx_std_used) << " training std)\n";
        }
    }
    return out;
}

void cmd_plot(const RunConfig& cfg) {
    cfg.validate();
    persist_resolved_config(cfg);
    bool found = false;
    for (const auto& entry : fs::directory_iterator(cfg.output_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("posterior_epsref_", 0) == 0 && entry.path().extension() == ".csv") {
            const auto samples = io::read_samples_csv(entry.path().string());
            const std::string png = entry.path().string().substr(
                                        0, entry.path().string().size() - 4) +
                                    "_corner.png";
            plot::corner_plot(samples, png);
            found = true;
        }
    }

    const std::string ranks_path = join(cfg.output_dir, "ranks.csv");
    if (fs::exists(ranks_path)) {
        std::ifstream in(ranks_path);
        std::string line;
        std::getline(in, line);  // header
        std::array<calibration::RankRecord, 3> ranks;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            int ra = 0, b = 0, c = 0, L = 0;
            std::sscanf(line.c_str(), "%d,%d,%d,%d", &ra, &b, &c, &L);
            ranks[0].ranks.push_back(ra);
            ranks[1].ranks.push_back(b);
            ranks[2].ranks.push_back(c);
            ranks[0].L = ranks[1].L = ranks[2].L = L;
        }
        plot::rank_histogram(ranks, join(cfg.output_dir, "rank_hist.png"));
        found = true;
    }

    if (!found) {
        throw std::runtime_error(
            "plot: no posterior_epsref_*.csv or ranks.csv in " + cfg.output_dir +
            "; run `rsnpe infer` or `rsnpe validate` first");
    }
}

}  // namespace rsnpe::pipeline
