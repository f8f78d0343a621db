#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rsnpe/calibration.hpp"
#include "rsnpe/common.hpp"
#include "rsnpe/datagen.hpp"
#include "rsnpe/flow.hpp"
#include "rsnpe/inference.hpp"
#include "rsnpe/simulator.hpp"

namespace rsnpe::pipeline {

/// Everything one run needs, merged from defaults, an optional JSON config
/// file and CLI overrides. Each command re-serializes the resolved config
/// next to its outputs and stamps artifacts with its hash.
struct RunConfig {
    simulator::RadarConfig radar;
    datagen::PriorSpec prior;
    flow::FlowConfig flow_cfg;
    flow::TrainConfig train_cfg;

    std::size_t n_primary = 500;
    std::size_t n_reference = 200;
    std::size_t n_train_pairs = 8000;
    std::size_t n_val_pairs = 2000;
    uint64_t datagen_seed = 1;

    std::size_t n_sbc_points = 200;
    int sbc_posterior_samples = 100;
    uint64_t validate_seed = 2;

    std::size_t infer_samples = 10000;
    uint64_t infer_seed = 3;
    int altitude_exponent = +1;
    Real max_support_violation_frac = 0.25;

    std::string output_dir;

    void validate() const;
};

/// Parses the JSON config file (missing keys keep their defaults). The output
/// directory falls back to $RSNPE_OUT, then to "./rsnpe_out".
RunConfig load_run_config(const std::optional<std::string>& config_path);

std::string resolved_config_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

/// Writes config.resolved.json into the output directory (created if absent).
void persist_resolved_config(const RunConfig& cfg);

struct SimulateOutcome {
    Real peak_db = 0.0;
    std::string rangeline_base;  ///< path prefix of the .bin/.json dump
};

SimulateOutcome cmd_simulate(const RunConfig& cfg, const simulator::TerrainParams& theta,
                             uint64_t seed, bool dump_mesh);

void cmd_generate(const RunConfig& cfg);

struct TrainOutcome {
    flow::TrainResult result;
    std::string model_json;
};

TrainOutcome cmd_train(const RunConfig& cfg);

calibration::CalibrationReport cmd_validate(const RunConfig& cfg);

struct InferOutcome {
    std::vector<inference::PosteriorResult> results;
    bool warnings_exceeded = false;
};

InferOutcome cmd_infer(const RunConfig& cfg, const inference::Observation& obs,
                       const std::vector<Real>& eps_ref_sweep);

void cmd_plot(const RunConfig& cfg);

}  // namespace rsnpe::pipeline
