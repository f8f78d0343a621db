#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rsnpe/common.hpp"
#include "rsnpe/datagen.hpp"
#include "rsnpe/rqs.hpp"

namespace rsnpe::flow {

using datagen::TrainSample;
using simulator::TerrainParams;

struct FlowConfig {
    int n_transforms = 5;
    int hidden_units = 64;
    int hidden_layers = 1;
    int n_bins = 8;
    Real tail_bound = 5.0;
    int context_dim = 1;
    int theta_dim = 3;

    void validate() const;
};

/// Affine featurization constants: theta is standardized per dimension and the
/// conditioner input is standardized log(h). Stored with the model so the
/// estimator is self-contained.
struct Standardization {
    std::array<Real, 3> theta_mean{0.0, 0.0, 0.0};
    std::array<Real, 3> theta_std{1.0, 1.0, 1.0};
    Real ctx_mean = 0.0;
    Real ctx_std = 1.0;
};

/// Conditional coupling flow q(theta | h). Each transform passes one theta
/// dimension through unchanged (cycling over dimensions) and applies a
/// rational-quadratic spline to the other two; spline parameters come from a
/// fully connected conditioner fed with the identity dimension and the
/// context. Output layers start at zero so an untrained flow is exactly the
/// base distribution.
struct FlowModel {
    FlowConfig config;
    Standardization norm;
    std::vector<int> identity_dims;  ///< one per transform
    std::vector<Real> params;        ///< all conditioner weights, flat

    int conditioner_input_dim() const { return 1 + config.context_dim; }
    int conditioner_output_dim() const {
        return (config.theta_dim - 1) * spline_param_count(config.n_bins);
    }
    std::size_t params_per_transform() const;
    std::size_t param_count() const { return params_per_transform() * config.n_transforms; }
};

struct TrainConfig {
    int max_epochs = 50;
    int batch_size = 1024;
    Real learning_rate = 1e-3;
    int patience = 10;
    uint64_t seed = 0;

    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    Real train_nll = 0.0;
    Real val_nll = 0.0;
};

struct TrainResult {
    FlowModel model;
    std::vector<EpochStats> history;
    int best_epoch = 0;
    Real best_val_nll = 0.0;
};

/// Fresh model with seeded hidden-layer weights, zero output layers, and
/// identity standardization.
FlowModel make_flow_model(const FlowConfig& cfg, uint64_t seed);

/// log q(theta_std | ctx_std) in standardized space: the base-distribution
/// log-density of the normalizing pass plus the accumulated log-determinants.
Real flow_log_prob(const FlowModel& model, const std::array<Real, 3>& theta_std, Real ctx_std);

/// Samples in original theta units for a raw conditioner value h > 0.
std::vector<TerrainParams> flow_sample(const FlowModel& model, Real h, std::size_t n,
                                       uint64_t seed);

/// Standardized-space sampling used by diagnostics.
std::array<Real, 3> sample_std(const FlowModel& model, Real ctx_std, Rng& rng);

/// Normalizing pass theta_std -> base variable z with the accumulated
/// log |det dz/dtheta|.
struct BaseMap {
    std::array<Real, 3> z;
    Real log_det = 0.0;
};
BaseMap to_base(const FlowModel& model, const std::array<Real, 3>& theta_std, Real ctx_std);

/// Generative pass z -> theta_std (exact inverse of to_base).
std::array<Real, 3> from_base(const FlowModel& model, const std::array<Real, 3>& z, Real ctx_std);

Real standardize_context(const FlowModel& model, Real h);

/// Mean negative log-likelihood of (theta, h) pairs under the model,
/// standardized internally with the model's constants.
Real flow_nll(const FlowModel& model, const std::vector<TrainSample>& data);

/// NLL plus its gradient with respect to every conditioner parameter.
Real flow_nll_grad(const FlowModel& model, const std::vector<TrainSample>& data,
                   std::vector<Real>& grad);

/// Adam-trained flow: minimizes mean NLL over shuffled mini-batches, tracks
/// per-epoch train/val losses, stops early on stalled validation loss, and
/// returns the parameter snapshot with the lowest validation NLL.
TrainResult train_flow(const std::vector<TrainSample>& train,
                       const std::vector<TrainSample>& val, const FlowConfig& flow_cfg,
                       const TrainConfig& train_cfg);

/// Model file pair: JSON manifest plus little-endian binary of the flat
/// parameter vector in transform order (W1 row-major, b1, [hidden...], W_out
/// row-major, b_out per transform).
void save_flow(const FlowModel& model, const std::string& json_path,
               const std::string& bin_path);
FlowModel load_flow(const std::string& json_path);

}  // namespace rsnpe::flow
