#include "rsnpe/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace rsnpe::flow {

namespace {

constexpr Real kLog2Pi = 1.8378770664093453;

struct Shape {
    int in, hidden, n_hidden, out;
    std::size_t w1, b1, wh, bh, wo, bo;  // per-layer sizes

    explicit Shape(const FlowConfig& cfg)
        : in(1 + cfg.context_dim),
          hidden(cfg.hidden_units),
          n_hidden(cfg.hidden_layers),
          out((cfg.theta_dim - 1) * spline_param_count(cfg.n_bins)) {
        w1 = static_cast<std::size_t>(hidden) * in;
        b1 = hidden;
        wh = static_cast<std::size_t>(hidden) * hidden;
        bh = hidden;
        wo = static_cast<std::size_t>(out) * hidden;
        bo = out;
    }

    std::size_t per_transform() const {
        return w1 + b1 + (static_cast<std::size_t>(n_hidden - 1)) * (wh + bh) + wo + bo;
    }
};

void conditioner_forward(const FlowModel& model, int transform, const Real* input,
                         std::vector<std::vector<Real>>& pre, std::vector<Real>& raw_out) {
    const Shape sh(model.config);
    const Real* p = model.params.data() + model.params_per_transform() * transform;

    pre.assign(sh.n_hidden, std::vector<Real>(sh.hidden, 0.0));
    std::vector<Real> act(sh.hidden);

    // first hidden layer
    for (int u = 0; u < sh.hidden; ++u) {
        Real a = p[sh.w1 + u];  // bias after weights
        const Real* row = p + static_cast<std::size_t>(u) * sh.in;
        for (int i = 0; i < sh.in; ++i) a += row[i] * input[i];
        pre[0][u] = a;
        act[u] = a > 0.0 ? a : 0.0;
    }
    std::size_t off = sh.w1 + sh.b1;
    for (int layer = 1; layer < sh.n_hidden; ++layer) {
        std::vector<Real> next(sh.hidden);
        for (int u = 0; u < sh.hidden; ++u) {
            Real a = p[off + sh.wh + u];
            const Real* row = p + off + static_cast<std::size_t>(u) * sh.hidden;
            for (int i = 0; i < sh.hidden; ++i) a += row[i] * act[i];
            pre[layer][u] = a;
            next[u] = a > 0.0 ? a : 0.0;
        }
        act.swap(next);
        off += sh.wh + sh.bh;
    }
    raw_out.resize(sh.out);
    for (int o = 0; o < sh.out; ++o) {
        Real a = p[off + sh.wo + o];
        const Real* row = p + off + static_cast<std::size_t>(o) * sh.hidden;
        for (int i = 0; i < sh.hidden; ++i) a += row[i] * act[i];
        raw_out[o] = a;
    }
}

/// Backward through the conditioner; returns d(loss)/d(input[0]) (the
/// identity-dimension input; context gradients are discarded).
Real conditioner_backward(const FlowModel& model, int transform, const Real* input,
                          const std::vector<std::vector<Real>>& pre,
                          const std::vector<Real>& g_out, Real* grad) {
    const Shape sh(model.config);
    const std::size_t base = model.params_per_transform() * transform;
    const Real* p = model.params.data() + base;
    Real* g = grad + base;

    // Recreate post-activations from the stored pre-activations.
    std::vector<std::vector<Real>> act(sh.n_hidden, std::vector<Real>(sh.hidden));
    for (int layer = 0; layer < sh.n_hidden; ++layer) {
        for (int u = 0; u < sh.hidden; ++u) {
            act[layer][u] = pre[layer][u] > 0.0 ? pre[layer][u] : 0.0;
        }
    }

    std::size_t off_out = sh.w1 + sh.b1 + static_cast<std::size_t>(sh.n_hidden - 1) * (sh.wh + sh.bh);
    std::vector<Real> g_act(sh.hidden, 0.0);
    for (int o = 0; o < sh.out; ++o) {
        const Real go = g_out[o];
        if (go == 0.0) continue;
        Real* wrow = g + off_out + static_cast<std::size_t>(o) * sh.hidden;
        const Real* prow = p + off_out + static_cast<std::size_t>(o) * sh.hidden;
        const auto& last = act[sh.n_hidden - 1];
        for (int i = 0; i < sh.hidden; ++i) {
            wrow[i] += go * last[i];
            g_act[i] += go * prow[i];
        }
        g[off_out + sh.wo + o] += go;
    }

    for (int layer = sh.n_hidden - 1; layer >= 1; --layer) {
        const std::size_t off = sh.w1 + sh.b1 + static_cast<std::size_t>(layer - 1) * (sh.wh + sh.bh);
        std::vector<Real> g_prev(sh.hidden, 0.0);
        for (int u = 0; u < sh.hidden; ++u) {
            const Real ga = pre[layer][u] > 0.0 ? g_act[u] : 0.0;
            if (ga == 0.0) continue;
            Real* wrow = g + off + static_cast<std::size_t>(u) * sh.hidden;
            const Real* prow = p + off + static_cast<std::size_t>(u) * sh.hidden;
            const auto& below = act[layer - 1];
            for (int i = 0; i < sh.hidden; ++i) {
                wrow[i] += ga * below[i];
                g_prev[i] += ga * prow[i];
            }
            g[off + sh.wh + u] += ga;
        }
        g_act.swap(g_prev);
    }

    Real g_input0 = 0.0;
    for (int u = 0; u < sh.hidden; ++u) {
        const Real ga = pre[0][u] > 0.0 ? g_act[u] : 0.0;
        if (ga == 0.0) continue;
        Real* wrow = g + static_cast<std::size_t>(u) * sh.in;
        const Real* prow = p + static_cast<std::size_t>(u) * sh.in;
        for (int i = 0; i < sh.in; ++i) wrow[i] += ga * input[i];
        g[sh.w1 + u] += ga;
        g_input0 += ga * prow[0];
    }
    return g_input0;
}

std::vector<int> transformed_dims(const FlowModel& model, int transform) {
    std::vector<int> dims;
    for (int d = 0; d < model.config.theta_dim; ++d) {
        if (d != model.identity_dims[transform]) dims.push_back(d);
    }
    return dims;
}

}  // namespace

void FlowConfig::validate() const {
    if (n_transforms < 1) throw ConfigError("flow.n_transforms: must be >= 1");
    if (hidden_units < 1) throw ConfigError("flow.hidden_units: must be >= 1");
    if (hidden_layers < 1) throw ConfigError("flow.hidden_layers: must be >= 1");
    if (n_bins < 2) throw ConfigError("flow.n_bins: must be >= 2");
    if (!(tail_bound > 0.0)) throw ConfigError("flow.tail_bound: must be > 0");
    if (context_dim < 1) throw ConfigError("flow.context_dim: must be >= 1");
    if (theta_dim != 3) throw ConfigError("flow.theta_dim: this estimator is three-dimensional");
}

void TrainConfig::validate() const {
    if (max_epochs < 1) throw ConfigError("train.max_epochs: must be >= 1");
    if (batch_size < 1) throw ConfigError("train.batch_size: must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate: must be > 0");
    if (patience < 1) throw ConfigError("train.patience: must be >= 1");
}

std::size_t FlowModel::params_per_transform() const { return Shape(config).per_transform(); }

FlowModel make_flow_model(const FlowConfig& cfg, uint64_t seed) {
    cfg.validate();
    FlowModel model;
    model.config = cfg;
    model.identity_dims.resize(cfg.n_transforms);
    for (int t = 0; t < cfg.n_transforms; ++t) model.identity_dims[t] = t % cfg.theta_dim;

    const Shape sh(cfg);
    model.params.assign(model.param_count(), 0.0);
    Rng rng(derive_seed(seed, 0xf10fULL));
    for (int t = 0; t < cfg.n_transforms; ++t) {
        Real* p = model.params.data() + model.params_per_transform() * t;
        const Real bound1 = std::sqrt(6.0 / (sh.in + sh.hidden));
        for (std::size_t i = 0; i < sh.w1; ++i) p[i] = rng.uniform(-bound1, bound1);
        std::size_t off = sh.w1 + sh.b1;
        const Real boundh = std::sqrt(6.0 / (2.0 * sh.hidden));
        for (int layer = 1; layer < sh.n_hidden; ++layer) {
            for (std::size_t i = 0; i < sh.wh; ++i) p[off + i] = rng.uniform(-boundh, boundh);
            off += sh.wh + sh.bh;
        }
        // Output layer stays zero: every transform starts as the identity.
    }
    return model;
}

Real standardize_context(const FlowModel& model, Real h) {
    if (!(h > 0.0)) throw std::domain_error("flow: conditioner h must be > 0 to take log(h)");
    return (std::log(h) - model.norm.ctx_mean) / model.norm.ctx_std;
}

BaseMap to_base(const FlowModel& model, const std::array<Real, 3>& theta_std, Real ctx_std) {
    const int n_bins = model.config.n_bins;
    const Real bound = model.config.tail_bound;
    BaseMap out;
    out.z = theta_std;
    std::vector<std::vector<Real>> pre;
    std::vector<Real> raw;
    std::vector<Real> input(1 + model.config.context_dim);
    const int count = spline_param_count(n_bins);

    for (int t = 0; t < model.config.n_transforms; ++t) {
        const int id = model.identity_dims[t];
        input[0] = out.z[id];
        for (int c = 0; c < model.config.context_dim; ++c) input[1 + c] = ctx_std;
        try {
            conditioner_forward(model, t, input.data(), pre, raw);
            const auto dims = transformed_dims(model, t);
            for (std::size_t j = 0; j < dims.size(); ++j) {
                const SplineParams p = decode_spline(raw.data() + j * count, n_bins, bound);
                const SplineEval e = rqs_forward_scalar(out.z[dims[j]], p);
                out.z[dims[j]] = e.y;
                out.log_det += e.log_det;
            }
        } catch (const std::exception& ex) {
            throw std::runtime_error("flow: transform " + std::to_string(t) + ": " + ex.what());
        }
        for (int d = 0; d < 3; ++d) {
            if (!std::isfinite(out.z[d])) {
                throw std::runtime_error("flow: non-finite value after transform " +
                                         std::to_string(t));
            }
        }
    }
    return out;
}

std::array<Real, 3> from_base(const FlowModel& model, const std::array<Real, 3>& z,
                              Real ctx_std) {
    const int n_bins = model.config.n_bins;
    const Real bound = model.config.tail_bound;
    const int count = spline_param_count(n_bins);
    std::array<Real, 3> x = z;
    std::vector<std::vector<Real>> pre;
    std::vector<Real> raw;
    std::vector<Real> input(1 + model.config.context_dim);
    for (int t = model.config.n_transforms - 1; t >= 0; --t) {
        const int id = model.identity_dims[t];
        input[0] = x[id];
        for (int c = 0; c < model.config.context_dim; ++c) input[1 + c] = ctx_std;
        conditioner_forward(model, t, input.data(), pre, raw);
        const auto dims = transformed_dims(model, t);
        for (std::size_t j = 0; j < dims.size(); ++j) {
            const SplineParams p = decode_spline(raw.data() + j * count, n_bins, bound);
            x[dims[j]] = rqs_inverse_scalar(x[dims[j]], p).y;
        }
    }
    return x;
}

Real flow_log_prob(const FlowModel& model, const std::array<Real, 3>& theta_std, Real ctx_std) {
    const BaseMap m = to_base(model, theta_std, ctx_std);
    Real base = -1.5 * kLog2Pi;
    for (int d = 0; d < 3; ++d) base -= 0.5 * m.z[d] * m.z[d];
    return base + m.log_det;
}

std::array<Real, 3> sample_std(const FlowModel& model, Real ctx_std, Rng& rng) {
    // Generative direction: draw from the base and invert the transforms in
    // reverse order. The identity dimension is untouched by its own transform,
    // so the conditioner sees the same value on either side.
    const std::array<Real, 3> z{rng.normal(), rng.normal(), rng.normal()};
    return from_base(model, z, ctx_std);
}

std::vector<TerrainParams> flow_sample(const FlowModel& model, Real h, std::size_t n,
                                       uint64_t seed) {
    if (n < 1) throw std::invalid_argument("flow_sample: n must be >= 1");
    const Real ctx = standardize_context(model, h);
    std::vector<TerrainParams> out(n);
    Rng rng(derive_seed(seed, 0x5a3dULL));
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = sample_std(model, ctx, rng);
        out[i].eps = model.norm.theta_mean[0] + model.norm.theta_std[0] * x[0];
        out[i].sigma = model.norm.theta_mean[1] + model.norm.theta_std[1] * x[1];
        out[i].slope = model.norm.theta_mean[2] + model.norm.theta_std[2] * x[2];
    }
    return out;
}

namespace {

struct StdData {
    std::vector<std::array<Real, 3>> theta;
    std::vector<Real> ctx;
};

StdData standardize(const FlowModel& model, const std::vector<TrainSample>& data) {
    StdData out;
    out.theta.resize(data.size());
    out.ctx.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        out.theta[i] = {
            (data[i].theta.eps - model.norm.theta_mean[0]) / model.norm.theta_std[0],
            (data[i].theta.sigma - model.norm.theta_mean[1]) / model.norm.theta_std[1],
            (data[i].theta.slope - model.norm.theta_mean[2]) / model.norm.theta_std[2]};
        out.ctx[i] = standardize_context(model, data[i].h);
    }
    return out;
}

/// Sum of log q over the index range plus, if grad != nullptr, the gradient
/// of that sum accumulated into *grad.
Real log_prob_sum_range(const FlowModel& model, const StdData& data, std::size_t begin,
                        std::size_t end, std::vector<Real>* grad) {
    const int n_bins = model.config.n_bins;
    const Real bound = model.config.tail_bound;
    const int count = spline_param_count(n_bins);
    const int T = model.config.n_transforms;
    const int ctx_dim = model.config.context_dim;

    Real total = 0.0;
    std::vector<std::vector<Real>> pre;
    std::vector<Real> raw;
    std::vector<Real> input(1 + ctx_dim);
    std::vector<std::array<Real, 3>> x_pre(T);
    std::vector<Real> g_raw;

    for (std::size_t i = begin; i < end; ++i) {
        std::array<Real, 3> x = data.theta[i];
        const Real ctx = data.ctx[i];
        Real log_det = 0.0;
        for (int t = 0; t < T; ++t) {
            x_pre[t] = x;
            const int id = model.identity_dims[t];
            input[0] = x[id];
            for (int c = 0; c < ctx_dim; ++c) input[1 + c] = ctx;
            conditioner_forward(model, t, input.data(), pre, raw);
            const auto dims = transformed_dims(model, t);
            for (std::size_t j = 0; j < dims.size(); ++j) {
                const SplineParams p =
                    decode_spline(raw.data() + j * count, n_bins, bound);
                const SplineEval e = rqs_forward_scalar(x[dims[j]], p);
                x[dims[j]] = e.y;
                log_det += e.log_det;
            }
        }
        Real lp = -1.5 * kLog2Pi + log_det;
        for (int d = 0; d < 3; ++d) lp -= 0.5 * x[d] * x[d];
        if (!std::isfinite(lp)) {
            throw std::runtime_error("flow: non-finite log-probability at sample " +
                                     std::to_string(i));
        }
        total += lp;

        if (grad == nullptr) continue;

        // Reverse pass: d(log q)/dz = -z, every transform's log_det enters
        // with weight +1.
        std::array<Real, 3> gx{-x[0], -x[1], -x[2]};
        for (int t = T - 1; t >= 0; --t) {
            const int id = model.identity_dims[t];
            input[0] = x_pre[t][id];
            for (int c = 0; c < ctx_dim; ++c) input[1 + c] = ctx;
            conditioner_forward(model, t, input.data(), pre, raw);
            const auto dims = transformed_dims(model, t);
            g_raw.assign(raw.size(), 0.0);
            for (std::size_t j = 0; j < dims.size(); ++j) {
                const SplineParams p =
                    decode_spline(raw.data() + j * count, n_bins, bound);
                gx[dims[j]] = rqs_forward_backward(x_pre[t][dims[j]], p, gx[dims[j]], 1.0,
                                                   g_raw.data() + j * count);
            }
            gx[id] += conditioner_backward(model, t, input.data(), pre, g_raw, grad->data());
        }
    }
    return total;
}

Real nll_impl(const FlowModel& model, const StdData& data, std::vector<Real>* grad) {
    const std::size_t n = data.theta.size();
    if (n == 0) throw std::invalid_argument("flow: empty data");
    const std::size_t chunk = 256;
    const std::size_t nchunks = num_chunks(n, chunk);
    std::vector<Real> partial(nchunks, 0.0);
    std::vector<std::vector<Real>> partial_grads;
    if (grad != nullptr) partial_grads.assign(nchunks, {});

    parallel_chunks(n, chunk, [&](std::size_t b, std::size_t e, std::size_t c) {
        std::vector<Real>* g = nullptr;
        if (grad != nullptr) {
            partial_grads[c].assign(model.param_count(), 0.0);
            g = &partial_grads[c];
        }
        partial[c] = log_prob_sum_range(model, data, b, e, g);
    });

    Real total = 0.0;
    for (std::size_t c = 0; c < nchunks; ++c) total += partial[c];
    if (grad != nullptr) {
        grad->assign(model.param_count(), 0.0);
        for (std::size_t c = 0; c < nchunks; ++c) {
            const auto& pg = partial_grads[c];
            for (std::size_t i = 0; i < pg.size(); ++i) (*grad)[i] += pg[i];
        }
        const Real inv = -1.0 / static_cast<Real>(n);
        for (auto& g : *grad) g *= inv;
    }
    return -total / static_cast<Real>(n);
}

}  // namespace

Real flow_nll(const FlowModel& model, const std::vector<TrainSample>& data) {
    const StdData std_data = standardize(model, data);
    return nll_impl(model, std_data, nullptr);
}

Real flow_nll_grad(const FlowModel& model, const std::vector<TrainSample>& data,
                   std::vector<Real>& grad) {
    const StdData std_data = standardize(model, data);
    return nll_impl(model, std_data, &grad);
}

TrainResult train_flow(const std::vector<TrainSample>& train,
                       const std::vector<TrainSample>& val, const FlowConfig& flow_cfg,
                       const TrainConfig& train_cfg) {
    flow_cfg.validate();
    train_cfg.validate();
    if (train.empty() || val.empty()) {
        throw std::invalid_argument("train_flow: train and validation splits must be nonempty");
    }

    FlowModel model = make_flow_model(flow_cfg, derive_seed(train_cfg.seed, 0x111dULL));

    // Featurization constants from the training split only.
    std::array<Real, 3> mean{0.0, 0.0, 0.0}, sq{0.0, 0.0, 0.0};
    Real cmean = 0.0, csq = 0.0;
    for (const auto& s : train) {
        if (!(s.h > 0.0)) {
            throw std::invalid_argument("train_flow: every h must be > 0 to take log(h)");
        }
        const std::array<Real, 3> v{s.theta.eps, s.theta.sigma, s.theta.slope};
        for (int d = 0; d < 3; ++d) {
            mean[d] += v[d];
            sq[d] += v[d] * v[d];
        }
        const Real lh = std::log(s.h);
        cmean += lh;
        csq += lh * lh;
    }
    const Real n = static_cast<Real>(train.size());
    for (int d = 0; d < 3; ++d) {
        mean[d] /= n;
        const Real var = std::max(sq[d] / n - mean[d] * mean[d], 0.0);
        model.norm.theta_mean[d] = mean[d];
        model.norm.theta_std[d] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    cmean /= n;
    const Real cvar = std::max(csq / n - cmean * cmean, 0.0);
    model.norm.ctx_mean = cmean;
    model.norm.ctx_std = cvar > 1e-24 ? std::sqrt(cvar) : 1.0;

    const StdData train_std = standardize(model, train);
    const StdData val_std = standardize(model, val);

    // Adam state.
    const std::size_t np = model.param_count();
    std::vector<Real> m(np, 0.0), v(np, 0.0), grad(np, 0.0);
    const Real beta1 = 0.9, beta2 = 0.999, eps_adam = 1e-8;
    std::size_t step = 0;

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    std::vector<Real> best_params = model.params;
    Real best_val = std::numeric_limits<Real>::infinity();
    int best_epoch = -1;
    int stall = 0;

    StdData batch;
    for (int epoch = 0; epoch < train_cfg.max_epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(train_cfg.seed, 0xe000ULL + static_cast<uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = shuffle_rng.below(i);
            std::swap(order[i - 1], order[j]);
        }

        Real epoch_loss = 0.0;
        std::size_t seen = 0;
        const std::size_t bs = static_cast<std::size_t>(train_cfg.batch_size);
        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t stop = std::min(order.size(), start + bs);
            batch.theta.resize(stop - start);
            batch.ctx.resize(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                batch.theta[i - start] = train_std.theta[order[i]];
                batch.ctx[i - start] = train_std.ctx[order[i]];
            }
            Real loss;
            try {
                loss = nll_impl(model, batch, &grad);
            } catch (const std::exception& ex) {
                throw std::runtime_error("train_flow: epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(start / bs) + ": " +
                                         ex.what());
            }
            if (!std::isfinite(loss)) {
                throw std::runtime_error("train_flow: NaN loss at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(start / bs));
            }
            epoch_loss += loss * static_cast<Real>(stop - start);
            seen += stop - start;

            ++step;
            const Real bc1 = 1.0 - std::pow(beta1, static_cast<Real>(step));
            const Real bc2 = 1.0 - std::pow(beta2, static_cast<Real>(step));
            for (std::size_t i = 0; i < np; ++i) {
                m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
                model.params[i] -=
                    train_cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps_adam);
            }
        }

        const Real val_nll = nll_impl(model, val_std, nullptr);
        result.history.push_back(
            EpochStats{epoch, epoch_loss / static_cast<Real>(seen), val_nll});

        if (val_nll < best_val) {
            best_val = val_nll;
            best_params = model.params;
            best_epoch = epoch;
            stall = 0;
        } else {
            ++stall;
            if (stall >= train_cfg.patience) break;
        }
    }

    model.params = std::move(best_params);
    result.model = std::move(model);
    result.best_epoch = best_epoch;
    result.best_val_nll = best_val;
    return result;
}

void save_flow(const FlowModel& model, const std::string& json_path,
               const std::string& bin_path) {
    {
        std::ofstream bin(bin_path, std::ios::binary);
        if (!bin) throw std::runtime_error("save_flow: cannot open " + bin_path);
        bin.write(reinterpret_cast<const char*>(model.params.data()),
                  static_cast<std::streamsize>(model.params.size() * sizeof(Real)));
    }
    nlohmann::json j;
    j["format_version"] = 1;
    j["config"] = {{"n_transforms", model.config.n_transforms},
                   {"hidden_units", model.config.hidden_units},
                   {"hidden_layers", model.config.hidden_layers},
                   {"n_bins", model.config.n_bins},
                   {"tail_bound", model.config.tail_bound},
                   {"context_dim", model.config.context_dim},
                   {"theta_dim", model.config.theta_dim}};
    j["standardization"] = {{"theta_mean", model.norm.theta_mean},
                            {"theta_std", model.norm.theta_std},
                            {"ctx_mean", model.norm.ctx_mean},
                            {"ctx_std", model.norm.ctx_std}};
    j["identity_dims"] = model.identity_dims;
    j["param_count"] = model.params.size();
    j["weights_file"] = bin_path;
    j["weight_layout"] =
        "per transform: W1 (hidden x input, row-major), b1, then for each extra hidden layer "
        "Wh (hidden x hidden, row-major), bh, then W_out (output x hidden, row-major), b_out; "
        "little-endian float64";
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("save_flow: cannot open " + json_path);
    out << j.dump(2) << "\n";
}

FlowModel load_flow(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("load_flow: cannot open " + json_path);
    nlohmann::json j;
    in >> j;

    FlowModel model;
    const auto& c = j.at("config");
    model.config.n_transforms = c.at("n_transforms").get<int>();
    model.config.hidden_units = c.at("hidden_units").get<int>();
    model.config.hidden_layers = c.at("hidden_layers").get<int>();
    model.config.n_bins = c.at("n_bins").get<int>();
    model.config.tail_bound = c.at("tail_bound").get<Real>();
    model.config.context_dim = c.at("context_dim").get<int>();
    model.config.theta_dim = c.at("theta_dim").get<int>();
    model.config.validate();

    const auto& s = j.at("standardization");
    model.norm.theta_mean = s.at("theta_mean").get<std::array<Real, 3>>();
    model.norm.theta_std = s.at("theta_std").get<std::array<Real, 3>>();
    model.norm.ctx_mean = s.at("ctx_mean").get<Real>();
    model.norm.ctx_std = s.at("ctx_std").get<Real>();

    model.identity_dims = j.at("identity_dims").get<std::vector<int>>();
    if (model.identity_dims.size() != static_cast<std::size_t>(model.config.n_transforms)) {
        throw std::runtime_error("load_flow: identity_dims length mismatch");
    }

    const auto expected = j.at("param_count").get<std::size_t>();
    if (expected != model.param_count()) {
        throw std::runtime_error("load_flow: parameter count mismatch");
    }
    std::string bin_path = j.at("weights_file").get<std::string>();
    if (!std::filesystem::exists(bin_path)) {
        // Fall back to a weights file sitting next to the manifest.
        const auto sibling = std::filesystem::path(json_path).parent_path() /
                             std::filesystem::path(bin_path).filename();
        if (std::filesystem::exists(sibling)) bin_path = sibling.string();
    }
    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw std::runtime_error("load_flow: cannot open " + bin_path);
    model.params.resize(expected);
    bin.read(reinterpret_cast<char*>(model.params.data()),
             static_cast<std::streamsize>(expected * sizeof(Real)));
    if (static_cast<std::size_t>(bin.gcount()) != expected * sizeof(Real)) {
        throw std::runtime_error("load_flow: truncated weights file " + bin_path);
    }
    return model;
}

}  // namespace rsnpe::flow
