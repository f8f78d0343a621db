#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsnpe/pipeline.hpp"

using namespace rsnpe;

namespace {

void print_summary(const inference::PosteriorResult& r) {
    std::printf("eps_ref = %-6.4g  h = %.6e%s\n", r.eps_ref_used, r.h_used,
                r.extrapolation ? "  [extrapolation]" : "");
    const char* names[3] = {"eps  ", "sigma", "slope"};
    for (int d = 0; d < 3; ++d) {
        const auto& s = r.summary[d];
        std::printf("  %s mean %9.4f  std %8.4f  q05 %9.4f  q50 %9.4f  q95 %9.4f\n", names[d],
                    s.mean, s.stddev, s.q05, s.q50, s.q95);
    }
    std::printf("  corr(eps,sigma) = %+.3f  corr(eps,slope) = %+.3f  corr(sigma,slope) = %+.3f\n",
                r.correlation[0][1], r.correlation[0][2], r.correlation[1][2]);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Terrain parameter inference from radar-sounder peak powers"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    std::optional<std::string> out_dir;
    app.add_option("--config", config_path, "JSON config file (defaults apply where absent)");
    app.add_option("--out", out_dir, "output directory (overrides config and $RSNPE_OUT)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "run one forward simulation");
    double eps = 4.0, sigma = 0.0, slope = 0.0;
    uint64_t sim_seed = 0;
    bool no_noise = false, dump_mesh = false;
    sim->add_option("--eps", eps, "dielectric constant");
    sim->add_option("--sigma-m", sigma, "RMS height, meters");
    sim->add_option("--slope", slope, "RMS slope");
    sim->add_option("--seed", sim_seed, "simulation seed");
    sim->add_flag("--no-noise", no_noise, "disable galactic noise");
    sim->add_flag("--dump-mesh", dump_mesh, "also dump the synthesized surface mesh");

    // generate
    auto* gen = app.add_subcommand("generate", "sample priors and build the datasets");
    std::optional<std::size_t> n_primary, n_reference, n_train, n_val;
    std::optional<uint64_t> gen_seed;
    gen->add_option("--n-primary", n_primary, "primary dataset size");
    gen->add_option("--n-reference", n_reference, "reference dataset size");
    gen->add_option("--n-train", n_train, "training pairs");
    gen->add_option("--n-val", n_val, "validation pairs");
    gen->add_option("--seed", gen_seed, "dataset seed");

    // train
    auto* train = app.add_subcommand("train", "train the posterior estimator");
    std::optional<int> max_epochs, batch_size, patience;
    std::optional<double> lr;
    std::optional<uint64_t> train_seed;
    train->add_option("--max-epochs", max_epochs, "epoch cap");
    train->add_option("--batch-size", batch_size, "mini-batch size");
    train->add_option("--lr", lr, "learning rate");
    train->add_option("--patience", patience, "early-stopping patience, epochs");
    train->add_option("--seed", train_seed, "training seed");

    // validate
    auto* val = app.add_subcommand("validate", "rank-based calibration diagnostics");
    std::optional<std::size_t> n_sbc;
    std::optional<int> sbc_L;
    std::optional<uint64_t> val_seed;
    val->add_option("--n-sbc", n_sbc, "held-out test points");
    val->add_option("--L", sbc_L, "posterior samples per test point");
    val->add_option("--seed", val_seed, "validation seed");

    // infer
    auto* inf = app.add_subcommand("infer", "amortized posterior inference");
    double p_obs_db = 0.0, p_ref_db = 0.0, r_km = 300.0, r_ref_km = 300.0;
    std::vector<double> eps_ref;
    std::optional<std::size_t> n_samples;
    std::optional<uint64_t> inf_seed;
    std::optional<int> alt_exp;
    inf->add_option("--p-obs-db", p_obs_db, "observed peak power, dB")->required();
    inf->add_option("--p-ref-db", p_ref_db, "reference peak power, dB")->required();
    inf->add_option("--r-km", r_km, "observation altitude, km");
    inf->add_option("--r-ref-km", r_ref_km, "reference acquisition altitude, km");
    inf->add_option("--eps-ref", eps_ref, "assumed reference permittivity (repeat to sweep)")
        ->required();
    inf->add_option("--n-samples", n_samples, "posterior samples per inference");
    inf->add_option("--seed", inf_seed, "sampling seed");
    inf->add_option("--altitude-exponent", alt_exp, "+1 multiplies by r/r_ref, -1 divides");

    // plot
    auto* plot_cmd =
        app.add_subcommand("plot", "render posterior corner plots and rank histograms");

    CLI11_PARSE(app, argc, argv);

    try {
        pipeline::RunConfig cfg = pipeline::load_run_config(config_path);
        if (out_dir.has_value()) cfg.output_dir = *out_dir;

        if (sim->parsed()) {
            if (no_noise) cfg.radar.noise_enabled = false;
            const auto outcome = pipeline::cmd_simulate(
                cfg, simulator::TerrainParams{eps, sigma, slope}, sim_seed, dump_mesh);
            std::printf("peak power: %.4f dB\n", outcome.peak_db);
            std::printf("rangeline: %s.bin\n", outcome.rangeline_base.c_str());
        } else if (gen->parsed()) {
            if (n_primary) cfg.n_primary = *n_primary;
            if (n_reference) cfg.n_reference = *n_reference;
            if (n_train) cfg.n_train_pairs = *n_train;
            if (n_val) cfg.n_val_pairs = *n_val;
            if (gen_seed) cfg.datagen_seed = *gen_seed;
            pipeline::cmd_generate(cfg);
            std::printf("datasets written to %s\n", cfg.output_dir.c_str());
        } else if (train->parsed()) {
            if (max_epochs) cfg.train_cfg.max_epochs = *max_epochs;
            if (batch_size) cfg.train_cfg.batch_size = *batch_size;
            if (lr) cfg.train_cfg.learning_rate = *lr;
            if (patience) cfg.train_cfg.patience = *patience;
            if (train_seed) cfg.train_cfg.seed = *train_seed;
            const auto outcome = pipeline::cmd_train(cfg);
            std::printf("best epoch %d  val NLL %.5f  (%zu epochs run)\n",
                        outcome.result.best_epoch, outcome.result.best_val_nll,
                        outcome.result.history.size());
            std::printf("model: %s\n", outcome.model_json.c_str());
        } else if (val->parsed()) {
            if (n_sbc) cfg.n_sbc_points = *n_sbc;
            if (sbc_L) cfg.sbc_posterior_samples = *sbc_L;
            if (val_seed) cfg.validate_seed = *val_seed;
            const auto report = pipeline::cmd_validate(cfg);
            const char* names[3] = {"eps", "sigma", "slope"};
            for (int d = 0; d < 3; ++d) {
                std::printf("%-6s KS p = %.4f  C2ST(rank) = %.3f  C2ST(dap) = %.3f\n", names[d],
                            report.ks_p[d], report.c2st_rank[d], report.c2st_dap[d]);
            }
        } else if (inf->parsed()) {
            if (n_samples) cfg.infer_samples = *n_samples;
            if (inf_seed) cfg.infer_seed = *inf_seed;
            if (alt_exp) cfg.altitude_exponent = *alt_exp;
            inference::Observation obs;
            obs.p_obs_db = p_obs_db;
            obs.p_ref_obs_db = p_ref_db;
            obs.r_obs_km = r_km;
            obs.r_ref_obs_km = r_ref_km;
            obs.eps_ref_assumed = eps_ref.front();
            const std::vector<Real> sweep(eps_ref.begin(), eps_ref.end());
            const auto outcome = pipeline::cmd_infer(cfg, obs, sweep);
            for (const auto& r : outcome.results) print_summary(r);
            if (outcome.warnings_exceeded) {
                std::cerr << "error: posterior support violations exceeded the configured "
                             "threshold\n";
                return 3;
            }
        } else if (plot_cmd->parsed()) {
            pipeline::cmd_plot(cfg);
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
