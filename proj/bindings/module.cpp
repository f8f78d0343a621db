#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rsnpe/calibration.hpp"
#include "rsnpe/datagen.hpp"
#include "rsnpe/flow.hpp"
#include "rsnpe/inference.hpp"
#include "rsnpe/physics.hpp"
#include "rsnpe/simulator.hpp"
#include "rsnpe/surface.hpp"

namespace py = pybind11;
using namespace rsnpe;

namespace {

py::array_t<double> mesh_to_array(const surface::SurfaceMesh& mesh) {
    py::array_t<double> arr({mesh.n, mesh.n});
    std::memcpy(arr.mutable_data(), mesh.heights.data(), mesh.heights.size() * sizeof(double));
    return arr;
}

py::array_t<std::complex<double>> rangeline_to_array(const simulator::Rangeline& line) {
    py::array_t<std::complex<double>> arr(static_cast<py::ssize_t>(line.samples.size()));
    std::memcpy(arr.mutable_data(), line.samples.data(),
                line.samples.size() * sizeof(std::complex<double>));
    return arr;
}

py::array_t<double> samples_to_array(const std::vector<simulator::TerrainParams>& samples) {
    py::array_t<double> arr({static_cast<py::ssize_t>(samples.size()), py::ssize_t(3)});
    auto view = arr.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < view.shape(0); ++i) {
        view(i, 0) = samples[i].eps;
        view(i, 1) = samples[i].sigma;
        view(i, 2) = samples[i].slope;
    }
    return arr;
}

std::vector<datagen::TrainSample> pairs_from_arrays(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& theta,
    const py::array_t<double, py::array::c_style | py::array::forcecast>& h) {
    if (theta.ndim() != 2 || theta.shape(1) != 3) {
        throw std::invalid_argument("theta must have shape (n, 3)");
    }
    if (h.ndim() != 1 || h.shape(0) != theta.shape(0)) {
        throw std::invalid_argument("h must have shape (n,)");
    }
    const auto tv = theta.unchecked<2>();
    const auto hv = h.unchecked<1>();
    std::vector<datagen::TrainSample> out(static_cast<std::size_t>(theta.shape(0)));
    for (py::ssize_t i = 0; i < theta.shape(0); ++i) {
        out[i].theta = simulator::TerrainParams{tv(i, 0), tv(i, 1), tv(i, 2)};
        out[i].h = hv(i);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Simulation-based inference of terrain parameters from radar-sounder "
              "peak powers";

    // ------------------------------------------------------------- physics
    m.def("fresnel_power_reflectance", &physics::fresnel_power_reflectance, py::arg("eps"));
    m.def("compute_h", &physics::compute_h, py::arg("p"), py::arg("p_ref"), py::arg("eps_ref"));
    m.def("db_to_linear", &physics::db_to_linear, py::arg("db"));
    m.def("linear_to_db", &physics::linear_to_db, py::arg("linear"));
    m.def("altitude_rescale", &physics::altitude_rescale, py::arg("p_ref"), py::arg("r_ref_km"),
          py::arg("r_km"), py::arg("exponent") = 1);

    // ------------------------------------------------------------- surface
    m.def(
        "synthesize_grf",
        [](double sigma, double slope, double dx, int n, uint64_t seed) {
            surface::SurfaceSpec spec;
            spec.sigma = sigma;
            spec.slope = slope;
            spec.dx = dx;
            spec.n = n;
            spec.seed = seed;
            return mesh_to_array(surface::synthesize_grf(spec));
        },
        py::arg("sigma"), py::arg("slope"), py::arg("dx"), py::arg("n"), py::arg("seed") = 0);
    m.def(
        "estimate_surface_stats",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& heights,
           double dx) {
            if (heights.ndim() != 2 || heights.shape(0) != heights.shape(1)) {
                throw std::invalid_argument("heights must be a square 2-D array");
            }
            surface::SurfaceMesh mesh;
            mesh.n = static_cast<int>(heights.shape(0));
            mesh.dx = dx;
            mesh.heights.assign(heights.data(), heights.data() + heights.size());
            const auto stats = surface::estimate_surface_stats(mesh);
            return py::make_tuple(stats.sigma_hat, stats.slope_hat);
        },
        py::arg("heights"), py::arg("dx"));

    // ----------------------------------------------------------- simulator
    py::class_<simulator::RadarConfig>(m, "RadarConfig")
        .def(py::init<>())
        .def_readwrite("fc_mhz", &simulator::RadarConfig::fc_mhz)
        .def_readwrite("altitude_km", &simulator::RadarConfig::altitude_km)
        .def_readwrite("dx_m", &simulator::RadarConfig::dx_m)
        .def_readwrite("footprint_radius_m", &simulator::RadarConfig::footprint_radius_m)
        .def_readwrite("fs_mhz", &simulator::RadarConfig::fs_mhz)
        .def_readwrite("n_samples", &simulator::RadarConfig::n_samples)
        .def_readwrite("noise_alpha", &simulator::RadarConfig::noise_alpha)
        .def_readwrite("snr_db", &simulator::RadarConfig::snr_db)
        .def_readwrite("tx_amplitude", &simulator::RadarConfig::tx_amplitude)
        .def_readwrite("noise_enabled", &simulator::RadarConfig::noise_enabled)
        .def("wavelength_m", &simulator::RadarConfig::wavelength_m)
        .def("fresnel_radius_m", &simulator::RadarConfig::fresnel_radius_m)
        .def("validate", &simulator::RadarConfig::validate);

    py::class_<simulator::TerrainParams>(m, "TerrainParams")
        .def(py::init<double, double, double>(), py::arg("eps"), py::arg("sigma"),
             py::arg("slope"))
        .def_readwrite("eps", &simulator::TerrainParams::eps)
        .def_readwrite("sigma", &simulator::TerrainParams::sigma)
        .def_readwrite("slope", &simulator::TerrainParams::slope)
        .def("__repr__", [](const simulator::TerrainParams& t) {
            return "TerrainParams(eps=" + std::to_string(t.eps) +
                   ", sigma=" + std::to_string(t.sigma) + ", slope=" + std::to_string(t.slope) +
                   ")";
        });

    m.def(
        "simulate_rangeline",
        [](const simulator::TerrainParams& theta, const simulator::RadarConfig& cfg,
           uint64_t seed) {
            const auto line = simulator::simulate_rangeline(theta, cfg, seed);
            return py::make_tuple(rangeline_to_array(line), line.dt, line.t0);
        },
        py::arg("theta"), py::arg("config"), py::arg("seed") = 0);
    m.def(
        "peak_power",
        [](const simulator::TerrainParams& theta, const simulator::RadarConfig& cfg,
           uint64_t seed) {
            return simulator::peak_power(simulator::simulate_rangeline(theta, cfg, seed));
        },
        py::arg("theta"), py::arg("config"), py::arg("seed") = 0);
    m.def(
        "galactic_noise",
        [](int n_samples, double dt, double alpha, double level, uint64_t seed) {
            const auto noise = simulator::galactic_noise(n_samples, dt, alpha, level, seed);
            py::array_t<std::complex<double>> arr(static_cast<py::ssize_t>(noise.size()));
            std::memcpy(arr.mutable_data(), noise.data(),
                        noise.size() * sizeof(std::complex<double>));
            return arr;
        },
        py::arg("n_samples"), py::arg("dt"), py::arg("alpha") = 2.5, py::arg("level") = 1.0,
        py::arg("seed") = 0);
    m.def("flat_plate_peak_power", &simulator::flat_plate_peak_power, py::arg("config"),
          py::arg("eps"));
    m.def("rangeline_call_count", &simulator::rangeline_call_count);

    // -------------------------------------------------------------- datagen
    py::class_<datagen::PriorSpec>(m, "PriorSpec")
        .def(py::init<>())
        .def_readwrite("eps_lo", &datagen::PriorSpec::eps_lo)
        .def_readwrite("eps_hi", &datagen::PriorSpec::eps_hi)
        .def_readwrite("sigma_lo", &datagen::PriorSpec::sigma_lo)
        .def_readwrite("sigma_hi", &datagen::PriorSpec::sigma_hi)
        .def_readwrite("slope_lo", &datagen::PriorSpec::slope_lo)
        .def_readwrite("slope_hi", &datagen::PriorSpec::slope_hi)
        .def_readwrite("eps_ref_lo", &datagen::PriorSpec::eps_ref_lo)
        .def_readwrite("eps_ref_hi", &datagen::PriorSpec::eps_ref_hi);

    m.def(
        "sample_prior",
        [](std::size_t n, const datagen::PriorSpec& spec, uint64_t seed) {
            return samples_to_array(datagen::sample_prior(n, spec, seed));
        },
        py::arg("n"), py::arg("prior") = datagen::PriorSpec{}, py::arg("seed") = 0);

    // ----------------------------------------------------------------- flow
    py::class_<flow::FlowConfig>(m, "FlowConfig")
        .def(py::init<>())
        .def_readwrite("n_transforms", &flow::FlowConfig::n_transforms)
        .def_readwrite("hidden_units", &flow::FlowConfig::hidden_units)
        .def_readwrite("hidden_layers", &flow::FlowConfig::hidden_layers)
        .def_readwrite("n_bins", &flow::FlowConfig::n_bins)
        .def_readwrite("tail_bound", &flow::FlowConfig::tail_bound);

    py::class_<flow::TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("max_epochs", &flow::TrainConfig::max_epochs)
        .def_readwrite("batch_size", &flow::TrainConfig::batch_size)
        .def_readwrite("learning_rate", &flow::TrainConfig::learning_rate)
        .def_readwrite("patience", &flow::TrainConfig::patience)
        .def_readwrite("seed", &flow::TrainConfig::seed);

    py::class_<flow::FlowModel>(m, "FlowModel")
        .def("log_prob",
             [](const flow::FlowModel& model, double t0, double t1, double t2, double ctx) {
                 return flow::flow_log_prob(model, {t0, t1, t2}, ctx);
             })
        .def(
            "sample",
            [](const flow::FlowModel& model, double h, std::size_t n, uint64_t seed) {
                return samples_to_array(flow::flow_sample(model, h, n, seed));
            },
            py::arg("h"), py::arg("n"), py::arg("seed") = 0)
        .def("save",
             [](const flow::FlowModel& model, const std::string& json_path,
                const std::string& bin_path) { flow::save_flow(model, json_path, bin_path); });

    m.def(
        "train_flow",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& theta_train,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& h_train,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& theta_val,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& h_val,
           const flow::FlowConfig& flow_cfg, const flow::TrainConfig& train_cfg) {
            const auto train = pairs_from_arrays(theta_train, h_train);
            const auto val = pairs_from_arrays(theta_val, h_val);
            auto result = flow::train_flow(train, val, flow_cfg, train_cfg);
            py::list history;
            for (const auto& e : result.history) {
                history.append(py::make_tuple(e.epoch, e.train_nll, e.val_nll));
            }
            return py::make_tuple(std::move(result.model), history, result.best_epoch,
                                  result.best_val_nll);
        },
        py::arg("theta_train"), py::arg("h_train"), py::arg("theta_val"), py::arg("h_val"),
        py::arg("flow_config") = flow::FlowConfig{}, py::arg("train_config") = flow::TrainConfig{});
    m.def("load_flow", &flow::load_flow, py::arg("json_path"));

    // ------------------------------------------------------------ diagnostics
    m.def(
        "ks_uniformity",
        [](const std::vector<int>& ranks, int L, uint64_t seed) {
            return calibration::ks_uniformity(calibration::RankRecord{ranks, L}, seed);
        },
        py::arg("ranks"), py::arg("L"), py::arg("seed") = 0x5eedULL);
    m.def(
        "c2st",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b,
           uint64_t seed) {
            auto to_rows = [](const py::array_t<double, py::array::c_style |
                                                            py::array::forcecast>& arr) {
                if (arr.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
                std::vector<std::vector<Real>> rows(static_cast<std::size_t>(arr.shape(0)));
                const auto view = arr.unchecked<2>();
                for (py::ssize_t i = 0; i < arr.shape(0); ++i) {
                    rows[i].resize(static_cast<std::size_t>(arr.shape(1)));
                    for (py::ssize_t j = 0; j < arr.shape(1); ++j) rows[i][j] = view(i, j);
                }
                return rows;
            };
            return calibration::c2st(to_rows(a), to_rows(b), seed);
        },
        py::arg("samples_a"), py::arg("samples_b"), py::arg("seed") = 0);

    // -------------------------------------------------------------- inference
    py::class_<inference::Observation>(m, "Observation")
        .def(py::init<>())
        .def_readwrite("p_obs_db", &inference::Observation::p_obs_db)
        .def_readwrite("p_ref_obs_db", &inference::Observation::p_ref_obs_db)
        .def_readwrite("r_obs_km", &inference::Observation::r_obs_km)
        .def_readwrite("r_ref_obs_km", &inference::Observation::r_ref_obs_km)
        .def_readwrite("eps_ref_assumed", &inference::Observation::eps_ref_assumed)
        .def_readwrite("altitude_exponent", &inference::Observation::altitude_exponent);

    m.def(
        "infer",
        [](const flow::FlowModel& model, const inference::Observation& obs, std::size_t n,
           uint64_t seed, const datagen::PriorSpec& prior) {
            const auto r = inference::infer(model, obs, n, seed, prior);
            py::dict out;
            out["samples"] = samples_to_array(r.samples);
            out["h"] = r.h_used;
            out["eps_ref"] = r.eps_ref_used;
            out["extrapolation"] = r.extrapolation;
            out["support_violation_frac"] = r.support_violation_frac;
            const char* names[3] = {"eps", "sigma", "slope"};
            py::dict summary;
            for (int d = 0; d < 3; ++d) {
                py::dict s;
                s["mean"] = r.summary[d].mean;
                s["std"] = r.summary[d].stddev;
                s["q05"] = r.summary[d].q05;
                s["q50"] = r.summary[d].q50;
                s["q95"] = r.summary[d].q95;
                summary[names[d]] = s;
            }
            out["summary"] = summary;
            return out;
        },
        py::arg("model"), py::arg("observation"), py::arg("n") = 10000, py::arg("seed") = 0,
        py::arg("prior") = datagen::PriorSpec{});

    m.attr("__version__") = "0.1.0";
}
