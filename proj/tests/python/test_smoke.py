"""Smoke tests for the python bindings: a thin pass over every exposed surface."""

import math
import os
import sys
import tempfile

import numpy as np

import rsnpe


def test_physics():
    assert abs(rsnpe.fresnel_power_reflectance(4.0) - 1.0 / 9.0) < 1e-14
    assert abs(rsnpe.compute_h(2.0, 1.0, 4.0) - 2.0 / 9.0) < 1e-14
    assert abs(rsnpe.db_to_linear(10.0) - 10.0) < 1e-12
    assert abs(rsnpe.linear_to_db(rsnpe.db_to_linear(-33.3)) + 33.3) < 1e-12
    assert abs(rsnpe.altitude_rescale(1.0, 250.0, 300.0) - 1.2) < 1e-12
    try:
        rsnpe.fresnel_power_reflectance(0.5)
        raise AssertionError("expected ValueError")
    except ValueError:
        pass


def test_surface():
    mesh = rsnpe.synthesize_grf(1.0, 0.1, 1.5, 256, seed=7)
    assert mesh.shape == (256, 256)
    sigma_hat, slope_hat = rsnpe.estimate_surface_stats(mesh, 1.5)
    assert 0.7 < sigma_hat < 1.3
    assert 0.07 < slope_hat < 0.13
    again = rsnpe.synthesize_grf(1.0, 0.1, 1.5, 256, seed=7)
    assert np.array_equal(mesh, again)


def test_simulator():
    cfg = rsnpe.RadarConfig()
    cfg.altitude_km = 1.0
    cfg.noise_enabled = False
    flat = rsnpe.TerrainParams(4.0, 0.0, 0.0)
    samples, dt, t0 = rsnpe.simulate_rangeline(flat, cfg, seed=1)
    assert samples.dtype == np.complex128
    peak = np.max(np.abs(samples) ** 2)
    assert abs(peak - rsnpe.flat_plate_peak_power(cfg, 4.0)) / peak < 1e-12
    assert abs(rsnpe.peak_power(flat, cfg, seed=1) - peak) / peak < 1e-12

    p3 = rsnpe.peak_power(rsnpe.TerrainParams(3.0, 0.0, 0.0), cfg, seed=2)
    p8 = rsnpe.peak_power(rsnpe.TerrainParams(8.0, 0.0, 0.0), cfg, seed=2)
    expected = rsnpe.fresnel_power_reflectance(3.0) / rsnpe.fresnel_power_reflectance(8.0)
    assert abs(10.0 * math.log10((p3 / p8) / expected)) < 0.5

    noise = rsnpe.galactic_noise(256, 1e-7, alpha=2.5, level=1.0, seed=3)
    assert noise.shape == (256,)
    assert np.all(np.isfinite(noise.view(float)))


def test_flow_train_and_infer():
    rng = np.random.default_rng(5)
    n = 3000
    g = rng.normal(size=n)
    theta = np.column_stack(
        [6.0 + 1.2 * g + 0.5 * rng.normal(size=n),
         2.0 - 0.6 * g + 0.3 * rng.normal(size=n),
         0.25 + 0.02 * g + 0.05 * rng.normal(size=n)]
    )
    h = np.exp(g)

    tc = rsnpe.TrainConfig()
    tc.max_epochs = 5
    tc.batch_size = 256
    tc.seed = 9
    model, history, best_epoch, best_val = rsnpe.train_flow(
        theta[:2400], h[:2400], theta[2400:], h[2400:], rsnpe.FlowConfig(), tc
    )
    assert len(history) >= 1
    assert math.isfinite(best_val)

    draws = model.sample(1.0, 4096, seed=11)
    assert draws.shape == (4096, 3)
    assert np.all(np.isfinite(draws))
    lp = model.log_prob(0.1, -0.2, 0.3, 0.0)
    assert math.isfinite(lp)

    with tempfile.TemporaryDirectory() as tmp:
        jpath = os.path.join(tmp, "model.json")
        bpath = os.path.join(tmp, "model.bin")
        model.save(jpath, bpath)
        loaded = rsnpe.load_flow(jpath)
        a = model.sample(0.7, 32, seed=1)
        b = loaded.sample(0.7, 32, seed=1)
        assert np.array_equal(a, b)

    obs = rsnpe.Observation()
    obs.p_obs_db = 34.73
    obs.p_ref_obs_db = 32.62
    obs.r_obs_km = 300.0
    obs.r_ref_obs_km = 250.0
    obs.eps_ref_assumed = 3.1

    sims_before = rsnpe.rangeline_call_count()
    result = rsnpe.infer(model, obs, n=2000, seed=13)
    assert rsnpe.rangeline_call_count() == sims_before
    expected_h = (
        rsnpe.db_to_linear(34.73)
        / (rsnpe.db_to_linear(32.62) * 1.2)
        * rsnpe.fresnel_power_reflectance(3.1)
    )
    assert abs(result["h"] - expected_h) < 1e-14
    assert result["samples"].shape == (2000, 3)
    assert result["summary"]["eps"]["q05"] <= result["summary"]["eps"]["q95"]


def test_diagnostics():
    rng = np.random.default_rng(21)
    ranks = rng.integers(0, 41, size=500).tolist()
    p = rsnpe.ks_uniformity(ranks, 40, seed=1)
    assert 0.0 <= p <= 1.0

    a = rng.normal(size=(800, 1))
    b = rng.normal(size=(800, 1))
    acc_null = rsnpe.c2st(a, b, seed=2)
    assert 0.38 < acc_null < 0.62
    acc_sep = rsnpe.c2st(a, b + 10.0, seed=3)
    assert acc_sep > 0.95

    draws = rsnpe.sample_prior(2000, rsnpe.PriorSpec(), seed=4)
    assert draws.shape == (2000, 3)
    assert draws[:, 0].min() >= 2.0 and draws[:, 0].max() <= 12.0


def main():
    tests = [
        test_physics,
        test_surface,
        test_simulator,
        test_flow_train_and_infer,
        test_diagnostics,
    ]
    for t in tests:
        t()
        print(f"ok: {t.__name__}")
    print(f"{len(tests)} python smoke tests passed")


if __name__ == "__main__":
    sys.exit(main())
