"""Simulation-based inference of terrain parameters from radar-sounder peak powers."""

from ._core import (  # noqa: F401
    FlowConfig,
    FlowModel,
    Observation,
    PriorSpec,
    RadarConfig,
    TerrainParams,
    TrainConfig,
    altitude_rescale,
    c2st,
    compute_h,
    db_to_linear,
    estimate_surface_stats,
    flat_plate_peak_power,
    fresnel_power_reflectance,
    galactic_noise,
    infer,
    ks_uniformity,
    linear_to_db,
    load_flow,
    peak_power,
    rangeline_call_count,
    sample_prior,
    simulate_rangeline,
    synthesize_grf,
    train_flow,
)

__version__ = "0.1.0"
