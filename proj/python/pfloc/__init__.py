"""Particle-filter localisation of distant static objects from binary masks and camera poses."""

from ._pfloc import (
    CameraIntrinsics,
    CameraPose,
    ConfigError,
    PflocError,
    Ray,
    back_project_ray,
    load_config,
    nlpd,
    pose_from_angles,
    project_point,
    ray_midpoint,
    render_truth_mask,
    rmse_mean_dist,
    rmse_particle,
    run_seed,
    segment_image,
    simulate,
)

__all__ = [
    "CameraIntrinsics",
    "CameraPose",
    "ConfigError",
    "PflocError",
    "Ray",
    "back_project_ray",
    "load_config",
    "nlpd",
    "pose_from_angles",
    "project_point",
    "ray_midpoint",
    "render_truth_mask",
    "rmse_mean_dist",
    "rmse_particle",
    "run_seed",
    "segment_image",
    "simulate",
]
