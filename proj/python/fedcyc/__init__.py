"""Federated CycleGAN simulator: metrics, DP helpers, FedAvg, partitions and full runs."""

from ._fedcyc import (
    ConfigError,
    NumericalError,
    ShapeError,
    add_noise,
    clip_gradient,
    fedavg,
    generator_forward,
    mae,
    parse_config,
    partition,
    partition_sizes,
    psnr,
    run_experiment,
    scheme_proportions,
    ssim,
    synth_dataset,
)

__all__ = [
    "ConfigError",
    "NumericalError",
    "ShapeError",
    "add_noise",
    "clip_gradient",
    "fedavg",
    "generator_forward",
    "mae",
    "parse_config",
    "partition",
    "partition_sizes",
    "psnr",
    "run_experiment",
    "scheme_proportions",
    "ssim",
    "synth_dataset",
]
