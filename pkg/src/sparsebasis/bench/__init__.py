"""Benchmark harness: experiment orchestration, acceptance suite and CLI."""
from __future__ import annotations

from .experiment import (
    ExperimentConfig,
    aggregate,
    fit_prz_scaling,
    measure_prz,
    run_experiment,
    sparse_support_pr,
    trial_seed,
)

__all__ = [
    "ExperimentConfig",
    "aggregate",
    "fit_prz_scaling",
    "measure_prz",
    "run_experiment",
    "sparse_support_pr",
    "trial_seed",
]
