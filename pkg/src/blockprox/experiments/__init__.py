"""Benchmark instances, reference solutions and comparison runs."""

from ..trace import TraceRecord, normalized_error_db
from .comparison import ComparisonResult, mean_trace, run_comparison, run_single
from .instances import (GroupLassoInstance, ImageRecoveryInstance, assemble_signal, build_exp1_problem,
                        build_exp2_problem, gen_classification_instance, gen_group_cover, gen_image_instance,
                        lift_signal, random_problem, snr_db)
from .io import load_instance, save_instance
from .presets import Experiment, load_experiment
from .reference import compute_reference

__all__ = [
    "ComparisonResult", "Experiment", "GroupLassoInstance", "ImageRecoveryInstance", "TraceRecord",
    "assemble_signal", "build_exp1_problem", "build_exp2_problem", "compute_reference",
    "gen_classification_instance", "gen_group_cover", "gen_image_instance", "lift_signal", "load_experiment",
    "load_instance", "mean_trace", "normalized_error_db", "random_problem", "run_comparison", "run_single",
    "save_instance", "snr_db",
]
