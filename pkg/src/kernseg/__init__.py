"""Classify scattered data into smooth classes and interpolate each class separately."""

from .benchfuncs import CASES, BenchCase, get_case, synthesize_sites
from .config import PipelineConfig, load_config
from .geometry import PointSet, build_point_set
from .kernel import Interpolant, Kernel, KernelFamily, fit_interpolant
from .pipeline import PipelineResult, run_case, run_data, run_pipeline

__all__ = [
    "CASES",
    "BenchCase",
    "Interpolant",
    "Kernel",
    "KernelFamily",
    "PipelineConfig",
    "PipelineResult",
    "PointSet",
    "build_point_set",
    "fit_interpolant",
    "get_case",
    "load_config",
    "run_case",
    "run_data",
    "run_pipeline",
    "synthesize_sites",
]

__version__ = "0.1.0"
