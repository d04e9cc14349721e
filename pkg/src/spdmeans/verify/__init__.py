"""Inequality checks under unital positive maps, seeded suites and worked examples."""

from .checks import Batch, check
from .core import (INVERSE, NEGLOG, POWER_1_5, SQUARE, ConvexFn, InequalityReport,
                   TheoremId, TrialSpec)
from .examples import ExampleCheck, run_examples
from .gen import gen_spd
from .suite import SuiteResult, run_cell, run_suite

__all__ = [
    "Batch", "check", "ConvexFn", "InequalityReport", "TheoremId", "TrialSpec",
    "SQUARE", "INVERSE", "POWER_1_5", "NEGLOG", "ExampleCheck", "run_examples",
    "gen_spd", "SuiteResult", "run_cell", "run_suite",
]
