"""Cointegrating rank tests for censored and kinked structural VARs."""

from .cksvar import CksvarParams, check_case_ii, check_coherency, to_canonical
from .limitdist import CritValTable, LimitSimConfig, make_table, table_from_draws
from .lrv import estimate_w0, lrv_estimate
from .montecarlo import McConfig, run_cell, run_table, verify_lln
from .pencil import gen_eig_pencil
from .ranktest import build_zstar, lambda_stat, run_test
from .rng import RngState
from .simulate import SeriesMatrix, mc_design, simulate_path

__all__ = [
    "CksvarParams",
    "CritValTable",
    "LimitSimConfig",
    "McConfig",
    "RngState",
    "SeriesMatrix",
    "build_zstar",
    "check_case_ii",
    "check_coherency",
    "estimate_w0",
    "gen_eig_pencil",
    "lambda_stat",
    "lrv_estimate",
    "make_table",
    "mc_design",
    "run_cell",
    "run_table",
    "run_test",
    "simulate_path",
    "table_from_draws",
    "to_canonical",
    "verify_lln",
]

__version__ = "0.1.0"
