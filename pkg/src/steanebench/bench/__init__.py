"""Benchmarking protocols and their analysis."""

from .data import DecaySeries, FitResult, MubBenchmarkResult, StateOutcome, hofmann_bound
from .fitting import ExponentialDecayRegressor, FitError, bootstrap, fit_rb, fit_t_decay
from .model import depolarizing_logical_model, depolarizing_parameter
from .qft import qft_reference, run_control_t_benchmark, run_qft_benchmark
from .rb import build_rb_circuits, run_rb
from .tgate import build_t_bench_circuits, run_t_bench

__all__ = [
    "DecaySeries", "FitResult", "MubBenchmarkResult", "StateOutcome", "hofmann_bound",
    "ExponentialDecayRegressor", "FitError", "bootstrap", "fit_rb", "fit_t_decay",
    "depolarizing_logical_model", "depolarizing_parameter",
    "qft_reference", "run_control_t_benchmark", "run_qft_benchmark",
    "build_rb_circuits", "run_rb", "build_t_bench_circuits", "run_t_bench",
]
