"""Solver state, stopping rules, and run reports shared by the row and column drivers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError

TERMINATION_REASONS = ("converged", "max_iters", "stalled", "stationary")


@dataclass
class SolveState:
    """Evolving iterate: x, residual r = b - A x, and (column methods) y = A.T r."""

    x: np.ndarray
    r: np.ndarray
    y: np.ndarray | None = None
    k: int = 0
    last_set_size: int = 0


@dataclass
class StepOutcome:
    """Result of one update: the mutated state plus the projection weight applied."""

    state: SolveState
    projection_weight: float
    converged: bool = False  # the working residual slice was exactly zero


@dataclass
class StopRule:
    """Termination thresholds for a solve run."""

    rse_tol: float = 1e-4
    max_iters: int = 1_000_000
    stationarity_tol: float = 1e-14  # column methods, on ||y|| / ||A.T b||

    def __post_init__(self):
        if self.rse_tol <= 0.0:
            raise UsageError(f"rse_tol must be positive, got {self.rse_tol}")
        if self.max_iters < 1:
            raise UsageError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.stationarity_tol <= 0.0:
            raise UsageError(f"stationarity_tol must be positive, got {self.stationarity_tol}")


@dataclass
class StepRecord:
    """Per-iteration data needed to certify contraction bounds after the run."""

    k: int
    indices: np.ndarray
    set_energy: float  # sum of squared norms over the selected rows/columns
    zero_mass: float  # sum of squared norms over the zero-loss set
    err_sq_before: float
    err_sq_after: float


@dataclass
class SolveReport:
    """Trace of a solve run: per-iteration relative solution error and set sizes.

    ``rse_trace[k]`` is ||x_k - x*|| / ||x_0 - x*||; ``iter_seconds[k]`` is the
    cumulative wall time of the solver loop when iterate k was produced.
    ``final_rse`` always equals the trace tail.
    """

    method: str
    params: dict
    seed: int | None
    iterations: int
    final_rse: float
    rse_trace: list[float]
    set_size_trace: list[int]
    iter_seconds: list[float]
    wall_seconds: float
    termination_reason: str
    x_final: np.ndarray | None = field(default=None, repr=False)
    step_records: list[StepRecord] | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        """JSON-ready form; certification step records are not serialized."""
        return {
            "method": self.method,
            "params": dict(self.params),
            "seed": self.seed,
            "iterations": self.iterations,
            "final_rse": self.final_rse,
            "rse_trace": [float(v) for v in self.rse_trace],
            "set_size_trace": [int(v) for v in self.set_size_trace],
            "iter_seconds": [float(v) for v in self.iter_seconds],
            "wall_seconds": self.wall_seconds,
            "termination_reason": self.termination_reason,
            "x_final": None if self.x_final is None else [float(v) for v in self.x_final],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SolveReport":
        x_final = data.get("x_final")
        return cls(
            method=data["method"],
            params=dict(data["params"]),
            seed=data["seed"],
            iterations=int(data["iterations"]),
            final_rse=float(data["final_rse"]),
            rse_trace=[float(v) for v in data["rse_trace"]],
            set_size_trace=[int(v) for v in data["set_size_trace"]],
            iter_seconds=[float(v) for v in data["iter_seconds"]],
            wall_seconds=float(data["wall_seconds"]),
            termination_reason=data["termination_reason"],
            x_final=None if x_final is None else np.asarray(x_final, dtype=float),
        )
