"""Result containers for the benchmarking protocols."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass
class DecaySeries:
    """Survival probability versus sequence length.

    Attributes:
        lengths: strictly increasing sequence lengths.
        survival: pooled survival probability per length.
        shots: shots contributing to each survival value.
        retention: fraction of shots retained after post-selection per length.
        circuit_survival: optional per-circuit survival, one list per length.
        circuit_shots: optional per-circuit shot counts, same shape.
        metadata: protocol, method, noise and seed information.
    """

    lengths: list
    survival: list
    shots: list
    retention: list = None
    circuit_survival: list | None = None
    circuit_shots: list | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lengths = [int(v) for v in self.lengths]
        self.survival = [float(v) for v in self.survival]
        self.shots = [int(v) for v in self.shots]
        if self.retention is None:
            self.retention = [1.0] * len(self.lengths)
        self.retention = [float(v) for v in self.retention]
        n = len(self.lengths)
        if not (len(self.survival) == len(self.shots) == len(self.retention) == n):
            raise ValueError("lengths, survival, shots and retention must have equal size")
        if any(b <= a for a, b in zip(self.lengths, self.lengths[1:])):
            raise ValueError("lengths must be strictly increasing")
        if any(not 0.0 <= p <= 1.0 for p in self.survival):
            raise ValueError("survival probabilities must lie in [0, 1]")
        if any(not 0.0 < r <= 1.0 for r in self.retention):
            raise ValueError("retention must lie in (0, 1]")
        if self.metadata.get("protocol") == "t-bench" and any(L % 4 for L in self.lengths):
            raise ValueError("T-benchmark lengths must be multiples of 4")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "DecaySeries":
        return cls(**d)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["L", "survival", "shots", "retention"])
        for row in zip(self.lengths, self.survival, self.shots, self.retention):
            w.writerow([row[0], f"{row[1]:.6f}", row[2], f"{row[3]:.6f}"])
        return buf.getvalue()


@dataclass
class FitResult:
    """Fitted decay parameters with bootstrap standard errors.

    Attributes:
        model: ``"rb"`` (p = a f^L + 1/4) or ``"t"`` (p = 1/2 + (1/2)(1 - 2 eps)^L).
        params: point estimates (``a``, ``f`` or ``eps``).
        derived: fidelities computed from the parameters.
        stderr: bootstrap standard errors of params and derived values.
        residuals: data minus model at each length.
        converged: optimizer status.
        message: optimizer message.
    """

    model: str
    params: dict
    derived: dict
    stderr: dict = field(default_factory=dict)
    residuals: list = field(default_factory=list)
    converged: bool = True
    message: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def hofmann_bound(f1: float, f2: float, d: int) -> tuple[float, float]:
    """Process-fidelity lower bound and the implied average-fidelity bound."""
    f_lo = f1 + f2 - 1.0
    return f_lo, (d * f_lo + 1.0) / (d + 1.0)


@dataclass
class StateOutcome:
    """Shot counts for one benchmark input state."""

    basis: str
    label: str
    shots: int
    successes: int
    retained: int
    retained_successes: int

    @property
    def fidelity(self) -> float:
        return self.successes / self.shots

    @property
    def fidelity_ps(self) -> float | None:
        return self.retained_successes / self.retained if self.retained else None


@dataclass
class MubBenchmarkResult:
    """Output-state fidelities over two mutually unbiased bases.

    ``F1``/``F2`` average the per-state fidelities of the first and second
    basis.  The ``_ps`` variants use only shots without a flagged gadget
    syndrome; cells with no retained shots are listed in ``undefined_cells``
    and left out of the post-selected averages.
    """

    d: int
    states: list
    metadata: dict = field(default_factory=dict)

    def _basis_mean(self, basis, post):
        vals = []
        for s in self.states:
            if s.basis != basis:
                continue
            v = s.fidelity_ps if post else s.fidelity
            if v is not None:
                vals.append(v)
        return float(np.mean(vals)) if vals else float("nan")

    @property
    def bases(self) -> list[str]:
        out = []
        for s in self.states:
            if s.basis not in out:
                out.append(s.basis)
        return out

    @property
    def F1(self) -> float:
        return self._basis_mean(self.bases[0], False)

    @property
    def F2(self) -> float:
        return self._basis_mean(self.bases[1], False)

    @property
    def F1_ps(self) -> float:
        return self._basis_mean(self.bases[0], True)

    @property
    def F2_ps(self) -> float:
        return self._basis_mean(self.bases[1], True)

    @property
    def F_lo(self) -> float:
        return hofmann_bound(self.F1, self.F2, self.d)[0]

    @property
    def F_avg_bound(self) -> float:
        return hofmann_bound(self.F1, self.F2, self.d)[1]

    @property
    def F_lo_ps(self) -> float:
        return hofmann_bound(self.F1_ps, self.F2_ps, self.d)[0]

    @property
    def F_avg_bound_ps(self) -> float:
        return hofmann_bound(self.F1_ps, self.F2_ps, self.d)[1]

    @property
    def retention(self) -> float:
        total = sum(s.shots for s in self.states)
        return sum(s.retained for s in self.states) / total

    @property
    def undefined_cells(self) -> list[str]:
        return [f"{s.basis}:{s.label}" for s in self.states if s.retained == 0]

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "metadata": self.metadata,
            "states": [asdict(s) | {"fidelity": s.fidelity, "fidelity_ps": s.fidelity_ps}
                       for s in self.states],
            "F1": self.F1, "F2": self.F2, "F_lo": self.F_lo, "F_avg_bound": self.F_avg_bound,
            "F1_ps": self.F1_ps, "F2_ps": self.F2_ps, "F_lo_ps": self.F_lo_ps,
            "F_avg_bound_ps": self.F_avg_bound_ps,
            "retention": self.retention,
            "undefined_cells": self.undefined_cells,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["basis", "state", "shots", "successes", "retained", "retained_successes"])
        for s in self.states:
            w.writerow([s.basis, s.label, s.shots, s.successes, s.retained, s.retained_successes])
        return buf.getvalue()
