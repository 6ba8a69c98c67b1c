"""Static and per-shot resource counts of logical programs."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .ir import BlockBegin, BlockEnd, Gate, If, LogicalProgram


@dataclass(frozen=True)
class ResourceSummary:
    """Resource counts; ``min``/``max`` span the classically controlled branches.

    Physical two-qubit counts exclude repeat-until-success retries, which are
    reported separately in ``physical_tq_worst``.
    """

    physical_qubits: int
    physical_tq_min: int
    physical_tq_max: int
    physical_tq_worst: int
    logical_tq_min: int
    logical_tq_max: int
    injections_min: int
    injections_max: int
    dynamic_tq_mean: float | None = None
    dynamic_tq_min: int | None = None
    dynamic_tq_max: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _range(lo, hi):
    return f"{lo}" if lo == hi else f"{lo}-{hi}"


def format_row(label: str, r: ResourceSummary) -> str:
    return (f"{label:<12} {_range(r.injections_min, r.injections_max):>10} "
            f"{_range(r.logical_tq_min, r.logical_tq_max):>10} "
            f"{_range(r.physical_tq_min, r.physical_tq_max):>11} {r.physical_qubits:>8}")


TABLE_HEADER = f"{'method':<12} {'injections':>10} {'logical TQ':>10} {'physical TQ':>11} {'qubits':>8}"


def count_resources(program: LogicalProgram, records=None) -> ResourceSummary:
    """Count qubits, two-qubit gates and magic-state injections.

    Logical counts come from gadget block metadata: ``encode`` blocks with
    ``magic=1`` are injections and ``transversal`` blocks with
    ``logical_tq=1`` are logical two-qubit gates.  Passing the
    :class:`ShotRecord` list of a run adds the executed two-qubit gate count.
    """
    phys_min = phys_max = phys_worst = 0
    ltq_min = ltq_max = inj_min = inj_max = 0
    retry_depth = 0
    stack = []
    for st in program.statements:
        if isinstance(st, BlockBegin):
            stack.append(st.kind)
            if st.kind == "rus_retry":
                retry_depth += 1
            if retry_depth:
                continue
            cond = st.attr("cond") is not None
            if st.kind == "encode" and st.attr("magic") == "1":
                inj_max += 1
                inj_min += not cond
            elif st.kind == "transversal" and st.attr("logical_tq") == "1":
                ltq_max += 1
                ltq_min += not cond
        elif isinstance(st, BlockEnd):
            if stack and stack.pop() == "rus_retry":
                retry_depth -= 1
        else:
            gate = st.body if isinstance(st, If) else st
            if isinstance(gate, Gate) and len(gate.qubits) == 2:
                phys_worst += 1
                if not retry_depth:
                    phys_max += 1
                    phys_min += not isinstance(st, If)
    dyn = {}
    if records:
        counts = np.array([r.tq_count for r in records])
        dyn = dict(dynamic_tq_mean=float(counts.mean()), dynamic_tq_min=int(counts.min()),
                   dynamic_tq_max=int(counts.max()))
    return ResourceSummary(
        physical_qubits=program.num_qubits,
        physical_tq_min=phys_min, physical_tq_max=phys_max, physical_tq_worst=phys_worst,
        logical_tq_min=ltq_min, logical_tq_max=ltq_max,
        injections_min=inj_min, injections_max=inj_max, **dyn,
    )
