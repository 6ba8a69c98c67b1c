"""Shared shot loop for decay benchmarks."""

from __future__ import annotations

import numpy as np

from ..execute import CompiledProgram, execute_shot, shot_rng
from ..sim import NoiseModel


def run_circuits(circuits, survived, noise: NoiseModel, shots: int, seed: int, lengths):
    """Execute circuits and pool survivals per length (raw and post-selected).

    Returns ``(raw, post_selected)`` tuples of per-length lists.  Discarded
    shots (RUS exhaustion) are excluded from both, flagged ones only from the
    second; retention is the kept fraction of all shots.
    """
    per = {L: {"raw": [], "raw_n": [], "ps": [], "ps_n": [], "kept": 0, "kept_raw": 0, "total": 0}
           for L in lengths}
    for c_idx, c in enumerate(circuits):
        d = per[c.length]
        compiled = CompiledProgram(c.program)
        hit = n = hit_ps = n_ps = 0
        for s in range(shots):
            rec, _ = execute_shot(compiled, noise, shot_rng(seed + 7919 * c_idx, s), s)
            if rec.discarded:
                continue
            d["kept_raw"] += 1
            ok = survived(c, rec)
            n += 1
            hit += ok
            if not rec.detected:
                n_ps += 1
                hit_ps += ok
        d["raw"].append(hit / n if n else 0.0)
        d["raw_n"].append(n)
        d["ps"].append(hit_ps / n_ps if n_ps else 0.0)
        d["ps_n"].append(n_ps)
        d["kept"] += n_ps
        d["total"] += shots
    out = []
    for key in ("raw", "ps"):
        surv, nshots, ret, cs, cn = [], [], [], [], []
        for L in lengths:
            d = per[L]
            ns = np.array(d[key + "_n"])
            ps = np.array(d[key])
            surv.append(float((ps * ns).sum() / max(ns.sum(), 1)))
            nshots.append(int(ns.sum()))
            kept = d["kept"] if key == "ps" else d["kept_raw"]
            ret.append(max(kept, 1) / d["total"])
            cs.append(ps.tolist())
            cn.append(ns.tolist())
        out.append((surv, nshots, ret, cs, cn))
    return out
