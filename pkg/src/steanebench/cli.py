"""Command-line entry point: configure, run and report each benchmark.

Every run writes to ``<root>/<protocol>-<hash>`` where ``hash`` is taken
over the resolved configuration, so reruns of the same config overwrite the
same directory with byte-identical files.  The root comes from
``--output-root``, the ``STEANEBENCH_OUTPUT`` environment variable, or
``./runs``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from . import steane as st
from .bench import fitting
from .bench.data import MubBenchmarkResult
from .bench.model import depolarizing_logical_model
from .bench.qft import CONTROL_T_INPUTS, control_t_state_program, run_control_t_benchmark, run_qft_benchmark
from .bench.rb import build_rb_circuits, run_rb
from .bench.tgate import run_t_bench, t_bench_program
from .pauli import enumerate_two_qubit_cliffords
from .qasm import emit_qasm
from .resources import TABLE_HEADER, count_resources, format_row
from .sim import NoiseModel

PROTOCOLS = ("rb", "t-bench", "qft", "control-t", "ft-t-sim", "emit-qasm", "resources", "model")
OUTPUT_ENV = "STEANEBENCH_OUTPUT"
NOISE_KEYS = tuple(f.name for f in fields(NoiseModel))

_DEFAULTS = {
    "rb": dict(lengths=[2, 6, 10, 14], circuits=10, shots=100),
    "t-bench": dict(lengths=[4, 8, 12, 16], circuits=10, shots=100, method="two"),
    "ft-t-sim": dict(lengths=[4, 8, 12, 16], circuits=10, shots=100, method="two", rus_limits=[1, 2],
                     noise="h1-1"),
    "qft": dict(shots=100, method="ancilla"),
    "control-t": dict(shots=100),
    "emit-qasm": dict(method="ancilla", program="qft"),
    "resources": dict(method="ancilla"),
    "model": dict(shots=100_000, f_cnot=0.998, f_t=0.990),
}


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class RunConfig:
    """Resolved configuration of one run.

    ``noise`` is a preset name (``"h1-1"``, ``"h2-1"``, ``"zero"``) or a dict
    of :class:`NoiseModel` fields.  Fields a protocol does not use are
    ignored by it but still enter the config hash.
    """

    protocol: str
    noise: object = "zero"
    noise_scale: float = 1.0
    shots: int = 100
    seed: int = 0
    lengths: list = None
    circuits: int = 10
    method: str = None
    gadget_method: str = "two"
    postselect: bool = True
    twirl: bool = True
    rus_limits: list = None
    z_error_rate: float = None
    n_boot: int = 200
    program: str = None
    f_cnot: float = None
    f_t: float = None
    output_dir: str = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        for key in d:
            if key not in known:
                raise ConfigError(key, "unknown key")
        if "protocol" not in d:
            raise ConfigError("protocol", "missing")
        proto = d["protocol"]
        if proto not in PROTOCOLS:
            raise ConfigError("protocol", f"must be one of {', '.join(PROTOCOLS)}")
        merged = dict(_DEFAULTS[proto])
        merged.update({k: v for k, v in d.items() if v is not None})
        cfg = cls(**merged)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        def need(cond, name, msg):
            if not cond:
                raise ConfigError(name, msg)

        for name in ("shots", "circuits", "seed", "n_boot"):
            v = getattr(self, name)
            need(isinstance(v, int) and not isinstance(v, bool), name, "must be an integer")
        need(self.shots >= 1, "shots", "must be >= 1")
        need(self.circuits >= 1, "circuits", "must be >= 1")
        need(self.seed >= 0, "seed", "must be >= 0")
        need(self.n_boot >= 0, "n_boot", "must be >= 0")
        need(isinstance(self.noise_scale, (int, float)) and self.noise_scale >= 0, "noise_scale",
             "must be a non-negative number")
        for name in ("postselect", "twirl"):
            need(isinstance(getattr(self, name), bool), name, "must be true or false")
        if isinstance(self.noise, dict):
            for key in self.noise:
                need(key in NOISE_KEYS, f"noise.{key}", "unknown key")
        else:
            need(isinstance(self.noise, str), "noise", "must be a preset name or an object")
        try:
            self.noise_model()
        except ValueError as exc:
            raise ConfigError("noise", str(exc)) from None
        if self.lengths is not None:
            need(isinstance(self.lengths, list) and self.lengths
                 and all(isinstance(v, int) and v >= 1 for v in self.lengths),
                 "lengths", "must be a non-empty list of positive integers")
            need(self.lengths == sorted(set(self.lengths)), "lengths", "must be strictly increasing")
            if self.protocol in ("t-bench", "ft-t-sim"):
                need(all(v % 4 == 0 for v in self.lengths), "lengths", "must be multiples of 4")
            if self.protocol in ("rb", "t-bench", "ft-t-sim"):
                need(len(self.lengths) >= 3, "lengths", "need at least three lengths to fit")
        methods = {
            "t-bench": ("one", "two"), "ft-t-sim": ("one", "two"),
            "qft": st.QFT_METHODS, "resources": st.QFT_METHODS, "emit-qasm": st.QFT_METHODS,
        }
        if self.protocol in methods:
            need(self.method in methods[self.protocol], "method",
                 f"must be one of {', '.join(methods[self.protocol])}")
        need(self.gadget_method in ("one", "two"), "gadget_method", "must be one or two")
        if self.rus_limits is not None:
            need(isinstance(self.rus_limits, list) and self.rus_limits
                 and all(isinstance(v, int) and v >= 1 for v in self.rus_limits),
                 "rus_limits", "must be a non-empty list of positive integers")
        if self.z_error_rate is not None:
            need(isinstance(self.z_error_rate, (int, float)) and 0 <= self.z_error_rate <= 0.5,
                 "z_error_rate", "must lie in [0, 0.5]")
        if self.protocol == "emit-qasm":
            need(self.program in ("qft", "rb", "t-bench", "control-t"), "program",
                 "must be one of qft, rb, t-bench, control-t")
        if self.protocol == "model":
            for name in ("f_cnot", "f_t"):
                v = getattr(self, name)
                need(isinstance(v, (int, float)) and 0 < v <= 1, name, "must lie in (0, 1]")

    def noise_model(self) -> NoiseModel:
        if isinstance(self.noise, dict):
            return NoiseModel(**self.noise)
        return NoiseModel.preset(self.noise, scale=self.noise_scale)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("output_dir")
        return d

    def hash(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["protocol"],
    "properties": {
        "protocol": {"enum": list(PROTOCOLS)},
        "noise": {"oneOf": [{"enum": ["h1-1", "h2-1", "zero"]},
                            {"type": "object", "additionalProperties": False,
                             "properties": {k: {"type": "number"} for k in NOISE_KEYS}}]},
        "noise_scale": {"type": "number", "minimum": 0},
        "shots": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "lengths": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "circuits": {"type": "integer", "minimum": 1},
        "method": {"enum": ["one", "two", "recursive", "ancilla"]},
        "gadget_method": {"enum": ["one", "two"]},
        "postselect": {"type": "boolean"},
        "twirl": {"type": "boolean"},
        "rus_limits": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "z_error_rate": {"type": "number", "minimum": 0, "maximum": 0.5},
        "n_boot": {"type": "integer", "minimum": 0},
        "program": {"enum": ["qft", "rb", "t-bench", "control-t"]},
        "f_cnot": {"type": "number"},
        "f_t": {"type": "number"},
        "output_dir": {"type": "string"},
    },
}


# ---------------------------------------------------------------------------
# Protocol runners: each returns (results dict, {filename: text}, summary)
# ---------------------------------------------------------------------------

def _fmt_err(v, e):
    return f"{v:.4f}" if e is None else f"{v:.4f}({e:.4f})"


def _run_rb(cfg):
    noise = cfg.noise_model()
    raw, ps = run_rb(cfg.lengths, cfg.circuits, cfg.shots, noise, cfg.seed)
    mean_cx = enumerate_two_qubit_cliffords().mean_cnot_count
    fits = {tag: fitting.fit_rb(s, mean_cx, cfg.n_boot, cfg.seed).to_dict() for tag, s in
            (("raw", raw), ("post_selected", ps))}
    results = {"series": {"raw": raw.to_dict(), "post_selected": ps.to_dict()}, "fits": fits}
    lines = [f"{'variant':<14} {'f':>16} {'F_avg/Clifford':>18} {'F/CNOT':>10} {'retention':>10}"]
    for tag, s in (("raw", raw), ("post_selected", ps)):
        f = fits[tag]
        lines.append(f"{tag:<14} {_fmt_err(f['params']['f'], f['stderr'].get('f')):>16} "
                     f"{_fmt_err(f['derived']['F_avg'], f['stderr'].get('F_avg')):>18} "
                     f"{1 - f['derived']['infidelity_per_cnot']:>10.5f} {min(s.retention):>10.3f}")
    return results, {"decay_raw.csv": raw.to_csv(), "decay_post_selected.csv": ps.to_csv()}, lines


def _t_summary(fits, series):
    lines = [f"{'variant':<14} {'eps':>16} {'F_avg':>16} {'retention':>10}"]
    for tag, s in series:
        f = fits[tag]
        lines.append(f"{tag:<14} {_fmt_err(f['params']['eps'], f['stderr'].get('eps')):>16} "
                     f"{_fmt_err(f['derived']['F_avg'], f['stderr'].get('F_avg')):>16} "
                     f"{min(s.retention):>10.3f}")
    return lines


def _run_t_bench(cfg):
    raw, ps = run_t_bench(cfg.lengths, cfg.method, cfg.circuits, cfg.shots, cfg.noise_model(), cfg.seed,
                          cfg.twirl, cfg.z_error_rate)
    series = (("raw", raw), ("post_selected", ps))
    fits = {tag: fitting.fit_t_decay(s, cfg.n_boot, cfg.seed).to_dict() for tag, s in series}
    results = {"series": {tag: s.to_dict() for tag, s in series}, "fits": fits}
    files = {"decay_raw.csv": raw.to_csv(), "decay_post_selected.csv": ps.to_csv()}
    return results, files, _t_summary(fits, series)


def _run_ft_t_sim(cfg):
    results, files = {}, {}
    lines = [f"{'RUS limit':<10} {'average fidelity':>18} {'retention (L=8)':>16}"]
    for limit in cfg.rus_limits:
        raw, _ = run_t_bench(cfg.lengths, cfg.method, cfg.circuits, cfg.shots, cfg.noise_model(),
                             cfg.seed, cfg.twirl, cfg.z_error_rate, rus_limit=limit)
        fit = fitting.fit_t_decay(raw, cfg.n_boot, cfg.seed).to_dict()
        ret = dict(zip(raw.lengths, raw.retention))
        at8 = ret.get(8, raw.retention[min(1, len(raw.retention) - 1)])
        results[f"rus_limit_{limit}"] = {"series": raw.to_dict(), "fit": fit, "retention_L8": at8}
        files[f"decay_rus{limit}.csv"] = raw.to_csv()
        lines.append(f"{limit:<10} {_fmt_err(fit['derived']['F_avg'], fit['stderr'].get('F_avg')):>18} "
                     f"{at8:>16.3f}")
    return results, files, lines


def _mub_summary(label, r: MubBenchmarkResult):
    lines = [f"{'':<18} {'F1':>7} {'F2':>7} {'F_lo':>7} {'F_avg >=':>9} {'retention':>10}",
             f"{label:<18} {r.F1:>7.3f} {r.F2:>7.3f} {r.F_lo:>7.3f} {r.F_avg_bound:>9.3f} {1.0:>10.3f}",
             f"{label + ' P.S.':<18} {r.F1_ps:>7.3f} {r.F2_ps:>7.3f} {r.F_lo_ps:>7.3f} "
             f"{r.F_avg_bound_ps:>9.3f} {r.retention:>10.3f}"]
    if r.undefined_cells:
        lines.append("undefined post-selected cells: " + ", ".join(r.undefined_cells))
    return lines


def _run_qft(cfg):
    r = run_qft_benchmark(cfg.method, cfg.noise_model(), cfg.shots, cfg.seed, cfg.postselect, cfg.gadget_method)
    return r.to_dict(), {"states.csv": r.to_csv()}, _mub_summary(cfg.method, r)


def _run_control_t(cfg):
    r = run_control_t_benchmark(cfg.noise_model(), cfg.shots, cfg.seed, cfg.gadget_method)
    return r.to_dict(), {"states.csv": r.to_csv()}, _mub_summary("control-T", r)


def _run_resources(cfg):
    prog, _ = st.logical_qft3(cfg.method, gadget_method=cfg.gadget_method)
    r = count_resources(prog)
    return r.to_dict(), {}, [TABLE_HEADER, format_row(cfg.method, r)]


def _run_emit_qasm(cfg):
    files = {}
    if cfg.program == "qft":
        prog, _ = st.logical_qft3(cfg.method, gadget_method=cfg.gadget_method)
        files[f"qft_{cfg.method}.qasm"] = emit_qasm(prog)
    elif cfg.program == "rb":
        for i, c in enumerate(build_rb_circuits(cfg.lengths or [2], cfg.circuits, cfg.seed)):
            files[f"rb_L{c.length}_{i:03d}.qasm"] = emit_qasm(c.program)
    elif cfg.program == "t-bench":
        for L in cfg.lengths or [4]:
            prog, _, _ = t_bench_program(L, cfg.gadget_method)
            files[f"tbench_L{L}.qasm"] = emit_qasm(prog)
    else:
        for inp in CONTROL_T_INPUTS:
            prog, _, _ = control_t_state_program(inp, cfg.gadget_method)
            label = inp.label.replace("+", "p").replace("-", "m")
            files[f"control_t_{inp.basis.split('-')[0]}_{label}.qasm"] = emit_qasm(prog)
    return {"files": sorted(files)}, files, [f"wrote {len(files)} QASM file(s)"]


def _run_model(cfg):
    r = depolarizing_logical_model(cfg.f_cnot, cfg.f_t, cfg.shots, cfg.seed)
    d = asdict(r)
    return d, {}, [f"{'f_cnot':>7} {'f_t':>7} {'F1':>7} {'F2':>7}",
                   f"{cfg.f_cnot:>7.4f} {cfg.f_t:>7.4f} {r.F1:>7.3f} {r.F2:>7.3f}"]


RUNNERS = {
    "rb": _run_rb, "t-bench": _run_t_bench, "ft-t-sim": _run_ft_t_sim, "qft": _run_qft,
    "control-t": _run_control_t, "resources": _run_resources, "emit-qasm": _run_emit_qasm,
    "model": _run_model,
}


def output_directory(cfg: RunConfig, root: str | None = None) -> Path:
    if cfg.output_dir:
        return Path(cfg.output_dir)
    base = Path(root or os.environ.get(OUTPUT_ENV) or "runs")
    return base / f"{cfg.protocol}-{cfg.hash()}"


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def run(cfg: RunConfig, root: str | None = None) -> tuple[Path, list[str]]:
    """Execute one configured run and write its artifacts; returns ``(dir, summary lines)``."""
    results, files, summary = RUNNERS[cfg.protocol](cfg)
    out = output_directory(cfg, root)
    out.mkdir(parents=True, exist_ok=True)
    files = dict(files)
    files["config.json"] = json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"
    files["results.json"] = json.dumps(results, indent=2, sort_keys=True) + "\n"
    files["summary.txt"] = "\n".join(summary) + "\n"
    manifest = {
        "config_hash": cfg.hash(), "seed": cfg.seed, "version": __version__, "protocol": cfg.protocol,
        "files": {name: _sha(text) for name, text in sorted(files.items())},
    }
    files["manifest.json"] = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    for name, text in files.items():
        (out / name).write_text(text)
    return out, summary


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _noise_arg(text: str):
    text = text.strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise argparse.ArgumentTypeError(f"invalid noise JSON: {exc}") from None
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steanebench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="protocol", required=True)
    helps = {
        "rb": "two-qubit logical randomized benchmarking",
        "t-bench": "logical T-gate decay benchmark",
        "qft": "logical QFT benchmark over computational and Fourier inputs",
        "control-t": "ancilla-assisted control-T benchmark",
        "ft-t-sim": "T benchmark with the flag-verified |T> preparation at several RUS limits",
        "emit-qasm": "write OpenQASM for a logical program",
        "resources": "resource table of the logical QFT",
        "model": "depolarizing logical-level prediction of QFT fidelities",
    }
    for proto in PROTOCOLS:
        p = sub.add_parser(proto, help=helps[proto])
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--noise", type=_noise_arg, help="preset (h1-1, h2-1, zero) or inline JSON object")
        p.add_argument("--noise-scale", type=float, dest="noise_scale")
        p.add_argument("--shots", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--output-root", dest="output_root", help=f"default: ${OUTPUT_ENV} or ./runs")
        p.add_argument("--output-dir", dest="output_dir", help="exact output directory")
        if proto in ("rb", "t-bench", "ft-t-sim", "emit-qasm"):
            p.add_argument("--lengths", type=_int_list)
            p.add_argument("--circuits", type=int)
        if proto in ("t-bench", "ft-t-sim", "qft", "resources", "emit-qasm"):
            p.add_argument("--method")
        if proto in ("qft", "control-t", "resources", "emit-qasm"):
            p.add_argument("--gadget-method", dest="gadget_method")
        if proto in ("rb", "t-bench", "ft-t-sim"):
            p.add_argument("--n-boot", type=int, dest="n_boot")
        if proto in ("t-bench", "ft-t-sim"):
            p.add_argument("--no-twirl", dest="twirl", action="store_false", default=None)
            p.add_argument("--z-error-rate", type=float, dest="z_error_rate")
        if proto == "ft-t-sim":
            p.add_argument("--rus-limits", type=_int_list, dest="rus_limits")
        if proto == "qft":
            p.add_argument("--no-postselect", dest="postselect", action="store_false", default=None)
        if proto == "emit-qasm":
            p.add_argument("--program")
        if proto == "model":
            p.add_argument("--f-cnot", type=float, dest="f_cnot")
            p.add_argument("--f-t", type=float, dest="f_t")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    d = {}
    if args.config:
        try:
            d = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", str(exc)) from None
        if not isinstance(d, dict):
            raise ConfigError("config", "must be a JSON object")
        if d.get("protocol", args.protocol) != args.protocol:
            raise ConfigError("protocol", f"config is for {d['protocol']!r}, not {args.protocol!r}")
    skip = {"config", "output_root"}
    for key, value in vars(args).items():
        if key not in skip and value is not None:
            d[key] = value
    return RunConfig.from_dict(d)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return 2
    try:
        out, summary = run(cfg, args.output_root)
    except (fitting.FitError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print("\n".join(summary))
    print(f"artifacts: {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
