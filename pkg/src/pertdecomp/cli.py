"""Command-line runner for the figure experiments.

    pertdecomp run --config exp.yaml [--preset fig4] [--out results/] [--format csv|json]
    pertdecomp --list-presets

Configs are YAML mappings. A preset supplies defaults and the config file
overrides individual keys. Each run writes its data files plus a
``<experiment>.meta.json`` sidecar into the output directory.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import shutil
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .analysis import Evaluator, advantage_window, fidelity, parameter_sweep, pole_points
from .densela import HERMITIAN_TOL, UNITARY_TOL
from .errors import NearPole, ParseError, PertDecompError, ValidationError
from .model import ChainSpec
from .schemes import (
    POLE_GUARD,
    SchemeId,
    local_unitary_count,
    scaling_f,
    single_qubit_exact,
    single_qubit_perturbative,
    single_qubit_trotter2,
    two_qubit_exact,
    two_qubit_perturbative,
    two_qubit_trotter2,
)

EXIT_OK, EXIT_CONFIG, EXIT_POLE, EXIT_NUMERIC = 0, 2, 3, 4

EXPERIMENTS = ("single-qubit", "two-qubit", "chain-curve", "window", "sweep", "count")
FIELDS = ("J", "g", "h")


@dataclass
class RunConfig:
    experiment: str
    n_sites: int = 6
    J: float | None = 1.0
    g: float | None = 0.2
    h: float | None = 0.3
    J_sites: list[float] | None = None
    g_sites: list[float] | None = None
    h_sites: list[float] | None = None
    alpha: float = 0.1
    t_min: float = 0.0
    t_max: float = 1.5
    t_steps: int = 150
    axis: str | None = None
    values: list[float] | None = None
    baseline: float = 0.9999
    reference: str = SchemeId.NESTED_UNIT.value
    output_path: str = "results"
    format: str = "csv"
    notes: dict = field(default_factory=dict)

    def t_grid(self) -> np.ndarray:
        """``t_steps`` evenly spaced points in (t_min, t_max]."""
        return np.linspace(self.t_min, self.t_max, self.t_steps + 1)[1:]

    def chain_spec(self, **override) -> ChainSpec:
        params = {}
        for name in FIELDS:
            per_site = getattr(self, f"{name}_sites")
            params[name] = per_site if per_site is not None else getattr(self, name)
        params.update(override)
        return ChainSpec(self.n_sites, **params)


PRESETS = {
    "fig1": dict(
        experiment="single-qubit", alpha=0.1, t_min=0.0, t_max=1.5, t_steps=150,
        notes={"alpha": "not stated in the caption; 0.1 chosen",
               "time range": "not stated; (0, 1.5] chosen"},
    ),
    "fig2": dict(
        experiment="chain-curve", n_sites=6, J=1.0, g=1.0, h=0.3,
        t_min=0.0, t_max=1.5, t_steps=150,
        notes={"h": "caption leaves h free; 0.3 chosen",
               "time range": "not stated; (0, 1.5] chosen"},
    ),
    "fig3": dict(
        experiment="chain-curve", J=1.0, g=0.2, h=0.3, axis="n_sites", values=[6, 8, 10],
        t_min=0.0, t_max=1.0, t_steps=100,
        notes={"time range": "not stated; (0, 1.0] chosen"},
    ),
    "fig4": dict(
        experiment="chain-curve", n_sites=6, J=1.0, g=0.2, axis="h", values=[0.1, 0.3, 0.5],
        t_min=0.0, t_max=1.5, t_steps=150,
        notes={"h values": "representative values chosen",
               "time range": "not stated; (0, 1.5] chosen"},
    ),
    "fig5": dict(
        experiment="window", n_sites=6, J=1.0, h=0.3, axis="g",
        values=[0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0],
        t_min=0.0, t_max=1.5, t_steps=150,
        notes={"g values": "representative values chosen",
               "time range": "not stated; (0, 1.5] chosen"},
    ),
    "fig6": dict(
        experiment="sweep", n_sites=6, J=1.0, h=0.3, axis="g",
        values=[0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0],
        t_min=0.0, t_max=1.5, t_steps=150, baseline=0.9999,
        notes={"g values": "representative values chosen",
               "time range": "not stated; (0, 1.5] chosen"},
    ),
}


# -- config parsing ----------------------------------------------------------


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.experiment not in EXPERIMENTS:
        raise ValidationError(f"experiment must be one of {EXPERIMENTS}, got {cfg.experiment!r}")
    if not cfg.t_min >= 0:
        raise ValidationError("t_min must be >= 0")
    if not cfg.t_max > cfg.t_min:
        raise ValidationError("t_max must exceed t_min")
    if isinstance(cfg.t_steps, bool) or int(cfg.t_steps) != cfg.t_steps or cfg.t_steps < 2:
        raise ValidationError("t_steps must be an integer >= 2")
    cfg.t_steps = int(cfg.t_steps)
    if cfg.format not in ("csv", "json"):
        raise ValidationError("format must be 'csv' or 'json'")
    try:
        SchemeId(cfg.reference)
    except ValueError:
        raise ValidationError(f"unknown reference scheme {cfg.reference!r}") from None
    if cfg.reference == SchemeId.NESTED_PERTURBATIVE.value:
        raise ValidationError("reference must differ from the perturbative scheme")
    allowed_axes = {
        "chain-curve": ("n_sites", "g", "h"),
        "window": ("g", "h"),
        "sweep": ("g", "h"),
    }
    if cfg.experiment == "sweep" and (cfg.axis is None or not cfg.values):
        raise ValidationError("sweep needs axis and values")
    if cfg.axis is not None:
        if cfg.axis not in allowed_axes.get(cfg.experiment, ()):
            raise ValidationError(f"axis {cfg.axis!r} not valid for {cfg.experiment}")
        if not cfg.values:
            raise ValidationError("axis given without values")
    if cfg.experiment != "single-qubit":
        # ChainSpec enforces even length and per-site vector lengths
        sizes = cfg.values if cfg.axis == "n_sites" else [cfg.n_sites]
        for n in sizes:
            _with(cfg, n_sites=n).chain_spec()
    return cfg


def _with(cfg: RunConfig, **changes) -> RunConfig:
    return RunConfig(**{**asdict(cfg), **changes})


def _exclusive(data: dict):
    for name in FIELDS:
        if data.get(name) is not None and data.get(f"{name}_sites") is not None:
            raise ValidationError(f"give either uniform {name} or {name}_sites, not both")


def parse_config(source: str, preset: str | None = None) -> RunConfig:
    """Parse YAML text into a validated RunConfig; unknown keys are rejected."""
    try:
        data = yaml.safe_load(source) if source.strip() else {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else "unknown line"
        raise ParseError(f"{where}: {exc}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ParseError("config must be a mapping of keys to values")
    known = set(RunConfig.__dataclass_fields__) - {"notes"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ParseError(f"unknown key(s): {', '.join(map(str, unknown))}")
    _exclusive(data)
    base = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ValidationError(f"unknown preset {preset!r}")
        base = {k: v for k, v in PRESETS[preset].items()}
        # a per-site array in the config replaces the preset's uniform value
        for name in FIELDS:
            if data.get(f"{name}_sites") is not None:
                base.pop(name, None)
    merged = {**base, **data}
    if "experiment" not in merged:
        raise ValidationError("experiment is required")
    for name in FIELDS:
        if merged.get(f"{name}_sites") is not None:
            merged[name] = None
    try:
        cfg = RunConfig(**merged)
    except TypeError as exc:
        raise ValidationError(str(exc)) from None
    return _validate(cfg)


# -- emission ----------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.17g}"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def _json_text(header, rows) -> str:
    records = [
        {k: (v if isinstance(v, str) else float(v) if not isinstance(v, (int, np.integer)) else int(v))
         for k, v in zip(header, row)}
        for row in rows
    ]
    return json.dumps({"columns": list(header), "rows": records}, indent=2) + "\n"


class _Products:
    def __init__(self, fmt: str):
        self.fmt = fmt
        self.files: dict[str, str] = {}

    def add(self, stem: str, header, rows):
        for row in rows:
            for v in row:
                if not isinstance(v, str) and not np.isfinite(v):
                    raise PertDecompError(f"non-finite value in {stem}")
        text = _csv_text(header, rows) if self.fmt == "csv" else _json_text(header, rows)
        self.files[f"{stem}.{self.fmt}"] = text


# -- experiments -------------------------------------------------------------


def _admissible(spec_or_none, grid, meta, label, f_args=None):
    """Drop grid times where a tan argument hits the pole guard; log them."""
    if spec_or_none is not None:
        bad = pole_points(spec_or_none, grid)
    else:
        bad = []
        for t in grid:
            try:
                scaling_f(f_args(t))
            except NearPole:
                bad.append(float(t))
    if bad:
        meta["pole_guard_events"].append({"product": label, "dropped_t": bad})
    keep = ~np.isin(grid, bad)
    return grid[keep]


def _run_single_qubit(cfg, grid, out, meta):
    grid = _admissible(None, grid, meta, "single_qubit", lambda t: t)
    rows = []
    for t in grid:
        e = single_qubit_exact(cfg.alpha, t)
        rows.append((t, fidelity(e, single_qubit_trotter2(cfg.alpha, t)),
                     fidelity(e, single_qubit_perturbative(cfg.alpha, t))))
    out.add("single_qubit_curve", ("t", "fidelity_trotter2", "fidelity_perturbative"), rows)


def _run_two_qubit(cfg, grid, out, meta):
    spec = cfg.chain_spec()
    if spec.n_sites != 2:
        raise ValidationError("two-qubit experiment needs n_sites = 2")
    J, (g1, g2), (h1, h2) = spec.J[0], spec.g, spec.h
    grid = _admissible(None, grid, meta, "two_qubit", lambda t: J * t)
    args = (J, g1, g2, h1, h2, cfg.alpha)
    rows = []
    for t in grid:
        e = two_qubit_exact(*args, t)
        rows.append((t, fidelity(e, two_qubit_trotter2(*args, t)),
                     fidelity(e, two_qubit_perturbative(*args, t))))
    out.add("two_qubit_curve", ("t", "fidelity_trotter2", "fidelity_perturbative"), rows)


def _axis_specs(cfg):
    if cfg.axis is None:
        yield None, cfg.chain_spec()
    elif cfg.axis == "n_sites":
        for n in cfg.values:
            yield int(n), _with(cfg, n_sites=int(n)).chain_spec()
    else:
        for v in sorted(cfg.values):
            yield float(v), cfg.chain_spec(**{cfg.axis: float(v)})


def _stem(base, cfg, value):
    if value is None:
        return base
    label = f"{value:g}" if isinstance(value, float) else str(value)
    return f"{base}_{cfg.axis}{label}"


def _run_chain_curve(cfg, grid, out, meta):
    schemes = (SchemeId.TROTTER2, SchemeId.NESTED_UNIT, SchemeId.NESTED_PERTURBATIVE)
    for value, spec in _axis_specs(cfg):
        stem = _stem("curve", cfg, value)
        g = _admissible(spec, grid, meta, stem)
        ev = Evaluator(spec)
        rows = [(t, *(ev.fidelity_at(s, float(t)) for s in schemes)) for t in g]
        out.add(stem, ("t", "fidelity_trotter2", "fidelity_nested_unit", "fidelity_nested_pert"), rows)


def _run_window(cfg, grid, out, meta):
    rows = []
    for value, spec in _axis_specs(cfg):
        g = _admissible(spec, grid, meta, _stem("window", cfg, value))
        w = advantage_window(spec, g, cfg.reference)
        for lo, hi in w.intervals:
            rows.append((w.params[0], w.params[1], lo, hi))
    out.add("window", ("g", "h", "t_lo", "t_hi"), rows)


def _run_sweep(cfg, grid, out, meta):
    base = cfg.chain_spec()
    for v in cfg.values:
        # pole points differ per axis value; drop the union
        grid = _admissible(base.replace(**{cfg.axis: float(v)}), grid, meta, f"sweep_{cfg.axis}{v:g}")
    result = parameter_sweep(base, cfg.axis, cfg.values, grid, cfg.baseline, cfg.reference)
    rows = []
    for p in result.points:
        if p.ok:
            rows.append((p.axis_value, p.max_improvement, p.baseline_time,
                         p.fidelity_at_baseline, p.error_reduction))
        else:
            meta["failed_points"].append({"axis_value": p.axis_value, "error": p.error})
    out.add("sweep", ("axis_value", "max_improvement", "baseline_time",
                      "fidelity_at_baseline", "error_reduction"), rows)


def _run_count(cfg, grid, out, meta):
    spec = cfg.chain_spec()
    rows = []
    for s in (SchemeId.TROTTER2, SchemeId.NESTED_UNIT, SchemeId.NESTED_PERTURBATIVE):
        count, ratio = local_unitary_count(s, spec)
        rows.append((s.value, count, float(ratio)))
    out.add("count", ("scheme", "count", "ratio_vs_trotter2"), rows)


RUNNERS = {
    "single-qubit": _run_single_qubit,
    "two-qubit": _run_two_qubit,
    "chain-curve": _run_chain_curve,
    "window": _run_window,
    "sweep": _run_sweep,
    "count": _run_count,
}


def _metadata(cfg: RunConfig, preset: str | None) -> dict:
    return {
        "tool": "pertdecomp",
        "version": __version__,
        "preset": preset,
        "config": asdict(cfg),
        "tolerances": {
            "hermitian": HERMITIAN_TOL,
            "unitary": UNITARY_TOL,
            "pole_guard": POLE_GUARD,
        },
        "fidelity_definition": "|Tr(U V^dagger)|^2 / d^2, one formula application over total t",
        "time_grid": "t_steps points evenly spaced in (t_min, t_max]",
        "pole_guard_events": [],
        "failed_points": [],
    }


def run(cfg: RunConfig, out_dir: str | os.PathLike | None = None, preset: str | None = None) -> list[Path]:
    """Run one experiment and write its files atomically into ``out_dir``."""
    out_dir = Path(out_dir if out_dir is not None else cfg.output_path)
    meta = _metadata(cfg, preset)
    products = _Products(cfg.format)
    RUNNERS[cfg.experiment](cfg, cfg.t_grid(), products, meta)
    products.files[f"{cfg.experiment}.meta.json"] = json.dumps(meta, indent=2, sort_keys=True) + "\n"

    out_dir.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out_dir))
    written = []
    try:
        for name, text in products.files.items():
            (staging / name).write_text(text, encoding="utf-8", newline="\n")
        for name in products.files:
            os.replace(staging / name, out_dir / name)
            written.append(out_dir / name)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return written


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (ParseError, ValidationError)):
        return EXIT_CONFIG
    if isinstance(exc, NearPole):
        return EXIT_POLE
    return EXIT_NUMERIC


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="pertdecomp", description=__doc__.splitlines()[0])
    parser.add_argument("--list-presets", action="store_true", help="print presets and exit")
    sub = parser.add_subparsers(dest="command")
    p_run = sub.add_parser("run", help="run an experiment")
    p_run.add_argument("--config", type=Path)
    p_run.add_argument("--preset", choices=sorted(PRESETS))
    p_run.add_argument("--out", type=Path)
    p_run.add_argument("--format", choices=("csv", "json"))
    args = parser.parse_args(argv)

    if args.list_presets:
        for name in sorted(PRESETS):
            p = PRESETS[name]
            print(f"{name}: {p['experiment']}" + (f" over {p['axis']}={p['values']}" if p.get("axis") else ""))
        return EXIT_OK
    if args.command != "run":
        parser.print_help(sys.stderr)
        return EXIT_CONFIG
    try:
        if args.config is None and args.preset is None:
            raise ValidationError("run needs --config, --preset or both")
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        cfg = parse_config(text, args.preset)
        if args.format:
            cfg.format = args.format
        paths = run(cfg, args.out, args.preset)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # mapped to exit codes below
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return _exit_code(exc)
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
