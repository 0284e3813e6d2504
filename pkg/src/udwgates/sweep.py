"""Coupling sweeps that turn the field channels into CSV data."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .audit import gate_audit, informational_checks
from .channels import field_channels, reference_channels
from .errors import ConfigError, InvariantError, TruncationError
from .field import FockBackend, SmearingSpec, calibrate_gamma
from .metrics import DEFAULT_SEED, capacity_estimate, diamond_distance

SEED_ENV = "UDWGATES_SEED"
AGREEMENT_TOL = 1e-4

EXPERIMENTS = {
    "capacity_qst": ("qst", None),
    "diamond_qst": ("qst", "qst_qubit"),
    "diamond_cnot_mediated": ("cnot_mediated", "cnot_qubit_mediated"),
    "diamond_cnot_two_qubit": ("cnot_two_qubit", "cnot_two_qubit"),
    "diamond_single_qubit_h": ("hadamard", "hadamard_local"),
    "diamond_single_qubit_s": ("s", "s_local"),
    "diamond_single_qubit_t": ("t", "t_local"),
    "diamond_tt_vs_s": ("t", None),
    "gate_audit": (None, None),
}

COLUMNS = ["j_over_sigma", "metric", "backend", "s_phi", "s_pi", "gamma", "restriction_ratio"]
BOTH_COLUMNS = COLUMNS + ["agreement", "status"]


def default_grid() -> list[float]:
    return [float(x) for x in np.geomspace(0.2, 6.0, 30)]


def parse_grid(text: str) -> list[float]:
    """``start:stop:points`` -> log-spaced grid."""
    try:
        start, stop, points = text.split(":")
        start, stop, points = float(start), float(stop), int(points)
    except ValueError:
        raise ConfigError(f"grid must look like start:stop:points, got {text!r}") from None
    if points < 1 or start <= 0 or stop <= 0 or (points > 1 and stop <= start):
        raise ConfigError(f"bad grid {text!r}")
    return [float(x) for x in np.geomspace(start, stop, points)]


@dataclass
class SweepConfig:
    experiment: str = "diamond_qst"
    coupling_grid: list = field(default_factory=default_grid)
    sigma: float = 1.0
    v: float = 1.0
    mass_reg: float | None = None
    truncation: int = 60
    backend: str = "weyl"
    receiver_init: str = "+y"
    seed: int = DEFAULT_SEED
    output_path: str = "sweep.csv"
    decoder: str = "adjoint"
    restarts: int = 16
    workers: int = 1

    def __post_init__(self):
        self.experiment = str(self.experiment).lower()
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {sorted(EXPERIMENTS)}")
        grid = [float(x) for x in self.coupling_grid]
        if not grid or any(x <= 0 for x in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("coupling_grid must be positive and strictly increasing")
        self.coupling_grid = grid
        if self.backend not in ("weyl", "fock", "both"):
            raise ConfigError("backend must be weyl, fock or both")
        if self.backend != "weyl" and self.truncation < 16:
            raise ConfigError("truncation must be at least 16 when the fock backend is used")
        if self.sigma <= 0 or self.v <= 0:
            raise ConfigError("sigma and v must be positive")
        if self.decoder not in ("adjoint", "literal"):
            raise ConfigError("decoder must be adjoint or literal")
        if self.restarts < 1 or self.workers < 1:
            raise ConfigError("restarts and workers must be positive")
        self.seed = int(self.seed)

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def spec(self, mass_reg: float | None = None) -> SmearingSpec:
        return SmearingSpec(self.sigma, self.v, mass_reg if mass_reg is not None else self.mass_reg)


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list
    manifest: dict
    exit_code: int = 0
    csv_path: Path | None = None

    @property
    def columns(self) -> list[str]:
        return BOTH_COLUMNS if self.config.backend == "both" else COLUMNS


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return format(float(x), ".15g")


def point_metric(cfg: SweepConfig, j_over_sigma: float, backend: str, seed: int,
                 mass_reg: float | None = None) -> dict:
    """Evaluate the experiment's metric at one coupling on one backend."""
    cal = calibrate_gamma(cfg.spec(mass_reg), j_over_sigma * cfg.sigma)
    field_name, ref_name = EXPERIMENTS[cfg.experiment]
    be = FockBackend(cal, cfg.truncation) if backend == "fock" else "weyl"

    def build(name):
        return field_channels(name, cal, cfg.receiver_init, be, cfg.truncation, cfg.decoder)

    extra = {}
    if cfg.experiment == "capacity_qst":
        ch = build("qst")
        metric = capacity_estimate(ch)
        extra["capacity_optimize_bloch"] = capacity_estimate(ch, "optimize_bloch", seed=seed)
    elif cfg.experiment == "diamond_tt_vs_s":
        t = build("t")
        metric = diamond_distance(t.compose(t), build("s"), cfg.restarts, seed).value
    else:
        metric = diamond_distance(build(field_name), reference_channels(ref_name), cfg.restarts, seed).value
    return {
        "metric": metric,
        "s_phi": cal.s_phi,
        "s_pi": cal.s_pi,
        "gamma": cal.gamma,
        "restriction_ratio": cal.restriction_ratio,
        "moment_ratio": cal.moment_ratio,
        "quadrature_residual": cal.quadrature_residual,
        **extra,
    }


def _evaluate_point(args) -> dict:
    cfg, index, x = args
    seed = cfg.seed + index
    backends = ["weyl", "fock"] if cfg.backend == "both" else [cfg.backend]
    out = {"index": index, "j_over_sigma": x, "seed": seed, "results": {}}
    for be in backends:
        try:
            out["results"][be] = point_metric(cfg, x, be, seed)
        except TruncationError as exc:
            out["results"][be] = {"error": "truncation", "detail": str(exc)}
        except InvariantError as exc:
            out["results"][be] = {"error": "invariant", "detail": str(exc)}
    return out


def _rows_for(cfg: SweepConfig, point: dict) -> tuple[list[dict], set]:
    flags = set()
    res = point["results"]
    agreement, status = None, "ok"
    if cfg.backend == "both":
        w, f = res.get("weyl", {}), res.get("fock", {})
        if "error" in w or "error" in f:
            status = w.get("error") or f.get("error")
        else:
            agreement = abs(w["metric"] - f["metric"])
            if agreement > AGREEMENT_TOL:
                status = "disagree"
    rows = []
    for be, r in res.items():
        cal_src = r if "error" not in r else next((v for v in res.values() if "error" not in v), {})
        if "error" in r:
            flags.add(r["error"])
        row = {
            "j_over_sigma": point["j_over_sigma"],
            "metric": r.get("metric", float("nan")),
            "backend": be,
            "s_phi": cal_src.get("s_phi", float("nan")),
            "s_pi": cal_src.get("s_pi", float("nan")),
            "gamma": cal_src.get("gamma", float("nan")),
            "restriction_ratio": cal_src.get("restriction_ratio", float("nan")),
        }
        if cfg.backend == "both":
            row["agreement"] = agreement if agreement is not None else float("nan")
            row["status"] = status
        rows.append(row)
    if status == "disagree":
        flags.add("disagree")
    return rows, flags


def run_sweep(cfg: SweepConfig, write: bool = True, figure: bool = True) -> SweepResult:
    """Evaluate every grid point, then write CSV, manifest and plot script."""
    if cfg.experiment == "gate_audit":
        return _run_audit(cfg, write)
    jobs = [(cfg, i, x) for i, x in enumerate(cfg.coupling_grid)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            points = list(pool.map(_evaluate_point, jobs))
    else:
        points = [_evaluate_point(j) for j in jobs]
    rows, flags = [], set()
    for p in points:
        r, f = _rows_for(cfg, p)
        rows.extend(r)
        flags |= f
    exit_code = 0
    if "invariant" in flags:
        exit_code = 2
    elif "disagree" in flags:
        exit_code = 3
    elif "truncation" in flags and cfg.backend == "fock":
        exit_code = 1
    manifest = _manifest(cfg, points, flags)
    result = SweepResult(cfg, rows, manifest, exit_code)
    if write:
        write_outputs(result, figure=figure)
    return result


def _regulator_log(cfg: SweepConfig) -> dict:
    """Metric change when the IR regulator mass is halved at the last grid point."""
    x = cfg.coupling_grid[-1]
    spec = cfg.spec()
    base = point_metric(cfg, x, "weyl", cfg.seed)["metric"]
    halved = point_metric(cfg, x, "weyl", cfg.seed, mass_reg=spec.mass_reg / 2)["metric"]
    rel = abs(halved - base) / abs(base) if base else float("nan")
    return {
        "j_over_sigma": x,
        "mass_reg": spec.mass_reg,
        "metric": base,
        "metric_half_mass_reg": halved,
        "relative_change": rel,
        "within_5_percent": bool(rel < 0.05),
    }


def _manifest(cfg: SweepConfig, points: list[dict], flags: set) -> dict:
    spec = cfg.spec()
    per_point = []
    for p in points:
        entry = {"j_over_sigma": p["j_over_sigma"], "seed": p["seed"]}
        for be, r in p["results"].items():
            entry[be] = {k: v for k, v in r.items()}
        per_point.append(entry)
    return {
        "tool": "udwgates",
        "version": __version__,
        "config": asdict(cfg),
        "seed": cfg.seed,
        "smearing": {"sigma": spec.sigma, "v": spec.v, "mass_reg": spec.mass_reg, "k_max": spec.k_max,
                     "points": spec.points},
        "grid_note": "default grid (0.2 to 6.0, 30 log-spaced points) is a choice of this tool; "
                     "J/sigma is varied through J at fixed sigma",
        "metric": "capacity (bits, maximally mixed input)" if cfg.experiment == "capacity_qst"
        else "diamond distance",
        "restriction_ratio": "(j_phi * int|F|^2)^2 / (1/2 int w|F|^2), equal to gamma^2/s_pi",
        "points": per_point,
        "regulator_robustness": _regulator_log(cfg) if cfg.coupling_grid else None,
        "failures": sorted(flags),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }


def _run_audit(cfg: SweepConfig, write: bool) -> SweepResult:
    checks = gate_audit()
    info = informational_checks()
    ok = all(c.passed for c in checks)
    manifest = {
        "tool": "udwgates",
        "version": __version__,
        "config": asdict(cfg),
        "checks": [c.to_dict() for c in checks],
        "informational": [c.to_dict() for c in info],
        "passed": ok,
    }
    rows = [{"check": c.name, "passed": c.passed, "residual": c.residual, "note": c.note} for c in checks]
    result = SweepResult(cfg, rows, manifest, 0 if ok else 2)
    if write:
        out = Path(cfg.output_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "passed", "residual", "note"])
        for r in rows:
            w.writerow([r["check"], str(r["passed"]).lower(), _fmt(r["residual"]), r["note"]])
        out.write_text(buf.getvalue(), encoding="utf-8", newline="\n")
        out.with_suffix(".json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")
        result.csv_path = out
    return result


def csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = result.columns
    w.writerow(cols)
    for row in result.rows:
        w.writerow([_fmt(row[c]) for c in cols])
    return buf.getvalue()


def write_outputs(result: SweepResult, figure: bool = True) -> Path:
    from .plotting import emit_plot_script, render_figure

    out = Path(result.config.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(csv_text(result), encoding="utf-8", newline="\n")
    out.with_suffix(".json").write_text(json.dumps(result.manifest, indent=2, default=_json_default),
                                        encoding="utf-8")
    result.csv_path = out
    emit_plot_script(result)
    if figure:
        render_figure(out, out.with_suffix(".png"), result.config.experiment)
    return out


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x)}")


def resolve_seed(config_seed: int, cli_seed: int | None) -> int:
    """CLI flag wins, then the environment variable, then the config value."""
    if cli_seed is not None:
        return int(cli_seed)
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return int(config_seed)


__all__ = [
    "COLUMNS",
    "EXPERIMENTS",
    "SweepConfig",
    "SweepResult",
    "csv_text",
    "default_grid",
    "parse_grid",
    "point_metric",
    "resolve_seed",
    "run_sweep",
    "write_outputs",
]
