"""Command line entry point: ``udwgates sweep | audit | plot``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError
from .sweep import EXPERIMENTS, SweepConfig, parse_grid, resolve_seed, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_DISAGREE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors; keep status 2 for invariant failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="udwgates", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sw = sub.add_parser("sweep", help="run a coupling sweep and write CSV, manifest and plots")
    sw.add_argument("--config", type=Path, help="JSON file with SweepConfig fields")
    sw.add_argument("--experiment", choices=sorted(EXPERIMENTS))
    sw.add_argument("--grid", help="start:stop:points, log-spaced in J/sigma")
    sw.add_argument("--backend", choices=["weyl", "fock", "both"])
    sw.add_argument("--truncation", type=int)
    sw.add_argument("--seed", type=int)
    sw.add_argument("--out", type=Path, help="CSV output path")
    sw.add_argument("--workers", type=int)
    sw.add_argument("--receiver-init", dest="receiver_init")
    sw.add_argument("--decoder", choices=["adjoint", "literal"])
    sw.add_argument("--no-figure", action="store_true", help="skip the PNG rendering")

    au = sub.add_parser("audit", help="check the ideal gate truth tables and identities")
    au.add_argument("--out", type=Path, help="optional CSV path for the audit report")

    pl = sub.add_parser("plot", help="re-render plots for an existing sweep CSV")
    pl.add_argument("csv", type=Path)
    pl.add_argument("--out", type=Path, help="PNG path (default: next to the CSV)")
    pl.add_argument("--experiment", default=None)
    return parser


def _config_from_args(args) -> SweepConfig:
    data = {}
    if args.config is not None:
        data = SweepConfig.from_json(args.config).__dict__.copy()
    overrides = {
        "experiment": args.experiment,
        "backend": args.backend,
        "truncation": args.truncation,
        "output_path": str(args.out) if args.out else None,
        "workers": args.workers,
        "receiver_init": args.receiver_init,
        "decoder": args.decoder,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.grid:
        data["coupling_grid"] = parse_grid(args.grid)
    cfg = SweepConfig.from_dict(data)
    cfg.seed = resolve_seed(cfg.seed, args.seed)
    return cfg


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    result = run_sweep(cfg, figure=not args.no_figure)
    print(f"wrote {result.csv_path} ({len(result.rows)} rows), exit status {result.exit_code}")
    return result.exit_code


def _cmd_audit(args) -> int:
    out = args.out or Path("gate_audit.csv")
    result = run_sweep(SweepConfig(experiment="gate_audit", output_path=str(out)))
    for c in result.manifest["checks"]:
        mark = "PASS" if c["passed"] else "FAIL"
        note = f"  ({c['note']})" if c["note"] else ""
        print(f"{mark}  {c['name']}  residual={c['residual']:.1e}{note}")
    for c in result.manifest["informational"]:
        print(f"INFO  {c['name']}: {'match' if c['passed'] else 'mismatch'}  ({c['note']})")
    return result.exit_code


def _cmd_plot(args) -> int:
    from .plotting import plot_script_text, read_sweep_csv, render_figure

    if not args.csv.exists():
        raise ConfigError(f"no such CSV: {args.csv}")
    experiment = args.experiment
    manifest = args.csv.with_suffix(".json")
    if experiment is None and manifest.exists():
        experiment = json.loads(manifest.read_text(encoding="utf-8")).get("config", {}).get("experiment")
    rows = read_sweep_csv(args.csv)
    backends = list(dict.fromkeys(r["backend"] for r in rows))
    args.csv.with_suffix(".gp").write_text(
        plot_script_text(args.csv.name, backends, experiment or ""), encoding="utf-8", newline="\n"
    )
    png = render_figure(args.csv, args.out, experiment)
    print(f"wrote {args.csv.with_suffix('.gp')} and {png}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"sweep": _cmd_sweep, "audit": _cmd_audit, "plot": _cmd_plot}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
