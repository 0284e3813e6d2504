"""Plot outputs for sweep CSVs: a gnuplot script and a rendered PNG."""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

YLABELS = {
    "capacity_qst": "capacity estimate (bits)",
    "diamond_tt_vs_s": "diamond distance T.T vs S",
}


def _ylabel(experiment: str) -> str:
    return YLABELS.get(experiment, "diamond distance")


def plot_script_text(csv_name: str, backends: list[str], experiment: str) -> str:
    lines = [
        "# gnuplot script; run from the directory holding the CSV",
        'set datafile separator ","',
        "set logscale x",
        'set xlabel "J/sigma"',
        f'set ylabel "{_ylabel(experiment)}"',
        f'set title "{experiment}"',
        "set key top right",
        "set grid",
    ]
    if not backends:
        lines.append("plot 1/0 notitle")
    else:
        series = [
            f'"{csv_name}" every ::1 using 1:(strcol(3) eq "{be}" ? $2 : 1/0) with linespoints title "{be}"'
            for be in backends
        ]
        lines.append("plot " + ", \\\n     ".join(series))
    return "\n".join(lines) + "\n"


def _backends(rows) -> list[str]:
    seen = []
    for r in rows:
        if r["backend"] not in seen:
            seen.append(r["backend"])
    return seen


def emit_plot_script(result, path: Path | None = None) -> Path:
    """Write ``<csv stem>.gp`` next to the sweep CSV."""
    csv_path = Path(result.csv_path or result.config.output_path)
    path = Path(path) if path is not None else csv_path.with_suffix(".gp")
    text = plot_script_text(csv_path.name, _backends(result.rows), result.config.experiment)
    path.write_text(text, encoding="utf-8", newline="\n")
    return path


def read_sweep_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def render_figure(csv_path, png_path=None, experiment: str | None = None) -> Path:
    """Render metric against J/sigma, one series per backend, log-x."""
    csv_path = Path(csv_path)
    png_path = Path(png_path) if png_path is not None else csv_path.with_suffix(".png")
    rows = read_sweep_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    for be in _backends(rows):
        pts = [(float(r["j_over_sigma"]), float(r["metric"])) for r in rows if r["backend"] == be]
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", ms=3, label=be)
    ax.set_xscale("log")
    ax.set_xlabel("J/sigma")
    ax.set_ylabel(_ylabel(experiment or ""))
    if experiment:
        ax.set_title(experiment)
    if rows:
        ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path
