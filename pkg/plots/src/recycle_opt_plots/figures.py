"""Render figures from recycle-opt CSV files.

Reads the sweep and trajectory CSV schemas verbatim (N/A marks absent
values) and produces deterministic images: fixed style, fixed size, no
embedded timestamps or tool versions, so identical inputs give
byte-identical files.
"""

import csv
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("error_vs_c", "runtime_vs_c", "trajectory")

SWEEP_COLUMNS = ["T", "c", "lambda", "stepsize", "mean_test_error", "std_error", "reps"]
TRAJECTORY_COLUMNS = ["t", "epoch", "primal_subopt", "dual_subopt", "gap",
                      "loss_term", "norm_term"]

_STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "svg.hashsalt": "recycle-opt-plots",
}


@dataclass
class FigureSpec:
    """What to draw: input CSVs, figure kind, scales, output path."""

    kind: str
    inputs: list
    out: str
    epoch_length: int | None = None  # trajectory gridline spacing
    x_scale: str | None = None
    y_scale: str | None = None
    targets: list = field(default_factory=list)  # runtime_vs_c accuracies

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError("unknown figure kind %r (expected one of %s)"
                             % (self.kind, ", ".join(KINDS)))
        if isinstance(self.inputs, str):
            self.inputs = [self.inputs]
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def _parse_value(text):
    return math.nan if text == "N/A" else float(text)


def _read_rows(path, required):
    with open(path, "r", newline="", encoding="ascii") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise ValueError("%s: empty file" % path)
        for column in required:
            if column not in header:
                raise ValueError("%s: missing column %r" % (path, column))
        rows = []
        for raw in reader:
            rows.append({k: v for k, v in zip(header, raw)})
    return rows


def _load_sweep(paths):
    rows = []
    for path in paths:
        for raw in _read_rows(path, SWEEP_COLUMNS):
            row = {
                "T": int(raw["T"]),
                "c": _parse_value(raw["c"]),
                "mean": _parse_value(raw["mean_test_error"]),
                "se": _parse_value(raw["std_error"]),
                "reps": int(raw["reps"]),
            }
            if row["reps"] > 0 and not math.isnan(row["mean"]):
                rows.append(row)
    return rows


def _load_trajectory(paths):
    columns = {name: [] for name in TRAJECTORY_COLUMNS}
    for path in paths:
        for raw in _read_rows(path, TRAJECTORY_COLUMNS):
            for name in TRAJECTORY_COLUMNS:
                columns[name].append(_parse_value(raw[name]))
    return {name: np.array(vals) for name, vals in columns.items()}


def _error_vs_c(ax, spec):
    rows = _load_sweep(spec.inputs)
    budgets = sorted({row["T"] for row in rows})
    for T in budgets:
        sub = sorted((r for r in rows if r["T"] == T), key=lambda r: r["c"])
        cs = np.array([r["c"] for r in sub])
        means = np.array([r["mean"] for r in sub])
        ses = np.array([r["se"] for r in sub])
        line = ax.errorbar(cs, means, yerr=ses, label="T=%d" % T, capsize=2)[0]
        if len(means):
            k = int(np.argmin(means))
            ax.plot([cs[k]], [means[k]], marker="*", markersize=14,
                    color=line.get_color(), linestyle="none")
    ax.set_xlabel("c (training size as fraction of budget)")
    ax.set_ylabel("mean test error")
    if budgets:
        ax.legend()


def _runtime_vs_c(ax, spec):
    rows = _load_sweep(spec.inputs)
    targets = list(spec.targets)
    if not targets and rows:
        errors = sorted(r["mean"] for r in rows)
        # default targets: three levels spanning what the sweep achieved
        targets = [round(float(np.quantile(errors, q)), 6) for q in (0.1, 0.3, 0.6)]
    cs = sorted({r["c"] for r in rows})
    for target in targets:
        xs, ys = [], []
        for c in cs:
            achieving = [r["T"] for r in rows if r["c"] == c and r["mean"] <= target]
            if achieving:
                xs.append(c)
                ys.append(min(achieving))
        if xs:
            ax.plot(xs, ys, marker="o", label="error <= %g" % target)
    ax.set_xlabel("c (training size as fraction of budget)")
    ax.set_ylabel("minimal budget T reaching target")
    ax.set_yscale(spec.y_scale or "log")
    if targets:
        ax.legend()


def _trajectory(ax, spec):
    data = _load_trajectory(spec.inputs)
    t = data["t"]
    for name, label in (("primal_subopt", "primal subopt"),
                        ("dual_subopt", "dual subopt"),
                        ("gap", "duality gap")):
        values = data[name]
        mask = np.isfinite(values) & (values > 0.0)
        if mask.any():
            ax.plot(t[mask], values[mask], label=label)
    if spec.epoch_length:
        for boundary in range(spec.epoch_length, int(t.max()) + 1 if len(t) else 0,
                              spec.epoch_length):
            ax.axvline(boundary, color="gray", linewidth=0.8, alpha=0.7)
    ax.set_xlabel("iteration")
    ax.set_ylabel("suboptimality")
    ax.set_yscale(spec.y_scale or "log")
    if len(t):
        ax.legend()


def build_figure(spec):
    """The matplotlib Figure for a spec (not yet written to disk)."""
    with plt.style.context(_STYLE):
        fig, ax = plt.subplots()
        if spec.kind == "error_vs_c":
            _error_vs_c(ax, spec)
        elif spec.kind == "runtime_vs_c":
            _runtime_vs_c(ax, spec)
        else:
            _trajectory(ax, spec)
        if spec.x_scale:
            ax.set_xscale(spec.x_scale)
        if spec.y_scale and spec.kind == "error_vs_c":
            ax.set_yscale(spec.y_scale)
        fig.tight_layout()
    return fig


def render(spec):
    """Write the figure; same inputs and spec give byte-identical files."""
    fig = build_figure(spec)
    try:
        # strip the producer tag so output bytes carry no tool version
        fig.savefig(spec.out, metadata={"Software": None})
    finally:
        plt.close(fig)
    return spec.out
