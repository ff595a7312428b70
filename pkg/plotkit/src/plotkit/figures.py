"""Render sweep metrics, current trajectories and vector maps from CSV files.

The CSVs are the simulator's output artifacts; rendering never mutates them
and identical inputs give identical image bytes (fixed styling, metadata
stripped).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "plotkit"   # reproducible SVG ids

import matplotlib.pyplot as plt  # noqa: E402

# Stacked panels of the sweep figures, top to bottom: column, axis label,
# whether infeasible rows can still carry a value worth hiding.
SWEEP_PANELS = (
    ("PZ", "PZ (%)"),
    ("E_ab", "E_ab (A)"),
    ("E_xy", "E_xy (A)"),
    ("ASF", "ASF (Hz)"),
    ("THD_V", "THD_V (%)"),
)

METRICS_COLUMNS = ("variant", "fe", "Is_star", "lambda_xy", "lambda_sc",
                   "PZ", "E_ab", "E_xy", "ASF", "THD_V", "status")
TRACE_COLUMNS = ("t", "i_alpha", "i_beta", "i_x", "i_y")
VVMAP_COLUMNS = ("index", "v_alpha", "v_beta", "v_x", "v_y", "corona")


class FigureKind(Enum):
    FIVE_ROW_SWEEP = "five_row_sweep"
    TRAJECTORY = "trajectory"
    VV_MAP = "vv_map"


@dataclass(frozen=True)
class FigureSpec:
    csv_path: Path
    kind: FigureKind
    out_path: Path
    variants: tuple[str, ...] = ()


class MissingColumns(ValueError):
    def __init__(self, path, missing):
        self.missing = tuple(missing)
        super().__init__(f"{path}: missing CSV columns: {', '.join(missing)}")


def _read_rows(path, required) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise MissingColumns(path, missing)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows


def _save(fig, out_path) -> tuple[Path, Path]:
    """Write PNG and SVG next to each other, with volatile metadata removed."""
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    png = out.with_suffix(".png")
    svg = out.with_suffix(".svg")
    fig.savefig(png, metadata={"Software": None})
    fig.savefig(svg, metadata={"Date": None})
    plt.close(fig)
    return png, svg


def variant_key(row: dict) -> str:
    """Identity of one controller configuration inside a metrics CSV."""
    key = row["variant"]
    if float(row["lambda_xy"]) or float(row["lambda_sc"]):
        key += f":{float(row['lambda_xy']):g}:{float(row['lambda_sc']):g}"
    return key


def plot_sweep(metrics_csv, out_path, variants=()) -> tuple[Path, Path]:
    """Five stacked panels (PZ, E_ab, E_xy, ASF, THD_V) versus Is*, one curve
    per fe, one column of panels per variant, shared legend on top.

    Panel y-ranges are computed over every variant in the file so columns
    stay visually comparable. Infeasible rows are excluded (they lie beyond
    the attainability boundary).
    """
    rows = _read_rows(metrics_csv, METRICS_COLUMNS)
    ok_rows = [r for r in rows if r["status"] == "ok"]
    if not ok_rows:
        raise ValueError(f"{metrics_csv}: every row is infeasible")

    all_keys = sorted({variant_key(r) for r in ok_rows})
    keys = list(variants) if variants else all_keys
    unknown = [k for k in keys if k not in all_keys]
    if unknown:
        raise ValueError(f"{metrics_csv}: no rows for variant(s) "
                         f"{', '.join(unknown)} (have: {', '.join(all_keys)})")

    fe_values = sorted({float(r["fe"]) for r in ok_rows})
    limits = {}
    for col, _ in SWEEP_PANELS:
        vals = [float(r[col]) for r in ok_rows if r[col] != ""]
        lo, hi = (0.0, 1.0) if not vals else (min(vals), max(vals))
        pad = 0.05 * (hi - lo) if hi > lo else max(0.05 * abs(hi), 1e-3)
        limits[col] = (lo - pad, hi + pad)

    fig, axes = plt.subplots(len(SWEEP_PANELS), len(keys),
                             figsize=(4.2 * len(keys), 9.5),
                             squeeze=False, sharex="col")
    for col_i, key in enumerate(keys):
        sub = [r for r in ok_rows if variant_key(r) == key]
        for row_i, (col, label) in enumerate(SWEEP_PANELS):
            ax = axes[row_i][col_i]
            for fe in fe_values:
                pts = [(float(r["Is_star"]), float(r[col])) for r in sub
                       if float(r["fe"]) == fe and r[col] != ""]
                pts.sort()
                if pts:
                    ax.plot([p[0] for p in pts], [p[1] for p in pts],
                            marker=".", markersize=3, linewidth=1.0,
                            label=f"{fe:g} Hz")
            ax.set_ylim(*limits[col])
            ax.grid(True, alpha=0.3)
            if col_i == 0:
                ax.set_ylabel(label)
            if row_i == len(SWEEP_PANELS) - 1:
                ax.set_xlabel("Is* (A)")
        axes[0][col_i].set_title(key)
    handles, labels = axes[0][0].get_legend_handles_labels()
    fig.legend(handles, labels, loc="upper center", ncol=max(len(fe_values), 1),
               frameon=False, bbox_to_anchor=(0.5, 1.0))
    fig.tight_layout(rect=(0, 0, 1, 0.95))
    return _save(fig, out_path)


def plot_trajectory(trace_csv, out_path) -> tuple[Path, Path]:
    """Current loci of one run: alpha-beta plane (near-circular) and x-y
    plane, equal axis scales within each plane."""
    rows = _read_rows(trace_csv, TRACE_COLUMNS)
    ia = [float(r["i_alpha"]) for r in rows]
    ib = [float(r["i_beta"]) for r in rows]
    ix = [float(r["i_x"]) for r in rows]
    iy = [float(r["i_y"]) for r in rows]

    fig, (ax_ab, ax_xy) = plt.subplots(1, 2, figsize=(9, 4.5))
    ax_ab.plot(ia, ib, linewidth=0.4, color="tab:blue")
    ax_ab.set_xlabel("i_alpha (A)")
    ax_ab.set_ylabel("i_beta (A)")
    ax_ab.set_title("alpha-beta plane")
    ax_xy.plot(ix, iy, linewidth=0.4, color="tab:red")
    ax_xy.set_xlabel("i_x (A)")
    ax_xy.set_ylabel("i_y (A)")
    ax_xy.set_title("x-y plane")
    for ax in (ax_ab, ax_xy):
        ax.set_aspect("equal", adjustable="datalim")
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return _save(fig, out_path)


def plot_vv_map(vv_table_csv, out_path) -> tuple[Path, Path]:
    """Voltage-vector fans in both planes, coloured by corona."""
    rows = _read_rows(vv_table_csv, VVMAP_COLUMNS)
    colors = {"large": "tab:red", "medium": "tab:orange",
              "small": "tab:green", "zero": "black"}
    fig, (ax_ab, ax_xy) = plt.subplots(1, 2, figsize=(9, 4.5))
    seen = set()
    for r in rows:
        corona = r["corona"]
        color = colors.get(corona, "gray")
        label = corona if corona not in seen else None
        seen.add(corona)
        for ax, (x, y) in ((ax_ab, (r["v_alpha"], r["v_beta"])),
                           (ax_xy, (r["v_x"], r["v_y"]))):
            x, y = float(x), float(y)
            ax.plot([0, x], [0, y], color=color, linewidth=0.8)
            ax.plot([x], [y], marker="o", markersize=3, color=color,
                    label=label)
            label = None
            if math.hypot(x, y) > 0:
                ax.annotate(r["index"], (x, y), fontsize=6,
                            textcoords="offset points", xytext=(2, 2))
    ax_ab.set_title("alpha-beta plane")
    ax_xy.set_title("x-y plane")
    for ax in (ax_ab, ax_xy):
        ax.set_aspect("equal", adjustable="datalim")
        ax.grid(True, alpha=0.3)
    ax_ab.legend(loc="upper left", fontsize=7, frameon=False)
    fig.tight_layout()
    return _save(fig, out_path)


def render(spec: FigureSpec) -> tuple[Path, Path]:
    if spec.kind is FigureKind.FIVE_ROW_SWEEP:
        return plot_sweep(spec.csv_path, spec.out_path, spec.variants)
    if spec.kind is FigureKind.TRAJECTORY:
        return plot_trajectory(spec.csv_path, spec.out_path)
    return plot_vv_map(spec.csv_path, spec.out_path)
