#!/usr/bin/env python3
"""Render figures from splitqc output files.

Usage:
    python3 plots/render.py --spec fig.json

The spec is a JSON object:

    {
      "kind": "variance_vs_N",
      "inputs": ["bp_scan.csv"],
      "output": "variance.png",
      "title": "optional title",
      "labels": ["m=2", "m=4"]      # optional, accuracy_box only
    }

Kinds and the inputs they expect:

    variance_vs_N           one splitqc.variance.v1 CSV; variance vs qubit count
    variance_vs_L           one splitqc.variance.v1 CSV; variance vs split layers
    ecs_variance            one splitqc.variance.v1 CSV; variance vs standard layers
    accuracy_box            one or more splitqc.classify-history.v1 CSVs; one box
                            of per-seed best test accuracy per input
    vqe_error_vs_depth      one or more vqe summary.json files; mean final error
                            vs circuit depth, one series per tail setting
    cost_landscape_heatmap  one splitqc.landscape.v1 CSV holding a complete
                            theta_a x theta_b grid

Everything is read through the documented schema headers; the first line of
each CSV must be ``# schema=<tag>``.  Output must be a .png path: PNG from the
Agg backend is byte-stable for a given matplotlib install, which keeps
rendering reproducible (same inputs, same bytes).  Spec problems exit 2, input
data problems exit 1.
"""

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  backend must be pinned first
import numpy as np  # noqa: E402

DPI = 150
_PNG_META = {"Software": "splitqc-plots"}

KINDS = ("variance_vs_N", "variance_vs_L", "accuracy_box",
         "vqe_error_vs_depth", "ecs_variance", "cost_landscape_heatmap")

VARIANCE_SCHEMA = "splitqc.variance.v1"
HISTORY_SCHEMA = "splitqc.classify-history.v1"
LANDSCAPE_SCHEMA = "splitqc.landscape.v1"


class SpecError(Exception):
    """Problem with the figure spec itself."""


class DataError(Exception):
    """Problem with an input file's schema or contents."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple
    output: str
    title: str | None = None
    labels: tuple | None = None


def load_spec(path) -> FigureSpec:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise SpecError(f"cannot read spec: {exc}")
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise SpecError("spec must be a JSON object")
    unknown = set(raw) - {"kind", "inputs", "output", "title", "labels"}
    if unknown:
        raise SpecError(f"unknown spec keys: {sorted(unknown)}")
    missing = {"kind", "inputs", "output"} - set(raw)
    if missing:
        raise SpecError(f"spec is missing keys: {sorted(missing)}")
    kind = raw["kind"]
    if kind not in KINDS:
        raise SpecError(f"kind must be one of {list(KINDS)}, got {kind!r}")
    inputs = raw["inputs"]
    if isinstance(inputs, str) or not inputs:
        raise SpecError("inputs must be a non-empty list of paths")
    output = str(raw["output"])
    if not output.endswith(".png"):
        raise SpecError("output must be a .png path (PNG keeps renders byte-stable)")
    labels = raw.get("labels")
    if labels is not None:
        if kind != "accuracy_box":
            raise SpecError("labels only apply to accuracy_box")
        if len(labels) != len(inputs):
            raise SpecError(f"got {len(labels)} labels for {len(inputs)} inputs")
        labels = tuple(str(s) for s in labels)
    return FigureSpec(kind, tuple(str(p) for p in inputs), output,
                      raw.get("title"), labels)


def read_rows(path, schema: str) -> list:
    """CSV rows as dicts; enforces the schema header and non-empty body."""
    try:
        with open(path, newline="") as fh:
            first = fh.readline().strip()
            if first != f"# schema={schema}":
                raise DataError(f"{path}: expected '# schema={schema}', got {first!r}")
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}")
    if not rows:
        raise DataError(f"{path}: no data rows")
    return rows


def _f(row, key, path):
    try:
        return float(row[key])
    except (KeyError, TypeError):
        raise DataError(f"{path}: missing column {key!r}")
    except ValueError:
        raise DataError(f"{path}: bad value for {key!r}: {row[key]!r}")


def _variance_points(path):
    rows = read_rows(path, VARIANCE_SCHEMA)
    return [{k: _f(r, k, path) for k in ("n", "m", "l", "t", "variance")}
            for r in rows]


def _series_plot(ax, points, x_key: str, x_label: str):
    """One line per m value, sorted for a stable colour assignment; rows with
    m == n form the dashed black full-register reference curve."""
    full = sorted((p for p in points if p["m"] == p["n"]),
                  key=lambda p: p[x_key])
    split_ms = sorted({p["m"] for p in points if p["m"] != p["n"]})
    for m in split_ms:
        sel = sorted((p for p in points if p["m"] == m and p["m"] != p["n"]),
                     key=lambda p: p[x_key])
        ax.plot([p[x_key] for p in sel], [p["variance"] for p in sel],
                marker="o", label=f"m={int(m)}")
    if full:
        ax.plot([p[x_key] for p in full], [p["variance"] for p in full],
                marker="s", color="black", linestyle="--", label="m=N")
    ax.set_yscale("log")
    ax.set_xlabel(x_label)
    ax.set_ylabel("cost-change variance")
    ax.legend()


def render_variance_vs_n(spec, ax):
    _series_plot(ax, _variance_points(_single(spec)), "n", "number of qubits")


def render_variance_vs_l(spec, ax):
    _series_plot(ax, _variance_points(_single(spec)), "l", "split layers")


def render_ecs_variance(spec, ax):
    _series_plot(ax, _variance_points(_single(spec)), "t", "standard layers")


def render_accuracy_box(spec, ax):
    groups, labels = [], []
    for i, path in enumerate(spec.inputs):
        rows = read_rows(path, HISTORY_SCHEMA)
        best = {}
        for r in rows:
            acc = _f(r, "test_accuracy", path)
            seed = r.get("seed")
            best[seed] = max(best.get(seed, -np.inf), acc)
        groups.append([best[s] for s in sorted(best)])
        labels.append(spec.labels[i] if spec.labels else Path(path).stem)
    # boxes span the quartiles, whiskers the full seed range
    ax.boxplot(groups, tick_labels=labels, whis=(0, 100), showfliers=False)
    ax.set_ylabel("best test accuracy (%)")


def render_vqe_error_vs_depth(spec, ax):
    series = {}
    for path in spec.inputs:
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise DataError(f"cannot read {path}: {exc}")
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON: {exc}")
        try:
            depth = int(raw["config_depth"])
            t = int(raw["config_t"])
            mean = float(raw["mean_final_error"])
            seeds = [float(e["error"]) for e in raw["per_seed"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{path}: not a vqe summary: {exc}")
        label = "T=D" if t == depth else f"T={t}"
        series.setdefault(label, []).append((depth, mean, seeds))
    for label in sorted(series):
        cells = sorted(series[label])
        style = {"color": "black", "linestyle": "--"} if label == "T=D" else {}
        ax.plot([c[0] for c in cells], [c[1] for c in cells], marker="o",
                label=label, **style)
        for depth, _, seeds in cells:
            ax.plot([depth] * len(seeds), seeds, linestyle="none", marker=".",
                    color="grey", alpha=0.6, markersize=4)
    flat = [c[1] for cells in series.values() for c in cells]
    if min(flat) > 0:
        ax.set_yscale("log")
    ax.set_xlabel("circuit depth D")
    ax.set_ylabel("final energy error")
    ax.legend()


def render_cost_landscape_heatmap(spec, ax):
    path = _single(spec)
    rows = read_rows(path, LANDSCAPE_SCHEMA)
    pts = {(_f(r, "theta_a", path), _f(r, "theta_b", path)): _f(r, "cost", path)
           for r in rows}
    xs = sorted({a for a, _ in pts})
    ys = sorted({b for _, b in pts})
    grid = np.empty((len(ys), len(xs)))
    for i, b in enumerate(ys):
        for j, a in enumerate(xs):
            if (a, b) not in pts:
                raise DataError(f"{path}: incomplete grid, missing ({a}, {b})")
            grid[i, j] = pts[(a, b)]
    im = ax.imshow(grid, origin="lower", aspect="auto",
                   extent=(xs[0], xs[-1], ys[0], ys[-1]), cmap="viridis")
    ax.figure.colorbar(im, ax=ax, label="cost")
    ax.set_xlabel("theta_a")
    ax.set_ylabel("theta_b")


def _single(spec) -> str:
    if len(spec.inputs) != 1:
        raise SpecError(f"{spec.kind} takes exactly one input, got {len(spec.inputs)}")
    return spec.inputs[0]


_RENDERERS = {
    "variance_vs_N": render_variance_vs_n,
    "variance_vs_L": render_variance_vs_l,
    "ecs_variance": render_ecs_variance,
    "accuracy_box": render_accuracy_box,
    "vqe_error_vs_depth": render_vqe_error_vs_depth,
    "cost_landscape_heatmap": render_cost_landscape_heatmap,
}


def render(spec: FigureSpec) -> str:
    plt.rcParams["font.family"] = "DejaVu Sans"
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=DPI)
    try:
        _RENDERERS[spec.kind](spec, ax)
        if spec.title:
            ax.set_title(spec.title)
        fig.tight_layout()
        out = Path(spec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, dpi=DPI, metadata=_PNG_META)
    finally:
        plt.close(fig)
    return str(spec.output)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="render", description=__doc__.splitlines()[0])
    parser.add_argument("--spec", required=True, help="figure spec JSON path")
    args = parser.parse_args(argv)
    try:
        out = render(load_spec(args.spec))
    except SpecError as exc:
        print(json.dumps({"error": str(exc), "kind": "spec"}), file=sys.stderr)
        return 2
    except DataError as exc:
        print(json.dumps({"error": str(exc), "kind": "data"}), file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
