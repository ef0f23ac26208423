"""Figure rendering from experiment artifacts.

Input contract (produced by the experiment CLI):
  * JSON summaries with ``schema_version, experiment, params, seed,
    estimates[{name, value, stderr, n}]``;
  * sample CSVs with header ``sample_index,value[,band_offset]``.

Every figure gets a sidecar ``<image>.meta.json`` recording input digests.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "figures"

KINDS = (
    "quantile-convergence",
    "bks-decay",
    "noise-vs-epsilon",
    "tail-ratio",
    "anticoncentration",
)

FORMATS = ("png", "svg")


class SchemaError(ValueError):
    """An input artifact does not conform to the experiment CLI schemas."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[Path, ...]
    out: Path
    format: str = "png"

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if self.format not in FORMATS:
            raise SchemaError(f"unknown format {self.format!r}")
        if not self.inputs:
            raise SchemaError("no input paths given")


def _require(doc: dict, field_name: str, path: Path):
    if field_name not in doc:
        raise SchemaError(f"{path}: missing field {field_name!r}")
    return doc[field_name]


def load_summary(path: Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    for field_name in ("schema_version", "experiment", "params", "seed",
                       "estimates"):
        _require(doc, field_name, path)
    if not doc["estimates"]:
        raise SchemaError(f"{path}: empty field 'estimates'")
    for est in doc["estimates"]:
        for field_name in ("name", "value", "stderr", "n"):
            _require(est, field_name, path)
    return doc


def load_samples(path: Path) -> np.ndarray:
    lines = [ln for ln in Path(path).read_text().split("\n") if ln]
    if not lines or lines[0].split(",")[:2] != ["sample_index", "value"]:
        raise SchemaError(f"{path}: missing field 'sample_index,value' header")
    if len(lines) < 2:
        raise SchemaError(f"{path}: empty field 'rows'")
    return np.array([float(ln.split(",")[1]) for ln in lines[1:]])


def _estimate(doc: dict, name: str, path: Path) -> dict:
    for est in doc["estimates"]:
        if est["name"] == name:
            return est
    raise SchemaError(f"{path}: missing field 'estimates[{name}]'")


def _new_axes(title: str, xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=(6, 4), dpi=120)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return fig, ax


def _plot_quantile_convergence(spec: FigureSpec, ax) -> None:
    """Exact CDF at the closed-form quantile predictor against the target level."""
    points = []
    beta = None
    for path in spec.inputs:
        doc = load_summary(path)
        n = _require(doc["params"], "n", path)
        beta = _require(doc["params"], "beta", path)
        est = _estimate(doc, "cdf_at_predictor", path)
        points.append((n, est["value"], est["stderr"]))
    points.sort()
    ns, ys, es = zip(*points)
    ax.errorbar(ns, ys, yerr=es, marker="o", capsize=3)
    ax.set_xscale("log")
    ax.axhline(beta, linestyle="--", color="grey",
               label=f"target level {beta:g}")
    ax.legend()


def _plot_bks_decay(spec: FigureSpec, ax) -> None:
    """Sum of squared influences against n on log-log axes with a slope guide."""
    points = []
    for path in spec.inputs:
        doc = load_summary(path)
        n = _require(doc["params"], "n", path)
        est = _estimate(doc, "bks_at_quantile", path)
        points.append((n, est["value"]))
    points.sort()
    ns, ys = zip(*points)
    ax.loglog(ns, ys, marker="o")
    if len(ns) >= 2 and min(ys) > 0:
        slope = float(np.polyfit(np.log(ns), np.log(ys), 1)[0])
        guide = [ys[0] * (n / ns[0]) ** slope for n in ns]
        ax.loglog(ns, guide, linestyle=":", color="grey",
                  label=f"slope {slope:.2f}")
        ax.legend()


def _plot_noise_vs_epsilon(spec: FigureSpec, ax) -> None:
    """Estimated noise covariance per resampling level, with error bars."""
    points = []
    for path in spec.inputs:
        doc = load_summary(path)
        eps = _require(doc["params"], "epsilon", path)
        est = _estimate(doc, "noise_covariance", path)
        points.append((eps, est["value"], est["stderr"]))
    points.sort()
    xs, ys, es = zip(*points)
    ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, linestyle="-")
    ax.axhline(0.0, linestyle="--", color="grey")


def _plot_tail_ratio(spec: FigureSpec, ax) -> None:
    """Standardised tail / Gaussian tail ratios with the ratio=1 reference."""
    series: dict[str, list] = {}
    for path in spec.inputs:
        doc = load_summary(path)
        found = False
        for est in doc["estimates"]:
            parts = est["name"].split("_ratio_x_")
            if len(parts) == 2:
                found = True
                series.setdefault(parts[0], []).append(
                    (float(parts[1]), est["value"], est["stderr"]))
        if not found:
            raise SchemaError(f"{path}: missing field 'estimates[*_ratio_x_*]'")
    for side, pts in sorted(series.items()):
        pts.sort()
        xs, ys, es = zip(*pts)
        ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=f"{side} tail")
    ax.axhline(1.0, linestyle="--", color="grey")
    ax.legend()


def _plot_anticoncentration(spec: FigureSpec, ax) -> None:
    """Histogram of crossing-time samples; atom structure shows window mass."""
    for path in spec.inputs:
        vals = load_samples(path)
        lo, hi = vals.min(), vals.max()
        bins = np.arange(lo - 0.5, hi + 1.5)
        ax.hist(vals, bins=bins, density=True, alpha=0.6,
                label=Path(path).stem)
    ax.legend()


_PLOTTERS = {
    "quantile-convergence": (_plot_quantile_convergence,
                             "finite-size quantile convergence",
                             "n", "exact CDF at predictor"),
    "bks-decay": (_plot_bks_decay, "sum of squared influences",
                  "n", "sum Inf^2"),
    "noise-vs-epsilon": (_plot_noise_vs_epsilon, "noise covariance",
                         "epsilon", "covariance"),
    "tail-ratio": (_plot_tail_ratio, "moderate-deviation tail ratios",
                   "x", "empirical / Gaussian tail"),
    "anticoncentration": (_plot_anticoncentration,
                          "crossing-time concentration",
                          "value", "density"),
}


def _digest(path: Path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def render(spec: FigureSpec) -> Path:
    plotter, title, xlabel, ylabel = _PLOTTERS[spec.kind]
    fig, ax = _new_axes(title, xlabel, ylabel)
    try:
        plotter(spec, ax)
        fig.tight_layout()
        metadata = {"Date": None} if spec.format == "svg" else {"Software": "figures"}
        fig.savefig(spec.out, format=spec.format, metadata=metadata)
    finally:
        plt.close(fig)
    sidecar = Path(str(spec.out) + ".meta.json")
    sidecar.write_text(json.dumps({
        "kind": spec.kind,
        "format": spec.format,
        "output": str(spec.out),
        "inputs": [{"path": str(p), "digest": _digest(p)} for p in spec.inputs],
    }, indent=2) + "\n")
    return Path(spec.out)
