"""Command-line front end: seeded deterministic-parallel experiments with
CSV/JSON persistence.

Artifact contract:
  * sample CSVs: header ``sample_index,value[,band_offset]``, LF endings,
    values at 17 significant digits;
  * JSON summaries: ``schema_version, experiment, params, seed,
    estimates[{name, value, stderr, n}], inputs[{path, digest}]``;
  * exit codes: 0 success, 2 usage, 3 capacity, 4 domain, 5 I/O;
  * ``PERCOLAB_THREADS`` overrides the worker count.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import mdev, montecarlo, noise as noise_mod, tribes as tribes_mod
from .functionals import RECT_CROSSING, TAU, TAU_STAR, Functional
from .grid import GridSpec, ParameterError
from .noise import CapacityError
from .rng import substream_seed
from .tribes import DomainError, TribesSpec

SCHEMA_VERSION = 1

EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_DOMAIN = 4
EXIT_IO = 5

_STAT_KINDS = {"t": RECT_CROSSING, "tau": TAU, "taustar": TAU_STAR}


# ---------------------------------------------------------------------------
# Artifacts
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")

def write_sample_csv(path: str | Path, values: np.ndarray,
                     band_offsets: np.ndarray | None = None) -> None:
    lines = []
    if band_offsets is None:
        lines.append("sample_index,value")
        for i, v in enumerate(values):
            lines.append(f"{i},{_fmt(v)}")
    else:
        lines.append("sample_index,value,band_offset")
        for i, (v, b) in enumerate(zip(values, band_offsets)):
            lines.append(f"{i},{_fmt(v)},{int(b)}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")

def read_sample_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray | None]:
    text = Path(path).read_text()
    lines = [ln for ln in text.split("\n") if ln]
    header = lines[0].split(",")
    if header[:2] != ["sample_index", "value"]:
        raise ParameterError(f"{path}: unexpected CSV header {lines[0]!r}")
    has_band = len(header) == 3
    vals, bands = [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        vals.append(float(parts[1]))
        if has_band:
            bands.append(int(parts[2]))
    return np.array(vals), (np.array(bands) if has_band else None)

def file_digest(path: str | Path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()

def write_summary(path: str | Path, experiment: str, params: dict, seed: int,
                  estimates: list[dict], inputs: list[str | Path]) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "experiment": experiment,
        "params": params,
        "seed": seed,
        "estimates": estimates,
        "inputs": [{"path": str(p), "digest": file_digest(p)} for p in inputs],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", newline="\n")
    return doc

def estimate(name: str, value: float, stderr: float, n: int) -> dict:
    return {"name": name, "value": float(value), "stderr": float(stderr), "n": int(n)}


# ---------------------------------------------------------------------------
# Config files: flat key=value, CLI flags override
# ---------------------------------------------------------------------------

def _apply_config_file(argv: list[str]) -> list[str]:
    """Expand ``--config FILE`` into leading ``--key value`` pairs so that
    explicit CLI flags (parsed last) win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise ParameterError("--config requires a file path")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    injected: list[str] = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParameterError(f"cannot read config file {path}: {exc}") from exc
    for raw in text.split("\n"):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParameterError(f"{path}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        injected += [f"--{key.strip()}", value.strip()]
    # keep the subcommand first
    if rest and not rest[0].startswith("-"):
        return [rest[0]] + injected + rest[1:]
    return injected + rest


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------

def _grid(args) -> GridSpec:
    return GridSpec(args.n, args.k, args.a, args.b)

def _resolve_threshold(args) -> tuple[float, list[Path]]:
    """Threshold source: literal --q, or the beta-quantile of a sample file."""
    if args.q is not None:
        return float(args.q), []
    if args.threshold_from is None:
        raise ParameterError("need either --q or --threshold-from")
    vals, _ = read_sample_csv(args.threshold_from)
    return mdev.empirical_quantile(vals, args.beta), [Path(args.threshold_from)]

def cmd_sample(args) -> int:
    grid = _grid(args)
    values, bands = montecarlo.sample_statistic(
        args.stat, grid, args.samples, args.seed,
        p_a=args.p_a, band_offset=args.band_offset)
    write_sample_csv(args.out, values, bands)
    if args.json:
        mean = float(values.mean())
        _, se = noise_mod.batch_means(values)
        write_summary(args.json, "sample",
                      {"stat": args.stat, "n": args.n, "k": args.k,
                       "a": args.a, "b": args.b, "p_a": args.p_a,
                       "samples": args.samples},
                      args.seed,
                      [estimate("mean", mean, se, args.samples),
                       estimate("mean_over_n", mean / args.n, se / args.n,
                                args.samples)],
                      [args.out])
    return 0

def cmd_quantile(args) -> int:
    vals, _ = read_sample_csv(args.infile)
    q = mdev.empirical_quantile(vals, args.beta)
    print(_fmt(q))
    if args.json:
        write_summary(args.json, "quantile", {"beta": args.beta}, 0,
                      [estimate(f"quantile_{args.beta}", q, 0.0, len(vals))],
                      [args.infile])
    return 0

def cmd_influence(args) -> int:
    grid = _grid(args)
    threshold, inputs = _resolve_threshold(args)
    f = Functional(_STAT_KINDS[args.stat], threshold, grid=grid,
                   band_offset=args.band_offset)
    value, se = noise_mod.estimate_influence(f, args.edge, args.samples, args.seed)
    print(_fmt(value))
    if args.json:
        write_summary(args.json, "influence",
                      {"stat": args.stat, "n": args.n, "k": args.k,
                       "edge": args.edge, "threshold": threshold,
                       "samples": args.samples},
                      args.seed,
                      [estimate(f"influence_edge_{args.edge}", value, se,
                                args.samples)],
                      inputs)
    return 0

def cmd_noise(args) -> int:
    grid = _grid(args)
    threshold, inputs = _resolve_threshold(args)
    pairs = montecarlo.sample_noise_pairs(args.stat, grid, threshold,
                                          args.epsilon, args.samples, args.seed)
    cov, se = _paired_covariance(pairs)
    print(_fmt(cov))
    if args.json:
        p0, p0se = noise_mod.batch_means(pairs[:, 0])
        write_summary(args.json, "noise",
                      {"stat": args.stat, "n": args.n, "k": args.k,
                       "epsilon": args.epsilon, "threshold": threshold,
                       "samples": args.samples},
                      args.seed,
                      [estimate("noise_covariance", cov, se, args.samples),
                       estimate("p_one", p0, p0se, args.samples)],
                      inputs)
    return 0

def _paired_covariance(pairs: np.ndarray, n_batches: int = 32) -> tuple[float, float]:
    y0, y1 = pairs[:, 0], pairs[:, 1]
    cov = float(np.mean(y0 * y1) - y0.mean() * y1.mean())
    n = len(y0)
    nb = n_batches if n >= n_batches else max(2, n)
    usable = (n // nb) * nb
    a = y0[:usable].reshape(nb, -1)
    b = y1[:usable].reshape(nb, -1)
    per = (a * b).mean(axis=1) - a.mean(axis=1) * b.mean(axis=1)
    return cov, float(per.std(ddof=1) / math.sqrt(nb))

def cmd_tribes(args) -> int:
    spec = TribesSpec(args.n, getattr(args, "lam"))
    predictor = tribes_mod.s_quantile_predictor(args.n, args.lam, args.beta)
    exact_q = tribes_mod.tribes_quantile_exact(spec, args.beta)
    cdf_at_pred = tribes_mod.tribes_cdf_exact(spec, predictor)
    inf = tribes_mod.tribes_influence_exact(spec, exact_q)
    bks = tribes_mod.tribes_bks_exact(spec, exact_q)
    report = [
        estimate("ell", spec.ell, 0.0, 1),
        estimate("m", spec.m, 0.0, 1),
        estimate("quantile_predictor", predictor, 0.0, 1),
        estimate("quantile_exact", exact_q, 0.0, 1),
        estimate("cdf_at_predictor", cdf_at_pred, 0.0, 1),
        estimate("influence_at_quantile", inf, 0.0, 1),
        estimate("bks_at_quantile", bks, 0.0, 1),
    ]
    print(json.dumps({e["name"]: e["value"] for e in report}, indent=2))
    if args.json:
        write_summary(args.json, "tribes",
                      {"n": args.n, "lambda": args.lam, "beta": args.beta},
                      0, report, [])
    return 0

def cmd_oracle(args) -> int:
    grid = _grid(args)
    threshold, inputs = _resolve_threshold(args)
    f = Functional(_STAT_KINDS[args.stat], threshold, grid=grid,
                   band_offset=args.band_offset)
    table = noise_mod.truth_table(f)
    out: list[dict]
    if args.what == "influences":
        inf = noise_mod.exact_influences(f, table)
        out = [estimate(f"influence_edge_{e}", v, 0.0, 1 << f.n_bits)
               for e, v in enumerate(inf)]
        out.append(estimate("bks", noise_mod.bks_statistic(inf), 0.0,
                            1 << f.n_bits))
    elif args.what == "walsh-cov":
        cov = noise_mod.walsh_noise_covariance(f, args.epsilon, table)
        out = [estimate("noise_covariance", cov, 0.0, 1 << f.n_bits)]
    else:
        raise ParameterError(f"unknown oracle kind {args.what!r}")
    print(json.dumps({e["name"]: e["value"] for e in out}, indent=2))
    if args.json:
        write_summary(args.json, f"oracle-{args.what}",
                      {"stat": args.stat, "n": args.n, "k": args.k,
                       "threshold": threshold, "epsilon": args.epsilon},
                      0, out, inputs)
    return 0

def cmd_md_check(args) -> int:
    out: list[dict] = []
    params: dict = {"kind": args.kind}
    if args.kind == "logcosh":
        r = mdev.logcosh_r4(args.s)
        out = [estimate("residual_over_s4", r, 0.0, 1)]
        params["s"] = args.s
    elif args.kind == "cgf":
        law = mdev.TwoPointLaw(args.hi, args.lo, args.p)
        s_grid = [float(x) for x in args.s_grid.split(",")]
        res = mdev.cgf_expansion_check(law, s_grid)
        out = [estimate("max_r4", res.max_r4, 0.0, len(res.accepted_s)),
               estimate("max_r3", res.max_r3, 0.0, len(res.accepted_s)),
               estimate("max_r2", res.max_r2, 0.0, len(res.accepted_s))]
        params.update(hi=args.hi, lo=args.lo, p=args.p,
                      accepted=res.accepted_s, rejected=res.rejected_s)
    elif args.kind == "sandwich":
        from .grid import sample_config
        grid = _grid(args)
        ok = all(
            mdev.chunk_sandwich_check(sample_config(grid, 0.5, args.seed, i),
                                      args.gamma)
            for i in range(args.samples))
        out = [estimate("all_hold", float(ok), 0.0, args.samples)]
        params.update(n=args.n, k=args.k, gamma=args.gamma)
    elif args.kind == "variance":
        n_grid = [int(x) for x in args.n_grid.split(",")]
        vs = mdev.variance_scaling_experiment(args.k, n_grid, args.samples,
                                              args.seed, args.a, args.b)
        out = [estimate("loglog_slope", vs.slope, 0.0, args.samples)]
        out += [estimate(f"variance_n_{n}", v, se, args.samples)
                for n, v, se in zip(vs.n_grid, vs.variances, vs.stderrs)]
        params.update(k=args.k, n_grid=n_grid)
    elif args.kind == "tailratio":
        x_grid = [float(x) for x in args.x_grid.split(",")]
        res = mdev.mdfpp_tail_check(args.n, args.k, x_grid, args.samples,
                                    args.seed, a=args.a, b=args.b)
        for side, rows in (("lower", res.rows_lower), ("upper", res.rows_upper)):
            out += [estimate(f"{side}_ratio_x_{row.x:g}", row.ratio, row.stderr,
                             args.samples) for row in rows]
        params.update(n=args.n, k=args.k, x_grid=x_grid)
    elif args.kind == "anticoncentration":
        values = montecarlo.sample_row_min_collapsed(args.n, args.samples,
                                                     args.seed, args.a, args.b)
        mass = mdev.anticoncentration_scan(values, args.b - args.a, args.a,
                                           args.n, args.b - args.a)
        out = [estimate("max_window_mass", mass, 0.0, args.samples)]
        params.update(n=args.n, window=args.b - args.a)
    elif args.kind == "array":
        ratio = mdev.binomial_row_tail_ratio(args.m, args.x)
        out = [estimate("exact_tail_ratio", ratio, 0.0, 1)]
        params.update(m=args.m, x=args.x)
    else:
        raise ParameterError(f"unknown md-check kind {args.kind!r}")
    print(json.dumps({e["name"]: e["value"] for e in out}, indent=2))
    if args.json:
        write_summary(args.json, f"md-check-{args.kind}", params,
                      getattr(args, "seed", 0), out, [])
    return 0


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

def pipeline_noise_experiment(n_grid: list[int], k: int, beta: float,
                              epsilon: float, samples: int, seed: int,
                              outdir: str | Path, a: float = 1.0, b: float = 2.0,
                              influence_samples: int | None = None) -> dict:
    """Calibration/evaluation quantile experiment with noise and influence probes.

    For each n: a calibration run fixes the empirical beta-quantile of tau and
    taustar; an independent evaluation run estimates the threshold-crossing
    probabilities, the noise covariance of 1{taustar > q} at epsilon, MC
    influences on a deterministic stratified edge subset, and the BKS proxy
    E(n) * mean(Inf^2).  Thresholds are never estimated and consumed on the
    same samples.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if influence_samples is None:
        influence_samples = min(samples, 2000)
    report: dict = {
        "schema_version": SCHEMA_VERSION,
        "experiment": "pipeline-noise",
        "params": {"n_grid": list(n_grid), "k": k, "beta": beta,
                   "epsilon": epsilon, "samples": samples, "a": a, "b": b,
                   "influence_samples": influence_samples},
        "seed": seed,
        "per_n": [],
    }
    for idx, n in enumerate(n_grid):
        grid = GridSpec(n, k, a, b)
        seed_cal = substream_seed(seed, 4 * idx)
        seed_eval = substream_seed(seed, 4 * idx + 1)
        seed_noise = substream_seed(seed, 4 * idx + 2)
        seed_inf = substream_seed(seed, 4 * idx + 3)

        cal = montecarlo.sample_statistic_pair(grid, samples, seed_cal)
        ev = montecarlo.sample_statistic_pair(grid, samples, seed_eval)
        files = {}
        for name, (vals, bands) in (
                ("calib_tau", (cal[0], cal[1])),
                ("calib_taustar", (cal[2], cal[3])),
                ("eval_tau", (ev[0], ev[1])),
                ("eval_taustar", (ev[2], ev[3]))):
            path = outdir / f"{name}_n{n}.csv"
            write_sample_csv(path, vals, bands)
            files[name] = path

        q_tau = mdev.empirical_quantile(cal[0], beta)
        q_star = mdev.empirical_quantile(cal[2], beta)
        p_tau_below = float(np.mean(ev[0] < q_tau))
        p_star_below = float(np.mean(ev[2] < q_star))
        p_f_one = float(np.mean(ev[2] > q_star))

        pairs = montecarlo.sample_noise_pairs("taustar", grid, q_star, epsilon,
                                              samples, seed_noise)
        cov, cov_se = _paired_covariance(pairs)

        probes = montecarlo.stratified_edge_subset(grid)
        inf_rows = montecarlo.estimate_influences_subset(
            "taustar", grid, q_star, probes, influence_samples, seed_inf)
        inf_sq = [v * v for _, v, _ in inf_rows]
        bks_proxy = grid.edge_count * float(np.mean(inf_sq))

        def binom_se(p: float) -> float:
            return math.sqrt(p * (1 - p) / samples)

        estimates = [
            estimate("q_beta_tau", q_tau, 0.0, samples),
            estimate("q_beta_taustar", q_star, 0.0, samples),
            estimate("p_tau_below_q", p_tau_below, binom_se(p_tau_below), samples),
            estimate("p_taustar_below_q", p_star_below, binom_se(p_star_below), samples),
            estimate("p_f_one", p_f_one, binom_se(p_f_one), samples),
            estimate("noise_covariance", cov, cov_se, samples),
            estimate("bks_proxy", bks_proxy, 0.0, influence_samples),
        ]
        estimates += [estimate(f"influence_edge_{e}", v, se, influence_samples)
                      for e, v, se in inf_rows]
        entry = {
            "n": n,
            "estimates": estimates,
            "inputs": [{"path": str(p), "digest": file_digest(p)}
                       for p in files.values()],
        }
        report["per_n"].append(entry)
    (outdir / "report.json").write_text(json.dumps(report, indent=2) + "\n",
                                        newline="\n")
    return report

def cmd_pipeline(args) -> int:
    n_grid = [int(x) for x in args.n_grid.split(",")]
    pipeline_noise_experiment(n_grid, args.k, args.beta, args.epsilon,
                              args.samples, args.seed, args.outdir,
                              a=args.a, b=args.b,
                              influence_samples=args.influence_samples)
    print(str(Path(args.outdir) / "report.json"))
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_grid_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=2.0)

def _add_threshold_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=float, default=None,
                   help="literal threshold")
    p.add_argument("--threshold-from", default=None,
                   help="sample CSV whose --beta quantile is the threshold")
    p.add_argument("--beta", type=float, default=0.5)

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="percolab",
        description="Crossing-time and noise-sensitivity experiments on "
                    "random weighted grids.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw statistic samples to CSV")
    p.add_argument("--stat", choices=["t", "tau", "taustar"], required=True)
    _add_grid_opts(p)
    p.add_argument("--p-a", type=float, default=0.5, dest="p_a")
    p.add_argument("--band-offset", type=int, default=0)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--json", default=None)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("quantile", help="empirical quantile of a sample CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--json", default=None)
    p.set_defaults(fn=cmd_quantile)

    p = sub.add_parser("influence", help="MC influence of one edge")
    p.add_argument("--stat", choices=["t", "tau", "taustar"], required=True)
    _add_grid_opts(p)
    _add_threshold_opts(p)
    p.add_argument("--band-offset", type=int, default=0)
    p.add_argument("--edge", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--json", default=None)
    p.set_defaults(fn=cmd_influence)

    p = sub.add_parser("noise", help="MC noise covariance of a threshold functional")
    p.add_argument("--stat", choices=["tau", "taustar"], required=True)
    _add_grid_opts(p)
    _add_threshold_opts(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--json", default=None)
    p.set_defaults(fn=cmd_noise)

    p = sub.add_parser("tribes", help="exact tribes quantities and predictors")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lambda", type=float, required=True, dest="lam")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--json", default=None)
    p.set_defaults(fn=cmd_tribes)

    p = sub.add_parser("oracle", help="exact small-instance enumeration oracles")
    p.add_argument("what", choices=["influences", "walsh-cov"])
    p.add_argument("--stat", choices=["t", "tau", "taustar"], default="taustar")
    _add_grid_opts(p)
    _add_threshold_opts(p)
    p.add_argument("--band-offset", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--json", default=None)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("md-check", help="moderate-deviation diagnostics")
    p.add_argument("--kind", required=True,
                   choices=["logcosh", "cgf", "sandwich", "variance",
                            "tailratio", "anticoncentration", "array"])
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--s", type=float, default=1e-3)
    p.add_argument("--s-grid", default="1e-3")
    p.add_argument("--hi", type=float, default=1.0)
    p.add_argument("--lo", type=float, default=-1.0)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=2.0 / 3.0)
    p.add_argument("--n-grid", default="50,100,200,400")
    p.add_argument("--x-grid", default="1")
    p.add_argument("--m", type=int, default=10 ** 4)
    p.add_argument("--x", type=float, default=2.0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", default=None)
    p.set_defaults(fn=cmd_md_check)

    p = sub.add_parser("pipeline", help="calibration/evaluation noise pipeline")
    p.add_argument("--n-grid", required=True,
                   help="comma-separated grid sizes, e.g. 100,400,1600")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--influence-samples", type=int, default=None)
    p.set_defaults(fn=cmd_pipeline)

    return parser

def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config_file(argv)
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

if __name__ == "__main__":
    sys.exit(main())
