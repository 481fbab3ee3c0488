"""Command-line interface: ``estimate`` on user CSVs, ``simulate`` synthetic
benchmarks, and ``bench`` to reproduce the simulation experiments.

File formats
------------
* Data CSV: first row variable-name headers, one sample per row, '.' decimal,
  no index column, UTF-8.
* Ground truth / estimation / benchmark reports: JSON with a schema_version
  field; floats serialized with 17 significant digits so doubles round-trip.

Exit codes: 0 success, 2 early stop with a partial ordering, 1 error.
The ``GROUPLINGAM_WORKERS`` environment variable sets the number of parallel
benchmark workers; results are identical regardless of worker count.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import discover, metrics, simgen
from .discover import GroupWeights, estimate_joint, estimate_naive, estimate_separate
from .errors import GroupLingamError, InvalidInputError
from .kgv import KgvParams
from .model import GroupDataset, MultiGroupData
from .simgen import SimSpec

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARTIAL = 2

PRESETS = {
    "exp1": dict(p=10, c=10, n=(50,) * 5 + (100,) * 5, q=10),
    "exp2": dict(p=40, c=10, n=(10,) * 5 + (20,) * 5, q=5),
}


# ---------------------------------------------------------------------------
# serialization helpers


def format_float(x: float) -> str:
    if math.isnan(x):
        return "null"
    return format(x, ".17g")


def to_json(obj, indent: int = 0) -> str:
    """JSON writer with 17-significant-digit floats (bit-faithful doubles)."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{inner}{to_json(str(k))}: {to_json(v, indent + 1)}"
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [f"{inner}{to_json(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def write_json(path: Path, obj) -> None:
    path.write_text(to_json(obj) + "\n", encoding="utf-8")


def write_csv_dataset(path: Path, headers: list[str], data: np.ndarray) -> None:
    """Write a p x n data matrix as one sample per row."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(headers)
        for sample in data.T:
            writer.writerow([format(x, ".17g") for x in sample])


def read_csv_dataset(path: Path) -> tuple[list[str], np.ndarray]:
    """Read a data CSV back into headers plus a p x n matrix."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            headers = next(reader)
        except StopIteration:
            raise InvalidInputError(f"{path}: file is empty") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(headers):
                raise InvalidInputError(
                    f"{path}: line {lineno} has {len(row)} cells, expected"
                    f" {len(headers)}"
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise InvalidInputError(f"{path}: line {lineno}: {exc}") from None
    if len(rows) < 2:
        raise InvalidInputError(f"{path}: need at least 2 data rows")
    return headers, np.asarray(rows).T


def b_triples(b: np.ndarray, names: list[str] | None = None):
    """Estimated coefficients as (effect, cause, value) triples; absent
    (NaN) entries and structural zeros above the block diagonal included
    only when estimated (non-NaN) and strictly lower."""
    triples = []
    p = b.shape[0]
    for i in range(p):
        for j in range(p):
            if i == j or math.isnan(b[i, j]):
                continue
            effect = names[i] if names else i
            cause = names[j] if names else j
            triples.append({"effect": effect, "cause": cause, "value": b[i, j]})
    return triples


# ---------------------------------------------------------------------------
# shared argument plumbing


def _add_kgv_args(parser):
    parser.add_argument("--sigma", type=float, default=1.0)
    parser.add_argument("--kappa", type=float, default=None,
                        help="default: 2e-2 for n<=1000, else 2e-3")
    parser.add_argument("--eta", type=float, default=1e-5)
    parser.add_argument("--max-rank", type=int, default=100)


def _kgv_params(args) -> KgvParams:
    return KgvParams(sigma=args.sigma, kappa=args.kappa, eta=args.eta,
                     max_rank=args.max_rank)


def _kgv_config(params: KgvParams) -> dict:
    return {"sigma": params.sigma, "kappa": params.kappa,
            "eta": params.eta, "max_rank": params.max_rank}


def _parse_weights(text: str, groups: MultiGroupData) -> GroupWeights:
    if text == "sample-size":
        return GroupWeights.from_sample_sizes(groups)
    if text == "uniform":
        return GroupWeights.uniform(groups.n_groups)
    values = tuple(float(w) for w in text.split(","))
    if len(values) != groups.n_groups:
        raise InvalidInputError(
            f"got {len(values)} weights for {groups.n_groups} groups"
        )
    return GroupWeights(values)


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


# ---------------------------------------------------------------------------
# estimate


def cmd_estimate(args) -> int:
    headers = None
    datasets = []
    for g, name in enumerate(args.inputs):
        file_headers, data = read_csv_dataset(Path(name))
        if headers is None:
            headers = file_headers
        elif file_headers != headers:
            raise InvalidInputError(
                f"{name}: headers {file_headers} do not match {args.inputs[0]}"
            )
        datasets.append(GroupDataset(data, group_index=g))
    groups = MultiGroupData(tuple(datasets))
    weights = _parse_weights(args.weights, groups)
    params = _kgv_params(args)

    result = estimate_joint(groups, q=args.q, weights=weights, params=params)

    report = {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "inputs": list(args.inputs),
            "q": result.ordering.q,
            "weights": list(weights.values),
            "kgv": _kgv_config(params),
        },
        "variables": headers,
        "ordering": [headers[i] for i in result.ordering.order],
        "b_matrices": [
            {"group": g, "entries": b_triples(b, headers)}
            for g, b in enumerate(result.b_matrices)
        ],
        "step_scores": [
            {headers[j]: score for j, score in sorted(step.items())}
            for step in result.step_scores
        ],
        "diagnostics": list(result.diagnostics),
        "early_stopped": result.early_stopped,
    }
    write_json(Path(args.out), report)
    return EXIT_PARTIAL if result.early_stopped else EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def _spec_from_args(args) -> SimSpec:
    sizes = _parse_int_list(args.n)
    sparsity = None if args.s == "auto" else float(args.s)
    return SimSpec(
        p=args.p,
        c=args.c,
        sample_sizes=sizes,
        sparsity=sparsity,
        seed=args.seed,
        share_support=not args.independent_supports,
        share_distributions=args.share_distributions,
    )


def _spec_config(spec: SimSpec) -> dict:
    cfg = asdict(spec)
    cfg["resolved_sparsity"] = spec.resolved_sparsity
    return cfg


def cmd_simulate(args) -> int:
    spec = _spec_from_args(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups, truth = simgen.generate(spec)

    headers = [f"x{i + 1}" for i in range(spec.p)]
    paths = []
    for g, dataset in enumerate(groups.groups):
        path = out_dir / f"group{g + 1:02d}.csv"
        write_csv_dataset(path, headers, dataset.data)
        paths.append(path.name)

    ground_truth = {
        "schema_version": SCHEMA_VERSION,
        "config": _spec_config(spec),
        "variables": headers,
        "ordering": [headers[i] for i in truth.ordering.order],
        "permutation": list(truth.permutation),
        "b_matrices": [
            {
                "group": g,
                "entries": [
                    {"effect": headers[i], "cause": headers[j], "value": b.entries[i, j]}
                    for i in range(spec.p)
                    for j in range(spec.p)
                    if b.entries[i, j] != 0.0
                ],
            }
            for g, b in enumerate(truth.b_matrices)
        ],
        "influence_distributions": [list(r) for r in truth.influences.distribution_ids],
        "influence_variances": truth.influences.variances,
        "means": truth.means,
        "group_files": paths,
    }
    write_json(out_dir / "ground_truth.json", ground_truth)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench


def run_trial(trial: int, spec: SimSpec, q: int, params: KgvParams,
              seed: int, success_mode: str, naive_center_per_group: bool):
    """One benchmark trial: generate, estimate with all three methods, score.

    Fully deterministic given (seed, trial); safe to run in any worker.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))
    groups, truth = simgen.generate(spec, rng)
    joint = estimate_joint(groups, q=q, params=params)
    separate = estimate_separate(groups, q=q, params=params)
    naive = estimate_naive(groups, q=q, params=params,
                           center_per_group=naive_center_per_group)
    return metrics.score_trial(trial, truth, joint, separate, naive, q,
                               mode=success_mode)


def _run_trial_star(packed):
    trial, kwargs = packed
    try:
        return trial, run_trial(trial, **kwargs), None
    except GroupLingamError as exc:
        return trial, None, str(exc)


def cmd_bench(args) -> int:
    if args.preset in PRESETS:
        preset = PRESETS[args.preset]
        p = args.p or preset["p"]
        c = args.c or preset["c"]
        sizes = _parse_int_list(args.n) if args.n else preset["n"]
        q = args.q or preset["q"]
    else:
        if not (args.p and args.c and args.n):
            raise InvalidInputError("custom preset requires --p, --c and --n")
        p, c, sizes = args.p, args.c, _parse_int_list(args.n)
        q = args.q or p
    sparsity = None if args.s == "auto" else float(args.s)
    spec = SimSpec(p=p, c=c, sample_sizes=sizes, sparsity=sparsity,
                   seed=args.seed,
                   share_support=not args.independent_supports,
                   share_distributions=args.share_distributions)
    params = _kgv_params(args)

    kwargs = dict(spec=spec, q=q, params=params, seed=args.seed,
                  success_mode=args.success_mode,
                  naive_center_per_group=args.naive_center_per_group)
    jobs = [(t, kwargs) for t in range(args.trials)]

    workers = int(os.environ.get("GROUPLINGAM_WORKERS", "1"))
    started = time.monotonic()
    outcomes = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_trial_star, jobs))
    else:
        outcomes = [_run_trial_star(job) for job in jobs]
    elapsed = time.monotonic() - started

    records = []
    failures = []
    for trial, record, error in sorted(outcomes):
        if record is not None:
            records.append(record)
        else:
            failures.append({"trial": trial, "error": error})
    if not records:
        print("bench: all trials failed", file=sys.stderr)
        return EXIT_ERROR

    report = metrics.summarize(records)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "preset": args.preset,
            "spec": _spec_config(spec),
            "q": q,
            "trials": args.trials,
            "seed": args.seed,
            "success_mode": args.success_mode,
            "naive_center_per_group": args.naive_center_per_group,
            "kgv": _kgv_config(params),
        },
        "success_pct": report.success_pct,
        "avg_squared_error": report.avg_squared_error,
        "n_trials": report.n_trials,
        "n_datasets": report.n_datasets,
        "early_stops": report.early_stops,
        "failed_trials": failures,
        "trials": [
            {
                "trial": r.trial,
                "successes": {m: list(v) for m, v in r.successes.items()},
                "squared_errors": {m: list(v) for m, v in r.squared_errors.items()},
                "early_stops": r.early_stops,
            }
            for r in report.records
        ],
    }
    write_json(Path(args.out), payload)

    if args.plot_data:
        with open(args.plot_data, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["method", "metric", "value"])
            for m in metrics.METHODS:
                writer.writerow([m, "success_pct",
                                 format_float(report.success_pct[m])])
                writer.writerow([m, "avg_squared_error",
                                 format_float(report.avg_squared_error[m])])

    print(
        f"bench: {report.n_trials} trials, {report.n_datasets} datasets in"
        f" {elapsed:.1f}s; success%"
        + "".join(f" {m}={report.success_pct[m]:.1f}" for m in metrics.METHODS),
        file=sys.stderr,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grouplingam",
        description="Joint estimation of multiple linear non-Gaussian acyclic"
        " models sharing a causal ordering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate a shared ordering from CSVs")
    est.add_argument("--inputs", nargs="+", required=True)
    est.add_argument("--q", type=int, default=None)
    est.add_argument("--weights", default="sample-size",
                     help="sample-size | uniform | w1,w2,...")
    _add_kgv_args(est)
    est.add_argument("--out", required=True)
    est.set_defaults(func=cmd_estimate)

    sim = sub.add_parser("simulate", help="generate a synthetic benchmark")
    sim.add_argument("--p", type=int, required=True)
    sim.add_argument("--c", type=int, required=True)
    sim.add_argument("--n", required=True, help="comma-separated sample sizes")
    sim.add_argument("--s", default="auto", help="edge probability, or 'auto'")
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--share-distributions", action="store_true")
    sim.add_argument("--independent-supports", action="store_true",
                     help="draw each group's zero pattern independently")
    sim.add_argument("--out-dir", required=True)
    sim.set_defaults(func=cmd_simulate)

    ben = sub.add_parser("bench", help="run the simulation benchmarks")
    ben.add_argument("--preset", choices=["exp1", "exp2", "custom"],
                     default="custom")
    ben.add_argument("--p", type=int)
    ben.add_argument("--c", type=int)
    ben.add_argument("--n", help="comma-separated sample sizes")
    ben.add_argument("--q", type=int)
    ben.add_argument("--s", default="auto")
    ben.add_argument("--trials", type=int, default=100)
    ben.add_argument("--seed", type=int, required=True)
    ben.add_argument("--success-mode", choices=["support", "exact"],
                     default="support")
    ben.add_argument("--naive-center-per-group", action="store_true")
    ben.add_argument("--share-distributions", action="store_true")
    ben.add_argument("--independent-supports", action="store_true",
                     help="draw each group's zero pattern independently")
    _add_kgv_args(ben)
    ben.add_argument("--out", required=True)
    ben.add_argument("--plot-data", default=None)
    ben.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GroupLingamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
