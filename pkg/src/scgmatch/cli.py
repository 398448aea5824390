"""
Command-line front end.

Subcommands::

    scgmatch match            solve one pair of graph files, write JSON
    scgmatch bench-operators  operator distance to the optimal assignment, CSV
    scgmatch bench-noise      adaptive vs fixed step on noisy Delaunay pairs, CSV
    scgmatch selftest         run the oracle suite

Exit codes: 0 success, 1 input or configuration error, 2 solver error,
3 failed self-test. Every run that writes a file also writes a
``<out>.manifest.json`` sidecar describing how it was produced.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .graph import GraphFormatError, PermutationMatching, SolverConfig, load_graph
from .metrics import accuracy, matching_error
from .operators import alternating_iterates, dynamic_softassign_start, hungarian, sinkhorn_iterates
from .selftest import CHECKS, run_checks
from .solver import VARIANTS, scg_solve, variant_config
from .synth import GenSpec, noisy_pair, random_profit

OPERATOR_COLUMNS = ("phi", "operator", "iter", "distance", "seed")
NOISE_COLUMNS = ("algo", "alpha_mode", "n", "q", "seed", "time", "matching_error", "accuracy")
BENCH_OPERATORS = ("dynamic-softassign", "alternating-projection")


class UsageError(Exception):
    """Bad input or configuration; maps to exit code 1."""


@dataclass
class RunManifest:
    command: str
    config: dict
    seeds: list
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    outputs: list = field(default_factory=list)

    @property
    def run_id(self) -> str:
        """Hash of everything that determines the metric values."""
        key = json.dumps([self.command, self.config, self.seeds, self.version], sort_keys=True, default=str)
        return hashlib.sha256(key.encode()).hexdigest()[:16]

    def to_dict(self):
        return {"run_id": self.run_id, **asdict(self)}

    def write(self, out: Path):
        path = out.with_name(out.name + ".manifest.json")
        path.write_text(json.dumps(self.to_dict(), indent=2, default=str) + "\n")
        return path


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _alpha(text):
    if text == "adaptive":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha must be a number or 'adaptive', got {text!r}") from None


def _add_solver_flags(p):
    p.add_argument("--gamma", type=float, default=None, help="softassign sharpness (default 3 with features, else 5)")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="node-attribute weight")
    p.add_argument("--eps-outer", type=float, default=1e-4)
    p.add_argument("--eps-sinkhorn", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=30, help="outer iteration cap")
    p.add_argument("--seed", type=int, default=0)


def _solver_overrides(args):
    return dict(gamma=args.gamma, lam=args.lam, eps_outer=args.eps_outer,
                eps_sinkhorn=args.eps_sinkhorn, max_outer_iters=args.max_iters)


def _config(algo, alpha, args) -> SolverConfig:
    try:
        return variant_config(algo, alpha, **_solver_overrides(args))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


def _open_out(out):
    if out is None or out == "-":
        return None
    path = Path(out)
    if not path.parent.exists():
        raise UsageError(f"output directory {path.parent} does not exist")
    return path


def _write_csv(rows, columns, path):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    if path is None:
        sys.stdout.write(buf.getvalue())
    else:
        path.write_text(buf.getvalue(), encoding="utf-8")


def _load_truth(path, n, n_tilde):
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read ground truth {path}: {exc}") from None
    pairs = data.get("pairs") if isinstance(data, dict) else data
    try:
        return PermutationMatching(tuple((int(i), int(j)) for i, j in pairs), n, n_tilde)
    except (TypeError, ValueError, IndexError) as exc:
        raise UsageError(f"bad ground truth in {path}: {exc}") from None


def cmd_match(args):
    try:
        gA, gB = load_graph(args.a), load_graph(args.b)
    except (OSError, GraphFormatError) as exc:
        raise UsageError(str(exc)) from None
    cfg = _config(args.algo, args.alpha, args)
    truth = _load_truth(args.truth, gA.n, gB.n) if args.truth else None
    out = _open_out(args.out)

    try:
        res = scg_solve(gA, gB, cfg)
        err = matching_error(res.matching, gA, gB, cfg.lam)
    except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2

    manifest = RunManifest("match", {"algo": args.algo, **asdict(cfg), "a": args.a, "b": args.b},
                           [args.seed], outputs=[str(out)] if out else [])
    result = {
        "pairs": [list(p) for p in res.matching.pairs],
        "objective": res.objective,
        "matching_error": err,
        "iterations": res.iterations,
        "alpha_trace": res.alpha_trace,
        "wall_time": res.wall_time,
        "stop_reason": res.stop_reason,
        "manifest": manifest.run_id,
    }
    if truth is not None:
        result["accuracy"] = accuracy(res.matching, truth)
    text = json.dumps(result, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)
        manifest.write(out)
    return 0


def operator_distances(phi, seed, n=50, iters=50, gamma=5.0):
    """Distance to the optimal assignment after each inner iteration, per operator."""
    X = random_profit(n, phi, seed)
    target = hungarian(X).to_matrix()
    S0, _ = dynamic_softassign_start(X, gamma)
    runs = {
        "dynamic-softassign": sinkhorn_iterates(S0),
        "alternating-projection": alternating_iterates(X, iters),
    }
    out = {}
    for name, it in runs.items():
        out[name] = [float(np.linalg.norm(P - target)) for P, _ in zip(it, range(iters))]
    return out


def cmd_bench_operators(args):
    if args.iters < 1 or args.n < 2 or args.trials < 1:
        raise UsageError("--iters and --trials must be >= 1 and --n >= 2")
    if any(phi <= 0 for phi in args.phi):
        raise UsageError("--phi values must be positive")
    out = _open_out(args.out)
    seeds = [args.seed + k for k in range(args.trials)]
    rows = []
    for phi in args.phi:
        for seed in seeds:
            dist = operator_distances(phi, seed, args.n, args.iters, args.gamma)
            for name in BENCH_OPERATORS:
                rows.extend((phi, name, t + 1, d, seed) for t, d in enumerate(dist[name]))
    _write_csv(rows, OPERATOR_COLUMNS, out)
    if out is not None:
        cfg = {"phi": args.phi, "n": args.n, "iters": args.iters, "gamma": args.gamma}
        RunManifest("bench-operators", cfg, seeds, outputs=[str(out)]).write(out)
    return 0


def trial_seed(base, n, q, trial):
    return int(np.random.SeedSequence([base, n, q, trial]).generate_state(1)[0])


def _noise_trial(job):
    algo, mode, cfg, n, q, seed = job
    gA, gB, truth = noisy_pair(GenSpec(n, seed=seed, deletion_pct=q))
    res = scg_solve(gA, gB, cfg)
    return (algo, mode, n, q, seed, res.wall_time,
            matching_error(res.matching, gA, gB, cfg.lam), accuracy(res.matching, truth))


def improvement_summary(rows):
    """Percentage improvement of the adaptive step over the fixed one, per algorithm."""
    by = {}
    for algo, mode, *_, t, err, acc in rows:
        by.setdefault(algo, {}).setdefault(mode, []).append((t, err, acc))
    table = {}
    for algo, modes in by.items():
        if not {"fixed", "adaptive"} <= set(modes):
            continue
        f = np.mean(modes["fixed"], axis=0)
        a = np.mean(modes["adaptive"], axis=0)
        table[algo] = {
            "time": 100.0 * (f[0] - a[0]) / f[0],
            "matching_error": 100.0 * (f[1] - a[1]) / f[1] if f[1] else float("nan"),
            "accuracy": 100.0 * (a[2] - f[2]) / f[2] if f[2] else float("nan"),
        }
    return table


def format_summary(table):
    lines = [f"{'Algorithm':<10}{'Time':>10}{'MatchingError':>16}{'Accuracy':>12}"]
    for algo, imp in table.items():
        lines.append(f"{algo:<10}{imp['time']:>9.1f}%{imp['matching_error']:>15.1f}%{imp['accuracy']:>11.1f}%")
    return "\n".join(lines) + "\n"


def cmd_bench_noise(args):
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if any(n < 3 for n in args.sizes):
        raise UsageError("--sizes must be >= 3")
    for q in args.deletions:
        if not 0 <= q < 50:
            raise UsageError("--deletions must lie in [0, 50)")
    algos = [a.upper() for a in args.algos]
    unknown = [a for a in algos if a not in VARIANTS]
    if unknown:
        raise UsageError(f"unknown algorithms {unknown}; choose from {sorted(VARIANTS)}")
    if args.alpha == "adaptive":
        raise UsageError("--alpha sets the fixed arm and must be a number")
    jobs = []
    for algo in algos:
        fixed = args.alpha
        if fixed is None:
            default = variant_config(algo).alpha
            fixed = 1.0 if default == "adaptive" else default
        cfgs = {"fixed": _config(algo, fixed, args), "adaptive": _config(algo, "adaptive", args)}
        for n in args.sizes:
            for q in args.deletions:
                for trial in range(args.trials):
                    seed = trial_seed(args.seed, n, q, trial)
                    jobs.extend((algo, mode, cfg, n, q, seed) for mode, cfg in cfgs.items())
    out = _open_out(args.out)

    workers = max(1, int(os.environ.get("GM_THREADS", "1") or 1))
    try:
        if workers == 1:
            rows = [_noise_trial(j) for j in jobs]
        else:
            with ThreadPoolExecutor(workers) as pool:
                rows = list(pool.map(_noise_trial, jobs))
    except ValueError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2
    rows.sort(key=lambda r: r[:5])
    _write_csv(rows, NOISE_COLUMNS, out)

    summary = format_summary(improvement_summary(rows))
    if out is None:
        sys.stderr.write(summary)
    else:
        sys.stdout.write(summary)
        summary_path = out.with_name(out.name + ".summary.txt")
        summary_path.write_text(summary)
        cfg = {"algos": algos, "sizes": args.sizes, "deletions": args.deletions, "trials": args.trials,
               "alpha": args.alpha, **_solver_overrides(args)}
        seeds = sorted({j[5] for j in jobs})
        RunManifest("bench-noise", cfg, [args.seed, *seeds], outputs=[str(out), str(summary_path)]).write(out)
    return 0


def cmd_selftest(args):
    names = None
    if args.filter:
        names = [n.strip() for n in args.filter.split(",") if n.strip()]
    try:
        rows = run_checks(names)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    width = max(len(r[0]) for r in rows)
    for name, ok, detail in rows:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    return 0 if all(ok for _, ok, _ in rows) else 3


def build_parser():
    parser = argparse.ArgumentParser(prog="scgmatch", description="Graph matching solver and benchmarks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("match", help="match two graph files")
    p.add_argument("--a", required=True, help="first graph (JSON)")
    p.add_argument("--b", required=True, help="second graph (JSON)")
    p.add_argument("--truth", help="ground-truth pairs (JSON) for an accuracy field")
    p.add_argument("--algo", default="scg", choices=[v.lower() for v in VARIANTS])
    p.add_argument("--alpha", type=_alpha, default=None, help="fixed step or 'adaptive'")
    p.add_argument("--out", help="result JSON path (default stdout)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("bench-operators", help="operator convergence at several magnitudes")
    p.add_argument("--phi", type=_float_list, default=[1.0, 10.0, 100.0])
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--trials", type=int, default=1, help="seeds seed, seed+1, ...")
    p.add_argument("--gamma", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_bench_operators)

    p = sub.add_parser("bench-noise", help="adaptive vs fixed step on noisy Delaunay pairs")
    p.add_argument("--sizes", type=_int_list, default=[50, 100, 200])
    p.add_argument("--deletions", type=_int_list, default=[1, 2, 3, 4, 5])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--algos", type=lambda s: [x for x in s.split(",") if x], default=["scg"])
    p.add_argument("--alpha", type=_alpha, default=None, help="fixed step for the fixed-alpha arm")
    p.add_argument("--out", help="CSV path (default stdout)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bench_noise)

    p = sub.add_parser("selftest", help="run the oracle suite")
    p.add_argument("--filter", help=f"comma-separated subset of: {', '.join(CHECKS)}")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; keep 2 for solver failures
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
