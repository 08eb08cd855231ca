"""``netfail`` command line.

Every subcommand writes a JSON and/or CSV payload. With ``--output PREFIX``
the payloads go to ``PREFIX.json`` / ``PREFIX.csv`` next to a
``PREFIX.manifest.json`` that holds the parameters and wall-clock time, so
the payloads themselves are byte-identical across re-runs.

Exit codes: 0 success, 2 usage or parse error, 3 infeasible graph/model.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from netfail import __version__
from netfail import cascade, frontal, markov, protection, random_graph
from netfail.graph_core import (
    UNREACHABLE,
    GraphFormatError,
    Graph,
    is_connected,
    line_graph,
    read_graph,
)
from netfail.spectral import ConvergenceError

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 2, 3

log = logging.getLogger("netfail")


class UsageError(Exception):
    pass


class Infeasible(Exception):
    pass


def _int_list(text: str) -> list[int]:
    items = [x for x in text.replace(",", " ").split() if x]
    if not items:
        raise argparse.ArgumentTypeError("expected a non-empty list of integers")
    try:
        return [int(x) for x in items]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None


def _float_list(text: str) -> list[float]:
    items = [x for x in text.replace(",", " ").split() if x]
    if not items:
        raise argparse.ArgumentTypeError("expected a non-empty list of numbers")
    try:
        return [float(x) for x in items]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number list: {text!r}") from None


def _default_seed() -> int:
    env = os.environ.get("NETFAIL_SEED")
    return int(env) if env not in (None, "") else 0


def _load_graph(path: str) -> Graph:
    try:
        return read_graph(path)
    except (OSError, GraphFormatError) as exc:
        raise UsageError(f"cannot read graph {path}: {exc}") from exc


def read_matrix_csv(path: str) -> np.ndarray:
    """Matrix file: a ``rows=<n>`` header, then ``n`` comma-separated rows."""
    try:
        lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    except OSError as exc:
        raise UsageError(f"cannot read matrix {path}: {exc}") from exc
    if not lines or not lines[0].startswith("rows="):
        raise UsageError("matrix file must start with 'rows=<n>'")
    try:
        n = int(lines[0][5:])
        rows = [[float(x) for x in ln.split(",")] for ln in lines[1:]]
    except ValueError as exc:
        raise UsageError(f"bad matrix file: {exc}") from exc
    if len(rows) != n or any(len(r) != n for r in rows):
        raise UsageError(f"matrix must be {n}x{n}")
    return np.array(rows, dtype=float).reshape(n, n)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(x):
    return None if x == UNREACHABLE else int(x)


# --- subcommands -------------------------------------------------------------

def cmd_cascade(args):
    g = _load_graph(args.graph)
    seeds = args.seeds
    try:
        timeline = cascade.simulate_cascade(g, seeds)
    except (IndexError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    connected = is_connected(g)
    summary = {"t_min": None, "argmin": None, "t_max": None, "argmax": None}
    warning = None
    if connected and g.n:
        summary["t_min"], summary["argmin"] = cascade.min_damage_time(g)
        summary["t_max"], summary["argmax"] = cascade.max_damage_time(g)
    else:
        warning = "graph is disconnected: some vertices are never damaged"
        log.warning(warning)
    rows = timeline.csv_rows()
    if args.max_t is not None:
        rows = rows[: args.max_t + 1]
    payload = {
        "n": g.n,
        "seeds": sorted(timeline.seeds),
        "connected": connected,
        "t_total": _num(timeline.total_time),
        **summary,
        "waves": [sorted(w) for w in timeline.waves[: len(rows)]],
        "warning": warning,
    }
    return payload, _csv_text(["step", "newly_damaged_count", "cumulative_count", "vertex_list"], rows)


def cmd_protect(args):
    g = _load_graph(args.graph)
    if args.budget < 1:
        raise UsageError("--budget must be at least 1")
    try:
        plan = protection.select_protection_tree(g, args.mode, args.budget, args.seed, args.threads)
    except cascade.DisconnectedGraphError as exc:
        raise Infeasible(str(exc)) from exc
    except protection.TreeCapExceeded as exc:
        raise Infeasible(f"{exc}; rerun with --mode sampled or a larger --budget") from exc
    payload = plan.to_json()
    return payload, _csv_text(["u", "v"], plan.chosen_tree.tree.edges)


def _graph_rate(g: Graph) -> float | None:
    if g.m == 0:
        return None
    return markov.damage_rate(g)


def cmd_markov(args):
    times = args.times
    if any(t < 0 for t in times):
        raise UsageError("times must be non-negative")
    if args.model == "matrix":
        if not args.matrix:
            raise UsageError("--model matrix needs --matrix FILE")
        a = read_matrix_csv(args.matrix)
        n = a.shape[0]
        if args.initial is not None:
            init = np.array(args.initial, dtype=float)
            if init.shape != (n,):
                raise UsageError(f"--initial needs {n} entries")
        else:
            init = np.zeros(n)
            init[0] = 1.0
        try:
            rates = markov.RateMatrix(a, args.kind)
            pi0 = markov.StateVector(init, "distribution" if args.kind == "generator" else "marginal")
            states = [markov.evolve_continuous(pi0, rates, t).probabilities for t in times]
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        except OverflowError as exc:
            raise Infeasible(str(exc)) from exc
        try:
            lam = markov.damage_rate(a) if np.any(a) else None
        except ConvergenceError:
            lam = None
        payload = {
            "model": "matrix",
            "times": times,
            "state_probabilities": [s.tolist() for s in states],
            "damage_rate": lam,
        }
        rows = [(t, i, float(p)) for t, s in zip(times, states) for i, p in enumerate(s)]
        return payload, _csv_text(["time", "state", "p"], rows)

    if not args.graph:
        raise UsageError(f"--model {args.model} needs --graph FILE")
    g = _load_graph(args.graph)
    try:
        if args.model == "exact":
            if g.n > args.limit:
                raise Infeasible(
                    f"exact chain needs 2^{g.n} states (limit {args.limit} vertices); "
                    "use --model montecarlo"
                )
            probs = markov.exact_vertex_probabilities(g, args.rate, args.sources, times)
            intact = markov.exact_intact_edges(g, args.rate, args.sources, times)
            outcome = markov.EpidemicOutcome(None, tuple(times), probs, np.zeros_like(probs), intact)
        else:
            if args.trials < 1:
                raise UsageError("--trials must be at least 1")
            outcome = markov.simulate_epidemic(
                g, args.rate, args.sources, max(times), times, args.trials, args.seed, args.threads
            )
    except (IndexError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    payload = {"model": args.model, **outcome.to_json(), "damage_rate": _graph_rate(g)}
    return payload, _csv_text(["time", "vertex", "p", "stderr"], outcome.csv_rows())


_ER_FIELDS = ["n", "c", "p", "trials", "connected_count", "empirical_probability", "bound", "slack", "passed"]


def cmd_er(args):
    if args.n < 2 or args.c <= 0 or args.trials < 1:
        raise UsageError("need n >= 2, c > 0 and trials >= 1")
    report = random_graph.threshold_experiment(args.n, args.c, args.trials, args.seed, args.threads)
    payload = report.to_json()
    reports = [report]
    if args.sweep:
        reports = random_graph.threshold_sweep(args.n, args.sweep, args.trials, args.seed, args.threads)
        payload["sweep"] = [r.to_json() for r in reports]
    rows = [[r.to_json()[f] for f in _ER_FIELDS] for r in reports]
    return payload, _csv_text(_ER_FIELDS, rows)


def cmd_frontal(args):
    n, r, k = args.N, args.r, args.k
    if n < 1 or r < 1 or k < 1:
        raise UsageError("N, r and k must be positive")
    if args.default_p:
        p = frontal.default_p(n, r)
    elif args.p is not None:
        p = args.p
    else:
        raise UsageError("give --p or --default-p")
    if not 0.0 <= p <= 1.0:
        raise UsageError("--p must lie in [0, 1]")
    if args.trials < 2:
        raise UsageError("--trials must be at least 2")
    st = frontal.monte_carlo_stats(n, r, k, p, args.trials, args.seed, args.threads)
    regen = None
    if args.damage_fraction is not None:
        if not 0.0 <= args.damage_fraction <= 1.0:
            raise UsageError("--damage-fraction must lie in [0, 1]")
        regen = frontal.regeneration_cycle(
            n, r, k, p, args.trials, args.damage_fraction, args.seed, args.threads
        ).to_json()
    payload = {
        "N": n,
        "r": r,
        "k": k,
        "p": p,
        "stats": st.to_json(),
        "overlap_estimate": frontal.overlap_estimate(n, r, k, p),
        "regeneration": regen,
    }
    grid = args.sweep_n or [n]
    rows = []
    for size in grid:
        pp = frontal.default_p(size, r) if args.default_p else p
        a = frontal.activation_stats(size, pp, r, k)
        rows.append([size, pp, a.p_c, a.expected_active, a.variance])
    return payload, _csv_text(["N", "p", "p_c", "expected_active", "variance"], rows)


def cmd_line_graph(args):
    g = _load_graph(args.graph)
    lg = line_graph(g)
    payload = {
        "n": lg.n,
        "edges": [[u, v] for u, v in lg.edges],
        "vertex_edges": [[u, v] for u, v in g.edges],
    }
    return payload, _csv_text(["u", "v"], lg.edges)


# --- plumbing ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=_default_seed(),
                        help="master RNG seed (default: $NETFAIL_SEED or 0)")
    common.add_argument("--format", choices=["json", "csv", "both"], default="json")
    common.add_argument("--output", help="output path prefix; stdout when omitted")
    common.add_argument("--threads", type=int, default=1, help="worker threads (speed only)")

    parser = argparse.ArgumentParser(prog="netfail", description="Damage scenarios on networks.")
    parser.add_argument("--version", action="version", version=f"netfail {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cascade", parents=[common], help="deterministic cascade damage")
    p.add_argument("graph")
    p.add_argument("--seeds", type=_int_list, required=True, help="initially damaged vertices")
    p.add_argument("--max-t", type=int, default=None, help="truncate the timeline at this step")
    p.set_defaults(func=cmd_cascade)

    p = sub.add_parser("protect", parents=[common], help="spanning-tree protection plan")
    p.add_argument("graph")
    p.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    p.add_argument("--budget", type=int, default=protection.DEFAULT_TREE_CAP)
    p.set_defaults(func=cmd_protect)

    p = sub.add_parser("markov", parents=[common], help="probabilistic damage")
    p.add_argument("--graph")
    p.add_argument("--matrix")
    p.add_argument("--model", choices=["exact", "montecarlo", "matrix"], default="exact")
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--times", type=_float_list, default=[1.0])
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--sources", type=_int_list, default=[0], help="initially damaged vertices")
    p.add_argument("--initial", type=_float_list, default=None, help="initial vector (matrix model)")
    p.add_argument("--kind", choices=["generator", "general"], default="generator")
    p.add_argument("--limit", type=int, default=markov.DEFAULT_STATE_LIMIT)
    p.set_defaults(func=cmd_markov)

    p = sub.add_parser("er", parents=[common], help="Erdos-Renyi connectivity threshold")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--sweep", type=_float_list, default=None, help="c grid for the CSV sweep")
    p.set_defaults(func=cmd_er)

    p = sub.add_parser("frontal", parents=[common], help="random frontal layer statistics")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--default-p", action="store_true", help="use p = (N r)^-1/2")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--damage-fraction", type=float, default=None,
                   help="fraction of the layer damaged then regenerated")
    p.add_argument("--sweep-n", type=_int_list, default=None, help="N grid for the CSV sweep")
    p.set_defaults(func=cmd_frontal)

    p = sub.add_parser("line-graph", parents=[common], help="edge-damage reduction")
    p.add_argument("graph")
    p.set_defaults(func=cmd_line_graph)
    return parser


def _emit(args, payload: dict, csv_payload: str) -> None:
    text = json.dumps(payload, indent=2, allow_nan=False) + "\n"
    if args.output is None:
        if args.format in ("json", "both"):
            sys.stdout.write(text)
        if args.format in ("csv", "both"):
            sys.stdout.write(csv_payload)
        return
    prefix = Path(args.output)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    if args.format in ("json", "both"):
        Path(f"{prefix}.json").write_text(text)
    if args.format in ("csv", "both"):
        Path(f"{prefix}.csv").write_text(csv_payload)


def _manifest(args, argv, duration: float) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {
        "command": args.command,
        "argv": list(argv),
        "parameters": params,
        "seed": args.seed,
        "version": __version__,
        "duration_seconds": duration,
    }


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="netfail: %(message)s")
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        parser.print_usage(sys.stderr)
        print("netfail: --threads must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    start = time.perf_counter()
    try:
        payload, csv_payload = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"netfail {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Infeasible as exc:
        print(f"netfail {args.command}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _emit(args, payload, csv_payload)
    if args.output is not None:
        manifest = _manifest(args, argv, time.perf_counter() - start)
        Path(f"{args.output}.manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
