"""Command-line interface.

Subcommands: search (top-K maximal k-biplexes of an edge-list file),
generate (seeded random bipartite graph), bench (grid runs from a config
file, one JSON line each), gamma (branching-factor roots), oracle
(brute-force reference answers for small graphs).

Exit codes: 0 success; 2 bad input (file parse errors, invalid parameter
combinations); 3 time limit hit (a partial report is still written);
1 internal failure.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .biplexes import (
    ResultPool,
    SearchParams,
    is_connected,
    is_k_biplex,
    is_maximal,
)
from .frameworks import FRAMEWORKS, KERNELS, run_search
from .graph import LabeledGraph, ParseError, generate_er, load_edge_list
from .oracle import OracleSizeError, enumerate_all_mbps
from .search import SearchTimeout, gamma_k

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BAD_INPUT = 2
EXIT_TIME_LIMIT = 3


@dataclass(frozen=True)
class RunConfig:
    """Resolved search invocation; thresholds default to 2k+1."""

    input: str
    k: int = 1
    topk: int = 1
    theta_l: Optional[int] = None
    theta_r: Optional[int] = None
    kernel: str = "fast"
    framework: str = "pbie"
    workers: int = 1
    time_limit: Optional[float] = None
    output: Optional[str] = None

    def params(self) -> SearchParams:
        default_theta = 2 * self.k + 1
        return SearchParams(
            k=self.k,
            topk=self.topk,
            theta_l=self.theta_l if self.theta_l is not None else default_theta,
            theta_r=self.theta_r if self.theta_r is not None else default_theta,
        )


def _emit(payload: dict, output: Optional[str]) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _self_check(labeled: LabeledGraph, pool: ResultPool, params: SearchParams) -> None:
    """Re-verifies every pooled result against the definitions before emit."""
    graph = labeled.graph
    floor = 2 * params.k + 1
    for entry in pool.entries_sorted():
        if len(entry.left) < params.theta_l or len(entry.right) < params.theta_r:
            raise AssertionError(f"result below size thresholds: {entry}")
        if not is_k_biplex(graph, entry.left, entry.right, params.k):
            raise AssertionError(f"result is not a k-biplex: {entry}")
        if not is_maximal(graph, entry.left, entry.right, params.k):
            raise AssertionError(f"result is not maximal: {entry}")
        if len(entry.left) >= floor and len(entry.right) >= floor:
            if not is_connected(graph, entry.left, entry.right):
                raise AssertionError(f"result is not connected: {entry}")


def cmd_search(cfg: RunConfig) -> int:
    try:
        labeled = load_edge_list(cfg.input)
    except ParseError as err:
        print(f"error: {cfg.input}: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT

    try:
        params = cfg.params()
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT

    pool = ResultPool(params.topk)
    deadline = (
        time.perf_counter() + cfg.time_limit if cfg.time_limit is not None else None
    )
    timed_out = False
    try:
        stats = run_search(
            labeled.graph,
            params,
            pool,
            kernel=cfg.kernel,
            framework=cfg.framework,
            workers=cfg.workers,
            deadline=deadline,
        )
    except SearchTimeout:
        timed_out = True
        stats = None
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT

    if not timed_out:
        _self_check(labeled, pool, params)

    payload = {
        "input": cfg.input,
        "graph": {
            "left": labeled.graph.left_count,
            "right": labeled.graph.right_count,
            "edges": labeled.graph.edge_count,
        },
        "params": {
            "k": params.k,
            "topk": params.topk,
            "theta_l": params.theta_l,
            "theta_r": params.theta_r,
        },
        "kernel": cfg.kernel,
        "framework": cfg.framework,
        "workers": cfg.workers,
        "results": [
            entry.to_json_obj(labeled.left_labels, labeled.right_labels)
            for entry in pool.entries_sorted()
        ],
        # Wall time is deliberately left out: the report must be
        # byte-stable across identical single-worker runs.
        "stats": stats.to_json_obj(include_ms=False) if stats is not None else None,
        "timeout": timed_out,
    }
    _emit(payload, cfg.output)
    return EXIT_TIME_LIMIT if timed_out else EXIT_OK


def cmd_generate(
    left: int, right: int, edges: int, seed: int, output: Optional[str]
) -> int:
    try:
        graph = generate_er(left, right, edges, seed)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT
    lines = [f"% bipartite edge list: {left} x {right}, {edges} edges, seed {seed}"]
    lines.extend(f"{v} {u}" for v, u in graph.edges())
    text = "\n".join(lines) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _parse_config_values(raw: str) -> list:
    values = []
    for token in raw.split(","):
        token = token.strip()
        if not token:
            continue
        if ".." in token:
            lo, hi = token.split("..", 1)
            values.extend(range(int(lo), int(hi) + 1))
        else:
            try:
                values.append(int(token))
            except ValueError:
                try:
                    values.append(float(token))
                except ValueError:
                    values.append(token)
    return values


def load_bench_config(path: str) -> dict[str, list]:
    """Parses `key = value[,value...]` lines; '#' or '%' start comments.

    Integer ranges may be written `lo..hi` (inclusive). Unknown keys are
    rejected so a typo cannot silently shrink a sweep.
    """
    known = {
        "left",
        "right",
        "edges",
        "density",
        "k",
        "topk",
        "theta_l",
        "theta_r",
        "kernels",
        "frameworks",
        "seeds",
        "workers",
        "time_limit",
    }
    grid: dict[str, list] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("%"):
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value' form", line_no)
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in known:
            raise ParseError(f"unknown config key {key!r}", line_no)
        grid[key] = _parse_config_values(value)
    return grid


def cmd_bench(config_path: str, output: Optional[str]) -> int:
    try:
        grid = load_bench_config(config_path)
    except ParseError as err:
        print(f"error: {config_path}: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT

    lefts = grid.get("left", [200])
    rights = grid.get("right", [200])
    ks = grid.get("k", [1])
    topks = grid.get("topk", [1])
    kernels = grid.get("kernels", ["fast"])
    frameworks = grid.get("frameworks", ["pbie"])
    seeds = grid.get("seeds", [0])
    workers_list = grid.get("workers", [1])
    time_limits = grid.get("time_limit", [None])

    sink = open(output, "w", encoding="utf-8") if output else sys.stdout
    try:
        for left, right, k, topk, kernel, framework, seed, workers, limit in itertools.product(
            lefts, rights, ks, topks, kernels, frameworks, seeds, workers_list, time_limits
        ):
            if "edges" in grid:
                edge_counts = grid["edges"]
            elif "density" in grid:
                edge_counts = [
                    int(round(d * (left + right) / 2)) for d in grid["density"]
                ]
            else:
                edge_counts = [int(round(8 * (left + right) / 2))]
            for edges in edge_counts:
                theta_l_values = grid.get("theta_l", [2 * k + 1])
                theta_r_values = grid.get("theta_r", [2 * k + 1])
                for theta_l, theta_r in itertools.product(theta_l_values, theta_r_values):
                    graph = generate_er(left, right, edges, seed)
                    params = SearchParams(
                        k=k, topk=topk, theta_l=theta_l, theta_r=theta_r
                    )
                    pool = ResultPool(params.topk)
                    deadline = (
                        time.perf_counter() + limit if limit is not None else None
                    )
                    timed_out = False
                    t0 = time.perf_counter()
                    try:
                        stats = run_search(
                            graph,
                            params,
                            pool,
                            kernel=kernel,
                            framework=framework,
                            workers=workers,
                            deadline=deadline,
                        )
                        stats_obj = stats.to_json_obj()
                    except SearchTimeout:
                        timed_out = True
                        stats_obj = None
                    wall_ms = (time.perf_counter() - t0) * 1000.0
                    line = {
                        "left": left,
                        "right": right,
                        "edges": edges,
                        "seed": seed,
                        "k": k,
                        "topk": topk,
                        "theta_l": theta_l,
                        "theta_r": theta_r,
                        "kernel": kernel,
                        "framework": framework,
                        "workers": workers,
                        "best_edges": pool.best_edge_count(),
                        "results": len(pool),
                        "stats": stats_obj,
                        "ms": round(wall_ms, 3),
                        "timeout": timed_out,
                    }
                    sink.write(json.dumps(line, sort_keys=True) + "\n")
                    sink.flush()
    finally:
        if output:
            sink.close()
    return EXIT_OK


def cmd_gamma(ks: Sequence[int], output: Optional[str]) -> int:
    try:
        values = {str(k): gamma_k(k) for k in ks}
    except (ValueError, ArithmeticError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT
    _emit(values, output)
    return EXIT_OK


def cmd_oracle(cfg: RunConfig) -> int:
    try:
        labeled = load_edge_list(cfg.input)
        params = cfg.params()
        result = enumerate_all_mbps(labeled.graph, params)
    except ParseError as err:
        print(f"error: {cfg.input}: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (OracleSizeError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT
    payload = {
        "input": cfg.input,
        "params": {
            "k": params.k,
            "topk": params.topk,
            "theta_l": params.theta_l,
            "theta_r": params.theta_r,
        },
        "all_mbps": [
            entry.to_json_obj(labeled.left_labels, labeled.right_labels)
            for entry in result.all_mbps
        ],
        "topk": [
            entry.to_json_obj(labeled.left_labels, labeled.right_labels)
            for entry in result.topk
        ],
    }
    _emit(payload, cfg.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biplex",
        description="Exact top-K maximal k-biplex search in bipartite graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_param_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--input", required=True, help="edge-list file (two columns)")
        p.add_argument("--k", type=int, default=1, help="disconnection budget")
        p.add_argument("--topk", type=int, default=1, help="results to keep")
        p.add_argument(
            "--theta-l", type=int, default=None, help="min left size (default 2k+1)"
        )
        p.add_argument(
            "--theta-r", type=int, default=None, help="min right size (default 2k+1)"
        )
        p.add_argument("--output", default=None, help="write JSON here instead of stdout")

    p_search = sub.add_parser("search", help="find the top-K maximal k-biplexes")
    add_param_flags(p_search)
    p_search.add_argument("--kernel", choices=sorted(KERNELS), default="fast")
    p_search.add_argument("--framework", choices=FRAMEWORKS, default="pbie")
    p_search.add_argument("--workers", type=int, default=1)
    p_search.add_argument(
        "--time-limit", type=float, default=None, help="seconds before aborting"
    )

    p_gen = sub.add_parser("generate", help="write a seeded random edge list")
    p_gen.add_argument("--left", type=int, required=True)
    p_gen.add_argument("--right", type=int, required=True)
    p_gen.add_argument("--edges", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--output", default=None)

    p_bench = sub.add_parser("bench", help="sweep a parameter grid, JSONL output")
    p_bench.add_argument("--config", required=True, help="key = value[,value...] file")
    p_bench.add_argument("--output", default=None)

    p_gamma = sub.add_parser("gamma", help="branching-factor roots")
    p_gamma.add_argument(
        "--k", default="1,2,3", help="comma-separated budgets, e.g. 1,2,3"
    )
    p_gamma.add_argument("--output", default=None)

    p_oracle = sub.add_parser("oracle", help="brute-force answers for small graphs")
    add_param_flags(p_oracle)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "search":
        cfg = RunConfig(
            input=args.input,
            k=args.k,
            topk=args.topk,
            theta_l=args.theta_l,
            theta_r=args.theta_r,
            kernel=args.kernel,
            framework=args.framework,
            workers=args.workers,
            time_limit=args.time_limit,
            output=args.output,
        )
        return cmd_search(cfg)
    if args.command == "generate":
        return cmd_generate(args.left, args.right, args.edges, args.seed, args.output)
    if args.command == "bench":
        return cmd_bench(args.config, args.output)
    if args.command == "gamma":
        try:
            ks = [int(tok) for tok in str(args.k).split(",") if tok.strip()]
        except ValueError:
            print(f"error: cannot parse k list {args.k!r}", file=sys.stderr)
            return EXIT_BAD_INPUT
        return cmd_gamma(ks, args.output)
    if args.command == "oracle":
        cfg = RunConfig(
            input=args.input,
            k=args.k,
            topk=args.topk,
            theta_l=args.theta_l,
            theta_r=args.theta_r,
            output=args.output,
        )
        return cmd_oracle(cfg)
    parser.error(f"unknown command {args.command!r}")
    return EXIT_BAD_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
