"""Acceptance gate: seven release criteria, one test per criterion.

Each test finishes by recording a one-line outcome that the terminal
summary prints as `criterion N (<title>): <outcome>`.

Scale control (environment variable BIPLEX_ACCEPTANCE_SCALE):
  unset      contract scale: criteria 1-4, 6, 7 fully; criterion 5 runs its
             30-instance branch-count battery (about an hour of kernel time
             on one CPU) and skips the 10-instance wall-time battery, whose
             measured cost on this hardware is ~12+ hours (see the skip
             message for the calibration numbers).
  full       additionally runs the criterion-5 wall-time battery.
  quick      developer smoke mode: shrinks criterion 5's battery and
             records it as SKIPPED (the contract-scale claim is not made).

Dataset-backed golden checks (criterion 2) look for data/<name>.edges and
skip with fetch instructions when a dataset is absent.
"""
import json
import os
import statistics
import time
from pathlib import Path

import pytest

from biplex import (
    ResultPool,
    SearchParams,
    enumerate_all_mbps,
    generate_er,
    gamma_k,
    is_connected,
    is_k_biplex,
    is_maximal,
    load_edge_list,
    run_search,
)
from biplex.frameworks import FRAMEWORKS, KERNELS
from biplex.search import SearchStats, basic_bb, fast_bb

from conftest import bernoulli_graph, record_criterion

SCALE = os.environ.get("BIPLEX_ACCEPTANCE_SCALE", "").strip().lower()
DATA_DIR = Path(__file__).resolve().parent.parent / "data"
PROGRESS_PATH = os.environ.get("BIPLEX_ACCEPTANCE_PROGRESS", "")

# Results stashed by criteria 1, 2 and 5 for the connectivity sweep (6).
_COLLECTED: list = []


def _progress(text: str) -> None:
    if PROGRESS_PATH:
        with open(PROGRESS_PATH, "a", encoding="utf-8") as fh:
            fh.write(f"{time.strftime('%H:%M:%S')} {text}\n")


def _record(number: int, title: str, outcome: str) -> None:
    record_criterion(number, title, outcome)


def _criterion(number, title):
    """Decorator: records PASS/FAIL/SKIP for the wrapped criterion test."""

    def wrap(fn):
        def run(*args, **kwargs):
            try:
                result = fn(*args, **kwargs)
            except pytest.skip.Exception as exc:
                _record(number, title, f"SKIPPED ({exc})")
                raise
            except BaseException:
                _record(number, title, "FAILED")
                raise
            _record(number, title, "PASS")
            return result

        run.__name__ = fn.__name__
        return run

    return wrap


@_criterion(1, "exhaustive-reference equivalence")
def test_criterion_1_oracle_equivalence():
    """200 seeded instances, every kernel x framework combination, exact
    agreement with the exhaustive reference on top-K edge multisets, and
    every returned member re-verified against the definitions."""
    fast_maxima = SearchStats()
    checked = 0
    for idx in range(200):
        g, _ = bernoulli_graph(1000 + idx)
        for k in (1, 2):
            theta = 2 * k + 1
            reference = {}
            for topk in (1, 3):
                params = SearchParams(
                    k=k, topk=topk, theta_l=theta, theta_r=theta
                )
                want = [
                    b.edge_count
                    for b in enumerate_all_mbps(g, params).topk
                ]
                reference[topk] = (params, want)
            for topk, (params, want) in reference.items():
                for kernel in KERNELS:
                    for framework in FRAMEWORKS:
                        pool = ResultPool(topk)
                        stats = run_search(
                            g, params, pool, kernel=kernel, framework=framework
                        )
                        got = sorted(pool.edge_multiset(), reverse=True)
                        assert got == want, (
                            f"seed {1000 + idx}, k={k}, K={topk}, "
                            f"{kernel}+{framework}: {got} != {want}"
                        )
                        for entry in pool.entries_sorted():
                            assert len(entry.left) >= params.theta_l
                            assert len(entry.right) >= params.theta_r
                            assert is_k_biplex(g, entry.left, entry.right, k)
                            assert is_maximal(g, entry.left, entry.right, k)
                            _COLLECTED.append((g, entry, k))
                        if kernel == "fast":
                            fast_maxima.merge(stats)
                        checked += 1
        if idx % 50 == 49:
            _progress(f"criterion 1: {idx + 1}/200 instances")
    assert checked == 200 * 2 * 2 * len(KERNELS) * len(FRAMEWORKS)
    # Stash the structural maxima for criterion 4.
    test_criterion_1_oracle_equivalence.fast_maxima = fast_maxima


TABLE_GOLDENS = {
    # dataset -> (|L|, |R|, edges, expected |V(H)|, expected |E(H)|)
    "divorce": (9, 50, 225, 23, 87),
    "cities": (46, 55, 1342, 43, 437),
    "cfat": (200, 200, 1537, 13, 41),
    "opsahl": (2865, 4558, 16910, 19, 87),
}


@_criterion(2, "dataset golden results")
def test_criterion_2_dataset_goldens():
    """Top-1 vertex/edge counts on four public datasets (k=1, thresholds 3,
    K=1). Skips any dataset whose edge list is not present locally."""
    missing = [
        name
        for name in TABLE_GOLDENS
        if not (DATA_DIR / f"{name}.edges").is_file()
    ]
    if missing:
        pytest.skip(
            "dataset files absent: "
            + ", ".join(sorted(missing))
            + f" — run scripts/fetch_datasets.py --data-dir {DATA_DIR} "
            "(network access required), then rerun"
        )
    params = SearchParams(k=1, topk=1, theta_l=3, theta_r=3)
    for name, (nl, nr, ne, want_v, want_e) in TABLE_GOLDENS.items():
        labeled = load_edge_list(str(DATA_DIR / f"{name}.edges"))
        g = labeled.graph
        assert (g.left_count, g.right_count, g.edge_count) == (nl, nr, ne), (
            f"{name}: unexpected graph shape"
        )
        pool = ResultPool(1)
        run_search(g, params, pool, kernel="fast", framework="pbie")
        best = pool.entries_sorted()
        assert best, f"{name}: no result"
        top = best[0]
        assert top.edge_count == want_e, (
            f"{name}: edges {top.edge_count} != {want_e}"
        )
        assert top.vertex_count == want_v, (
            f"{name}: vertices {top.vertex_count} != {want_v}"
        )
        _COLLECTED.append((g, top, 1))
        _progress(f"criterion 2: {name} ok")


@_criterion(3, "branching-factor roots")
def test_criterion_3_gamma_roots():
    assert gamma_k(1) == pytest.approx(1.754, abs=1e-3)
    assert gamma_k(2) == pytest.approx(1.888, abs=1e-3)
    assert gamma_k(3) == pytest.approx(1.947, abs=1e-3)
    for k in range(1, 11):
        assert gamma_k(k) < 2.0


@_criterion(4, "symmetric branching structural bounds")
def test_criterion_4_structural_bounds():
    """Per-branch bounds are asserted inside the fast kernel itself (child
    count within the pivot's budget, prefix never longer than k+2); this
    test reruns the kernel across the criterion-1 family and checks the
    recorded maxima, so any violation anywhere fails loudly."""
    assert __debug__, "kernel assertions must be active for this criterion"
    maxima = getattr(
        test_criterion_1_oracle_equivalence, "fast_maxima", None
    )
    if maxima is None:
        # Criterion 1 did not run (e.g. test selected alone): collect afresh.
        maxima = SearchStats()
        for idx in range(200):
            g, _ = bernoulli_graph(1000 + idx)
            for k in (1, 2):
                theta = 2 * k + 1
                params = SearchParams(
                    k=k, topk=1, theta_l=theta, theta_r=theta
                )
                fast_bb(g, params, ResultPool(1), stats=maxima)
    # k <= 2 in the battery: every pivot stays within budget and no branch
    # fans out beyond a+2 <= k+2 children.
    assert 0 < maxima.branches
    assert maxima.max_pivot_a <= 2
    assert maxima.max_children <= 4
    assert maxima.max_prefix <= 4


def _part_a_instances():
    if SCALE == "quick":
        return 6, 120, 8
    return 30, 200, 8


@_criterion(5, "branching and boosting efficiency")
def test_criterion_5_efficiency():
    """Part A: median branch count of the symmetric-pivot kernel must not
    exceed the basic kernel's over 30 seeded 200x200 average-degree-8
    instances (k=1, thresholds 3, K=1).

    Part B: median wall time of the boosted pipeline (pbie+fast) must not
    exceed plain fast over 10 seeded 2000x2000 average-degree-20 instances.
    Runs only at BIPLEX_ACCEPTANCE_SCALE=full: one plain-fast instance
    alone measures ~2230 s (22.5M branches) on this class of hardware, so
    the ten-instance, two-configuration battery needs roughly half a day of
    single-CPU compute. The comparison logic below is the contract shape
    either way."""
    if SCALE == "quick":
        count, side, avg_deg = _part_a_instances()
        params = SearchParams(k=1, topk=1, theta_l=3, theta_r=3)
        for i in range(count):
            g = generate_er(side, side, side * avg_deg, seed=5000 + i)
            for kern in (fast_bb, basic_bb):
                kern(g, params, ResultPool(1))
        pytest.skip(
            "quick mode: ran a reduced smoke battery only; the contract-"
            "scale medians were not measured"
        )

    count, side, avg_deg = _part_a_instances()
    params = SearchParams(k=1, topk=1, theta_l=3, theta_r=3)
    fast_branches = []
    basic_branches = []
    for i in range(count):
        seed = 5000 + i
        g = generate_er(side, side, side * avg_deg, seed=seed)
        pool_fast = ResultPool(1)
        stats_fast = fast_bb(g, params, pool_fast)
        fast_branches.append(stats_fast.branches)
        pool_basic = ResultPool(1)
        stats_basic = basic_bb(g, params, pool_basic)
        basic_branches.append(stats_basic.branches)
        assert pool_fast.edge_multiset() == pool_basic.edge_multiset(), (
            f"seed {seed}: kernels disagree"
        )
        for entry in pool_fast.entries_sorted():
            _COLLECTED.append((g, entry, 1))
        _progress(
            f"criterion 5A: seed {seed} fast={stats_fast.branches} "
            f"({stats_fast.elapsed_ms / 1000:.1f}s) "
            f"basic={stats_basic.branches} "
            f"({stats_basic.elapsed_ms / 1000:.1f}s)"
        )
    median_fast = statistics.median(fast_branches)
    median_basic = statistics.median(basic_branches)
    _progress(
        f"criterion 5A medians: fast={median_fast} basic={median_basic}"
    )
    assert median_fast <= median_basic, (
        f"median branches: fast {median_fast} > basic {median_basic}"
    )

    if SCALE != "full":
        _record(
            5,
            "branching and boosting efficiency",
            "PASS (part A: median branches fast "
            f"{median_fast:.0f} <= basic {median_basic:.0f}; part B "
            "wall-time battery skipped — set BIPLEX_ACCEPTANCE_SCALE=full; "
            "one plain-fast 2000x2000 instance alone measures ~37 min here)",
        )
        return

    plain_times = []
    boosted_times = []
    big_params = SearchParams(k=1, topk=1, theta_l=3, theta_r=3)
    for i in range(10):
        seed = 6000 + i
        g = generate_er(2000, 2000, 2000 * 20, seed=seed)
        t0 = time.perf_counter()
        pool_plain = ResultPool(1)
        run_search(g, big_params, pool_plain, kernel="fast", framework="none")
        plain = time.perf_counter() - t0
        plain_times.append(plain)
        t0 = time.perf_counter()
        pool_boosted = ResultPool(1)
        run_search(g, big_params, pool_boosted, kernel="fast", framework="pbie")
        boosted = time.perf_counter() - t0
        boosted_times.append(boosted)
        assert pool_plain.edge_multiset() == pool_boosted.edge_multiset()
        for entry in pool_boosted.entries_sorted():
            _COLLECTED.append((g, entry, 1))
        _progress(
            f"criterion 5B: seed {seed} plain={plain:.0f}s boosted={boosted:.0f}s"
        )
    median_plain = statistics.median(plain_times)
    median_boosted = statistics.median(boosted_times)
    _progress(
        f"criterion 5B medians: plain={median_plain:.0f}s "
        f"boosted={median_boosted:.0f}s"
    )
    assert median_boosted <= median_plain, (
        f"median wall time: boosted {median_boosted:.0f}s > "
        f"plain {median_plain:.0f}s"
    )


@_criterion(6, "connectivity of reported results")
def test_criterion_6_connectivity():
    """Every result collected from the earlier criteria was found with both
    thresholds at 2k+1 or higher, so each must induce a connected subgraph."""
    if not _COLLECTED:
        pytest.skip("no results collected (criteria 1/2/5 did not run)")
    for g, entry, k in _COLLECTED:
        assert len(entry.left) >= 2 * k + 1
        assert len(entry.right) >= 2 * k + 1
        assert is_connected(g, entry.left, entry.right), (
            f"disconnected result {entry.key}"
        )


@_criterion(7, "result quality grows with the budget")
def test_criterion_7_monotonic_in_k():
    """With both thresholds fixed at 3, the best edge count at k=2 must be
    at least the best at k=1 on each of 50 criterion-1 instances where the
    k=1 search returns anything."""
    compared = 0
    for idx in range(50):
        g, _ = bernoulli_graph(1000 + idx)
        best = {}
        for k in (1, 2):
            params = SearchParams(k=k, topk=1, theta_l=3, theta_r=3)
            pool = ResultPool(1)
            run_search(g, params, pool, kernel="fast", framework="none")
            best[k] = pool.best_edge_count() if len(pool) else None
        if best[1] is None:
            continue
        assert best[2] is not None, f"seed {1000 + idx}: k=2 lost the result"
        assert best[2] >= best[1], (
            f"seed {1000 + idx}: best at k=2 ({best[2]}) below k=1 ({best[1]})"
        )
        compared += 1
    assert compared > 0, "no instance produced a k=1 result"
