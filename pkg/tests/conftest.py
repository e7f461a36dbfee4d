"""Shared fixtures: seeded graph builders and the acceptance summary hook."""
import random

import pytest

from biplex import BipartiteGraph


def bernoulli_graph(
    seed: int,
    left_low: int = 4,
    left_high: int = 8,
    right_low: int = 4,
    right_high: int = 8,
    probs=(0.3, 0.5, 0.7),
) -> tuple[BipartiteGraph, random.Random]:
    """Small random bipartite instance; same seed, same graph."""
    rng = random.Random(seed)
    nl = rng.randint(left_low, left_high)
    nr = rng.randint(right_low, right_high)
    p = rng.choice(list(probs))
    edges = [
        (u, v) for u in range(nl) for v in range(nr) if rng.random() < p
    ]
    return BipartiteGraph.from_edges(nl, nr, edges), rng


# -- acceptance criterion reporting ------------------------------------------

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def record_criterion(number: int, title: str, outcome: str) -> None:
    """Stores one criterion's outcome for the end-of-run summary."""
    _ACCEPTANCE[number] = (title, outcome)


@pytest.hookimpl(trylast=True)
def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, outcome = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number} ({title}): {outcome}")
