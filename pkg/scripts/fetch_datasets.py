#!/usr/bin/env python3
"""Fetches and normalizes the four benchmark bipartite graphs into data/.

Each dataset lands as data/<name>.edges in the plain edge-list format the
CLI and tests read (one "u v" pair per line, zero-based, left index first).
A download is accepted only if the normalized graph matches the expected
vertex counts and edge count exactly; anything else is reported and left
out of data/ so tests depending on the graph skip rather than run against
the wrong input.

Sources default to the public KONECT mirror (http://konect.cc). When a
dataset's archive name differs from the default guess, pass
--slug NAME=KONECT_SLUG, or normalize a manually downloaded file with
--from-file NAME=PATH (TSV/CSV edge list, 1- or 0-based).
"""
from __future__ import annotations

import argparse
import bz2
import io
import re
import sys
import tarfile
import urllib.request
from pathlib import Path

EXPECTED = {
    # name: (left_count, right_count, edge_count)
    "divorce": (9, 50, 225),
    "cities": (46, 55, 1342),
    "cfat": (200, 200, 1537),
    "opsahl": (2865, 4558, 16910),
}

DEFAULT_SLUGS = {
    "divorce": "divorce",
    "cities": "cities",
    "cfat": "cfat",
    "opsahl": "opsahl-collaboration",
}

KONECT_URL = "http://konect.cc/files/download.tsv.{slug}.tar.bz2"


def parse_pairs(text: str) -> list[tuple[int, int]]:
    """Extracts (u, v) int pairs from a KONECT-style or generic edge list."""
    pairs = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith(("%", "#")):
            continue
        fields = re.split(r"[,\s]+", line)
        if len(fields) < 2:
            continue
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            continue
        pairs.append((u, v))
    return pairs


def normalize(pairs: list[tuple[int, int]]) -> tuple[int, int, list[tuple[int, int]]]:
    """Maps raw ids to dense zero-based ids per side, deduplicating edges."""
    left_ids = sorted({u for u, _ in pairs})
    right_ids = sorted({v for _, v in pairs})
    lmap = {x: i for i, x in enumerate(left_ids)}
    rmap = {x: i for i, x in enumerate(right_ids)}
    edges = sorted({(lmap[u], rmap[v]) for u, v in pairs})
    return len(left_ids), len(right_ids), edges


def check_and_write(name: str, pairs: list[tuple[int, int]], out_dir: Path) -> bool:
    nl, nr, edges = normalize(pairs)
    want = EXPECTED[name]
    got = (nl, nr, len(edges))
    if got != want and (nr, nl, len(edges)) == want:
        # Some mirrors store the sides swapped; flip to the published shape.
        edges = sorted((v, u) for u, v in edges)
        nl, nr = nr, nl
        got = (nl, nr, len(edges))
    if got != want:
        print(f"  {name}: shape mismatch, got {got}, expected {want} - not installed")
        return False
    out = out_dir / f"{name}.edges"
    with out.open("w") as fh:
        for u, v in edges:
            fh.write(f"{u} {v}\n")
    print(f"  {name}: wrote {out} ({nl}x{nr}, {len(edges)} edges)")
    return True


def fetch_konect(slug: str) -> list[tuple[int, int]]:
    url = KONECT_URL.format(slug=slug)
    print(f"  downloading {url}")
    with urllib.request.urlopen(url, timeout=60) as resp:
        raw = resp.read()
    with tarfile.open(fileobj=io.BytesIO(raw), mode="r:bz2") as tar:
        candidates = [
            m for m in tar.getmembers()
            if m.isfile() and Path(m.name).name.startswith("out.")
        ]
        if not candidates:
            raise RuntimeError(f"no out.* member in {url}")
        data = tar.extractfile(candidates[0]).read()
    return parse_pairs(data.decode("utf-8", errors="replace"))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data-dir", type=Path,
                    default=Path(__file__).resolve().parent.parent / "data")
    ap.add_argument("--only", choices=sorted(EXPECTED), action="append",
                    help="fetch just the named dataset(s)")
    ap.add_argument("--slug", action="append", default=[], metavar="NAME=SLUG",
                    help="override the KONECT archive slug for a dataset")
    ap.add_argument("--from-file", action="append", default=[], metavar="NAME=PATH",
                    help="normalize a local raw edge list instead of downloading")
    args = ap.parse_args()

    slugs = dict(DEFAULT_SLUGS)
    for item in args.slug:
        name, _, slug = item.partition("=")
        if name not in EXPECTED or not slug:
            ap.error(f"bad --slug {item!r}")
        slugs[name] = slug
    local = {}
    for item in args.from_file:
        name, _, path = item.partition("=")
        if name not in EXPECTED or not path:
            ap.error(f"bad --from-file {item!r}")
        local[name] = Path(path)

    args.data_dir.mkdir(parents=True, exist_ok=True)
    names = args.only or sorted(EXPECTED)
    failures = 0
    for name in names:
        print(f"{name}:")
        try:
            if name in local:
                text = local[name].read_text()
                if local[name].suffix == ".bz2":
                    text = bz2.decompress(local[name].read_bytes()).decode()
                pairs = parse_pairs(text)
            else:
                pairs = fetch_konect(slugs[name])
            if not check_and_write(name, pairs, args.data_dir):
                failures += 1
        except Exception as exc:  # noqa: BLE001 - report and continue
            print(f"  {name}: FAILED ({exc})")
            failures += 1
    if failures:
        print(f"{failures} dataset(s) not installed; the matching acceptance "
              f"checks will report SKIPPED until the files exist.")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
