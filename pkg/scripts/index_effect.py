"""Measure how much a shared match index saves on repeated parses.

Parses every New pattern in a corpus twice against the same grammar,
sharing one index across both sweeps, and prints per-sweep wall clock
plus the index counters.  The second sweep should be nearly all hits.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from compalign import MatchIndex, analyse, load_grammar, load_new

ROOT = Path(__file__).resolve().parent.parent


def sweep(items, grammar, index):
    started = time.perf_counter()
    hits0, misses0 = index.hits, index.misses
    for new in items:
        analyse(new, grammar, index=index)
    return (
        time.perf_counter() - started,
        index.hits - hits0,
        index.misses - misses0,
    )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--grammar", default=ROOT / "fixtures/parsing_grammar.sp")
    parser.add_argument("--corpus", default=ROOT / "fixtures/parsing_new.sp")
    parser.add_argument("--capacity", type=int, default=1_000_000)
    args = parser.parse_args()

    grammar = load_grammar(args.grammar)
    items = load_new(args.corpus)
    index = MatchIndex(capacity=args.capacity)

    for label in ("cold", "warm"):
        elapsed, hits, misses = sweep(items, grammar, index)
        rate = hits / max(1, hits + misses)
        print(
            f"{label}: {elapsed:6.3f}s  hits {hits:6d}  misses {misses:6d}"
            f"  hit rate {rate:6.1%}"
        )
    print(f"entries cached: {len(index)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
