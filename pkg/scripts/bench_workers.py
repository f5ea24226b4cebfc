"""Time the alignment engine across worker counts.

Runs the same parse repeatedly at each worker count, reports the best
wall-clock per count, and checks that every run serialized identically
(parallel fan-out must not change the answer).

Usage:
    python scripts/bench_workers.py
    python scripts/bench_workers.py --grammar fixtures/class_grammar.sp \
        --new fixtures/class_new.sp --workers 1 2 4 8 --repeats 5
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from compalign import EngineParams, analyse_serialized, load_grammar, load_new

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--grammar", default=ROOT / "fixtures/parsing_grammar.sp")
    parser.add_argument("--new", dest="new_path", default=ROOT / "fixtures/parsing_new.sp")
    parser.add_argument("--workers", type=int, nargs="+", default=[1, 2, 4, 8])
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--beam", type=int, default=EngineParams().beam_width)
    args = parser.parse_args()

    grammar = load_grammar(args.grammar)
    new = load_new(args.new_path)[0]
    params = EngineParams(beam_width=args.beam)

    outputs = set()
    print(f"{'workers':>8} {'best':>9} {'mean':>9}")
    for workers in args.workers:
        times = []
        for _ in range(args.repeats):
            started = time.perf_counter()
            outputs.add(analyse_serialized(new, grammar, params, workers=workers))
            times.append(time.perf_counter() - started)
        print(f"{workers:>8} {min(times):>8.3f}s {sum(times) / len(times):>8.3f}s")

    if len(outputs) != 1:
        print("worker counts disagreed on the result", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
