"""Walk the grammar learner over a corpus and show the ranked outcome."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from compalign import LearnParams, dump_grammar, learn, load_new, save_grammar

ROOT = Path(__file__).resolve().parent.parent


def describe(result, limit: int) -> None:
    for rank, sg in enumerate(result.ranking[:limit]):
        shape = ", ".join(" ".join(p.contents) for p in sg.grammar.patterns) or "(empty)"
        print(
            f"#{rank}  {sg.total_bits:10.3f} bits "
            f"(grammar {sg.grammar_bits:.3f} + encoding {sg.encoding_bits:.3f})  {shape}"
        )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.strip())
    parser.add_argument("--corpus", default=ROOT / "fixtures/corpus_shared_suffix.sp")
    parser.add_argument("--passes", type=int, default=2)
    parser.add_argument("--grammar-beam", type=int, default=10)
    parser.add_argument("--encoding-passes", type=int, default=0)
    parser.add_argument("--show", type=int, default=5, help="ranking entries to print")
    parser.add_argument("--out", help="write the winning grammar here")
    args = parser.parse_args()

    corpus = load_new(args.corpus)
    params = LearnParams(
        grammar_beam=args.grammar_beam,
        passes=args.passes,
        encoding_passes=args.encoding_passes,
    )
    result = learn(corpus, params)

    print(f"corpus: {len(corpus)} patterns, {args.passes} passes")
    describe(result, args.show)
    if result.encoding_level is not None:
        print("\nsecond level (patterns over encodings):")
        describe(result.encoding_level, args.show)

    print("\nwinning grammar:")
    print(dump_grammar(result.best.grammar), end="")
    if args.out:
        save_grammar(result.best.grammar, args.out)
        print(f"saved to {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
