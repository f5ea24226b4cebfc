"""End-to-end acceptance run: ten criteria, one verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict
lines as they print.  Every criterion is a separate test so a failure
pinpoints itself; the slow oracle suites reuse the shared machinery in
conftest.py and the sibling test modules instead of duplicating it.
"""

from __future__ import annotations

import contextlib
import random
import re
import subprocess
import sys
import time
from pathlib import Path

import pytest

from compalign import (
    EngineParams,
    Grammar,
    InhibitionNetwork,
    LearnParams,
    MatchIndex,
    NeuralParams,
    Pattern,
    analyse,
    analyse_serialized,
    dump_grammar,
    learn,
    learn_from_encodings,
    load_grammar,
    load_new,
    parse_grammar_text,
)

from conftest import (
    FIXTURES,
    GENEROUS_PARAMS,
    exhaustive_best_score,
    golden,
    grammar_subset_optimum,
    random_micro_instance,
    same_structure,
)
from test_io import _random_grammar
from test_matcher import run_random_pair_suite
from test_neural import run_agreement_suite
from test_render import _assert_round_trip

REPO = Path(__file__).resolve().parent.parent


@contextlib.contextmanager
def _verdict(number: int, name: str):
    try:
        yield
    except BaseException:
        print(f"criterion {number:2d} ({name}): FAIL")
        raise
    print(f"criterion {number:2d} ({name}): PASS")


def _fixture_pair(stem: str):
    grammar = load_grammar(FIXTURES / f"{stem}_grammar.sp")
    new = load_new(FIXTURES / f"{stem}_new.sp")[0]
    return grammar, new


def _cli(*args: str) -> bytes:
    proc = subprocess.run(
        [sys.executable, "-m", "compalign", *args],
        cwd=REPO,
        capture_output=True,
        check=True,
    )
    return proc.stdout


def test_criterion_01_parsing_golden():
    with _verdict(1, "parsing golden"):
        grammar, new = _fixture_pair("parsing")
        started = time.perf_counter()
        result = analyse(new, grammar, workers=1)
        elapsed = time.perf_counter() - started
        assert same_structure(result.best.alignment, golden("parsing_golden.json"))
        assert elapsed < 5.0, f"parse took {elapsed:.2f}s"


def test_criterion_02_recognition_golden():
    with _verdict(2, "recognition golden"):
        grammar, new = _fixture_pair("class")
        started = time.perf_counter()
        result = analyse(new, grammar, workers=1)
        elapsed = time.perf_counter() - started
        top = result.best.alignment
        assert same_structure(top, golden("class_golden.json"))
        assert len(top.rows) == 5  # New plus all four stored patterns
        assert elapsed < 5.0, f"recognition took {elapsed:.2f}s"


def test_criterion_03_matcher_oracle_suite():
    with _verdict(3, "matcher oracle suite"):
        total, exact, short_misses = run_random_pair_suite(pairs=500, seed=20260814)
        assert total == 500
        assert exact / total >= 0.99, f"only {exact}/{total} exact"
        assert not short_misses, f"misses at length <= 20: {short_misses}"


def test_criterion_04_alignment_oracle_suite():
    with _verdict(4, "alignment oracle suite"):
        rng = random.Random(424242)
        agreed = 0
        cases = 120
        for _ in range(cases):
            new, grammar = random_micro_instance(rng)
            want = exhaustive_best_score(new, grammar)
            result = analyse(new, grammar, GENEROUS_PARAMS)
            got = result.best.score_bits if result.alignments else 0.0
            if abs(got - max(want, 0.0)) < 1e-9:
                agreed += 1
        assert agreed == cases, f"{agreed}/{cases} matched the exhaustive optimum"


def test_criterion_05_learner_mdl():
    with _verdict(5, "learner MDL"):
        # (a) a pattern repeated ten times beats the empty grammar
        repeat = load_new(FIXTURES / "corpus_repeat.sp")
        result = learn(repeat, LearnParams())
        empty_total = next(
            sg.total_bits for sg in result.ranking if not sg.grammar.patterns
        )
        assert result.best.grammar.patterns
        assert result.best.total_bits < empty_total

        # (b) the shared suffix is factored out, and the beam search
        # lands on the exhaustive-subset optimum
        suffix = load_new(FIXTURES / "corpus_shared_suffix.sp")
        params = LearnParams()
        result = learn(suffix, params)
        assert any(
            p.contents == ("r", "u", "n", "s") for p in result.best.grammar.patterns
        )
        optimum = grammar_subset_optimum(suffix, params)
        assert result.best.total_bits == pytest.approx(optimum.total_bits)

        # (c) encoding-level learning ties each determiner class to its
        # verb class across the variable middle word
        lexicon = load_grammar(FIXTURES / "agreement_lexicon.sp")
        corpus = load_new(FIXTURES / "agreement_corpus.sp")
        second = learn_from_encodings(lexicon, corpus, LearnParams(encoding_passes=2))
        assert second is not None
        marker_sets = [
            {s for s in p.contents if s in {"DS", "VS", "DP", "VP"}}
            for p in second.best.grammar.patterns
        ]
        assert {"DS", "VS"} in marker_sets
        assert {"DP", "VP"} in marker_sets
        for has in marker_sets:
            assert not ({"DS", "VP"} <= has or {"DP", "VS"} <= has)


def _learn_text(corpus_path: Path, workers: int) -> str:
    result = learn(load_new(corpus_path), LearnParams(), workers=workers)
    best = result.best
    head = (
        f"grammar {best.grammar_bits:.9f} bits"
        f" + encoding {best.encoding_bits:.9f} bits"
        f" = {best.total_bits:.9f} bits"
    )
    return head + "\n" + dump_grammar(best.grammar)


def test_criterion_06_determinism_matrix():
    with _verdict(6, "determinism matrix"):
        workers_grid = (1, 2, 4, 8)

        for stem in ("parsing", "class"):
            grammar, new = _fixture_pair(stem)
            outs = {
                analyse_serialized(new, grammar, index=index, workers=w)
                for w in workers_grid
                for index in (MatchIndex(), None)
            }
            assert len(outs) == 1, f"{stem}: {len(outs)} distinct parse outputs"

        for corpus in ("corpus_repeat.sp", "corpus_shared_suffix.sp"):
            outs = {_learn_text(FIXTURES / corpus, w) for w in workers_grid}
            assert len(outs) == 1, f"{corpus}: {len(outs)} distinct learn outputs"

        # same property end to end through the command line
        parse_args = (
            "parse",
            "--grammar", str(FIXTURES / "parsing_grammar.sp"),
            "--new", str(FIXTURES / "parsing_new.sp"),
        )
        assert (
            _cli(*parse_args, "--workers", "1", "--index", "on")
            == _cli(*parse_args, "--workers", "4", "--index", "off")
        )
        learn_args = ("learn", "--corpus", str(FIXTURES / "corpus_repeat.sp"))
        assert (
            _cli(*learn_args, "--workers", "1")
            == _cli(*learn_args, "--workers", "2")
        )


def test_criterion_07_index_effectiveness():
    with _verdict(7, "index effectiveness"):
        grammar, new = _fixture_pair("parsing")
        index = MatchIndex()

        started = time.perf_counter()
        first = analyse_serialized(new, grammar, index=index, workers=1)
        cold = time.perf_counter() - started

        hits0, misses0 = index.hits, index.misses
        started = time.perf_counter()
        second = analyse_serialized(new, grammar, index=index, workers=1)
        warm = time.perf_counter() - started

        assert first == second
        hit_delta = index.hits - hits0
        miss_delta = index.misses - misses0
        rate = hit_delta / max(1, hit_delta + miss_delta)
        assert rate > 0.90, f"second-run hit rate {rate:.3f}"
        note = "decreased" if warm < cold else "did NOT decrease"
        print(f"  timing note: cold {cold:.3f}s, warm {warm:.3f}s ({note})")


def test_criterion_08_neural_suite():
    with _verdict(8, "neural suite"):
        base = NeuralParams().baseline_rate

        # (a) no input: every cell holds the baseline rate exactly
        network = InhibitionNetwork(Grammar.of([Pattern(("X", "a", "b", "c", "#X"), 1, 1, 1)]))
        for _ in range(50):
            network.step()
        (assembly,) = network.assemblies
        assert assembly.rates == [base, base, base]

        # (b) full in-order input recognises, then settles after withdrawal
        assert network.present(["a", "b", "c"]) == ["X"]
        assert assembly.identification_rate() > NeuralParams().recognition_threshold * base
        network.withdraw()
        for _ in range(3 * network.params.settle_tau):
            network.step()
        assert all(abs(r - base) <= 0.05 * base for r in assembly.rates)

        # (c) every out-of-order permutation of the full contents fails
        import itertools

        contents = ["a", "b", "c", "d"]
        network = InhibitionNetwork(Grammar.of([Pattern(("X", *contents, "#X"), 1, 1, 1)]))
        for perm in itertools.permutations(contents):
            network.withdraw()
            expected = ["X"] if list(perm) == contents else []
            assert network.present(list(perm)) == expected

        # (d) network recognition agrees with positive-score alignments
        assert run_agreement_suite(20, seed=515) == 20


def test_criterion_09_probability_normalisation():
    with _verdict(9, "probability normalisation"):
        for stem in ("parsing", "class"):
            out = _cli(
                "parse",
                "--grammar", str(FIXTURES / f"{stem}_grammar.sp"),
                "--new", str(FIXTURES / f"{stem}_new.sp"),
                "--top", "5",
                "--probs",
            ).decode()
            scores = [float(m) for m in re.findall(r"score (-?[\d.]+) bits", out)]
            probs = [float(m) for m in re.findall(r"probability ([\d.]+)", out)]
            assert scores and len(scores) == len(probs)
            assert abs(sum(probs) - 1.0) <= 1e-9
            # identical ordering: a higher score never gets a lower rank
            assert scores == sorted(scores, reverse=True)
            assert probs == sorted(probs, reverse=True)
            for a, b, p, q in zip(scores, scores[1:], probs, probs[1:]):
                assert (a > b) == (p > q)


def test_criterion_10_round_trip_and_rendering():
    with _verdict(10, "round-trip and rendering"):
        for path in sorted(FIXTURES.glob("*.sp")):
            once = dump_grammar(load_grammar(path))
            assert dump_grammar(parse_grammar_text(once)) == once

        rng = random.Random(1010)
        for _ in range(200):
            g = _random_grammar(rng)
            once = dump_grammar(g)
            again = parse_grammar_text(once)
            assert dump_grammar(again) == once

        for stem in ("parsing", "class"):
            grammar, new = _fixture_pair(stem)
            _assert_round_trip(analyse(new, grammar).best.alignment)
