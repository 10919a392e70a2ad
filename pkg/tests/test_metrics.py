import random

import numpy as np
import pytest

from oracles import all_strings, pairwise_levenshtein
from smtpp.errors import EmptyCorpus, EmptyReference
from smtpp.kern import BREAK, TAB, TokenSequence, convert, normalize, tokenize
from smtpp.metrics import cer, edit_distance, evaluate_corpus, ler, ser


def test_edit_distance_examples():
    assert edit_distance(list("abc"), list("abc")) == 0
    assert edit_distance(["8", "e", "-", "J"], ["8", "e", "J"]) == 1
    assert edit_distance([], list("abcd")) == 4


def test_edit_distance_small_exhaustive():
    groups = all_strings(3, 4)
    for la, A in groups.items():
        for lb, B in groups.items():
            expected = pairwise_levenshtein(A, B)
            for i, a in enumerate(A):
                for j, b in enumerate(B):
                    assert edit_distance(list(a), list(b)) == expected[i, j]


def test_edit_distance_random_pairs_against_oracle():
    rng = random.Random(7)
    for _ in range(500):
        a = [rng.randrange(4) for _ in range(rng.randint(0, 8))]
        b = [rng.randrange(4) for _ in range(rng.randint(0, 8))]
        want = pairwise_levenshtein(np.array([a], dtype=np.int8).reshape(1, -1),
                                    np.array([b], dtype=np.int8).reshape(1, -1))[0, 0]
        assert edit_distance(a, b) == want


def test_edit_distance_metric_laws():
    rng = random.Random(3)
    words = [[rng.randrange(3) for _ in range(rng.randint(0, 5))] for _ in range(25)]
    for a in words:
        for b in words:
            d = edit_distance(a, b)
            assert d == edit_distance(b, a)
            assert (d == 0) == (a == b)
            for c in words[:8]:
                assert d <= edit_distance(a, c) + edit_distance(c, b)


def seq(tokens, scheme="bekern"):
    return TokenSequence(tokens, scheme)


def test_cer_examples():
    ref = seq(["8", "e", "-", "J"])
    assert cer(ref, ref) == 0.0
    assert cer(seq(["8", "f", "-", "J"]), ref) == 0.25


def test_ser_example():
    ref = seq(["8e-J", TAB, "4c"], "kern")
    hyp = seq(["8e-J", TAB, "4d"], "kern")
    assert ser(hyp, ref) == pytest.approx(1 / 3)
    assert ser(ref, ref) == 0.0


def test_ler_missing_line():
    lines = [f"{d}c" for d in (1, 2, 4, 8, 16, 32, 2, 4, 8, 16)]
    ref_tokens = [tok for line in lines for tok in (line, BREAK)]
    hyp_tokens = [tok for line in lines[:4] + lines[5:] for tok in (line, BREAK)]
    assert ler(seq(hyp_tokens, "kern"), seq(ref_tokens, "kern")) == pytest.approx(0.1)
    assert ler(seq(ref_tokens, "kern"), seq(ref_tokens, "kern")) == 0.0


def test_empty_hypothesis_is_exactly_one(corpus_docs):
    ref = tokenize(normalize(corpus_docs[0]), "bekern")
    empty = seq([])
    assert cer(empty, ref) == 1.0
    assert ser(empty, ref) == 1.0
    assert ler(empty, ref) == 1.0


def test_empty_reference():
    for fn in (cer, ser, ler):
        with pytest.raises(EmptyReference):
            fn(seq(["a"]), seq([]))


def test_cer_is_scheme_invariant(corpus_docs):
    ref_b = tokenize(normalize(corpus_docs[1]), "bekern")
    hyp_b = tokenize(normalize(corpus_docs[2]), "bekern")
    base = cer(hyp_b, ref_b)
    for s in ("kern", "ekern"):
        assert cer(convert(hyp_b, s), convert(ref_b, s)) == base


def test_identical_inputs_zero_everywhere(corpus_docs):
    for doc in corpus_docs[:5]:
        for s in ("kern", "ekern", "bekern"):
            x = tokenize(normalize(doc), s)
            assert (cer(x, x), ser(x, x), ler(x, x)) == (0.0, 0.0, 0.0)


def test_ratio_can_exceed_one():
    assert cer(seq(list("abcdefgh")), seq(["a"])) == 7.0


def test_corpus_mean():
    ref = seq(["4", "c", BREAK, "8", "d"])
    one = seq(["4", "e", BREAK, "8", "d"])
    two = seq(["4", "e", BREAK, "8", "e"])
    report = evaluate_corpus([(one, ref), (two, ref)])
    assert report.cer == pytest.approx(0.3)
    assert evaluate_corpus([(ref, ref)]).as_dict() == {"CER": 0.0, "SER": 0.0, "LER": 0.0}
    with pytest.raises(EmptyCorpus):
        evaluate_corpus([])


def test_corpus_recomputation_and_threads(corpus_docs):
    refs = [tokenize(normalize(d), "bekern") for d in corpus_docs[:10]]
    hyps = [tokenize(normalize(d), "ekern") for d in corpus_docs[1:11]]
    pairs = list(zip(hyps, refs))
    report = evaluate_corpus(pairs, workers=4)
    assert report.as_dict() == evaluate_corpus(pairs).as_dict()
    per = [(cer(h, r), ser(h, r), ler(h, r)) for h, r in pairs]
    assert report.cer == pytest.approx(np.mean([p[0] for p in per]), abs=1e-15)
    assert report.ser == pytest.approx(np.mean([p[1] for p in per]), abs=1e-15)
    assert report.ler == pytest.approx(np.mean([p[2] for p in per]), abs=1e-15)
    text = report.format()
    assert "CER=" in text and "documents=10" in text
