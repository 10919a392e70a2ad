import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smtpp.errors import (
    DanglingFragment, DataError, IdOutOfRange, MalformedHeader, MixedSchemes, SpineMismatch, UnknownComponent, UnknownToken,
)
from smtpp.kern import (
    BREAK, CHORD, EOT, PAD, SOT, TAB, EncodingScheme, TokenSequence, build_vocabulary, convert, decode_ids,
    detokenize, encode_ids, line_texts, normalize, normalize_symbol, parse_kern, parse_symbol, read_token_file,
    tokenize, write_token_file,
)
from smtpp.kern.document import DATA, TERMINATOR

SCHEMES = list(EncodingScheme)


def doc_of(*rows):
    return parse_kern("".join("\t".join(r) + "\n" for r in rows))


# ---------------------------------------------------------------- parsing

def test_parse_pianoform_excerpt(fig_doc):
    assert fig_doc.spine_count == 2
    assert fig_doc.meter == "*M3/4"
    assert len(fig_doc.data_lines) == 5


def test_parse_minimal_document():
    doc = parse_kern("**kern\n*-\n")
    assert doc.spine_count == 1
    assert doc.data_lines == []


def test_serialize_round_trip(corpus_docs):
    for doc in corpus_docs:
        assert parse_kern(doc.serialize()) == doc


def test_serialize_is_byte_identical(fig_doc):
    from conftest import FIG_EXCERPT

    assert fig_doc.serialize() == FIG_EXCERPT


def test_extra_cell_is_spine_mismatch():
    with pytest.raises(SpineMismatch) as err:
        parse_kern("**kern\t**kern\n4c\t4d\t4e\n*-\t*-\n")
    assert err.value.line_no == 2


def test_missing_header():
    with pytest.raises(MalformedHeader):
        parse_kern("4c\n*-\n")
    with pytest.raises(MalformedHeader):
        parse_kern("**mens\n*-\n")


def test_spine_split_and_merge_are_tracked():
    doc = parse_kern("**kern\n*^\n4c\t4e\n*v\t*v\n4c\n*-\n")
    assert doc.spine_count == 1
    with pytest.raises(SpineMismatch):
        parse_kern("**kern\n*^\n4c\n*-\n")


def test_global_comments_survive_parse_and_are_dropped_by_normalize():
    doc = parse_kern("!!title\n**kern\n4c\n*-\n!!end\n")
    assert doc.lines[0].text == "!!title"
    assert all(line.text.startswith("!!") is False for line in normalize(doc).lines)


# ---------------------------------------------------------------- normalization

def test_normalize_worked_example():
    assert normalize_symbol("J8e-") == "8e-J"
    assert normalize_symbol("8e-J") == "8e-J"


def test_normalize_unknown_character():
    with pytest.raises(UnknownComponent):
        normalize_symbol("8e@")
    with pytest.raises(UnknownComponent) as err:
        normalize(doc_of(["**kern"], ["4c%"], ["*-"]))
    assert err.value.line_no == 2


def test_normalize_is_idempotent(corpus_docs):
    for doc in corpus_docs:
        once = normalize(doc)
        assert normalize(once) == once


# fixed kind order used by the permutation oracle below
ORACLE_RANK = {"dur": 0, "pitch": 1, "acc": 2, "tie_open": 3, "slur_open": 4, "beam_open": 5,
               "beam_close": 6, "orn": 7, "slur_close": 9, "tie_close": 10}
COMPONENT_POOL = {
    "dur": ["4", "8", "16", "2.", "8.", "32"],
    "pitch": ["c", "ee", "G", "AA", "b"],
    "acc": ["#", "-", "n", "##"],
    "tie_open": ["["],
    "slur_open": ["("],
    "beam_open": ["L", "LL"],
    "beam_close": ["J", "JJ"],
    "orn": ["t", "T", "m"],
    "slur_close": [")"],
    "tie_close": ["]"],
}


def test_normalize_permutation_oracle():
    rng = random.Random(12345)
    kinds = list(COMPONENT_POOL)
    for _ in range(50):
        chosen = ["dur", "pitch"] + rng.sample(kinds[2:], rng.randint(0, 3))
        # ties/slurs cannot both open and close on one note in this oracle
        if "tie_open" in chosen and "tie_close" in chosen:
            chosen.remove("tie_close")
        if "slur_open" in chosen and "slur_close" in chosen:
            chosen.remove("slur_close")
        parts = [(k, rng.choice(COMPONENT_POOL[k])) for k in chosen]
        expected = "".join(text for _, text in sorted(parts, key=lambda p: ORACLE_RANK[p[0]]))
        shuffled = parts[:]
        rng.shuffle(shuffled)
        assert normalize_symbol("".join(t for _, t in shuffled)) == expected


def test_every_permutation_of_small_symbol():
    parts = ["8", "e", "-", "J"]
    for perm in itertools.permutations(parts):
        assert normalize_symbol("".join(perm)) == "8e-J"


def test_symbol_components():
    sym = parse_symbol("8e-J")
    assert [c[0] for c in sym.components] == ["duration", "pitch", "accidental", "beam-close"]
    assert parse_symbol("4r").is_rest


# ---------------------------------------------------------------- tokenization

def cell_doc(cell):
    return normalize(doc_of(["**kern"], [cell], ["*-"]))


@pytest.mark.parametrize("scheme, expected", [
    ("bekern", ["8", "e", "-", "J"]),
    ("ekern", ["8e", "-", "J"]),
    ("kern", ["8e-J"]),
])
def test_worked_example_splits(scheme, expected):
    seq = tokenize(cell_doc("8e-J"), scheme)
    assert seq.tokens == ["**kern", BREAK] + expected + [BREAK, "*-", BREAK]


def test_markup_tokens(fig_doc):
    seq = tokenize(normalize(fig_doc), "kern")
    assert seq.tokens[:4] == ["**kern", TAB, "**kern", BREAK]
    assert seq.tokens[-1] == BREAK
    assert seq.tokens.count(BREAK) == len(normalize(fig_doc).lines)
    assert CHORD in seq.tokens


def test_detokenize_worked_example():
    seq = TokenSequence(["**kern", BREAK, "8", "e", "-", "J", BREAK, "*-", BREAK], "bekern")
    doc = detokenize(seq)
    assert doc.lines[1].cells == ("8e-J",)


def test_detokenize_empty_list():
    doc = detokenize(TokenSequence([], "bekern"))
    assert doc.spine_count == 1
    assert doc.data_lines == []
    assert doc.lines[-1].kind == TERMINATOR


def test_detokenize_dangling_fragment():
    with pytest.raises(DanglingFragment):
        detokenize(TokenSequence(["**kern", BREAK, "-", "J", BREAK, "*-", BREAK], "bekern"))


@pytest.mark.parametrize("scheme", SCHEMES)
def test_round_trip_mini_corpus(corpus_docs, scheme):
    for doc in corpus_docs:
        norm = normalize(doc)
        assert detokenize(tokenize(norm, scheme)) == norm


def test_token_count_ordering(corpus_docs):
    for doc in corpus_docs:
        norm = normalize(doc)
        k, e, b = (len(tokenize(norm, s)) for s in SCHEMES)
        assert k <= e <= b


def test_no_control_token_in_serialized_kern(corpus_docs):
    for doc in corpus_docs:
        text = detokenize(tokenize(normalize(doc), "bekern")).serialize()
        for tok in (SOT, EOT, PAD, TAB, BREAK, CHORD, "·"):
            assert tok not in text


def test_token_sequence_invariants():
    with pytest.raises(DataError):
        TokenSequence(["a", SOT], "kern")
    with pytest.raises(DataError):
        TokenSequence([EOT, "a"], "kern")
    with pytest.raises(DataError):
        TokenSequence(["a·b"], "kern")
    with pytest.raises(DataError):
        TokenSequence(["<x>"], "kern")
    TokenSequence([SOT, "a", EOT], "kern")


# ---------------------------------------------------------------- conversion

def test_convert_worked_example():
    seq = TokenSequence(["**kern", BREAK, "8e-J", BREAK, "*-", BREAK], "kern")
    assert convert(seq, "bekern").tokens[2:6] == ["8", "e", "-", "J"]


@pytest.mark.parametrize("scheme", SCHEMES)
def test_convert_identity(corpus_docs, scheme):
    seq = tokenize(normalize(corpus_docs[0]), scheme)
    assert convert(seq, scheme) == seq


def test_convert_composition_oracle(corpus_docs):
    for doc in corpus_docs:
        x = tokenize(normalize(doc), "ekern")
        assert convert(x, "bekern") == tokenize(detokenize(x), "bekern")


@pytest.mark.parametrize("src, dst", list(itertools.permutations(SCHEMES, 2)))
def test_convert_preserves_semantics(corpus_docs, src, dst):
    for doc in corpus_docs[:8]:
        x = tokenize(normalize(doc), src)
        assert detokenize(convert(x, dst)) == detokenize(x)


def test_convert_keeps_sot_eot():
    seq = TokenSequence([SOT, "**kern", BREAK, "8e-J", BREAK, "*-", BREAK, EOT], "kern")
    out = convert(seq, "bekern")
    assert out.tokens[0] == SOT and out.tokens[-1] == EOT


# ---------------------------------------------------------------- vocabulary

def test_empty_vocabulary():
    vocab = build_vocabulary([], "bekern")
    assert vocab.tokens == [PAD, SOT, EOT, TAB, BREAK]


def test_reserved_ids_and_first_occurrence_order():
    seqs = [TokenSequence(["b", "a", TAB, "b"], "kern"), TokenSequence(["c", "a"], "kern")]
    vocab = build_vocabulary(seqs)
    assert encode_ids([SOT], vocab) == [1]
    assert vocab.tokens[5:] == ["b", "a", "c"]


def test_vocabulary_errors():
    vocab = build_vocabulary([TokenSequence(["a"], "kern")])
    with pytest.raises(UnknownToken):
        encode_ids(["zz9"], vocab)
    with pytest.raises(IdOutOfRange):
        decode_ids([len(vocab)], vocab)
    with pytest.raises(MixedSchemes):
        build_vocabulary([TokenSequence(["a"], "kern"), TokenSequence(["a"], "bekern")])


@pytest.mark.parametrize("scheme", SCHEMES)
def test_encode_decode_identity(corpus_docs, scheme):
    seqs = [tokenize(normalize(d), scheme) for d in corpus_docs]
    vocab = build_vocabulary(seqs)
    for seq in seqs:
        assert decode_ids(encode_ids(seq, vocab), vocab) == seq


def test_vocabulary_size_ordering(corpus_docs):
    sizes = [len(build_vocabulary([tokenize(normalize(d), s) for d in corpus_docs])) for s in SCHEMES]
    assert sizes[2] < sizes[1] < sizes[0]


def test_token_file_round_trip(tmp_path, corpus_docs):
    seqs = [tokenize(normalize(d), "ekern") for d in corpus_docs[:5]]
    path = tmp_path / "tokens.txt"
    write_token_file(path, seqs)
    assert read_token_file(path, "ekern") == seqs


def test_line_texts_match_serialized_lines(fig_doc):
    norm = normalize(fig_doc)
    assert line_texts(tokenize(norm, "bekern")) == [line.text for line in norm.lines]


# ---------------------------------------------------------------- properties

durations = st.sampled_from(["1", "2", "4", "8", "16", "4.", "8.."])
pitches = st.sampled_from(["c", "dd", "E", "FF", "ggg", "a", "B"])
extras = st.lists(st.sampled_from(["#", "-", "L", "J", "t", "[", "]", "(", ")", "m"]), unique=True, max_size=3)


@st.composite
def symbols(draw):
    parts = [draw(durations), draw(pitches)] + draw(extras)
    # one accidental at most; avoid opening and closing the same tie/slur
    if "#" in parts and "-" in parts:
        parts.remove("-")
    for a, b in (("[", "]"), ("(", ")")):
        if a in parts and b in parts:
            parts.remove(b)
    return draw(st.permutations(parts))


@settings(max_examples=200, deadline=None)
@given(symbols())
def test_normalize_permutation_invariant(parts):
    assert normalize_symbol("".join(parts)) == normalize_symbol("".join(sorted(parts)))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(symbols(), symbols()), min_size=1, max_size=6),
       st.sampled_from(SCHEMES))
def test_round_trip_property(rows, scheme):
    body = [["".join(a), "".join(b)] for a, b in rows]
    doc = normalize(doc_of(["**kern", "**kern"], *body, ["*-", "*-"]))
    assert detokenize(tokenize(doc, scheme)) == doc
    assert all(line.kind == DATA for line in doc.data_lines)
