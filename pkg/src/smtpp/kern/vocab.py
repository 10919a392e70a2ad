from __future__ import annotations

from dataclasses import dataclass

from smtpp.errors import IdOutOfRange, MixedSchemes, UnknownToken
from smtpp.kern.tokens import BREAK, EOT, PAD, SOT, TAB, EncodingScheme, TokenSequence

RESERVED = (PAD, SOT, EOT, TAB, BREAK)


@dataclass
class Vocabulary:
    """Bijective token <-> id map with the reserved tokens at ids 0..4."""

    tokens: list[str]
    scheme: EncodingScheme

    def __post_init__(self):
        self.scheme = EncodingScheme.parse(self.scheme)
        if tuple(self.tokens[: len(RESERVED)]) != RESERVED:
            raise ValueError("vocabulary must start with the reserved tokens")
        self.token_to_id = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.token_to_id) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.token_to_id

    pad_id = property(lambda self: 0)
    sot_id = property(lambda self: 1)
    eot_id = property(lambda self: 2)

    def encode(self, tokens) -> list[int]:
        ids = []
        for tok in tokens:
            try:
                ids.append(self.token_to_id[tok])
            except KeyError:
                raise UnknownToken(tok) from None
        return ids

    def decode(self, ids) -> TokenSequence:
        out = []
        for i in ids:
            i = int(i)
            if not 0 <= i < len(self.tokens):
                raise IdOutOfRange(i)
            out.append(self.tokens[i])
        return TokenSequence(out, self.scheme)


def build_vocabulary(corpus, scheme=None) -> Vocabulary:
    """Reserved tokens followed by corpus tokens in first-occurrence order.

    ``scheme`` is only needed for an empty corpus (defaults to BEKERN).
    Raises ``MixedSchemes`` if the sequences disagree on their scheme.
    """
    corpus = list(corpus)
    schemes = {seq.scheme for seq in corpus}
    if len(schemes) > 1:
        raise MixedSchemes(sorted(s.value for s in schemes))
    if schemes:
        found = schemes.pop()
        if scheme is not None and EncodingScheme.parse(scheme) is not found:
            raise MixedSchemes([found.value, EncodingScheme.parse(scheme).value])
        scheme = found
    tokens = list(RESERVED)
    seen = set(tokens)
    for seq in corpus:
        for tok in seq.tokens:
            if tok not in seen:
                seen.add(tok)
                tokens.append(tok)
    return Vocabulary(tokens, scheme or EncodingScheme.BEKERN)


def encode_ids(tokens, vocab: Vocabulary) -> list[int]:
    return vocab.encode(tokens)


def decode_ids(ids, vocab: Vocabulary) -> TokenSequence:
    return vocab.decode(ids)
