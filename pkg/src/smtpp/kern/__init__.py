"""Humdrum **kern parsing, normalization and tokenization."""

from smtpp.kern.document import (
    BARLINE, COMMENT, DATA, EXCLUSIVE, TANDEM, TERMINATOR,
    KernDocument, KernLine, normalize, parse_kern, serialize,
)
from smtpp.kern.symbols import KernSymbol, normalize_symbol, parse_symbol
from smtpp.kern.tokens import (
    BREAK, CHORD, CONTROL_TOKENS, EOT, PAD, SOT, TAB,
    EncodingScheme, TokenSequence, convert, detokenize, line_texts,
    read_token_file, tokenize, write_token_file,
)
from smtpp.kern.vocab import Vocabulary, build_vocabulary, decode_ids, encode_ids

__all__ = [
    "BARLINE", "COMMENT", "DATA", "EXCLUSIVE", "TANDEM", "TERMINATOR",
    "KernDocument", "KernLine", "normalize", "parse_kern", "serialize",
    "KernSymbol", "normalize_symbol", "parse_symbol",
    "BREAK", "CHORD", "CONTROL_TOKENS", "EOT", "PAD", "SOT", "TAB",
    "EncodingScheme", "TokenSequence", "convert", "detokenize", "line_texts",
    "read_token_file", "tokenize", "write_token_file",
    "Vocabulary", "build_vocabulary", "decode_ids", "encode_ids",
]
