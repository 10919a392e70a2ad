"""Token streams for the three encoding schemes.

``tokenize`` reads a normalized document line by line, left to right, and
emits ``<t>`` between the cells of a line and ``<b>`` after every line.
Chord members inside one cell are separated by the content token ``<s>``.
Within a cell, the schemes differ only in how a symbol is split::

    KERN    8e-J       -> ["8e-J"]
    EKERN   8e-J       -> ["8e", "-", "J"]
    BEKERN  8e-J       -> ["8", "e", "-", "J"]

Interpretations, barlines and the null token are always a single token.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from smtpp.errors import DanglingFragment, DataError, UnknownComponent
from smtpp.kern.document import COMMENT, DATA, KernDocument, parse_kern
from smtpp.kern.symbols import NULL_TOKEN, parse_symbol, symbol_fragments

PAD = "<pad>"
SOT = "<sot>"
EOT = "<eot>"
TAB = "<t>"
BREAK = "<b>"
CHORD = "<s>"
SEPARATOR = "·"

CONTROL_TOKENS = (PAD, SOT, EOT, TAB, BREAK)
EMPTY_DOCUMENT = "**kern\n*-\n"


class EncodingScheme(enum.Enum):
    KERN = "kern"
    EKERN = "ekern"
    BEKERN = "bekern"

    @classmethod
    def parse(cls, name) -> "EncodingScheme":
        if isinstance(name, cls):
            return name
        return cls(str(name).lower())


@dataclass
class TokenSequence:
    tokens: list[str]
    scheme: EncodingScheme = EncodingScheme.BEKERN
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.tokens = list(self.tokens)
        self.scheme = EncodingScheme.parse(self.scheme)
        check_tokens(self.tokens)

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def content(self) -> list[str]:
        """Tokens without ``<sot>``, ``<eot>`` and ``<pad>``."""
        return [t for t in self.tokens if t not in (SOT, EOT, PAD)]

    def to_line(self) -> str:
        return " ".join(self.tokens)

    @classmethod
    def from_line(cls, line: str, scheme) -> "TokenSequence":
        return cls(line.split(), scheme)


def check_tokens(tokens: list[str]) -> None:
    for i, tok in enumerate(tokens):
        if not tok or any(c.isspace() for c in tok):
            raise DataError(f"token {i} is empty or contains whitespace: {tok!r}")
        if SEPARATOR in tok:
            raise DataError(f"token {i} contains the {SEPARATOR!r} separator")
        if tok == SOT and i != 0:
            raise DataError("<sot> is only allowed at index 0")
        if tok == EOT and i != len(tokens) - 1:
            raise DataError("<eot> is only allowed at the final index")
        if tok.startswith("<") and tok.endswith(">") and len(tok) > 2 and tok not in CONTROL_TOKENS + (CHORD,):
            raise DataError(f"unknown control token {tok!r}")


def _cell_tokens(cell: str, is_data: bool, scheme: EncodingScheme) -> list[str]:
    if not is_data or cell == NULL_TOKEN:
        return [cell]
    out: list[str] = []
    for j, raw in enumerate(cell.split(" ")):
        if j:
            out.append(CHORD)
        out.extend(symbol_fragments(parse_symbol(raw), scheme))
    return out


def tokenize(doc: KernDocument, scheme) -> TokenSequence:
    """Flatten a normalized document into a token stream (comments skipped)."""
    scheme = EncodingScheme.parse(scheme)
    tokens: list[str] = []
    for line in doc.lines:
        if line.kind == COMMENT:
            continue
        for i, cell in enumerate(line.cells):
            if i:
                tokens.append(TAB)
            tokens.extend(_cell_tokens(cell, line.kind == DATA, scheme))
        tokens.append(BREAK)
    return TokenSequence(tokens, scheme)


def _split(tokens: list[str]) -> list[list[list[str]]]:
    """Group content tokens into lines of cells of tokens."""
    lines: list[list[list[str]]] = []
    cells: list[list[str]] = [[]]
    for tok in tokens:
        if tok == BREAK:
            lines.append(cells)
            cells = [[]]
        elif tok == TAB:
            cells.append([])
        else:
            cells[-1].append(tok)
    if cells != [[]]:
        lines.append(cells)
    return lines


def _is_data_line(cells: list[list[str]]) -> bool:
    first = cells[0][0] if cells and cells[0] else ""
    return not first.startswith(("*", "=", "!"))


def _reassemble(cell: list[str], strict: bool = True) -> list[str]:
    """Rebuild the canonical symbols of one data cell from its fragments."""
    if cell == [NULL_TOKEN]:
        return [NULL_TOKEN]
    symbols: list[str] = []
    group: list[str] = []
    for tok in cell + [CHORD]:
        if tok != CHORD:
            group.append(tok)
            continue
        text = "".join(group)
        try:
            symbols.append(parse_symbol(text).text)
        except UnknownComponent:
            if strict:
                raise DanglingFragment(f"fragments {group!r} do not form a symbol") from None
            symbols.append(text)
        group = []
    return symbols


def _render_lines(tokens: list[str], strict: bool = True) -> list[list[str]]:
    rows: list[list[str]] = []
    for cells in _split(tokens):
        if _is_data_line(cells):
            rows.append([" ".join(_reassemble(c, strict)) for c in cells])
        else:
            rows.append(["".join(c) for c in cells])
    return rows


def detokenize(tokens) -> KernDocument:
    """Inverse of ``tokenize``; raises ``DanglingFragment`` on bad fragments."""
    if isinstance(tokens, TokenSequence):
        tokens = tokens.content()
    else:
        tokens = [t for t in tokens if t not in (SOT, EOT, PAD)]
    if not tokens:
        return parse_kern(EMPTY_DOCUMENT)
    rows = _render_lines(tokens)
    return parse_kern("".join("\t".join(r) + "\n" for r in rows))


def convert(seq: TokenSequence, target, strict: bool = True) -> TokenSequence:
    """Re-split a token stream under another scheme, cell by cell.

    Works on the token structure alone, so hypotheses that are not valid
    documents can still be converted. With ``strict=False`` cells whose
    fragments do not reassemble are kept as one opaque token instead of
    raising ``DanglingFragment``.
    """
    target = EncodingScheme.parse(target)
    if target is seq.scheme:
        return TokenSequence(list(seq.tokens), target)
    head = [SOT] if seq.tokens[:1] == [SOT] else []
    tail = [EOT] if seq.tokens[-1:] == [EOT] and seq.tokens != [SOT] else []
    body = seq.content()
    out: list[str] = list(head)
    for cells in _split(body):
        data = _is_data_line(cells)
        for i, cell in enumerate(cells):
            if i:
                out.append(TAB)
            if not cell:
                continue
            if not data:
                out.append("".join(cell))
                continue
            for j, text in enumerate(_reassemble(cell, strict)):
                if j:
                    out.append(CHORD)
                try:
                    out.extend(_cell_tokens(text, True, target))
                except UnknownComponent:
                    out.append(text)
        out.append(BREAK)
    if body and body[-1] != BREAK:
        out.pop()
    out.extend(tail)
    return TokenSequence(out, target)


def line_texts(seq: TokenSequence) -> list[str]:
    """Serialized text of each line, as used for line-level comparison."""
    return ["\t".join(" ".join(_reassemble(c, False)) if _is_data_line(cells) else "".join(c)
                      for c in cells)
            for cells in _split(seq.content())]


def read_token_file(path, scheme) -> list[TokenSequence]:
    """Read the interchange format: one document per line."""
    with open(path, encoding="utf-8") as fh:
        return [TokenSequence.from_line(line, scheme) for line in fh if line.strip()]


def write_token_file(path, sequences) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for seq in sequences:
            fh.write(seq.to_line() + "\n")
