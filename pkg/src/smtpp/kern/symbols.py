"""Component grammar for **kern note and rest symbols.

A data cell holds one or more symbols separated by spaces (a chord). Each
symbol is decomposed into components, each component being a run of
characters of a single kind. Normalization sorts the components into a
fixed canonical order:

    duration(+dots), pitch or rest, accidental, tie open, slur open,
    beam open, beam close, ornaments, other marks, slur close, tie close

so that e.g. ``J8e-`` and ``8e-J`` share the normal form ``8e-J``.
"""

from __future__ import annotations

from dataclasses import dataclass

from smtpp.errors import UnknownComponent

NULL_TOKEN = "."
CHORD_SEPARATOR = " "

DURATION = "duration"
PITCH = "pitch"
REST = "rest"
ACCIDENTAL = "accidental"
TIE = "tie"
SLUR = "slur"
BEAM_OPEN = "beam-open"
BEAM_CLOSE = "beam-close"
ORNAMENT = "ornament"
OTHER = "other"

KINDS = (DURATION, PITCH, ACCIDENTAL, BEAM_OPEN, BEAM_CLOSE, TIE, SLUR, ORNAMENT, REST, OTHER)

_ORNAMENT_CHARS = "tTmMwWS$RO'\"`~^;:,Iz"
_OTHER_CHARS = "/\\qQPpxXyYvuUhHN"

_CHAR_KIND: dict[str, str] = {}
for _c in "0123456789.":
    _CHAR_KIND[_c] = DURATION
for _c in "abcdefgABCDEFG":
    _CHAR_KIND[_c] = PITCH
_CHAR_KIND["r"] = REST
for _c in "#-n":
    _CHAR_KIND[_c] = ACCIDENTAL
for _c in "[]_":
    _CHAR_KIND[_c] = TIE
for _c in "(){}":
    _CHAR_KIND[_c] = SLUR
for _c in "LK":
    _CHAR_KIND[_c] = BEAM_OPEN
for _c in "Jk":
    _CHAR_KIND[_c] = BEAM_CLOSE
for _c in _ORNAMENT_CHARS:
    _CHAR_KIND[_c] = ORNAMENT
for _c in _OTHER_CHARS:
    _CHAR_KIND[_c] = OTHER

# canonical slot of the first character of a component
_RANK: dict[str, int] = {}
for _c, _k in _CHAR_KIND.items():
    _RANK[_c] = {
        DURATION: 0,
        PITCH: 1,
        REST: 1,
        ACCIDENTAL: 2,
        BEAM_OPEN: 5,
        BEAM_CLOSE: 6,
        ORNAMENT: 7,
        OTHER: 8,
    }.get(_k, -1)
_RANK["["] = 3
_RANK["("] = 4
_RANK["{"] = 4
_RANK[")"] = 9
_RANK["}"] = 9
_RANK["]"] = 10
_RANK["_"] = 10

# stable tiebreak inside one slot
_ORDER = {c: i for i, c in enumerate(
    "0123456789.abcdefgABCDEFGr#-n[({LKJk" + _ORNAMENT_CHARS + _OTHER_CHARS + ")}]_")}


@dataclass(frozen=True)
class KernSymbol:
    """One note, rest or chord member, split into typed components."""

    raw: str
    components: tuple[tuple[str, str], ...]

    @property
    def text(self) -> str:
        return "".join(text for _, text in self.components)

    def of_kind(self, *kinds: str) -> list[str]:
        return [text for kind, text in self.components if kind in kinds]

    @property
    def is_rest(self) -> bool:
        return bool(self.of_kind(REST))


def _split_runs(raw: str, line_no=None) -> list[tuple[str, str]]:
    runs: list[tuple[str, str]] = []
    for ch in raw:
        kind = _CHAR_KIND.get(ch)
        if kind is None:
            raise UnknownComponent(raw, line_no, ch)
        if runs and (runs[-1][1][-1] == ch or kind == DURATION == runs[-1][0]):
            runs[-1] = (kind, runs[-1][1] + ch)
        else:
            runs.append((kind, ch))
    return runs


def parse_symbol(raw: str, line_no=None) -> KernSymbol:
    """Parse a single symbol (no spaces) into canonically ordered components.

    Duration digits and prolongation dots are gathered into one component
    wherever they appear. Raises ``UnknownComponent`` for characters
    outside the grammar, or for symbols without exactly one pitch or rest.
    """
    if not raw or any(c.isspace() for c in raw):
        raise UnknownComponent(raw, line_no)
    runs = _split_runs(raw, line_no)

    durations = [t for k, t in runs if k == DURATION]
    digits = "".join(c for t in durations for c in t if c != ".")
    dots = "".join(c for t in durations for c in t if c == ".")
    if sum(1 for t in durations if t.strip(".")) > 1 or (dots and not digits):
        raise UnknownComponent(raw, line_no)

    body = [(k, t) for k, t in runs if k != DURATION]
    if len([t for k, t in body if k in (PITCH, REST)]) != 1:
        raise UnknownComponent(raw, line_no)
    if len([t for k, t in body if k == ACCIDENTAL]) > 1:
        raise UnknownComponent(raw, line_no)

    body.sort(key=lambda kt: (_RANK[kt[1][0]], _ORDER[kt[1][0]]))
    merged: list[tuple[str, str]] = []
    for kind, text in body:
        if merged and merged[-1][1][-1] == text[0]:
            merged[-1] = (kind, merged[-1][1] + text)
        else:
            merged.append((kind, text))
    components = ([(DURATION, digits + dots)] if digits else []) + merged
    return KernSymbol(raw=raw, components=tuple(components))


def normalize_symbol(raw: str, line_no=None) -> str:
    return parse_symbol(raw, line_no).text


def normalize_cell(cell: str, line_no=None) -> str:
    """Normalize a data cell; the null token passes through unchanged."""
    if cell == NULL_TOKEN:
        return cell
    return CHORD_SEPARATOR.join(normalize_symbol(s, line_no) for s in cell.split(CHORD_SEPARATOR))


def cell_symbols(cell: str) -> list[KernSymbol]:
    if cell == NULL_TOKEN:
        return []
    return [parse_symbol(s) for s in cell.split(CHORD_SEPARATOR)]


def symbol_fragments(symbol: KernSymbol, scheme) -> list[str]:
    """Split a canonical symbol into scheme-specific fragments."""
    from smtpp.kern.tokens import EncodingScheme

    if scheme is EncodingScheme.KERN:
        return [symbol.text]
    if scheme is EncodingScheme.BEKERN:
        return [text for _, text in symbol.components]
    # EKERN: duration fused with the note head, everything else separate
    head = "".join(symbol.of_kind(DURATION, PITCH, REST))
    return [head] + [text for kind, text in symbol.components if kind not in (DURATION, PITCH, REST)]
