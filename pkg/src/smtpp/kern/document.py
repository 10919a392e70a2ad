"""Parsing, validation and serialization of Humdrum **kern documents."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from smtpp.errors import DataError, MalformedHeader, SpineMismatch
from smtpp.kern.symbols import normalize_cell

EXCLUSIVE = "exclusive-interpretation"
TANDEM = "tandem-interpretation"
DATA = "data"
BARLINE = "barline"
TERMINATOR = "terminator"
COMMENT = "comment"

LINE_KINDS = (EXCLUSIVE, TANDEM, DATA, BARLINE, TERMINATOR, COMMENT)

_MEASURE_RE = re.compile(r"^=(\d+)(.*)$")


class MissingTerminator(DataError):
    pass


@dataclass(frozen=True)
class KernLine:
    cells: tuple[str, ...]
    kind: str

    @property
    def text(self) -> str:
        return "\t".join(self.cells)


@dataclass(frozen=True)
class KernDocument:
    lines: tuple[KernLine, ...]
    spine_count: int
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def serialize(self) -> str:
        return "".join(line.text + "\n" for line in self.lines)

    def lines_of(self, *kinds: str) -> list[KernLine]:
        return [line for line in self.lines if line.kind in kinds]

    @property
    def data_lines(self) -> list[KernLine]:
        return self.lines_of(DATA)

    def interpretation(self, prefix: str) -> str | None:
        """First tandem interpretation cell starting with ``prefix``."""
        for line in self.lines_of(TANDEM):
            for cell in line.cells:
                if cell.startswith(prefix):
                    return cell
        return None

    @property
    def meter(self) -> str | None:
        for line in self.lines_of(TANDEM):
            for cell in line.cells:
                if re.match(r"^\*M\d", cell):
                    return cell
        return None


def classify(cells: list[str]) -> str:
    first = cells[0]
    if first.startswith("!"):
        return COMMENT
    if first.startswith("**"):
        return EXCLUSIVE
    if first.startswith("*"):
        if all(c == "*-" for c in cells):
            return TERMINATOR
        return TANDEM
    if first.startswith("="):
        return BARLINE
    return DATA


def _spines_after(cells: tuple[str, ...]) -> int:
    count = 0
    merging = False
    for cell in cells:
        if cell == "*v":
            if not merging:
                count += 1
            merging = True
            continue
        merging = False
        if cell in ("*^", "*+"):
            count += 2
        elif cell == "*-":
            pass
        else:
            count += 1
    return count


def parse_kern(text: str) -> KernDocument:
    """Parse **kern text into a validated ``KernDocument``.

    Blank lines are ignored. Global comments (``!!``) are a single cell
    regardless of tabs. Raises ``MalformedHeader`` when the first
    non-comment line is not all ``**kern`` and ``SpineMismatch`` (with the
    1-based line number) when a line disagrees with the active spine count.
    """
    lines: list[KernLine] = []
    active = None
    spine_count = None
    ended = False
    for no, raw in enumerate(text.splitlines(), start=1):
        raw = raw.rstrip()
        if not raw:
            continue
        if raw.startswith("!!"):
            lines.append(KernLine((raw,), COMMENT))
            continue
        cells = tuple(raw.split("\t"))
        kind = classify(list(cells))
        if active is None:
            if kind == COMMENT:
                raise MalformedHeader(f"line {no}: local comment before **kern header")
            if kind != EXCLUSIVE or any(c != "**kern" for c in cells):
                raise MalformedHeader(f"line {no}: expected **kern header, got {raw!r}")
            active = spine_count = len(cells)
            lines.append(KernLine(cells, kind))
            continue
        if ended:
            raise SpineMismatch(no, 0, len(cells))
        if len(cells) != active:
            raise SpineMismatch(no, active, len(cells))
        if any(not c for c in cells):
            raise DataError(f"line {no}: empty cell")
        if kind == EXCLUSIVE:
            raise MalformedHeader(f"line {no}: repeated exclusive interpretation")
        if kind in (TANDEM, TERMINATOR):
            active = _spines_after(cells)
            if active == 0:
                ended = True
        lines.append(KernLine(cells, kind))
    if active is None:
        raise MalformedHeader("no **kern header line")
    if not ended:
        raise MissingTerminator("document does not end with a *- terminator line")
    if [line for line in lines if line.kind != COMMENT][-1].kind != TERMINATOR:
        raise MissingTerminator("spines ended by a partial terminator")
    return KernDocument(tuple(lines), spine_count)


def serialize(doc: KernDocument) -> str:
    return doc.serialize()


def normalize(doc: KernDocument) -> KernDocument:
    """Rewrite every data symbol into canonical component order.

    Comment lines are dropped: they carry no engraved content and are never
    tokenized. Idempotent. Raises ``UnknownComponent`` naming the symbol and
    its line.
    """
    out: list[KernLine] = []
    for no, line in enumerate(doc.lines, start=1):
        if line.kind == COMMENT:
            continue
        if line.kind == DATA:
            cells = tuple(normalize_cell(c, no) for c in line.cells)
            out.append(KernLine(cells, DATA))
        else:
            out.append(line)
    return KernDocument(tuple(out), doc.spine_count, dict(doc.meta))


def measure_number(cell: str) -> int | None:
    m = _MEASURE_RE.match(cell)
    return int(m.group(1)) if m else None


def renumber_barline(cell: str, number: int) -> str:
    m = _MEASURE_RE.match(cell)
    if not m:
        return cell
    return f"={number}{m.group(2)}"


def from_lines(rows: list[list[str]]) -> KernDocument:
    """Build and validate a document from rows of cells."""
    return parse_kern("".join("\t".join(r) + "\n" for r in rows))
