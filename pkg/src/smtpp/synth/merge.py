"""Concatenate single-system excerpts into one multi-system document."""

from __future__ import annotations

from smtpp.errors import MergeConflict, MeterMismatch
from smtpp.kern.document import (
    BARLINE, COMMENT, EXCLUSIVE, TANDEM, TERMINATOR, KernDocument, KernLine, measure_number, parse_kern, renumber_barline,
)


def header_length(doc: KernDocument) -> int:
    """Number of leading interpretation lines (clef, key, meter, ...)."""
    n = 0
    for line in doc.lines:
        if line.kind not in (EXCLUSIVE, TANDEM, COMMENT):
            break
        n += 1
    return n


def _body(doc: KernDocument, last: bool) -> list[KernLine]:
    lines = list(doc.lines[header_length(doc):])
    if not last:
        while lines and (lines[-1].kind == TERMINATOR or
                         (lines[-1].kind == BARLINE and lines[-1].cells[0].startswith("=="))):
            lines.pop()
    return lines


def merge_excerpts(excerpts) -> KernDocument:
    """Merge excerpts of one meter group into a single document.

    The first excerpt supplies the header (clefs, key signature, meter);
    later excerpts lose their header lines, and all but the last lose their
    final ``==`` barline and terminator. Numbered barlines are renumbered
    sequentially from 1. ``meta["system_starts"]`` holds the index of the
    first line of each excerpt in the merged document.
    """
    excerpts = list(excerpts)
    if not excerpts:
        raise ValueError("nothing to merge")
    spines = {d.spine_count for d in excerpts}
    if len(spines) != 1:
        raise MergeConflict(f"spine counts differ: {sorted(spines)}")
    meters = {d.meter for d in excerpts}
    if len(meters) != 1:
        raise MeterMismatch(f"meters differ: {sorted(str(m) for m in meters)}")

    first = excerpts[0]
    lines = list(first.lines[:header_length(first)])
    starts = []
    for k, doc in enumerate(excerpts):
        starts.append(len(lines) if k else 0)
        lines.extend(_body(doc, k == len(excerpts) - 1))

    number = 0
    out = []
    for line in lines:
        if line.kind == BARLINE and measure_number(line.cells[0]) is not None:
            number += 1
            line = KernLine(tuple(renumber_barline(c, number) for c in line.cells), BARLINE)
        out.append(line)
    merged = parse_kern("".join(line.text + "\n" for line in out))
    merged.meta.update(system_starts=starts, excerpts=[d.meta.get("id") for d in excerpts])
    return merged
