"""System rasterizers.

The proxy backend is a deterministic, dependency-free engraver: one
five-line staff per spine (first spine at the bottom, as in pianoform
scores), and one filled black note head per note placed by pitch and by
event index. Everything else (staff lines, stems, barlines, accidentals,
dots, rests) is drawn in gray, so the black pixels of a strip are exactly
its note heads and can be counted as connected components.

The external backend pipes the kern text to a user-supplied command
(Verovio or similar) and rasterizes the file it writes.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
import tempfile
from pathlib import Path

import numpy as np

from smtpp.errors import ExternalRendererUnavailable, ShapeError
from smtpp.kern.document import BARLINE, DATA, KernDocument
from smtpp.kern.symbols import DURATION, PITCH, cell_symbols

WHITE = 255
INK = 0
GRAY = 120

RENDERER_ENV = "SMTPP_RENDERER"
DEFAULT_RENDERER = "verovio --from humdrum --to png --output {output} -"

# diatonic step of the bottom staff line
CLEF_BOTTOM = {"*clefG2": 4 * 7 + 2, "*clefF4": 2 * 7 + 4, "*clefC3": 3 * 7 + 3, "*clefC4": 3 * 7 + 1}
LETTER_INDEX = {c: i for i, c in enumerate("cdefgab")}
PAD_STEPS = 5

# 3x5 bitmap digits for time signatures
DIGITS = {
    "0": ("111", "101", "101", "101", "111"), "1": ("010", "110", "010", "010", "111"),
    "2": ("111", "001", "111", "100", "111"), "3": ("111", "001", "111", "001", "111"),
    "4": ("101", "101", "111", "001", "001"), "5": ("111", "100", "111", "001", "111"),
    "6": ("111", "100", "111", "101", "111"), "7": ("111", "001", "010", "010", "010"),
    "8": ("111", "101", "111", "101", "111"), "9": ("111", "101", "111", "001", "111"),
}


def diatonic_step(pitch: str) -> int:
    """``c`` is middle C (octave 4); ``cc`` octave 5; ``C`` octave 3; ``CC`` 2."""
    letter = pitch[0].lower()
    octave = 3 + len(pitch) if pitch[0].islower() else 4 - len(pitch)
    return octave * 7 + LETTER_INDEX[letter]


def note_count(doc: KernDocument) -> int:
    return sum(1 for line in doc.data_lines for cell in line.cells
               for sym in cell_symbols(cell) if not sym.is_rest)


def _clefs(doc: KernDocument) -> list[str]:
    clefs = ["*clefG2"] * doc.spine_count
    for line in doc.lines:
        if line.kind == DATA:
            break
        for i, cell in enumerate(line.cells):
            if cell.startswith("*clef") and i < len(clefs):
                clefs[i] = cell
    return clefs


def _signature(doc: KernDocument) -> tuple[list[str], list[str]]:
    """Key-signature accidentals and meter of the first spine."""
    key, meter = [], []
    for line in doc.lines:
        if line.kind == DATA:
            break
        cell = line.cells[0]
        if cell.startswith("*k[") and cell.endswith("]"):
            body = cell[3:-1]
            key = [body[i:i + 2] for i in range(0, len(body), 2)]
        m = re.match(r"^\*M(\d+)/(\d+)", cell)
        if m:
            meter = [m.group(1), m.group(2)]
    return key, meter


def _draw_digits(img, text, top, x, cell):
    for ch in text:
        for r, row in enumerate(DIGITS.get(ch, DIGITS["0"])):
            for c, bit in enumerate(row):
                if bit == "1":
                    img[top + r * cell:top + (r + 1) * cell, x + c * cell:x + (c + 1) * cell] = GRAY
        x += 4 * cell


def _events(doc: KernDocument) -> list:
    return [line for line in doc.lines if line.kind in (DATA, BARLINE)
            and not (line.kind == BARLINE and line.cells[0].startswith("=="))]


def strip_geometry(doc: KernDocument, spacing: int, width=None):
    half = spacing // 2
    staff_h = 4 * 2 * half
    band = staff_h + 2 * PAD_STEPS * half
    height = band * doc.spine_count
    slots = max(1, len(_events(doc)))
    key, meter = _signature(doc)
    left = 3 * spacing + len(key) * spacing + (2 * spacing if meter else 0)
    if width is None:
        x_step = 2 * spacing + 4
        width = left + slots * x_step + spacing
    else:
        x_step = (width - left - spacing) / slots
        if x_step < 2:
            raise ShapeError(f"strip width {width} too small for {slots} events")
    return half, band, height, int(width), left, x_step


def render_proxy(doc: KernDocument, spacing: int = 8, width=None, clefs=None) -> np.ndarray:
    """Draw one system as an 8-bit grayscale strip (white background)."""
    if spacing < 4:
        raise ShapeError("staff spacing must be at least 4 pixels")
    half, band, height, width, left, x_step = strip_geometry(doc, spacing, width)
    img = np.full((height, width), WHITE, dtype=np.uint8)
    clefs = list(clefs) if clefs is not None else _clefs(doc)
    n = doc.spine_count
    bottoms = []
    for spine in range(n):
        # spine 0 is the lowest staff
        top = (n - 1 - spine) * band + PAD_STEPS * half
        bottom = top + 8 * half
        bottoms.append(bottom)
        for k in range(5):
            img[top + 2 * k * half, left - spacing:width - spacing // 2] = GRAY
        img[top:bottom + 1, left - spacing] = GRAY
        # key signature, then stacked meter digits, all gray
        key, meter = _signature(doc)
        x = 2 * spacing
        for acc in key:
            img[top + half:bottom - half, x] = GRAY
            if acc.endswith("#"):
                img[top + half:bottom - half, x + 2] = GRAY
                img[top + 3 * half, x - 1:x + 4] = GRAY
            else:
                img[top + 5 * half:top + 6 * half, x:x + 3] = GRAY
            x += spacing
        if meter:
            cell = max(1, half // 2)
            _draw_digits(img, meter[0], top + half, x, cell)
            _draw_digits(img, meter[1], top + 5 * half, x, cell)

    head_h = max(1, half - 1)
    heads = []
    for slot, line in enumerate(_events(doc)):
        x = int(round(left + slot * x_step + x_step / 2))
        if line.kind == BARLINE:
            for spine in range(n):
                img[bottoms[spine] - 8 * half:bottoms[spine] + 1, x] = GRAY
            continue
        for spine, cell in enumerate(line.cells[:n]):
            bottom_step = CLEF_BOTTOM.get(clefs[spine], CLEF_BOTTOM["*clefG2"])
            for sym in cell_symbols(cell):
                dur = (sym.of_kind(DURATION) or ["4"])[0]
                if sym.is_rest:
                    y = bottoms[spine] - 4 * half
                    img[y - half:y + half, x - 1:x + 1] = GRAY
                    continue
                pos = diatonic_step(sym.of_kind(PITCH)[0]) - bottom_step
                y = bottoms[spine] - pos * half
                y = min(max(y, head_h), height - head_h - 1)
                value = int(dur.rstrip(".") or 4)
                head_w = spacing + 1 + (2 if value == 2 else 4 if value <= 1 else 0)
                head_w = max(1, min(head_w, int(x_step) - 2))
                x0 = x - head_w // 2
                y0 = y - head_h // 2
                img[max(0, y0 - 3 * spacing):y0, min(width - 1, x0 + head_w)] = GRAY
                if sym.of_kind("accidental"):
                    ax = max(0, x0 - 3)
                    img[max(0, y0 - 1):y0 + head_h + 1, ax] = GRAY
                if "." in dur:
                    img[y0, min(width - 1, x0 + head_w + 2)] = GRAY
                heads.append((y0, x0, head_w))
    # heads last, so no gray mark lands on ink
    for y0, x0, head_w in heads:
        img[y0:y0 + head_h, x0:x0 + head_w] = INK
    return img


def render_external(doc: KernDocument, command=None, timeout: float = 60.0) -> np.ndarray:
    """Render through an external engraver.

    ``command`` (or ``$SMTPP_RENDERER``) is a shell-style template; kern text
    is written to stdin and ``{output}`` is replaced by a temporary raster
    path. Raises ``ExternalRendererUnavailable`` if the command is missing,
    fails, or produces an unreadable file.
    """
    from PIL import Image

    template = command or os.environ.get(RENDERER_ENV) or DEFAULT_RENDERER
    with tempfile.TemporaryDirectory() as tmp:
        output = Path(tmp) / "render.png"
        argv = [a.replace("{output}", str(output)) for a in shlex.split(template)]
        try:
            proc = subprocess.run(argv, input=doc.serialize().encode("utf-8"),
                                  capture_output=True, timeout=timeout)
        except (FileNotFoundError, PermissionError, subprocess.TimeoutExpired) as exc:
            raise ExternalRendererUnavailable(f"cannot run {argv[0]!r}: {exc}") from exc
        if proc.returncode != 0:
            raise ExternalRendererUnavailable(
                f"{argv[0]!r} exited with {proc.returncode}: {proc.stderr.decode(errors='replace')[:200]}")
        candidates = [output] if output.exists() else sorted(Path(tmp).glob("render*"))
        if not candidates:
            raise ExternalRendererUnavailable("renderer produced no output file")
        try:
            with Image.open(candidates[0]) as im:
                if im.mode in ("RGBA", "LA"):
                    bg = Image.new("RGBA", im.size, (255, 255, 255, 255))
                    im = Image.alpha_composite(bg, im.convert("RGBA"))
                return np.asarray(im.convert("L"), dtype=np.uint8).copy()
        except OSError as exc:
            raise ExternalRendererUnavailable(f"cannot rasterize renderer output: {exc}") from exc


def render_system(doc: KernDocument, backend: str = "proxy", spacing: int = 8,
                  width=None, clefs=None, command=None) -> np.ndarray:
    if backend == "proxy":
        return render_proxy(doc, spacing, width, clefs)
    if backend == "external":
        return render_external(doc, command)
    raise ValueError(f"unknown render backend {backend!r}")
