"""Write the bundled mini-corpus of single-system pianoform excerpts.

Usage: python tools/make_corpus.py [outdir] [count] [seed]

Excerpts are random but rhythmically consistent two-spine **kern files.
About a fifth of the symbols are written with their components in a
shuffled order so that the corpus exercises normalization.
"""

import random
import sys
from pathlib import Path

METERS = {"*M4/4": 16, "*M3/4": 12, "*M2/4": 8, "*M6/8": 12, "*M3/8": 6}
KEYS = ["*k[]", "*k[f#]", "*k[b-]", "*k[f#c#]", "*k[b-e-a-]"]
DURATIONS = {1: "16", 2: "8", 3: "8.", 4: "4", 6: "4.", 8: "2", 12: "2.", 16: "1"}

TREBLE = ["e", "f", "g", "a", "b", "cc", "dd", "ee", "ff", "gg"]
BASS = ["GG", "AA", "BB", "C", "D", "E", "F", "G", "A", "B", "c"]


def _third_above(p, pool):
    i = pool.index(p)
    return pool[i + 2] if i + 2 < len(pool) else None


def _rhythm(rng, length):
    out, left = [], length
    while left:
        choices = [d for d in DURATIONS if d <= left]
        weights = [4 if d in (2, 4) else 2 if d in (1, 8) else 1 for d in choices]
        d = rng.choices(choices, weights)[0]
        out.append(d)
        left -= d
    return out


def _voice(rng, length, pool, chords):
    events, t = [], 0
    prev = rng.randrange(len(pool))
    for d in _rhythm(rng, length):
        if rng.random() < 0.08:
            events.append((t, d, ["r"], []))
        else:
            prev = max(0, min(len(pool) - 1, prev + rng.choice([-2, -1, 0, 1, 2])))
            notes = [pool[prev]]
            if chords and rng.random() < 0.3:
                up = _third_above(pool[prev], pool)
                if up:
                    notes.append(up)
            marks = []
            r = rng.random()
            if r < 0.12:
                marks.append(rng.choice(["#", "-", "n"]))
            if rng.random() < 0.1:
                marks.append(rng.choice(["'", "^", "~", ";", "t"]))
            events.append((t, d, notes, marks))
        t += d
    return events


def _beam(events):
    """Attach L/J to runs of two or more beamable notes within a quarter."""
    marks = [[] for _ in events]
    run = []

    def flush():
        if len(run) >= 2:
            marks[run[0]].append("L")
            marks[run[-1]].append("J")
        run.clear()

    for i, (t, d, notes, _) in enumerate(events):
        beamable = d < 4 and notes != ["r"]
        if not beamable or (run and events[run[0]][0] // 4 != t // 4):
            flush()
        if beamable:
            run.append(i)
    flush()
    return marks


def _symbols(rng, events, slur_ok):
    extras = _beam(events)
    slur_open = None
    pitched = [i for i, e in enumerate(events) if e[2] != ["r"]]
    for i in pitched:
        if not slur_ok:
            break
        if slur_open is None and rng.random() < 0.1 and i != pitched[-1]:
            extras[i].append("(")
            slur_open = i
        elif slur_open is not None and (rng.random() < 0.5 or i == pitched[-1]):
            extras[i].append(")")
            slur_open = None
    cells = []
    for i, (t, d, notes, marks) in enumerate(events):
        parts = []
        for k, n in enumerate(notes):
            comps = [DURATIONS[d], n] + (marks + extras[i] if k == 0 else [])
            if rng.random() < 0.2:
                rng.shuffle(comps)
            parts.append("".join(comps))
        cells.append(" ".join(parts))
    return cells


def excerpt(rng):
    meter = rng.choice(list(METERS))
    length = METERS[meter]
    key = rng.choice(KEYS)
    rows = [["**kern", "**kern"], ["*clefF4", "*clefG2"], [key, key], [meter, meter]]
    for m in range(1, rng.randint(2, 4) + 1):
        rows.append([f"={m}", f"={m}"])
        lo = _voice(rng, length, BASS, chords=True)
        hi = _voice(rng, length, TREBLE, chords=rng.random() < 0.5)
        lo_cells = dict(zip([e[0] for e in lo], _symbols(rng, lo, True)))
        hi_cells = dict(zip([e[0] for e in hi], _symbols(rng, hi, True)))
        for t in sorted(set(lo_cells) | set(hi_cells)):
            rows.append([lo_cells.get(t, "."), hi_cells.get(t, ".")])
    rows.append(["==", "=="])
    rows.append(["*-", "*-"])
    return "".join("\t".join(r) + "\n" for r in rows)


def main(argv):
    out = Path(argv[1] if len(argv) > 1 else "src/smtpp/data/corpus")
    count = int(argv[2]) if len(argv) > 2 else 36
    rng = random.Random(int(argv[3]) if len(argv) > 3 else 2024)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(count):
        (out / f"excerpt_{i:03d}.krn").write_text(excerpt(rng), encoding="utf-8")


if __name__ == "__main__":
    main(sys.argv)
