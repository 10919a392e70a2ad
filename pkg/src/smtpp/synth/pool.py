from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from smtpp.errors import DataError, EmptyPool
from smtpp.kern import parse_kern

log = logging.getLogger(__name__)

BUNDLED_CORPUS = Path(__file__).resolve().parent.parent / "data" / "corpus"


@dataclass
class ExcerptPool:
    """Single-system excerpts grouped by their meter interpretation."""

    groups: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)

    def __len__(self):
        return sum(len(g) for g in self.groups.values())

    def keys(self) -> list[str]:
        return sorted(self.groups)

    def all(self) -> list:
        return [doc for key in self.keys() for doc in self.groups[key]]

    def add(self, doc) -> None:
        if doc.spine_count != 2:
            raise DataError(f"expected a 2-spine pianoform excerpt, got {doc.spine_count} spines")
        key = doc.meter
        if key is None:
            raise DataError("excerpt declares no meter")
        self.groups.setdefault(key, []).append(doc)


def load_excerpt_pool(directory=None, pattern: str = "*.krn") -> ExcerptPool:
    """Parse every kern file under ``directory`` and group them by meter.

    Files that fail to parse, or are not 2-spine excerpts with a meter, are
    logged and listed in ``pool.skipped``. Raises ``EmptyPool`` when nothing
    usable remains. Defaults to the bundled mini-corpus.
    """
    directory = Path(directory) if directory is not None else BUNDLED_CORPUS
    pool = ExcerptPool()
    for path in sorted(directory.glob(pattern)):
        try:
            doc = parse_kern(path.read_text(encoding="utf-8"))
            doc.meta["id"] = path.stem
            doc.meta["path"] = str(path)
            pool.add(doc)
        except (DataError, UnicodeDecodeError) as exc:
            log.warning("skipping %s: %s", path, exc)
            pool.skipped.append((str(path), str(exc)))
    if not len(pool):
        raise EmptyPool(f"no usable kern excerpts in {directory}")
    return pool
