"""Page bitmaps and dataset manifests on disk."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from smtpp.errors import DataError

SPLITS = ("train", "val", "test")


def write_pgm(path, image: np.ndarray) -> None:
    """Write an 8-bit grayscale binary PGM (P5)."""
    image = np.asarray(image, dtype=np.uint8)
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def read_image(path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.uint8).copy()


def write_manifest(path, records) -> None:
    """``records`` are (image_path, kern_path) or (image_path, kern_path, split)."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write("\t".join(str(x) for x in rec) + "\n")


def read_manifest(path, check: bool = True) -> list[tuple]:
    """Read manifest records, resolving relative paths against its directory.

    Returns (image_path, kern_path, split-or-None) tuples.
    """
    path = Path(path)
    base = path.parent
    records = []
    with open(path, encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) not in (2, 3):
                raise DataError(f"{path}:{no}: expected 2 or 3 tab-separated fields")
            image, kern = (base / fields[0]), (base / fields[1])
            split = fields[2] if len(fields) == 3 else None
            if split is not None and split not in SPLITS:
                raise DataError(f"{path}:{no}: unknown split {split!r}")
            if check:
                for p in (image, kern):
                    if not p.exists():
                        raise DataError(f"{path}:{no}: missing file {p}")
            records.append((image, kern, split))
    return records


def assign_splits(n: int, seed, fractions=(0.6, 0.2, 0.2)) -> list[str]:
    """Seeded disjoint train/val/test assignment for ``n`` records."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_train = int(round(fractions[0] * n))
    n_val = int(round(fractions[1] * n))
    labels = [""] * n
    for rank, idx in enumerate(order):
        labels[idx] = "train" if rank < n_train else "val" if rank < n_train + n_val else "test"
    return labels
