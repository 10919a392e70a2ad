from __future__ import annotations

from pathlib import Path

import numpy as np

from smtpp.errors import TextureTooSmall

TEXTURE_SUFFIXES = (".png", ".jpg", ".jpeg", ".pgm", ".tif", ".tiff", ".bmp")


def apply_texture(image: np.ndarray, texture: np.ndarray, seed) -> np.ndarray:
    """Place the page on a random crop of ``texture``.

    The crop offset depends only on ``seed`` and the two shapes. Composition
    is the pixelwise minimum, so ink is never brightened.
    """
    h, w = image.shape
    th, tw = texture.shape
    if th < h or tw < w:
        raise TextureTooSmall(f"texture {th}x{tw} smaller than page {h}x{w}")
    rng = np.random.default_rng(seed)
    oy = int(rng.integers(0, th - h + 1))
    ox = int(rng.integers(0, tw - w + 1))
    return np.minimum(texture[oy:oy + h, ox:ox + w], image).astype(np.uint8)


def builtin_textures(shape, count: int = 4) -> list[np.ndarray]:
    """Paper-like backgrounds: a tinted gradient plus blurred noise.

    Each texture is 64 pixels larger than ``shape`` in both directions.
    """
    from scipy.ndimage import gaussian_filter

    h, w = shape[0] + 64, shape[1] + 64
    out = []
    for k in range(count):
        rng = np.random.default_rng(1000 + k)
        yy, xx = np.mgrid[0:h, 0:w]
        angle = k * np.pi / count
        ramp = (np.cos(angle) * yy / h + np.sin(angle) * xx / w)
        ramp = (ramp - ramp.min()) / max(np.ptp(ramp), 1e-9)
        noise = gaussian_filter(rng.normal(0.0, 1.0, (h, w)), sigma=2 + 2 * k)
        noise /= max(np.abs(noise).max(), 1e-9)
        tex = 238 - 30 * ramp + 12 * noise
        out.append(np.clip(tex, 170, 255).astype(np.uint8))
    return out


def load_textures(directory) -> list[np.ndarray]:
    from PIL import Image

    textures = []
    for path in sorted(Path(directory).iterdir()):
        if path.suffix.lower() in TEXTURE_SUFFIXES:
            with Image.open(path) as im:
                textures.append(np.asarray(im.convert("L"), dtype=np.uint8).copy())
    return textures
