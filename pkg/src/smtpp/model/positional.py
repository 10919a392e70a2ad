from __future__ import annotations

import math

import torch

from smtpp.errors import BadChannelCount


def positional_encoding_2d(h_e: int, w_e: int, c_e: int, dtype=torch.float32) -> torch.Tensor:
    """Sinusoidal 2D encoding of shape (h_e, w_e, c_e).

    Channels [0, c_e/2) encode the horizontal index and [c_e/2, c_e) the
    vertical one, alternating sin/cos with frequency 1/10000^(2i/c_e) for
    i in [0, c_e/4). The exponent uses the full channel count c_e.
    """
    if c_e <= 0 or c_e % 4:
        raise BadChannelCount(f"c_e={c_e} is not a positive multiple of 4")
    i = torch.arange(c_e // 4, dtype=torch.float64)
    inv_freq = 1.0 / (10000.0 ** (2 * i / c_e))
    xs = torch.arange(w_e, dtype=torch.float64)[:, None] * inv_freq  # (w_e, c_e/4)
    ys = torch.arange(h_e, dtype=torch.float64)[:, None] * inv_freq  # (h_e, c_e/4)
    pe = torch.zeros(h_e, w_e, c_e, dtype=torch.float64)
    half = c_e // 2
    pe[:, :, 0:half:2] = torch.sin(xs)[None, :, :]
    pe[:, :, 1:half:2] = torch.cos(xs)[None, :, :]
    pe[:, :, half::2] = torch.sin(ys)[:, None, :]
    pe[:, :, half + 1::2] = torch.cos(ys)[:, None, :]
    return pe.to(dtype)


def positional_encoding_1d(length: int, dim: int, dtype=torch.float32) -> torch.Tensor:
    """Standard sinusoidal encoding of shape (length, dim)."""
    pos = torch.arange(length, dtype=torch.float64)[:, None]
    i = torch.arange(0, dim, 2, dtype=torch.float64)
    angle = pos / (10000.0 ** (i / dim))
    pe = torch.zeros(length, dim, dtype=torch.float64)
    pe[:, 0::2] = torch.sin(angle)
    pe[:, 1::2] = torch.cos(angle[:, : dim // 2])
    return pe.to(dtype)


def flatten(fm: torch.Tensor) -> torch.Tensor:
    """(..., h_e, w_e, c) -> (..., h_e*w_e, c), row-major: (r, c) -> r*w_e + c."""
    *lead, h, w, c = fm.shape
    return fm.reshape(*lead, h * w, c)


def unflatten(seq: torch.Tensor, h_e: int, w_e: int) -> torch.Tensor:
    *lead, n, c = seq.shape
    if n != h_e * w_e:
        raise ValueError(f"sequence length {n} != {h_e}*{w_e}")
    return seq.reshape(*lead, h_e, w_e, c)


def output_shape(h: int, w: int, r_h: int = 16, r_w: int = 8) -> tuple[int, int]:
    return math.ceil(h / r_h), math.ceil(w / r_w)
