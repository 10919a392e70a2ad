"""Convolutional feature extractors producing (B, h/16, w/8, c_e) maps."""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

from smtpp.errors import ShapeError
from smtpp.model.config import EncoderConfig

CNN_POOLS = ((2, 2), (2, 2), (2, 2), (2, 1))


class CNNEncoder(nn.Module):
    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        chans = (1,) + cfg.widths
        self.convs = nn.ModuleList(
            nn.Conv2d(chans[k], chans[k + 1], 3, padding=1) for k in range(4))

    def forward(self, x):
        for conv, pool in zip(self.convs, CNN_POOLS):
            x = F.max_pool2d(F.relu(conv(x)), pool)
        return x


class ChannelsLastNorm(nn.LayerNorm):
    """LayerNorm over the channel axis of an NCHW tensor."""

    def forward(self, x):
        return super().forward(x.permute(0, 2, 3, 1)).permute(0, 3, 1, 2)


class ConvNeXtBlock(nn.Module):
    def __init__(self, dim: int):
        super().__init__()
        self.dwconv = nn.Conv2d(dim, dim, 7, padding=3, groups=dim)
        self.norm = nn.LayerNorm(dim)
        self.pw1 = nn.Linear(dim, 4 * dim)
        self.pw2 = nn.Linear(4 * dim, dim)

    def forward(self, x):
        y = self.dwconv(x).permute(0, 2, 3, 1)
        y = self.pw2(F.gelu(self.pw1(self.norm(y))))
        return x + y.permute(0, 3, 1, 2)


class NeXtEncoder(nn.Module):
    """First three ConvNeXt stages, strides arranged for a (16, 8) reduction."""

    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        w0, w1, w2 = cfg.widths
        self.stem = nn.Sequential(nn.Conv2d(1, w0, 4, stride=4), ChannelsLastNorm(w0))
        self.stage1 = nn.Sequential(*[ConvNeXtBlock(w0) for _ in range(cfg.blocks)])
        self.down1 = nn.Sequential(ChannelsLastNorm(w0), nn.Conv2d(w0, w1, 2, stride=2))
        self.stage2 = nn.Sequential(*[ConvNeXtBlock(w1) for _ in range(cfg.blocks)])
        self.down2 = nn.Sequential(ChannelsLastNorm(w1), nn.Conv2d(w1, w2, (2, 1), stride=(2, 1)))
        self.stage3 = nn.Sequential(*[ConvNeXtBlock(w2) for _ in range(cfg.blocks)])

    def forward(self, x):
        x = self.stage1(self.stem(x))
        x = self.stage2(self.down1(x))
        return self.stage3(self.down2(x))


def build_encoder(cfg: EncoderConfig) -> nn.Module:
    return CNNEncoder(cfg) if cfg.variant == "CNN" else NeXtEncoder(cfg)


def pad_to_multiple(images: torch.Tensor, r_h: int = 16, r_w: int = 8, value: float = 1.0) -> torch.Tensor:
    """Pad (B, 1, H, W) on the bottom/right with white up to multiples of (r_h, r_w)."""
    if images.dim() != 4 or images.shape[1] != 1:
        raise ShapeError(f"expected (B, 1, H, W) images, got {tuple(images.shape)}")
    h, w = images.shape[-2:]
    if h == 0 or w == 0:
        raise ShapeError("empty image")
    ph, pw = (-h) % r_h, (-w) % r_w
    if ph or pw:
        images = F.pad(images, (0, pw, 0, ph), value=value)
    return images


def encoder_forward(encoder: nn.Module, images: torch.Tensor, cfg: EncoderConfig) -> torch.Tensor:
    """Images in [0, 1] of shape (B, 1, H, W) -> feature maps (B, ceil(H/16), ceil(W/8), c_e)."""
    x = pad_to_multiple(images, cfg.r_h, cfg.r_w)
    fm = encoder(x).permute(0, 2, 3, 1)
    expect = (x.shape[-2] // cfg.r_h, x.shape[-1] // cfg.r_w, cfg.channels)
    if tuple(fm.shape[1:]) != expect:
        raise ShapeError(f"encoder produced {tuple(fm.shape[1:])}, expected {expect}")
    return fm
