"""Image-to-sequence model: encoder, 2D positional encoding, flattening,
autoregressive decoder and greedy decoding."""

from __future__ import annotations

import math

import numpy as np
import torch
import torch.nn as nn

from smtpp.kern.tokens import EOT, PAD, SOT, TokenSequence
from smtpp.model.config import ModelConfig
from smtpp.model.decoder import Decoder
from smtpp.model.encoder import build_encoder, encoder_forward
from smtpp.model.positional import flatten, positional_encoding_1d, positional_encoding_2d


def init_uniform_(module: nn.Module, seed: int) -> None:
    """Seeded U(-a, a) init with a = sqrt(1/fan_in); zero biases, unit norms."""
    gen = torch.Generator().manual_seed(seed)
    for name, p in module.named_parameters():
        leaf = name.rsplit(".", 1)[-1]
        parent = module.get_submodule(name.rsplit(".", 1)[0]) if "." in name else module
        with torch.no_grad():
            if isinstance(parent, nn.LayerNorm):
                p.fill_(1.0 if leaf == "weight" else 0.0)
            elif leaf == "bias":
                p.zero_()
            else:
                fan_in = 1 if isinstance(parent, nn.Embedding) else p[0].numel()
                a = math.sqrt(1.0 / fan_in)
                p.copy_(torch.rand(p.shape, generator=gen, dtype=torch.float64).mul(2 * a).sub(a))


def to_tensor(image) -> torch.Tensor:
    """8-bit grayscale (H, W) -> (1, 1, H, W) float in [0, 1], white = 1."""
    arr = np.asarray(image, dtype=np.float32) / 255.0
    return torch.from_numpy(arr)[None, None]


class SMTModel(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.encoder = build_encoder(cfg.encoder)
        c_e, d = cfg.encoder.channels, cfg.decoder.embed_dim
        self.proj = nn.Linear(c_e, d) if c_e != d else nn.Identity()
        self.decoder = Decoder(cfg.decoder, cfg.vocab_size)
        init_uniform_(self, cfg.seed)

    @property
    def dtype(self):
        return next(self.parameters()).dtype

    def features(self, images) -> torch.Tensor:
        """Feature maps (B, h_e, w_e, c_e) with positional encoding added."""
        fm = encoder_forward(self.encoder, images.to(self.dtype), self.cfg.encoder)
        _, h_e, w_e, c_e = fm.shape
        kind = self.cfg.positional_encoding
        if kind == "2d":
            fm = fm + positional_encoding_2d(h_e, w_e, c_e, fm.dtype)
        elif kind == "1d":
            fm = fm + positional_encoding_1d(h_e * w_e, c_e, fm.dtype).view(h_e, w_e, c_e)
        return fm

    def encode(self, images, sizes=None):
        """Flattened memory (B, h_e*w_e, d) and its padding mask (or None).

        ``sizes`` lists the unpadded (H, W) of each image in a padded batch.
        """
        fm = self.features(images)
        b, h_e, w_e, _ = fm.shape
        memory = self.proj(flatten(fm))
        mask = None
        if sizes is not None:
            mask = torch.ones(b, h_e, w_e, dtype=torch.bool)
            r_h, r_w = self.cfg.encoder.r_h, self.cfg.encoder.r_w
            for i, (h, w) in enumerate(sizes):
                mask[i, :math.ceil(h / r_h), :math.ceil(w / r_w)] = False
            mask = mask.view(b, h_e * w_e)
        return memory, mask

    def decode(self, memory, prefix, memory_mask=None):
        return self.decoder(memory, prefix, memory_mask)

    def forward(self, images, prefix, sizes=None):
        memory, mask = self.encode(images, sizes)
        return self.decode(memory, prefix, mask)


def argmax_lowest(row) -> int:
    """Index of the maximum; ties go to the lowest index."""
    row = np.asarray(row)
    return int(np.flatnonzero(row == row.max())[0])


@torch.no_grad()
def greedy_decode(model, image, vocab, max_len: int = 512) -> TokenSequence:
    """Argmax decoding from ``<sot>`` until ``<eot>`` or ``max_len`` tokens.

    ``model`` needs ``encode(images) -> (memory, mask)`` and
    ``decode(memory, prefix, mask) -> logits``. The result excludes
    ``<sot>``, ``<eot>`` and ``<pad>``.
    """
    images = image if torch.is_tensor(image) else to_tensor(image)
    memory, mask = model.encode(images)
    limit = max_len
    dec_cfg = getattr(getattr(model, "cfg", None), "decoder", None)
    if dec_cfg is not None:
        limit = min(max_len, dec_cfg.max_len - 1)
    prefix = [vocab.sot_id]
    out = []
    while len(out) < limit:
        logits = model.decode(memory, torch.tensor([prefix]), mask)[0, -1]
        nxt = argmax_lowest(logits.double().numpy())
        if nxt == vocab.eot_id:
            break
        prefix.append(nxt)
        out.append(nxt)
    tokens = [vocab.tokens[i] for i in out if vocab.tokens[i] not in (SOT, EOT, PAD)]
    return TokenSequence(tokens, vocab.scheme)
