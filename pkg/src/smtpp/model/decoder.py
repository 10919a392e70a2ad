"""Pre-norm Transformer decoder with causal self-attention and cross-attention."""

from __future__ import annotations

import math

import torch
import torch.nn as nn
import torch.nn.functional as F

from smtpp.errors import PrefixTooLong
from smtpp.model.config import DecoderConfig
from smtpp.model.positional import positional_encoding_1d


class MultiHeadAttention(nn.Module):
    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.heads = heads
        self.q = nn.Linear(dim, dim)
        self.k = nn.Linear(dim, dim)
        self.v = nn.Linear(dim, dim)
        self.o = nn.Linear(dim, dim)

    def forward(self, x, memory, mask=None):
        """``mask`` is boolean, broadcastable to (B, heads, T, S); True = blocked."""
        b, t, d = x.shape
        s = memory.shape[1]
        hd = d // self.heads
        q = self.q(x).view(b, t, self.heads, hd).transpose(1, 2)
        k = self.k(memory).view(b, s, self.heads, hd).transpose(1, 2)
        v = self.v(memory).view(b, s, self.heads, hd).transpose(1, 2)
        scores = q @ k.transpose(-1, -2) / math.sqrt(hd)
        if mask is not None:
            scores = scores.masked_fill(mask, float("-inf"))
        att = torch.softmax(scores, dim=-1)
        out = (att @ v).transpose(1, 2).reshape(b, t, d)
        return self.o(out)


class DecoderLayer(nn.Module):
    def __init__(self, cfg: DecoderConfig):
        super().__init__()
        d = cfg.embed_dim
        self.norm1 = nn.LayerNorm(d)
        self.self_attn = MultiHeadAttention(d, cfg.heads)
        self.norm2 = nn.LayerNorm(d)
        self.cross_attn = MultiHeadAttention(d, cfg.heads)
        self.norm3 = nn.LayerNorm(d)
        self.ff1 = nn.Linear(d, cfg.ff_dim)
        self.ff2 = nn.Linear(cfg.ff_dim, d)

    def forward(self, x, memory, causal, memory_mask):
        h = self.norm1(x)
        x = x + self.self_attn(h, h, causal)
        x = x + self.cross_attn(self.norm2(x), memory, memory_mask)
        return x + self.ff2(F.gelu(self.ff1(self.norm3(x))))


def causal_mask(t: int, device=None) -> torch.Tensor:
    return torch.triu(torch.ones(t, t, dtype=torch.bool, device=device), diagonal=1)


class Decoder(nn.Module):
    def __init__(self, cfg: DecoderConfig, vocab_size: int):
        super().__init__()
        self.cfg = cfg
        self.embed = nn.Embedding(vocab_size, cfg.embed_dim)
        self.layers = nn.ModuleList(DecoderLayer(cfg) for _ in range(cfg.layers))
        self.norm = nn.LayerNorm(cfg.embed_dim)
        self.out = nn.Linear(cfg.embed_dim, vocab_size)
        self.register_buffer("pos", positional_encoding_1d(cfg.max_len, cfg.embed_dim, torch.float64),
                             persistent=False)

    def forward(self, memory, prefix, memory_mask=None):
        """Logits (B, T, |vocab|) for every prefix position.

        ``memory`` is (B, S, d); ``memory_mask`` (B, S) marks padded memory
        positions with True.
        """
        t = prefix.shape[1]
        if t > self.cfg.max_len:
            raise PrefixTooLong(f"prefix of {t} tokens exceeds max_len={self.cfg.max_len}")
        x = self.embed(prefix) + self.pos[:t].to(memory.dtype)
        causal = causal_mask(t, prefix.device)
        mem_mask = memory_mask[:, None, None, :] if memory_mask is not None else None
        for layer in self.layers:
            x = layer(x, memory, causal, mem_mask)
        return self.out(self.norm(x))
