"""Finite-difference verification of backpropagated gradients.

Everything runs in float64. The analytic side is torch autograd; the
oracle is a central difference (f(p + h) - f(p - h)) / 2h applied to every
scalar parameter in turn.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from smtpp.model.config import DecoderConfig, EncoderConfig, ModelConfig
from smtpp.model.network import SMTModel

# below this magnitude a gradient entry is compared in absolute terms
REL_FLOOR = 1e-6


def relative_error(a: np.ndarray, b: np.ndarray, floor: float = REL_FLOOR) -> float:
    """max |a - b| / max(|a|, |b|, floor) over all entries."""
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0


def tiny_config(vocab_size: int = 7, seed: int = 0) -> ModelConfig:
    """c_e=8, one decoder layer with one head; a 64x32 image gives a 4x4 map.

    The NEXT encoder is used because it is smooth (GELU, LayerNorm); ReLU
    and max-pooling kinks would make finite differences unreliable.
    """
    return ModelConfig(
        encoder=EncoderConfig("NEXT", (8, 8, 8), blocks=1),
        decoder=DecoderConfig(layers=1, heads=1, embed_dim=8, ff_dim=16, max_len=16),
        vocab_size=vocab_size,
        seed=seed,
    )


def tiny_problem(vocab_size: int = 7, seed: int = 0, shape=(64, 32), length: int = 4):
    """Deterministic (image, decoder input, target) triple for gradient checks."""
    rng = np.random.default_rng(seed)
    image = torch.from_numpy(rng.uniform(0.0, 1.0, size=(1, 1) + tuple(shape)))
    ids = rng.integers(3, vocab_size, size=length + 1)
    ids[0] = 1  # <sot>
    inputs = torch.from_numpy(ids[:-1])[None].long()
    targets = torch.from_numpy(ids[1:])[None].long()
    return image, inputs, targets


def numeric_gradients(loss_fn, params, step: float = 1e-4) -> list[np.ndarray]:
    """Central differences of ``loss_fn()`` w.r.t. every entry of ``params``."""
    grads = []
    with torch.no_grad():
        for p in params:
            flat = p.view(-1)
            g = np.zeros(flat.numel())
            for k in range(flat.numel()):
                orig = float(flat[k])
                flat[k] = orig + step
                up = float(loss_fn())
                flat[k] = orig - step
                down = float(loss_fn())
                flat[k] = orig
                g[k] = (up - down) / (2 * step)
            grads.append(g.reshape(p.shape))
    return grads


def analytic_gradients(loss_fn, params) -> list[np.ndarray]:
    for p in params:
        p.grad = None
    loss_fn().backward()
    return [p.grad.detach().numpy().copy() if p.grad is not None else np.zeros(tuple(p.shape))
            for p in params]


def gradient_check(config: ModelConfig | None = None, step: float = 1e-4, seed: int = 0,
                   floor: float = REL_FLOOR) -> float:
    """Max relative error between autograd and central differences over all parameters."""
    config = config or tiny_config(seed=seed)
    model = SMTModel(config).double()
    model.eval()
    image, inputs, targets = tiny_problem(config.vocab_size, seed)

    def loss_fn():
        logits = model(image, inputs)
        return F.cross_entropy(logits.reshape(-1, logits.shape[-1]), targets.reshape(-1))

    params = [p for p in model.parameters() if p.requires_grad]
    analytic = analytic_gradients(loss_fn, params)
    numeric = numeric_gradients(loss_fn, params, step)
    return max(relative_error(a, n, floor) for a, n in zip(analytic, numeric))


class LinearProbe(nn.Module):
    """Attention-free model: logits_t = W (e[y_t] + x) + b.

    ``x`` is a fixed feature vector (e.g. the mean of an encoder map) and
    ``e`` a token embedding table.
    """

    def __init__(self, vocab_size: int, dim: int, seed: int = 0):
        super().__init__()
        gen = torch.Generator().manual_seed(seed)
        self.embed = nn.Parameter(torch.randn(vocab_size, dim, generator=gen, dtype=torch.float64))
        self.weight = nn.Parameter(torch.randn(vocab_size, dim, generator=gen, dtype=torch.float64) * 0.5)
        self.bias = nn.Parameter(torch.randn(vocab_size, generator=gen, dtype=torch.float64) * 0.1)

    def forward(self, x, prefix):
        h = self.embed[prefix] + x
        return h @ self.weight.T + self.bias


def linear_closed_form(probe: LinearProbe, x, prefix, targets) -> list[np.ndarray]:
    """Hand-derived gradients of mean cross-entropy for ``LinearProbe``."""
    E = probe.embed.detach().numpy()
    W = probe.weight.detach().numpy()
    b = probe.bias.detach().numpy()
    ids = np.asarray(prefix).reshape(-1)
    tgt = np.asarray(targets).reshape(-1)
    H = E[ids] + np.asarray(x)
    Z = H @ W.T + b
    P = np.exp(Z - Z.max(axis=1, keepdims=True))
    P /= P.sum(axis=1, keepdims=True)
    G = P.copy()
    G[np.arange(len(tgt)), tgt] -= 1.0
    G /= len(tgt)
    dE = np.zeros_like(E)
    np.add.at(dE, ids, G @ W)
    return [dE, G.T @ H, G.sum(axis=0)]


def linear_gradient_check(vocab_size: int = 6, dim: int = 4, length: int = 5, seed: int = 0,
                          step: float = 1e-4) -> tuple[float, float]:
    """(autograd vs closed form, finite differences vs closed form) max abs errors."""
    probe = LinearProbe(vocab_size, dim, seed)
    rng = np.random.default_rng(seed)
    x = torch.from_numpy(rng.normal(size=dim))
    prefix = torch.from_numpy(rng.integers(0, vocab_size, size=length)).long()
    targets = torch.from_numpy(rng.integers(0, vocab_size, size=length)).long()

    def loss_fn():
        return F.cross_entropy(probe(x, prefix), targets)

    params = [probe.embed, probe.weight, probe.bias]
    exact = linear_closed_form(probe, x.numpy(), prefix.numpy(), targets.numpy())
    analytic = analytic_gradients(loss_fn, params)
    numeric = numeric_gradients(loss_fn, params, step)
    err_a = max(float(np.max(np.abs(a - e))) for a, e in zip(analytic, exact))
    err_n = max(float(np.max(np.abs(n - e))) for n, e in zip(numeric, exact))
    return err_a, err_n
