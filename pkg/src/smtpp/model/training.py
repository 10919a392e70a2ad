"""Teacher-forced cross-entropy training."""

from __future__ import annotations

import math

import numpy as np
import torch
import torch.nn.functional as F

from smtpp.errors import NaNLoss


def make_batch(samples, vocab, dtype=torch.float32):
    """Pad a list of (image, TokenSequence) pairs or PageSamples.

    Images are padded with white to the largest height/width; label ids are
    wrapped as ``<sot> ... <eot>`` and padded with ``<pad>``. Returns
    (images (B,1,H,W), sizes, decoder inputs (B,T), targets (B,T)).
    """
    pairs = [(s.image, s.label) if hasattr(s, "image") else s for s in samples]
    h = max(img.shape[0] for img, _ in pairs)
    w = max(img.shape[1] for img, _ in pairs)
    images = np.full((len(pairs), 1, h, w), 1.0, dtype=np.float32)
    sizes = []
    seqs = []
    for i, (img, label) in enumerate(pairs):
        images[i, 0, :img.shape[0], :img.shape[1]] = np.asarray(img, dtype=np.float32) / 255.0
        sizes.append(img.shape)
        seqs.append([vocab.sot_id] + vocab.encode(label.content()) + [vocab.eot_id])
    t = max(len(s) for s in seqs) - 1
    inputs = torch.full((len(seqs), t), vocab.pad_id, dtype=torch.long)
    targets = torch.full((len(seqs), t), vocab.pad_id, dtype=torch.long)
    for i, s in enumerate(seqs):
        inputs[i, :len(s) - 1] = torch.tensor(s[:-1])
        targets[i, :len(s) - 1] = torch.tensor(s[1:])
    return torch.from_numpy(images).to(dtype), sizes, inputs, targets


def sequence_loss(logits, targets, pad_id: int = 0):
    """Mean token cross-entropy over non-pad target positions."""
    if not bool((targets != pad_id).any()):
        raise NaNLoss("batch has no target positions (everything is <pad>)")
    return F.cross_entropy(logits.reshape(-1, logits.shape[-1]), targets.reshape(-1), ignore_index=pad_id)


def batch_loss(model, batch):
    images, sizes, inputs, targets = batch
    logits = model(images, inputs, sizes)
    return sequence_loss(logits, targets)


def make_optimizer(model, kind: str = "sgd", lr: float = 0.1):
    """``sgd`` is plain gradient descent; ``adam`` is the adaptive option."""
    if kind == "sgd":
        return torch.optim.SGD(model.parameters(), lr=lr)
    if kind == "adam":
        return torch.optim.Adam(model.parameters(), lr=lr)
    raise ValueError(f"unknown optimizer {kind!r}")


def train_step(model, samples, vocab, lr: float = 0.1, optimizer=None) -> float:
    """One teacher-forced update; returns the loss before the update.

    Without ``optimizer`` a plain gradient-descent step with rate ``lr`` is
    applied. Raises ``NaNLoss`` if the loss is not finite.
    """
    model.train()
    batch = make_batch(samples, vocab, model.dtype)
    loss = batch_loss(model, batch)
    value = float(loss.detach())
    if not math.isfinite(value):
        raise NaNLoss(f"non-finite loss {value}")
    model.zero_grad(set_to_none=True)
    loss.backward()
    if optimizer is None:
        with torch.no_grad():
            for p in model.parameters():
                if p.grad is not None:
                    p.sub_(lr * p.grad)
    else:
        optimizer.step()
    for p in model.parameters():
        if not torch.isfinite(p).all():
            raise NaNLoss("parameters became non-finite after the update")
    return value
