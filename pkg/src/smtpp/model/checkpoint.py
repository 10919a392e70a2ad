"""Checkpoint container.

Layout::

    b"SMTPP1\\n"
    uint64 little-endian length of the JSON header
    JSON header (UTF-8)
    raw little-endian float32 data for each tensor, in header order

The header echoes the model config and vocabulary, the step count and any
extra state (curriculum counters, optimizer scalars). Each tensor entry
records its name and shape.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch

from smtpp.errors import DataError

MAGIC = b"SMTPP1\n"


def _flatten_optimizer(state: dict):
    """Split an optimizer state_dict into JSON scalars and named tensors."""
    tensors = {}
    per_param = {}
    for pid, entry in state.get("state", {}).items():
        scalars = {}
        for key, val in entry.items():
            if torch.is_tensor(val):
                tensors[f"optim/{pid}/{key}"] = val
            else:
                scalars[key] = val
        per_param[str(pid)] = scalars
    return {"param_groups": state.get("param_groups", []), "scalars": per_param}, tensors


def _unflatten_optimizer(meta: dict, tensors: dict) -> dict:
    state = {}
    for pid, scalars in meta.get("scalars", {}).items():
        state[int(pid)] = dict(scalars)
    for name, val in tensors.items():
        _, pid, key = name.split("/", 2)
        state.setdefault(int(pid), {})[key] = val
    return {"state": state, "param_groups": meta.get("param_groups", [])}


def save_checkpoint(path, model, vocab=None, step: int = 0, extra=None, optimizer=None) -> None:
    tensors = {f"model/{k}": v for k, v in model.state_dict().items()}
    header = {
        "format": "SMTPP1",
        "config": model.cfg.to_dict() if hasattr(model, "cfg") else None,
        "vocab": {"tokens": list(vocab.tokens), "scheme": vocab.scheme.value} if vocab is not None else None,
        "step": int(step),
        "extra": extra or {},
        "optimizer": None,
    }
    if optimizer is not None:
        header["optimizer"], opt_tensors = _flatten_optimizer(optimizer.state_dict())
        tensors.update(opt_tensors)
    entries, blobs = [], []
    for name, t in tensors.items():
        arr = t.detach().cpu().to(torch.float32).numpy().astype("<f4", copy=False)
        entries.append({"name": name, "shape": list(arr.shape)})
        blobs.append(np.ascontiguousarray(arr).tobytes())
    header["tensors"] = entries
    raw = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(raw)))
        fh.write(raw)
        for blob in blobs:
            fh.write(blob)


def read_checkpoint(path) -> tuple[dict, dict]:
    """Return (header, {name: float32 tensor})."""
    data = Path(path).read_bytes()
    if not data.startswith(MAGIC):
        raise DataError(f"{path}: not an SMTPP1 checkpoint")
    off = len(MAGIC)
    if len(data) < off + 8:
        raise DataError(f"{path}: truncated header")
    (n,) = struct.unpack_from("<Q", data, off)
    off += 8
    try:
        header = json.loads(data[off:off + n].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: corrupt header: {exc}") from exc
    off += n
    tensors = {}
    for entry in header["tensors"]:
        count = int(np.prod(entry["shape"])) if entry["shape"] else 1
        end = off + 4 * count
        if end > len(data):
            raise DataError(f"{path}: truncated tensor {entry['name']}")
        arr = np.frombuffer(data[off:end], dtype="<f4").reshape(entry["shape"])
        tensors[entry["name"]] = torch.from_numpy(arr.copy())
        off = end
    return header, tensors


def load_checkpoint(path, optimizer_factory=None):
    """Rebuild (model, vocab, header[, optimizer]) from a checkpoint.

    ``optimizer_factory(model)`` creates an optimizer whose state is then
    restored; it is returned as a fourth element when given.
    """
    from smtpp.kern.vocab import Vocabulary
    from smtpp.model.config import ModelConfig
    from smtpp.model.network import SMTModel

    header, tensors = read_checkpoint(path)
    model = SMTModel(ModelConfig.from_dict(header["config"]))
    ref = model.state_dict()
    state = {}
    for k, v in ref.items():
        key = f"model/{k}"
        if key not in tensors:
            raise DataError(f"{path}: missing tensor {key}")
        state[k] = tensors[key].to(v.dtype).reshape(v.shape)
    model.load_state_dict(state)
    vocab = None
    if header.get("vocab"):
        vocab = Vocabulary(header["vocab"]["tokens"], header["vocab"]["scheme"])
    if optimizer_factory is None:
        return model, vocab, header
    optimizer = optimizer_factory(model)
    if header.get("optimizer"):
        opt_tensors = {k: v for k, v in tensors.items() if k.startswith("optim/")}
        optimizer.load_state_dict(_unflatten_optimizer(header["optimizer"], opt_tensors))
    return model, vocab, header, optimizer
