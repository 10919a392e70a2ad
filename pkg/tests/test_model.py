import math

import numpy as np
import pytest
import torch

from smtpp.errors import BadChannelCount, DataError, NaNLoss, PrefixTooLong, ShapeError
from smtpp.kern import TokenSequence, build_vocabulary
from smtpp.model import (
    DecoderConfig, EncoderConfig, ModelConfig, SMTModel, argmax_lowest, build_encoder, encoder_forward, flatten,
    greedy_decode, linear_gradient_check, load_checkpoint, make_batch, output_shape, positional_encoding_2d,
    read_checkpoint, save_checkpoint, sequence_loss, train_step, unflatten,
)
from smtpp.model.checkpoint import MAGIC
from smtpp.model.decoder import Decoder
from smtpp.model.positional import positional_encoding_1d

NEXT_SMALL = EncoderConfig("NEXT", (8, 16, 16))


# ---------------------------------------------------------------- encoder

@pytest.mark.parametrize("cfg", [EncoderConfig(), NEXT_SMALL], ids=["CNN", "NEXT"])
@pytest.mark.parametrize("h, w", [(128, 256), (16, 8), (100, 50), (33, 9)])
def test_encoder_shape_law(cfg, h, w):
    enc = build_encoder(cfg)
    fm = encoder_forward(enc, torch.ones(1, 1, h, w), cfg)
    assert tuple(fm.shape) == (1, math.ceil(h / 16), math.ceil(w / 8), cfg.channels)
    assert torch.isfinite(fm).all()


def test_full_scale_shapes():
    assert output_shape(128, 256) == (8, 32)
    cfg = EncoderConfig.full_scale()
    assert cfg.widths == (64, 128, 256) and (cfg.r_h, cfg.r_w) == (16, 8)
    assert DecoderConfig.full_scale().layers == 8


def test_zero_encoder_gives_zero_map():
    cfg = EncoderConfig()
    enc = build_encoder(cfg)
    with torch.no_grad():
        for p in enc.parameters():
            p.zero_()
    fm = encoder_forward(enc, torch.zeros(1, 1, 32, 16), cfg)
    assert (fm == 0).all()


def test_encoder_rejects_bad_input():
    cfg = EncoderConfig()
    with pytest.raises(ShapeError):
        encoder_forward(build_encoder(cfg), torch.ones(1, 3, 16, 8), cfg)
    with pytest.raises(ValueError):
        EncoderConfig(r_h=8)


# ---------------------------------------------------------------- positional encoding

def test_pe_values():
    pe = positional_encoding_2d(8, 8, 16, torch.float64)
    assert pe.abs().max() <= 1.0
    assert pe[0, 0, 0] == 0.0 and pe[0, 0, 1] == 1.0
    assert pe[0, 1, 0].item() == pytest.approx(math.sin(1.0), abs=1e-15)
    assert pe[3, 5, 0].item() == pytest.approx(0.0 + math.sin(5.0), abs=1e-15)


def test_pe_block_structure():
    pe = positional_encoding_2d(8, 8, 16, torch.float64)
    half = 8
    assert torch.equal(pe[2, :, :half], pe[6, :, :half])
    assert torch.equal(pe[:, 1, half:], pe[:, 7, half:])
    swapped = pe[:, [1, 0, 2, 3, 4, 5, 6, 7]]
    assert torch.equal(swapped[..., half:], pe[..., half:])
    assert not torch.equal(swapped[..., :half], pe[..., :half])


def test_pe_frequency_uses_full_channel_count():
    c = 16
    pe = positional_encoding_2d(1, 5, c, torch.float64)
    i = 2
    assert pe[0, 3, 2 * i].item() == pytest.approx(math.sin(3 / 10000 ** (2 * i / c)), abs=1e-15)


def test_pe_bad_channels():
    with pytest.raises(BadChannelCount):
        positional_encoding_2d(2, 2, 6)


def test_flatten_row_major():
    x = torch.arange(2 * 3 * 4).reshape(2, 3, 4)
    seq = flatten(x)
    assert seq.shape == (6, 4)
    assert torch.equal(seq[5], x[1, 2])
    assert torch.equal(unflatten(seq, 2, 3), x)
    assert flatten(torch.zeros(1, 1, 4)).shape == (1, 4)


# ---------------------------------------------------------------- decoder

def tiny_model(vocab=9, layers=1, heads=1, dim=8, pe="2d", seed=0):
    return SMTModel(ModelConfig(EncoderConfig("NEXT", (8, 8, 8)), DecoderConfig(layers, heads, dim, 16, 32),
                                vocab, pe, seed)).double()


def test_causality():
    model = tiny_model(layers=2, heads=2)
    model.eval()
    img = torch.rand(1, 1, 32, 16, dtype=torch.float64)
    prefix = torch.tensor([[1, 5, 6, 7, 8]])
    base = model(img, prefix)
    for k in range(1, 5):
        changed = prefix.clone()
        changed[0, k] = 3
        out = model(img, changed)
        assert torch.equal(out[0, :k], base[0, :k])


def test_softmax_rows_sum_to_one():
    model = tiny_model()
    probs = torch.softmax(model(torch.rand(1, 1, 32, 16, dtype=torch.float64), torch.tensor([[1, 4, 5]])), -1)
    assert torch.allclose(probs.sum(-1), torch.ones(1, 3, dtype=torch.float64), atol=1e-6)


def test_prefix_too_long():
    model = tiny_model()
    with pytest.raises(PrefixTooLong):
        model(torch.rand(1, 1, 16, 8, dtype=torch.float64), torch.ones(1, 33, dtype=torch.long))


def _ln(x, w, b, eps=1e-5):
    mu = x.mean(-1, keepdims=True)
    var = ((x - mu) ** 2).mean(-1, keepdims=True)
    return (x - mu) / np.sqrt(var + eps) * w + b


def _attn(x, mem, mod, mask=None):
    g = lambda lin: (lin.weight.detach().numpy(), lin.bias.detach().numpy())
    (wq, bq), (wk, bk), (wv, bv), (wo, bo) = g(mod.q), g(mod.k), g(mod.v), g(mod.o)
    q, k, v = x @ wq.T + bq, mem @ wk.T + bk, mem @ wv.T + bv
    s = q @ k.T / math.sqrt(q.shape[-1])
    if mask is not None:
        s = np.where(mask, -np.inf, s)
    a = np.exp(s - s.max(-1, keepdims=True))
    a /= a.sum(-1, keepdims=True)
    return (a @ v) @ wo.T + bo


def test_decoder_matches_hand_computation():
    torch.manual_seed(0)
    cfg = DecoderConfig(layers=1, heads=1, embed_dim=4, ff_dim=6, max_len=8)
    dec = Decoder(cfg, 7).double()
    with torch.no_grad():
        for p in dec.parameters():
            p.copy_(torch.randn(p.shape, dtype=torch.float64) * 0.5)
    memory = torch.randn(1, 3, 4, dtype=torch.float64)
    prefix = torch.tensor([[1, 5]])
    got = dec(memory, prefix)[0].detach().numpy()

    n = lambda m: (m.weight.detach().numpy(), m.bias.detach().numpy())
    layer = dec.layers[0]
    mem = memory[0].numpy()
    x = dec.embed.weight.detach().numpy()[[1, 5]] + positional_encoding_1d(2, 4, torch.float64).numpy()
    h = _ln(x, *n(layer.norm1))
    x = x + _attn(h, h, layer.self_attn, np.triu(np.ones((2, 2), bool), 1))
    x = x + _attn(_ln(x, *n(layer.norm2)), mem, layer.cross_attn)
    w1, b1 = n(layer.ff1)
    w2, b2 = n(layer.ff2)
    z = _ln(x, *n(layer.norm3)) @ w1.T + b1
    gelu = 0.5 * z * (1 + np.vectorize(math.erf)(z / math.sqrt(2)))
    x = x + gelu @ w2.T + b2
    wout, bout = n(dec.out)
    want = _ln(x, *n(dec.norm)) @ wout.T + bout
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)


# ---------------------------------------------------------------- greedy decoding

class StubModel:
    def __init__(self, vocab_size, ranking):
        self.vocab_size = vocab_size
        self.ranking = ranking

    def encode(self, images):
        return torch.zeros(1, 1, 1), None

    def decode(self, memory, prefix, mask=None):
        t = prefix.shape[1]
        return torch.tensor(self.ranking(t), dtype=torch.float64).expand(1, t, self.vocab_size)


def stub_vocab():
    return build_vocabulary([TokenSequence(["a", "b", "c"], "kern")])


def test_greedy_eot_first_gives_empty():
    vocab = stub_vocab()
    logits = [0.0] * len(vocab)
    logits[vocab.eot_id] = 5.0
    out = greedy_decode(StubModel(len(vocab), lambda t: logits), np.zeros((16, 8)), vocab, 10)
    assert out.tokens == []


def test_greedy_respects_max_len_and_ties():
    vocab = stub_vocab()
    tie = [0.0] * len(vocab)
    tie[5] = tie[6] = 1.0
    out = greedy_decode(StubModel(len(vocab), lambda t: tie), np.zeros((16, 8)), vocab, 7)
    assert out.tokens == ["a"] * 7
    assert argmax_lowest([1, 3, 3, 0]) == 1


def test_greedy_is_deterministic():
    model = tiny_model()
    model.eval()
    vocab = build_vocabulary([TokenSequence(["a", "b", "c", "d"], "kern")])
    img = np.random.default_rng(0).integers(0, 256, (32, 16)).astype(np.uint8)
    a = greedy_decode(model, img, vocab, 20)
    assert a == greedy_decode(model, img, vocab, 20) and len(a) <= 20


# ---------------------------------------------------------------- training

def samples():
    img = np.full((32, 32), 255, np.uint8)
    img[8:12, 4:20] = 0
    return [(img, TokenSequence(["a", "b", "<t>", "c"], "kern")),
            (img[:, :24], TokenSequence(["c", "<b>"], "kern"))]


def test_uniform_logits_loss_is_log_vocab():
    data = samples()
    vocab = build_vocabulary([s[1] for s in data])
    model = SMTModel(ModelConfig(vocab_size=len(vocab)))
    with torch.no_grad():
        model.decoder.out.weight.zero_()
        model.decoder.out.bias.zero_()
    loss = train_step(model, data, vocab, lr=0.1)
    assert abs(loss - math.log(len(vocab))) <= 0.05 * math.log(len(vocab))


def test_make_batch_padding():
    data = samples()
    vocab = build_vocabulary([s[1] for s in data])
    images, sizes, inputs, targets = make_batch(data, vocab)
    assert images.shape == (2, 1, 32, 32) and images[1, 0, 0, 30] == 1.0
    assert inputs[0, 0] == vocab.sot_id and targets[0, 4] == vocab.eot_id
    assert targets[1, 3:].eq(vocab.pad_id).all()
    assert sizes == [(32, 32), (32, 24)]


def test_all_pad_batch_is_an_error():
    logits = torch.zeros(1, 3, 6)
    with pytest.raises(NaNLoss):
        sequence_loss(logits, torch.zeros(1, 3, dtype=torch.long))


def test_train_step_reduces_loss():
    data = samples()
    vocab = build_vocabulary([s[1] for s in data])
    model = SMTModel(ModelConfig(vocab_size=len(vocab)))
    first = train_step(model, data, vocab, lr=0.5)
    for _ in range(30):
        last = train_step(model, data, vocab, lr=0.5)
    assert last < first


def test_init_is_seeded_uniform():
    a, b = SMTModel(ModelConfig(seed=3)), SMTModel(ModelConfig(seed=3))
    assert all(torch.equal(x, y) for x, y in zip(a.parameters(), b.parameters()))
    w = a.decoder.layers[0].ff1.weight
    assert w.abs().max() <= math.sqrt(1 / w.shape[1])


# ---------------------------------------------------------------- gradient checks

def test_linear_closed_form():
    exact, fd = linear_gradient_check()
    assert exact < 1e-10
    assert fd < 1e-6
    _, coarse = linear_gradient_check(step=1e-1)
    assert coarse > 10 * fd


# ---------------------------------------------------------------- checkpoints

def test_checkpoint_round_trip(tmp_path):
    data = samples()
    vocab = build_vocabulary([s[1] for s in data])
    model = SMTModel(ModelConfig(vocab_size=len(vocab)))
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, model, vocab, step=12, extra={"note": "x"})
    raw = path.read_bytes()
    assert raw.startswith(MAGIC)
    header, tensors = read_checkpoint(path)
    assert header["step"] == 12 and header["extra"] == {"note": "x"}
    assert all(t.dtype == torch.float32 for t in tensors.values())
    loaded, v2, _ = load_checkpoint(path)
    assert v2.tokens == vocab.tokens
    for x, y in zip(model.state_dict().values(), loaded.state_dict().values()):
        assert torch.equal(x, y)


def test_checkpoint_corruption(tmp_path):
    path = tmp_path / "bad.ckpt"
    path.write_bytes(b"NOTACKPT")
    with pytest.raises(DataError):
        read_checkpoint(path)
