"""Three-stage training schedule.

1. PRETRAIN: single-system samples only.
2. INCREMENTAL: synthetic pages whose maximum system count grows by one
   every ``s`` samples, from 2 up to ``n``; each page draws its system count
   uniformly from [1, current maximum].
3. FINETUNE: each sample is synthetic with probability P(g), which decays
   linearly from ``p_max`` to ``p_min`` over ``N`` samples, and real otherwise.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from smtpp.errors import DataError, WrongStage
from smtpp.kern import EncodingScheme, build_vocabulary, normalize, parse_kern, tokenize
from smtpp.kern.document import measure_number, renumber_barline
from smtpp.kern.vocab import Vocabulary

log = logging.getLogger(__name__)

PRETRAIN = "PRETRAIN"
INCREMENTAL = "INCREMENTAL"
FINETUNE = "FINETUNE"
STAGES = (PRETRAIN, INCREMENTAL, FINETUNE)

SYNTHETIC = "SYNTHETIC"
REAL = "REAL"


@dataclass(frozen=True)
class CurriculumParams:
    n: int = 5
    s: int = 40000
    p_max: float = 0.9
    p_min: float = 0.2
    N: int = 200000

    def __post_init__(self):
        if self.n < 1 or self.s < 1 or self.N < 1:
            raise ValueError("n, s and N must be positive")
        if not 0.0 <= self.p_min <= self.p_max <= 1.0:
            raise ValueError("need 0 <= p_min <= p_max <= 1")


@dataclass
class CurriculumState:
    stage: str = PRETRAIN
    current_max_systems: int = 1
    samples_in_level: int = 0
    t: int = 0
    params: CurriculumParams = field(default_factory=CurriculumParams)

    def enter(self, stage: str) -> "CurriculumState":
        """Switch stage, applying the entry rules of ``stage``."""
        if stage not in STAGES:
            raise ValueError(f"unknown stage {stage!r}")
        self.stage = stage
        if stage == PRETRAIN:
            self.current_max_systems = 1
        elif stage == INCREMENTAL:
            self.current_max_systems = max(self.current_max_systems, min(2, self.params.n))
            self.samples_in_level = 0
        else:
            self.current_max_systems = self.params.n
            self.t = 0
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CurriculumState":
        d = dict(d)
        return cls(params=CurriculumParams(**d.pop("params")), **d)


@dataclass(frozen=True)
class SampleRequest:
    source: str
    system_count: int
    index: int | None = None


def _require(state: CurriculumState, stage: str) -> None:
    if state.stage != stage:
        raise WrongStage(f"operation needs stage {stage}, state is in {state.stage}")


def pretrain_source(state: CurriculumState, seed, pool_size: int) -> SampleRequest:
    """Request one real single-system excerpt (``index`` into the pool)."""
    _require(state, PRETRAIN)
    if pool_size < 1:
        raise DataError("no single-system samples to pretrain on")
    index = int(np.random.default_rng(seed).integers(pool_size))
    return SampleRequest(REAL, 1, index)


def next_system_count(state: CurriculumState, seed) -> int:
    _require(state, INCREMENTAL)
    return int(np.random.default_rng(seed).integers(1, state.current_max_systems + 1))


def record_sample(state: CurriculumState) -> CurriculumState:
    """Count one fed sample; in INCREMENTAL, level up every ``s`` samples."""
    state.t += 1
    if state.stage == INCREMENTAL:
        state.samples_in_level += 1
        if state.samples_in_level >= state.params.s:
            state.samples_in_level = 0
            state.current_max_systems = min(state.current_max_systems + 1, state.params.n)
    return state


def mix_probability(t: int, p_max: float = 0.9, p_min: float = 0.2, N: int = 200000) -> float:
    """P(g) = p_max + t (p_min - p_max) / N, held at p_min once t >= N."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t >= N:
        return p_min
    return max(p_min, p_max + t * (p_min - p_max) / N)


def sample_source(state: CurriculumState, seed=None, u: float | None = None) -> str:
    """SYNTHETIC iff u < P(g) at ``state.t``; ``u`` is drawn from ``seed`` unless forced."""
    _require(state, FINETUNE)
    if u is None:
        u = float(np.random.default_rng(seed).random())
    p = state.params
    return SYNTHETIC if u < mix_probability(state.t, p.p_max, p.p_min, p.N) else REAL


def step_seed(seed: int, stage: str, step: int, stream: int = 0) -> int:
    """Independent seed for one (stage, step, stream) triple."""
    ss = np.random.SeedSequence([int(seed), STAGES.index(stage), int(step), int(stream)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# ---------------------------------------------------------------- config file

@dataclass
class PipelineConfig:
    """Flat ``key=value`` training configuration; full-scale values are defaults."""

    n: int = 5
    s: int = 40000
    p_max: float = 0.9
    p_min: float = 0.2
    N: int = 200000
    stage1: bool = True
    stage2: bool = True
    stage3: bool = True
    pretrain_samples: int = 40000
    seed: int = 0
    batch_size: int = 1
    lr: float = 0.1
    optimizer: str = "sgd"
    scheme: str = "bekern"
    corpus: str = ""
    manifest: str = ""
    real_count: int = 16
    out_dir: str = "run"
    encoder: str = "CNN"
    widths: str = "8,16,32,32"
    blocks: int = 1
    layers: int = 2
    heads: int = 2
    embed_dim: int = 32
    ff_dim: int = 64
    max_len: int = 2048
    page_height: int = 594
    page_width: int = 420
    texture: str = "builtin"
    backend: str = "proxy"

    @property
    def params(self) -> CurriculumParams:
        return CurriculumParams(self.n, self.s, self.p_max, self.p_min, self.N)

    def as_text(self) -> str:
        return " ".join(f"{f.name}={getattr(self, f.name)}" for f in dataclasses.fields(self))


def _coerce(name: str, kind, value: str):
    try:
        if kind in (bool, "bool"):
            low = value.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if kind in (int, "int"):
            return int(value)
        if kind in (float, "float"):
            return float(value)
    except ValueError:
        raise DataError(f"bad value for {name}: {value!r}") from None
    return value


def parse_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    """Parse ``key=value`` lines; ``#`` starts a comment. Keys are case-sensitive."""
    cfg = dataclasses.replace(base) if base is not None else PipelineConfig()
    kinds = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"config line {no}: expected key=value, got {raw!r}")
        key, value = (x.strip() for x in line.split("=", 1))
        if key not in kinds:
            raise DataError(f"config line {no}: unknown key {key!r}")
        setattr(cfg, key, _coerce(key, kinds[key], value))
    return cfg


def load_config(path, **overrides) -> PipelineConfig:
    cfg = parse_config(Path(path).read_text(encoding="utf-8")) if path else PipelineConfig()
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg


# ---------------------------------------------------------------- data plumbing

def training_vocabulary(pool, scheme, n: int, extra_labels=()) -> Vocabulary:
    """Vocabulary covering every excerpt and every barline number a merge of
    up to ``n`` excerpts can produce, plus ``extra_labels``."""
    docs = pool.all()
    seqs = [tokenize(normalize(d), scheme) for d in docs]
    most = max(sum(1 for line in d.lines for c in line.cells[:1] if measure_number(c) is not None)
               for d in docs)
    barlines = sorted({c for d in docs for line in d.lines for c in line.cells
                       if measure_number(c) is not None})
    extra = [renumber_barline(c, k) for c in barlines for k in range(1, n * most + 1)]
    vocab = build_vocabulary(list(seqs) + list(extra_labels), scheme)
    missing = [tok for tok in dict.fromkeys(extra) if tok not in vocab]
    if missing:
        vocab = Vocabulary(list(vocab.tokens) + missing, vocab.scheme)
    return vocab


def load_real_samples(manifest, scheme, split: str | None = "train") -> list:
    """(image, label) pairs from a manifest, restricted to ``split`` if records carry one."""
    from smtpp.synth import PageSample
    from smtpp.synth.io import read_image, read_manifest

    out = []
    for image, kern, rec_split in read_manifest(manifest):
        if split is not None and rec_split is not None and rec_split != split:
            continue
        doc = normalize(parse_kern(Path(kern).read_text(encoding="utf-8")))
        out.append(PageSample(read_image(image), tokenize(doc, scheme), {"path": str(image)}))
    if not out:
        raise DataError(f"{manifest}: no records for split {split!r}")
    return out


def stand_in_real_samples(pool, gen_config, count: int, seed: int) -> list:
    """Textured synthetic pages standing in for a scanned target corpus."""
    from smtpp.synth import generate_page

    rng = np.random.default_rng([int(seed), 7919])
    return [generate_page(pool, gen_config, int(rng.integers(1, gen_config.max_systems + 1)),
                          int(rng.integers(2**63 - 1)))
            for _ in range(count)]


def system_sample(doc, scheme, seed):
    """A single rendered system (strip image) with its label."""
    from smtpp.synth import PageSample, render_system

    rng = np.random.default_rng(seed)
    spacing = int(rng.integers(6, 11))
    return PageSample(render_system(normalize(doc), "proxy", spacing),
                      tokenize(normalize(doc), scheme), {"system_count": 1, "id": doc.meta.get("id")})


# ---------------------------------------------------------------- driver

class TrainingLog:
    """Tab-separated step log with ``#`` comment lines for stage events."""

    def __init__(self, path=None, append: bool = False):
        self.lines: list[str] = []
        self.fh = open(path, "a" if append else "w", encoding="utf-8") if path else None

    def write(self, line: str) -> None:
        self.lines.append(line)
        if self.fh:
            self.fh.write(line + "\n")
            self.fh.flush()

    def step(self, step: int, loss: float, p_g: float, max_systems: int) -> None:
        self.write(f"{step}\t{loss:.6f}\t{p_g:.6f}\t{max_systems}")

    def close(self) -> None:
        if self.fh:
            self.fh.close()
            self.fh = None


@dataclass
class PipelineResult:
    model: object
    vocab: Vocabulary
    state: CurriculumState
    checkpoints: list
    log: list
    step: int


def stage_plan(config: PipelineConfig) -> list[str]:
    return [st for st, on in zip(STAGES, (config.stage1, config.stage2, config.stage3)) if on]


def build_model(config: PipelineConfig, vocab_size: int):
    from smtpp.model import DecoderConfig, EncoderConfig, ModelConfig, SMTModel

    widths = tuple(int(w) for w in str(config.widths).split(","))
    cfg = ModelConfig(
        encoder=EncoderConfig(config.encoder, widths, blocks=config.blocks),
        decoder=DecoderConfig(config.layers, config.heads, config.embed_dim, config.ff_dim, config.max_len),
        vocab_size=vocab_size,
        seed=config.seed,
    )
    return SMTModel(cfg)


def run_pipeline(config: PipelineConfig, pool, real=None, model=None, vocab=None,
                 resume=None, log_path=None) -> PipelineResult:
    """Run the enabled stages in order, checkpointing at each stage boundary.

    ``real`` is a list of (image, label) samples for fine-tuning; when it is
    empty, textured synthetic pages stand in. ``resume`` is a stage
    checkpoint path; training continues with the stage after it and, given
    the same config, reproduces the original run's remaining log.
    """
    from smtpp.model import load_checkpoint, make_optimizer, save_checkpoint, train_step
    from smtpp.synth import GenConfig, Generator, generate_page

    scheme = EncodingScheme.parse(config.scheme)
    plan = stage_plan(config)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    texture = None if config.texture in ("", "none") else config.texture
    gen_config = GenConfig(max_systems=config.n, page_size=(config.page_height, config.page_width),
                           texture_dir=texture, render_backend=config.backend, scheme=scheme)
    real = list(real or [])
    if not real and FINETUNE in plan:
        real = stand_in_real_samples(pool, gen_config, config.real_count, config.seed)

    def optimizer_for(m):
        return make_optimizer(m, config.optimizer, config.lr)

    state = CurriculumState(params=config.params)
    step = 0
    done: list[str] = []
    optimizer = None
    if resume is not None:
        model, vocab, header, optimizer = load_checkpoint(resume, optimizer_for)
        extra = header["extra"]
        state = CurriculumState.from_dict(extra["state"])
        done = list(extra["done"])
        step = header["step"]
    else:
        if vocab is None:
            vocab = training_vocabulary(pool, scheme, config.n, [s.label for s in real])
        if model is None:
            model = build_model(config, len(vocab))
        optimizer = optimizer_for(model)

    log_ = TrainingLog(log_path or out_dir / "train.log", append=resume is not None)
    if resume is None:
        log_.write(f"#config {config.as_text()}")
        log_.write("#stages " + ("+".join(plan) if plan else "none"))
    else:
        log_.write(f"#resume {Path(resume).name} after {'+'.join(done)}")

    excerpts = pool.all()
    synth_textures = Generator(pool, gen_config).textures
    checkpoints = []

    def fit(batch):
        return train_step(model, batch, vocab, config.lr, optimizer)

    for stage in plan:
        if stage in done:
            continue
        state.enter(stage)
        log_.write(f"#stage {stage} begin step={step}")
        if stage == PRETRAIN:
            for k in range(config.pretrain_samples // config.batch_size):
                batch = []
                for b in range(config.batch_size):
                    req = pretrain_source(state, step_seed(config.seed, stage, k, 2 * b), len(excerpts))
                    batch.append(system_sample(excerpts[req.index], scheme,
                                               step_seed(config.seed, stage, k, 2 * b + 1)))
                    record_sample(state)
                step += 1
                log_.step(step, fit(batch), 0.0, 1)
        elif stage == INCREMENTAL:
            total = (config.n - 1) * config.s
            for k in range(total // config.batch_size):
                batch = []
                for b in range(config.batch_size):
                    count = next_system_count(state, step_seed(config.seed, stage, k, 2 * b))
                    batch.append(generate_page(pool, gen_config, count,
                                               step_seed(config.seed, stage, k, 2 * b + 1), synth_textures))
                    record_sample(state)
                step += 1
                log_.step(step, fit(batch), 1.0, state.current_max_systems)
        else:
            p = state.params
            for k in range(config.N // config.batch_size):
                p_g = mix_probability(state.t, p.p_max, p.p_min, p.N)
                batch = []
                for b in range(config.batch_size):
                    src = sample_source(state, step_seed(config.seed, stage, k, 3 * b))
                    if src == SYNTHETIC:
                        rng = np.random.default_rng(step_seed(config.seed, stage, k, 3 * b + 1))
                        count = int(rng.integers(1, config.n + 1))
                        batch.append(generate_page(pool, gen_config, count,
                                                   step_seed(config.seed, stage, k, 3 * b + 2), synth_textures))
                    else:
                        rng = np.random.default_rng(step_seed(config.seed, stage, k, 3 * b + 1))
                        batch.append(real[int(rng.integers(len(real)))])
                    record_sample(state)
                step += 1
                log_.step(step, fit(batch), p_g, state.current_max_systems)
        done.append(stage)
        ckpt = out_dir / f"stage{STAGES.index(stage) + 1}.ckpt"
        save_checkpoint(ckpt, model, vocab, step,
                        {"state": state.to_dict(), "done": done, "stage": stage}, optimizer)
        checkpoints.append(ckpt)
        log_.write(f"#stage {stage} end step={step} checkpoint={ckpt.name}")
    lines = log_.lines
    log_.close()
    return PipelineResult(model, vocab, state, checkpoints, lines, step)
