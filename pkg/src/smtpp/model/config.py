from __future__ import annotations

from dataclasses import asdict, dataclass, field

# full-scale reference values
FULL_HEIGHT_DOWNSCALE = 16
FULL_WIDTH_DOWNSCALE = 8
FULL_NEXT_WIDTHS = (64, 128, 256)


@dataclass
class EncoderConfig:
    """Feature extractor settings.

    ``widths`` are the per-stage channel counts; the last one is ``c_e``.
    CNN uses four conv blocks pooled (2,2),(2,2),(2,2),(2,1); NEXT uses a
    4x4 patchify stem and three ConvNeXt stages with ``blocks`` blocks each.
    Both reduce height by 16 and width by 8.
    """

    variant: str = "CNN"
    widths: tuple = (8, 16, 32, 32)
    blocks: int = 1
    r_h: int = FULL_HEIGHT_DOWNSCALE
    r_w: int = FULL_WIDTH_DOWNSCALE

    def __post_init__(self):
        self.variant = self.variant.upper()
        self.widths = tuple(int(w) for w in self.widths)
        if self.variant not in ("CNN", "NEXT"):
            raise ValueError(f"unknown encoder variant {self.variant!r}")
        if (self.r_h, self.r_w) != (FULL_HEIGHT_DOWNSCALE, FULL_WIDTH_DOWNSCALE):
            raise ValueError("encoders must downscale height by 16 and width by 8")
        need = 4 if self.variant == "CNN" else 3
        if len(self.widths) != need:
            raise ValueError(f"{self.variant} encoder needs {need} stage widths")

    @property
    def channels(self) -> int:
        return self.widths[-1]

    @classmethod
    def full_scale(cls, variant: str = "NEXT") -> "EncoderConfig":
        if variant.upper() == "NEXT":
            return cls("NEXT", FULL_NEXT_WIDTHS, blocks=3)
        return cls("CNN", (64, 128, 256, 256))


@dataclass
class DecoderConfig:
    layers: int = 2
    heads: int = 2
    embed_dim: int = 32
    ff_dim: int = 64
    max_len: int = 512

    def __post_init__(self):
        if self.embed_dim % self.heads:
            raise ValueError("embed_dim must be divisible by heads")

    @classmethod
    def full_scale(cls) -> "DecoderConfig":
        return cls(layers=8, heads=4, embed_dim=256, ff_dim=256, max_len=4360)


@dataclass
class ModelConfig:
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    vocab_size: int = 5
    positional_encoding: str = "2d"  # "2d", "1d" or "none"
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        enc = EncoderConfig(**d.pop("encoder"))
        dec = DecoderConfig(**d.pop("decoder"))
        return cls(encoder=enc, decoder=dec, **d)
