"""Full-page synthetic score generation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from smtpp.errors import DataError, EmptyPool, ExternalRendererUnavailable
from smtpp.kern import EncodingScheme, TokenSequence, normalize, tokenize
from smtpp.synth.merge import merge_excerpts
from smtpp.synth.render import _clefs, render_system
from smtpp.synth.texture import apply_texture, builtin_textures, load_textures
from smtpp.synth.titles import generate_title

log = logging.getLogger(__name__)

MAX_ATTEMPTS = 10
# full-size pages are 2970 x 2100 (A4 portrait); desk scale keeps the aspect ratio
DEFAULT_PAGE_SIZE = (594, 420)


@dataclass
class GenConfig:
    max_systems: int = 3
    page_size: tuple = DEFAULT_PAGE_SIZE
    texture_dir: str | None = None  # a directory, "builtin", or None
    texture_prob: float = 1.0
    title_enabled: bool = False
    staff_spacing_range: tuple = (6, 10)
    margin_range: tuple = (8, 32)
    render_backend: str = "proxy"
    renderer_command: str | None = None
    scheme: EncodingScheme = EncodingScheme.BEKERN

    def __post_init__(self):
        self.scheme = EncodingScheme.parse(self.scheme)
        if self.max_systems < 1:
            raise ValueError("max_systems must be >= 1")
        for name in ("staff_spacing_range", "margin_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is empty: {lo} > {hi}")
        if self.staff_spacing_range[0] < 4:
            raise ValueError("staff spacing below 4 pixels cannot be drawn")
        if self.render_backend not in ("proxy", "external"):
            raise ValueError(f"unknown render backend {self.render_backend!r}")


@dataclass
class PageSample:
    image: np.ndarray
    label: TokenSequence
    meta: dict = field(default_factory=dict)

    @property
    def system_count(self) -> int:
        return self.meta["system_count"]


def _title_block(title: str, author: str, width: int, spacing: int) -> np.ndarray:
    from PIL import Image, ImageDraw, ImageFont

    font = ImageFont.load_default()
    height = 6 * spacing
    im = Image.new("L", (width, height), 255)
    draw = ImageDraw.Draw(im)
    tw = draw.textlength(title, font=font)
    draw.text(((width - tw) / 2, spacing), title, fill=0, font=font)
    aw = draw.textlength(author, font=font)
    draw.text((width - aw - spacing, 3 * spacing), author, fill=0, font=font)
    return np.asarray(im, dtype=np.uint8)


def _fit(content: np.ndarray, height: int, width: int) -> np.ndarray:
    """Shrink ``content`` proportionally so it fits in height x width."""
    from PIL import Image

    h, w = content.shape
    if h <= height and w <= width:
        return content
    scale = min(height / h, width / w)
    size = (max(1, int(w * scale)), max(1, int(h * scale)))
    return np.asarray(Image.fromarray(content).resize(size, Image.BILINEAR), dtype=np.uint8)


def _resize_width(strip: np.ndarray, width: int) -> np.ndarray:
    from PIL import Image

    h, w = strip.shape
    return np.asarray(Image.fromarray(strip).resize((width, max(1, round(h * width / w))),
                                                    Image.BILINEAR), dtype=np.uint8)


def _draw_excerpts(pool, rng, system_count):
    keys = pool.keys()
    key = keys[int(rng.integers(len(keys)))]
    group = pool.groups[key]
    picks = [int(i) for i in rng.integers(0, len(group), size=system_count)]
    return key, [group[i] for i in picks]


def generate_page(pool, config: GenConfig, system_count: int, seed, textures=None) -> PageSample:
    """Render one page of ``system_count`` merged excerpts.

    The result depends only on the arguments. ``textures`` may be passed to
    avoid reloading ``config.texture_dir`` for every page.
    """
    if not len(pool):
        raise EmptyPool("excerpt pool is empty")
    if not 1 <= system_count <= config.max_systems:
        raise ValueError(f"system_count {system_count} outside [1, {config.max_systems}]")
    rng = np.random.default_rng(seed)

    for attempt in range(MAX_ATTEMPTS):
        key, excerpts = _draw_excerpts(pool, rng, system_count)
        try:
            merged = merge_excerpts(excerpts)
            label = tokenize(normalize(merged), config.scheme)
            break
        except DataError as exc:
            log.debug("merge attempt %d failed: %s", attempt, exc)
    else:
        raise DataError(f"no mergeable draw after {MAX_ATTEMPTS} attempts")

    page_h, page_w = config.page_size
    spacing = int(rng.integers(config.staff_spacing_range[0], config.staff_spacing_range[1] + 1))
    margin_y = int(rng.integers(config.margin_range[0], config.margin_range[1] + 1))
    margin_x = int(rng.integers(config.margin_range[0], config.margin_range[1] + 1))
    gap = int(rng.integers(spacing, 3 * spacing + 1))
    inner_w = page_w - 2 * margin_x

    clefs = _clefs(excerpts[0])
    strips = []
    for doc in excerpts:
        if config.render_backend == "external":
            try:
                strip = _resize_width(render_system(doc, "external", command=config.renderer_command), inner_w)
            except ExternalRendererUnavailable:
                log.warning("external renderer unavailable; falling back to the proxy rasterizer")
                strip = render_system(doc, "proxy", spacing, width=inner_w, clefs=clefs)
        else:
            strip = render_system(doc, "proxy", spacing, width=inner_w, clefs=clefs)
        strips.append(strip)

    blocks = []
    title = author = ""
    if config.title_enabled:
        title, author = generate_title(int(rng.integers(2**31)))
        blocks.append(_title_block(title, author, inner_w, spacing))
    for i, strip in enumerate(strips):
        if i:
            blocks.append(np.full((gap, inner_w), 255, dtype=np.uint8))
        blocks.append(strip)
    content = _fit(np.vstack(blocks), page_h - 2 * margin_y, inner_w)

    page = np.full((page_h, page_w), 255, dtype=np.uint8)
    ch, cw = content.shape
    page[margin_y:margin_y + ch, margin_x:margin_x + cw] = content

    if textures is None and config.texture_dir is not None:
        textures = (builtin_textures(config.page_size) if config.texture_dir == "builtin"
                    else load_textures(config.texture_dir))
    texture_id = None
    if textures and rng.random() < config.texture_prob:
        texture_id = int(rng.integers(len(textures)))
        page = apply_texture(page, textures[texture_id], int(rng.integers(2**31)))

    meta = {
        "system_count": system_count,
        "seed": seed,
        "texture_id": texture_id,
        "title_used": bool(config.title_enabled),
        "title": title,
        "author": author,
        "meter": key,
        "excerpts": [d.meta.get("id") for d in excerpts],
        "spacing": spacing,
        "margins": (margin_y, margin_x),
        "content_shape": (ch, cw),
    }
    return PageSample(page, label, meta)


def render_excerpt_page(doc, config: GenConfig, seed) -> PageSample:
    """A single real excerpt laid out as a one-system page (pretraining input)."""
    from smtpp.synth.pool import ExcerptPool

    pool = ExcerptPool()
    pool.add(doc)
    return generate_page(pool, config, 1, seed)


class Generator:
    """Stateful page source owning one seeded random stream.

    Not safe for concurrent calls; create one instance per worker.
    """

    def __init__(self, pool, config: GenConfig, seed=0):
        self.pool = pool
        self.config = config
        self.rng = np.random.default_rng(seed)
        self.textures = None
        if config.texture_dir is not None:
            self.textures = (builtin_textures(config.page_size) if config.texture_dir == "builtin"
                             else load_textures(config.texture_dir))

    def page(self, system_count=None) -> PageSample:
        if system_count is None:
            system_count = int(self.rng.integers(1, self.config.max_systems + 1))
        return generate_page(self.pool, self.config, system_count,
                             int(self.rng.integers(2**63 - 1)), self.textures)
