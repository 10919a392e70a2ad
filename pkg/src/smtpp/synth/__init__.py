"""Synthetic full-page score generation."""

from smtpp.synth.generator import GenConfig, Generator, PageSample, generate_page, render_excerpt_page
from smtpp.synth.merge import merge_excerpts
from smtpp.synth.pool import BUNDLED_CORPUS, ExcerptPool, load_excerpt_pool
from smtpp.synth.render import note_count, render_system
from smtpp.synth.texture import apply_texture, builtin_textures, load_textures
from smtpp.synth.titles import generate_title

__all__ = [
    "GenConfig", "Generator", "PageSample", "generate_page", "render_excerpt_page",
    "merge_excerpts", "BUNDLED_CORPUS", "ExcerptPool", "load_excerpt_pool",
    "note_count", "render_system", "apply_texture", "builtin_textures", "load_textures",
    "generate_title",
]
