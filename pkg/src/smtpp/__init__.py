"""Full-page optical music recognition toolkit: **kern encodings, synthetic
page generation, a small image-to-sequence model and curriculum training."""

__version__ = "0.1.0"
