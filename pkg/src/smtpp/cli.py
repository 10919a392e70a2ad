"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from smtpp.errors import DataError, EmptyCorpus, SMTError

SYSTEMS_COMMENT = "!!systems: "
MAX_SEED = 2**64 - 1


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def seed_arg(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def page_size_arg(text: str) -> tuple[int, int]:
    try:
        h, w = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected HxW, got {text!r}") from None
    return h, w


def _read_kern(path):
    from smtpp.kern import parse_kern

    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not UTF-8 text") from exc
    return parse_kern(text)


# ---------------------------------------------------------------- subcommands

def cmd_tokenize(args, out) -> int:
    from smtpp.kern import normalize, tokenize

    for path in args.files:
        out.write(tokenize(normalize(_read_kern(path)), args.scheme).to_line() + "\n")
    return 0


def cmd_normalize(args, out) -> int:
    from smtpp.kern import normalize

    for path in args.files:
        out.write(normalize(_read_kern(path)).serialize())
    return 0


def _gen_config(args, max_systems: int):
    from smtpp.synth import GenConfig

    texture = None if args.texture in (None, "none") else args.texture
    return GenConfig(max_systems=max_systems, page_size=args.page_size, texture_dir=texture,
                     title_enabled=args.titles, render_backend=args.backend, scheme=args.scheme)


def cmd_synth(args, out) -> int:
    import numpy as np

    from smtpp.kern import detokenize
    from smtpp.synth import Generator, load_excerpt_pool
    from smtpp.synth.io import write_manifest, write_pgm

    pool = load_excerpt_pool(args.corpus)
    gen = Generator(pool, _gen_config(args, args.max_systems), args.seed)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    records = []
    counts = np.zeros(args.max_systems + 1, dtype=int)
    for k in range(args.count):
        page = gen.page()
        stem = f"page_{k:05d}"
        write_pgm(outdir / f"{stem}.pgm", page.image)
        text = detokenize(page.label).serialize() + f"{SYSTEMS_COMMENT}{page.system_count}\n"
        (outdir / f"{stem}.krn").write_text(text, encoding="utf-8")
        records.append((f"{stem}.pgm", f"{stem}.krn"))
        counts[page.system_count] += 1
    write_manifest(outdir / "manifest.tsv", records)
    out.write(f"wrote {args.count} pages to {outdir}\n")
    out.write("systems " + " ".join(f"{i}:{counts[i]}" for i in range(1, len(counts))) + "\n")
    return 0


def cmd_train(args, out) -> int:
    from smtpp.curriculum import load_config, load_real_samples, run_pipeline
    from smtpp.synth import load_excerpt_pool

    cfg = load_config(args.config, seed=args.seed, out_dir=args.out, manifest=args.manifest,
                      corpus=args.corpus, backend=args.backend,
                      scheme=args.scheme.value if args.scheme else None)
    pool = load_excerpt_pool(cfg.corpus or None)
    real = load_real_samples(cfg.manifest, cfg.scheme) if cfg.manifest else None
    result = run_pipeline(cfg, pool, real, resume=args.resume)
    for ckpt in result.checkpoints:
        out.write(f"checkpoint {ckpt}\n")
    out.write(f"steps={result.step}\n")
    return 0


def cmd_decode(args, out) -> int:
    from smtpp.kern import convert, detokenize
    from smtpp.model import greedy_decode, load_checkpoint
    from smtpp.synth.io import read_image

    model, vocab, _ = load_checkpoint(args.checkpoint)
    if vocab is None:
        raise DataError(f"{args.checkpoint}: checkpoint carries no vocabulary")
    model.eval()
    for path in args.images:
        seq = greedy_decode(model, read_image(path), vocab, args.max_len)
        if args.scheme is not None and args.scheme != seq.scheme:
            seq = convert(seq, args.scheme, strict=False)
        if args.kern:
            try:
                out.write(detokenize(seq).serialize())
            except DataError as exc:
                logging.getLogger(__name__).warning("%s: output is not valid kern (%s)", path, exc)
                out.write(seq.to_line() + "\n")
        else:
            out.write(seq.to_line() + "\n")
    return 0


def cmd_eval(args, out) -> int:
    from smtpp.kern import read_token_file
    from smtpp.metrics import evaluate_corpus

    scheme = args.scheme or "bekern"
    hyps = read_token_file(args.hyp, scheme)
    refs = read_token_file(args.ref, scheme)
    if len(hyps) != len(refs):
        raise DataError(f"{len(hyps)} hypotheses but {len(refs)} references")
    if not refs:
        raise EmptyCorpus("reference file has no documents")
    out.write(evaluate_corpus(list(zip(hyps, refs)), workers=args.workers).format())
    return 0


def _systems_from_text(text: str):
    for line in text.splitlines():
        if line.startswith(SYSTEMS_COMMENT):
            try:
                return int(line[len(SYSTEMS_COMMENT):])
            except ValueError:
                return None
    return None


def corpus_stats(docs, sizes=None, systems=None) -> dict:
    """Table-style corpus report over normalized documents.

    Symbol counts are label lengths per scheme, markup tokens included;
    unique counts are vocabulary sizes as built by ``build_vocabulary``.
    """
    from smtpp.kern import EncodingScheme, build_vocabulary, normalize, tokenize

    if not docs:
        raise EmptyCorpus("no documents")
    report = {"pages": len(docs)}
    if sizes:
        areas = sorted(sizes, key=lambda s: (s[0] * s[1], s))
        report["max_size"], report["min_size"] = areas[-1], areas[0]
    known = [s for s in (systems or []) if s is not None]
    if known:
        report["systems"] = (sum(known) / len(known), max(known), min(known))
    for scheme in EncodingScheme:
        seqs = [tokenize(normalize(d), scheme) for d in docs]
        lens = [len(s) for s in seqs]
        report[scheme.value] = {
            "avg": sum(lens) / len(lens), "max": max(lens), "min": min(lens),
            "unique": len(build_vocabulary(seqs, scheme)),
        }
    return report


def format_stats(report: dict) -> str:
    schemes = ("kern", "ekern", "bekern")
    rows = [("Num pages", str(report["pages"]))]
    if "max_size" in report:
        rows.append(("Max page size", "%d x %d" % report["max_size"]))
        rows.append(("Min page size", "%d x %d" % report["min_size"]))
    if "systems" in report:
        avg, mx, mn = report["systems"]
        rows += [("Avg systems per page", f"{avg:.2f}"), ("Max systems per page", str(mx)),
                 ("Min systems per page", str(mn))]
    for label, key in (("Avg symbols per page", "avg"), ("Max symbols per page", "max"),
                       ("Min symbols per page", "min"), ("Unique symbols", "unique")):
        rows.append((label, ""))
        for s in schemes:
            v = report[s][key]
            rows.append((f"    {s}", f"{v:.1f}" if isinstance(v, float) else str(v)))
    width = max(len(r[0]) for r in rows) + 2
    lines = [f"{name:<{width}}{value}" for name, value in rows]
    lines.append("")
    for s in schemes:
        r = report[s]
        lines.append(f"{s}: avg={r['avg']:.4f} max={r['max']} min={r['min']} unique={r['unique']}")
    return "\n".join(lines) + "\n"


def _relative(path, base):
    try:
        return Path(path).relative_to(base)
    except ValueError:
        return Path(path)


def cmd_stats(args, out) -> int:
    from smtpp.synth.io import assign_splits, read_image, read_manifest, write_manifest

    docs, sizes, systems = [], [], []
    if args.manifest:
        records = read_manifest(args.manifest)
        if not records:
            raise EmptyCorpus(f"{args.manifest}: no records")
        for image, kern, _ in records:
            text = Path(kern).read_text(encoding="utf-8")
            docs.append(_read_kern(kern))
            systems.append(_systems_from_text(text))
            sizes.append(read_image(image).shape)
        if args.split:
            labels = assign_splits(len(records), args.seed)
            base = Path(args.manifest).parent
            rel = [(_relative(i, base), _relative(k, base), s) for (i, k, _), s in zip(records, labels)]
            write_manifest(args.manifest, rel)
            counts = {s: labels.count(s) for s in ("train", "val", "test")}
            out.write("split " + " ".join(f"{k}={v}" for k, v in counts.items()) + "\n")
    else:
        from smtpp.synth.pool import BUNDLED_CORPUS

        if args.split:
            raise UsageError("--split needs --manifest")
        directory = Path(args.corpus) if args.corpus else BUNDLED_CORPUS
        paths = sorted(directory.glob("*.krn"))
        docs = [_read_kern(p) for p in paths]
        systems = [1] * len(docs)
    out.write(format_stats(corpus_stats(docs, sizes, systems)))
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> Parser:
    from smtpp.kern import EncodingScheme

    def scheme_arg(text):
        try:
            return EncodingScheme.parse(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"unknown scheme {text!r}") from None

    p = Parser(prog="smtpp", description="Full-page pianoform transcription toolkit.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=Parser)
    sub.required = True

    def common(sp, scheme_default="bekern"):
        sp.add_argument("--scheme", type=scheme_arg,
                        default=scheme_arg(scheme_default) if scheme_default else None,
                        help="kern, ekern or bekern")
        sp.add_argument("--seed", type=seed_arg, default=0, help="unsigned 64-bit seed")

    sp = sub.add_parser("tokenize", help="print the token sequence of kern files")
    common(sp)
    sp.add_argument("files", nargs="+")
    sp.set_defaults(func=cmd_tokenize)

    sp = sub.add_parser("normalize", help="rewrite kern files in canonical order")
    common(sp)
    sp.add_argument("files", nargs="+")
    sp.set_defaults(func=cmd_normalize)

    sp = sub.add_parser("synth", help="generate synthetic pages with a manifest")
    common(sp)
    sp.add_argument("--out", required=True)
    sp.add_argument("--count", type=positive_int, default=10)
    sp.add_argument("--max-systems", type=positive_int, default=3)
    sp.add_argument("--corpus", help="directory of single-system kern excerpts")
    sp.add_argument("--page-size", type=page_size_arg, default=(594, 420), help="HxW in pixels")
    sp.add_argument("--texture", default=None, help="'builtin', 'none' or a directory of images")
    sp.add_argument("--titles", action="store_true", help="add a generated title and author")
    sp.add_argument("--backend", choices=("proxy", "external"), default="proxy")
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("train", help="run the curriculum training pipeline")
    common(sp, scheme_default=None)
    sp.set_defaults(seed=None)
    sp.add_argument("--config", help="key=value config file")
    sp.add_argument("--out", help="output directory for log and checkpoints")
    sp.add_argument("--manifest", help="real-page manifest for fine-tuning")
    sp.add_argument("--corpus", help="directory of single-system kern excerpts")
    sp.add_argument("--resume", help="stage checkpoint to continue from")
    sp.add_argument("--backend", choices=("proxy", "external"), default=None)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("decode", help="greedy-decode page images")
    common(sp, scheme_default=None)
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--max-len", type=positive_int, default=512)
    sp.add_argument("--kern", action="store_true", help="print kern text instead of tokens")
    sp.add_argument("images", nargs="+")
    sp.set_defaults(func=cmd_decode)

    sp = sub.add_parser("eval", help="score hypotheses against references")
    common(sp)
    sp.add_argument("--hyp", required=True, help="token file, one document per line")
    sp.add_argument("--ref", required=True, help="token file, one document per line")
    sp.add_argument("--workers", type=positive_int, default=1)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("stats", help="corpus report")
    common(sp)
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--manifest")
    src.add_argument("--corpus", help="directory of kern files")
    sp.add_argument("--split", action="store_true", help="assign 60/20/20 splits into the manifest")
    sp.set_defaults(func=cmd_stats)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1
    except (SMTError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
