import io

import pytest

from smtpp.cli import main
from smtpp.kern import EncodingScheme, build_vocabulary, normalize, parse_kern, tokenize
from smtpp.synth import BUNDLED_CORPUS

FIRST = sorted(BUNDLED_CORPUS.glob("*.krn"))[0]


def run(*argv):
    out = io.StringIO()
    code = main(list(map(str, argv)), out=out)
    return code, out.getvalue()


def test_tokenize_prints_whitespace_fields():
    code, text = run("tokenize", "--scheme", "bekern", FIRST)
    assert code == 0
    doc = normalize(parse_kern(FIRST.read_text()))
    assert text.split() == tokenize(doc, "bekern").tokens


def test_normalize_command():
    code, text = run("normalize", FIRST)
    assert code == 0
    assert parse_kern(text) == normalize(parse_kern(FIRST.read_text()))


def test_eval_identical_files(tmp_path):
    code, text = run("tokenize", *sorted(BUNDLED_CORPUS.glob("*.krn"))[:4])
    ref = tmp_path / "r.txt"
    ref.write_text(text)
    code, report = run("eval", "--hyp", ref, "--ref", ref)
    assert code == 0
    assert "CER=0.0" in report and "SER=0.0" in report and "LER=0.0" in report


def test_exit_codes(tmp_path, capsys):
    assert run("frobnicate")[0] == 1
    assert run("tokenize", "--nope", FIRST)[0] == 1
    assert run("tokenize", "--scheme", "mei", FIRST)[0] == 1
    assert run("synth", "--out", tmp_path, "--seed", "-1")[0] == 1
    assert run("tokenize", tmp_path / "missing.krn")[0] == 2
    bad = tmp_path / "bad.krn"
    bad.write_text("**kern\t**kern\n4c\n*-\t*-\n")
    assert run("tokenize", bad)[0] == 2
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    assert run("eval", "--hyp", empty, "--ref", empty)[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0


def test_synth_stats_split(tmp_path):
    out = tmp_path / "pages"
    code, text = run("synth", "--out", out, "--count", 5, "--seed", 7, "--max-systems", 2)
    assert code == 0
    again = tmp_path / "again"
    run("synth", "--out", again, "--count", 5, "--seed", 7, "--max-systems", 2)
    for k in range(5):
        assert (out / f"page_{k:05d}.pgm").read_bytes() == (again / f"page_{k:05d}.pgm").read_bytes()

    manifest = out / "manifest.tsv"
    code, report = run("stats", "--manifest", manifest)
    assert code == 0
    docs = [parse_kern((out / f"page_{k:05d}.krn").read_text()) for k in range(5)]
    for scheme in EncodingScheme:
        unique = len(build_vocabulary([tokenize(normalize(d), scheme) for d in docs]))
        assert f"{scheme.value}: " in report and f"unique={unique}" in report.split(f"{scheme.value}: ")[1]
    code, report = run("stats", "--manifest", manifest, "--split", "--seed", 3)
    assert code == 0 and "split train=3 val=1 test=1" in report
    rows = [line.split("\t") for line in manifest.read_text().splitlines()]
    assert all(len(r) == 3 for r in rows)


def test_stats_single_document(tmp_path):
    d = tmp_path / "one"
    d.mkdir()
    (d / "a.krn").write_text(FIRST.read_text())
    code, report = run("stats", "--corpus", d)
    assert code == 0
    for scheme in ("kern", "ekern", "bekern"):
        line = next(ln for ln in report.splitlines() if ln.startswith(f"{scheme}: "))
        fields = dict(f.split("=") for f in line.split()[1:])
        assert float(fields["avg"]) == float(fields["max"]) == float(fields["min"])


def test_stats_empty_corpus(tmp_path):
    assert run("stats", "--corpus", tmp_path)[0] == 2


def test_train_and_decode(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n=2\ns=2\nN=4\npretrain_samples=2\npage_height=240\npage_width=420\n"
                   "texture=none\nreal_count=2\nlayers=1\nheads=1\nembed_dim=16\nff_dim=16\n")
    code, text = run("train", "--config", cfg, "--out", tmp_path / "run", "--seed", 1)
    assert code == 0 and "steps=8" in text
    log = (tmp_path / "run" / "train.log").read_text().splitlines()
    assert sum(1 for line in log if not line.startswith("#")) == 8
    run("synth", "--out", tmp_path / "p", "--count", 1, "--page-size", "240x420", "--max-systems", 1)
    code, text = run("decode", "--checkpoint", tmp_path / "run" / "stage3.ckpt", "--max-len", 5,
                     tmp_path / "p" / "page_00000.pgm")
    assert code == 0 and len(text.split()) <= 5
