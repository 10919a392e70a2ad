import sys

import pytest

from smtpp.kern import parse_kern
from smtpp.synth import BUNDLED_CORPUS, load_excerpt_pool

FIG_EXCERPT = """**kern\t**kern
*clefF4\t*clefG2
*k[b-]\t*k[b-]
*M3/4\t*M3/4
=1\t=1
4C 4G\t8e-L
.\t8fJ
4r\t4g
4F\t(4a
=2\t=2
2.G\t2.b-)
==\t==
*-\t*-
"""


@pytest.fixture(scope="session")
def corpus_docs():
    return [parse_kern(p.read_text(encoding="utf-8")) for p in sorted(BUNDLED_CORPUS.glob("*.krn"))]


@pytest.fixture(scope="session")
def pool():
    return load_excerpt_pool()


@pytest.fixture
def fig_doc():
    return parse_kern(FIG_EXCERPT)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
