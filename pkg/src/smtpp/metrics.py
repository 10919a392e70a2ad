"""Character, symbol and line error rates.

All three are Levenshtein distances normalized by the reference length,
computed after converting both sides to a common encoding so that models
trained on different schemes are compared on equal terms:

* CER -- over BEKERN tokens (minimum semantic units),
* SER -- over KERN tokens (complete symbols, plus ``<t>``/``<b>``),
* LER -- over whole document lines.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from smtpp.errors import EmptyCorpus, EmptyReference
from smtpp.kern.tokens import EncodingScheme, TokenSequence, convert, line_texts


def edit_distance(a, b) -> int:
    """Unit-cost Levenshtein distance between two token sequences."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        cur = [i]
        for j, y in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def _ratio(hyp, ref) -> float:
    if not ref:
        raise EmptyReference("reference has no tokens")
    return edit_distance(hyp, ref) / len(ref)


def _as_seq(x, scheme=EncodingScheme.BEKERN) -> TokenSequence:
    return x if isinstance(x, TokenSequence) else TokenSequence(list(x), scheme)


def cer(hyp, ref) -> float:
    hyp, ref = _as_seq(hyp), _as_seq(ref)
    return _ratio(convert(hyp, "bekern", strict=False).content(),
                  convert(ref, "bekern").content())


def ser(hyp, ref) -> float:
    hyp, ref = _as_seq(hyp), _as_seq(ref)
    return _ratio(convert(hyp, "kern", strict=False).content(),
                  convert(ref, "kern").content())


def ler(hyp, ref) -> float:
    # line texts use canonical symbols, so any scheme gives the same lines
    hyp, ref = _as_seq(hyp), _as_seq(ref)
    return _ratio(line_texts(hyp), line_texts(ref))


@dataclass
class EvalReport:
    cer: float
    ser: float
    ler: float
    per_document: list[tuple[str, float, float, float]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"CER": self.cer, "SER": self.ser, "LER": self.ler}

    def format(self) -> str:
        lines = [f"{'doc':<24}{'CER':>10}{'SER':>10}{'LER':>10}"]
        for doc_id, c, s, l in self.per_document:
            lines.append(f"{doc_id:<24}{c:>10.4f}{s:>10.4f}{l:>10.4f}")
        lines.append(f"{'mean':<24}{self.cer:>10.4f}{self.ser:>10.4f}{self.ler:>10.4f}")
        lines.append("")
        lines.extend(f"{k}={v!r}" for k, v in self.as_dict().items())
        lines.append(f"documents={len(self.per_document)}")
        return "\n".join(lines) + "\n"


def evaluate_corpus(pairs, ids=None, workers: int = 1) -> EvalReport:
    """Per-document CER/SER/LER and their unweighted means.

    ``pairs`` is a sequence of ``(hyp, ref)``. Documents may be scored on a
    thread pool; results keep the input order.
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyCorpus("no documents to evaluate")
    ids = list(ids) if ids is not None else [str(i) for i in range(len(pairs))]

    def score(pair):
        h, r = pair
        return cer(h, r), ser(h, r), ler(h, r)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            scores = list(pool.map(score, pairs))
    else:
        scores = [score(p) for p in pairs]
    per_doc = [(i, c, s, l) for i, (c, s, l) in zip(ids, scores)]
    n = len(per_doc)
    return EvalReport(
        cer=sum(d[1] for d in per_doc) / n,
        ser=sum(d[2] for d in per_doc) / n,
        ler=sum(d[3] for d in per_doc) / n,
        per_document=per_doc,
    )
