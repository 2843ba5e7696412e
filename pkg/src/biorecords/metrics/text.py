"""Edit distance and character/word error rates."""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean
from typing import Hashable, List, Optional, Sequence

import numpy as np

# above this many DP cells the row update is vectorized
_VECTOR_CELLS = 2500


def _levenshtein_rows(a: Sequence, b: Sequence) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        left = i
        for j, cb in enumerate(b, 1):
            best = prev[j - 1] if ca == cb else prev[j - 1] + 1
            up = prev[j] + 1
            if up < best:
                best = up
            if left + 1 < best:
                best = left + 1
            cur.append(best)
            left = best
        prev = cur
    return prev[-1]


def _encode(a: Sequence, b: Sequence):
    if isinstance(a, str) and isinstance(b, str):
        enc = lambda s: np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32)
        return enc(a), enc(b)
    ids: dict = {}
    to_ids = lambda seq: np.fromiter((ids.setdefault(x, len(ids)) for x in seq), dtype=np.int64, count=len(seq))
    return to_ids(a), to_ids(b)


def _levenshtein_vector(a: Sequence, b: Sequence) -> int:
    # cur[j] = min(diag/up candidates, cur[j-1] + 1) solved as a running minimum
    xa, xb = _encode(a, b)
    m = len(xb)
    offsets = np.arange(m + 1, dtype=np.int64)
    prev = offsets.copy()
    for i in range(1, len(xa) + 1):
        cand = np.empty(m + 1, dtype=np.int64)
        cand[0] = i
        np.minimum(prev[:-1] + (xb != xa[i - 1]), prev[1:] + 1, out=cand[1:])
        prev = np.minimum.accumulate(cand - offsets) + offsets
    return int(prev[-1])


def levenshtein(a: Sequence[Hashable], b: Sequence[Hashable], *, vectorize: Optional[bool] = None) -> int:
    """Minimum number of insertions, deletions and substitutions turning a into b.

    Works on strings (characters) or any sequences of hashable symbols (e.g.
    word lists).
    """
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    if vectorize is None:
        vectorize = len(a) * len(b) > _VECTOR_CELLS
    if vectorize:
        return _levenshtein_vector(a, b)
    return _levenshtein_rows(a, b)


def normalize_for_metrics(text: str) -> str:
    return text.strip().lower()


def words(text: str) -> List[str]:
    return text.split()


class EmptyReference(ValueError):
    pass


@dataclass(frozen=True)
class TextMetrics:
    char_edits: int
    ref_chars: int
    word_edits: int
    ref_words: int

    @property
    def cer(self) -> float:
        return self.char_edits / self.ref_chars

    @property
    def wer(self) -> float:
        return self.word_edits / self.ref_words

    def as_dict(self) -> dict:
        return {
            "cer": self.cer, "wer": self.wer,
            "char_edits": self.char_edits, "ref_chars": self.ref_chars,
            "word_edits": self.word_edits, "ref_words": self.ref_words,
        }


def text_metrics(reference: str, hypothesis: str) -> TextMetrics:
    ref = normalize_for_metrics(reference)
    hyp = normalize_for_metrics(hypothesis)
    if not ref:
        raise EmptyReference("reference text is empty after normalization")
    ref_words, hyp_words = words(ref), words(hyp)
    return TextMetrics(
        char_edits=levenshtein(ref, hyp),
        ref_chars=len(ref),
        word_edits=levenshtein(ref_words, hyp_words),
        ref_words=len(ref_words),
    )


def cer(reference: str, hypothesis: str) -> float:
    ref = normalize_for_metrics(reference)
    if not ref:
        raise EmptyReference("reference text is empty after normalization")
    return levenshtein(ref, normalize_for_metrics(hypothesis)) / len(ref)


def wer(reference: str, hypothesis: str) -> float:
    ref = words(normalize_for_metrics(reference))
    if not ref:
        raise EmptyReference("reference text is empty after normalization")
    return levenshtein(ref, words(normalize_for_metrics(hypothesis))) / len(ref)


@dataclass(frozen=True)
class VolumeTextMetrics:
    volume: str
    documents: int
    cer: float
    wer: float

    def as_dict(self) -> dict:
        return {"volume": self.volume, "documents": self.documents, "cer": self.cer, "wer": self.wer}


def volume_average(metrics: List[TextMetrics], volume: str = "") -> VolumeTextMetrics:
    """Unweighted mean of per-document CER and WER."""
    if not metrics:
        raise ValueError("no documents to average")
    return VolumeTextMetrics(
        volume, len(metrics), fmean(m.cer for m in metrics), fmean(m.wer for m in metrics)
    )
