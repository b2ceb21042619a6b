"""Character-3-gram TF-IDF encoding of alias and mention strings.

Each whitespace-delimited word is padded with single spaces (" word ")
and slid with a window of 3, so short tokens still produce grams and no
gram crosses a word boundary. Grams kept in the vocabulary must appear
in at least `min_df` distinct training strings (default 10). Weights are
raw term count times smoothed idf, ln((1+N)/(1+df)) + 1, L2-normalized.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_MIN_DF = 10


def extract_3grams(s: str) -> Counter:
    """Multiset of word-boundary-aware character 3-grams of the string."""
    grams: Counter = Counter()
    for word in s.lower().split():
        padded = f" {word} "
        for i in range(len(padded) - 2):
            grams[padded[i:i + 3]] += 1
    return grams


@dataclass(frozen=True)
class SparseVector:
    """Unit-normalized sparse vector; indices strictly increasing."""
    indices: np.ndarray  # int32
    weights: np.ndarray  # float64

    @property
    def nnz(self) -> int:
        return len(self.indices)

    @property
    def is_zero(self) -> bool:
        return len(self.indices) == 0

    def dot(self, other: "SparseVector") -> float:
        i = j = 0
        total = 0.0
        a_idx, a_w = self.indices, self.weights
        b_idx, b_w = other.indices, other.weights
        while i < len(a_idx) and j < len(b_idx):
            if a_idx[i] == b_idx[j]:
                total += a_w[i] * b_w[j]
                i += 1
                j += 1
            elif a_idx[i] < b_idx[j]:
                i += 1
            else:
                j += 1
        return total


_ZERO = None


def zero_vector() -> SparseVector:
    global _ZERO
    if _ZERO is None:
        _ZERO = SparseVector(np.empty(0, dtype=np.int32), np.empty(0, dtype=np.float64))
    return _ZERO


class NgramVectorizer:
    """Fitted 3-gram vocabulary with document frequencies and idf weights."""

    def __init__(self, grams: Sequence[str], df: np.ndarray, n_docs: int, min_df: int):
        self.grams = list(grams)
        self.vocabulary = {g: i for i, g in enumerate(self.grams)}
        self.df = np.asarray(df, dtype=np.int64)
        self.n_docs = n_docs
        self.min_df = min_df
        self.idf = np.log((1.0 + n_docs) / (1.0 + self.df)) + 1.0

    @property
    def vocab_size(self) -> int:
        return len(self.grams)

    @classmethod
    def fit(cls, corpus: Iterable[str], min_df: int = DEFAULT_MIN_DF) -> "NgramVectorizer":
        """Fit on a corpus of alias strings; df counts distinct strings."""
        df_counts: Counter = Counter()
        n_docs = 0
        for text in corpus:
            n_docs += 1
            df_counts.update(set(extract_3grams(text)))
        if n_docs == 0:
            raise ValueError("empty training corpus")
        kept = sorted(g for g, df in df_counts.items() if df >= min_df)
        if not kept:
            raise ValueError("no grams survive min_df")
        df = np.array([df_counts[g] for g in kept], dtype=np.int64)
        return cls(kept, df, n_docs, min_df)

    def encode(self, s: str) -> SparseVector:
        """TF-IDF encode and L2-normalize; all-OOV input gives a zero vector."""
        counts = extract_3grams(s)
        pairs = sorted(
            (self.vocabulary[g], tf) for g, tf in counts.items()
            if g in self.vocabulary
        )
        if not pairs:
            return zero_vector()
        indices = np.fromiter((p[0] for p in pairs), dtype=np.int32, count=len(pairs))
        tf = np.fromiter((p[1] for p in pairs), dtype=np.float64, count=len(pairs))
        weights = tf * self.idf[indices]
        weights /= math.sqrt(float(np.dot(weights, weights)))
        return SparseVector(indices, weights)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, NgramVectorizer)
            and self.grams == other.grams
            and self.n_docs == other.n_docs
            and self.min_df == other.min_df
            and np.array_equal(self.df, other.df)
        )
