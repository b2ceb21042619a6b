"""Searchable alias index: exact cosine top-k and an LSH approximation.

The exact backend is an inverted index over gram ids: a query's score
against every alias is accumulated from the posting lists of its grams.
Since all weights are non-negative and vectors unit-normalized, scores
are cosines in [0, 1]. Ties at the same cosine break lexicographically
by alias string.

The approximate backend hashes vectors with random hyperplanes, ranks
aliases by signature Hamming distance and exactly re-scores the closest
`rescore` of them.

Persistence: single little-endian binary file, magic "BLIX" (see
docs/index-format.md).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, Sequence

import numpy as np

from .kb import KnowledgeBase, normalize_alias
from .vectorizer import NgramVectorizer, SparseVector, zero_vector

MAGIC = b"BLIX"
FORMAT_VERSION = 1

BACKEND_EXACT = "exact"
BACKEND_LSH = "lsh"

DEFAULT_LSH_BITS = 256
DEFAULT_LSH_RESCORE = 1000
DEFAULT_LSH_SEED = 0x5EED


class IndexFormatError(ValueError):
    """Raised on a corrupt or incompatible serialized index."""


class IndexBackendError(RuntimeError):
    """Raised when a search backend cannot be constructed."""


@dataclass(frozen=True)
class LshParams:
    n_bits: int = DEFAULT_LSH_BITS
    rescore: int = DEFAULT_LSH_RESCORE
    seed: int = DEFAULT_LSH_SEED


class AliasIndex:
    """Encoded alias vectors plus the alias -> concept-id table."""

    def __init__(
        self,
        aliases: Sequence[str],
        vectors: Sequence[SparseVector],
        vectorizer: NgramVectorizer,
        alias_table: dict[str, frozenset[str]],
        backend: str = BACKEND_EXACT,
        lsh_params: LshParams | None = None,
    ):
        if len(aliases) != len(vectors):
            raise ValueError("one vector per alias required")
        self.aliases = list(aliases)
        self.vectors = list(vectors)
        self.vectorizer = vectorizer
        self.alias_table = alias_table
        self.backend = backend
        self.lsh_params = lsh_params or LshParams()
        # lexicographic rank of each alias, used as the tie-break key
        order = sorted(range(len(self.aliases)), key=lambda i: self.aliases[i])
        self._lex_rank = np.empty(len(self.aliases), dtype=np.int64)
        for rank, row in enumerate(order):
            self._lex_rank[row] = rank
        self._postings: dict[int, tuple[np.ndarray, np.ndarray]] | None = None
        self._signatures: np.ndarray | None = None
        self._planes: np.ndarray | None = None
        if backend == BACKEND_EXACT:
            self._build_postings()
        elif backend == BACKEND_LSH:
            self._build_lsh()
        else:
            raise IndexBackendError(f"unknown backend {backend!r}")

    def __len__(self) -> int:
        return len(self.aliases)

    # -- backend construction -------------------------------------------

    def _build_postings(self) -> None:
        rows: dict[int, list[int]] = {}
        weights: dict[int, list[float]] = {}
        for row, vec in enumerate(self.vectors):
            for gi, w in zip(vec.indices, vec.weights):
                rows.setdefault(int(gi), []).append(row)
                weights.setdefault(int(gi), []).append(float(w))
        self._postings = {
            gi: (np.array(rows[gi], dtype=np.int64),
                 np.array(weights[gi], dtype=np.float64))
            for gi in rows
        }

    def _build_lsh(self) -> None:
        p = self.lsh_params
        if p.n_bits % 64 != 0 or p.n_bits <= 0:
            raise IndexBackendError("LSH bit count must be a positive multiple of 64")
        rng = np.random.default_rng(p.seed)
        self._planes = rng.standard_normal((p.n_bits, self.vectorizer.vocab_size))
        sigs = np.empty((len(self.vectors), p.n_bits // 64), dtype=np.uint64)
        for row, vec in enumerate(self.vectors):
            sigs[row] = self._signature(vec)
        self._signatures = sigs

    def _signature(self, vec: SparseVector) -> np.ndarray:
        proj = self._planes[:, vec.indices] @ vec.weights if vec.nnz else np.zeros(
            self.lsh_params.n_bits
        )
        bits = (proj >= 0).astype(np.uint8)
        packed = np.packbits(bits)
        return packed.view(">u8").astype(np.uint64)

    # -- scoring --------------------------------------------------------

    def _exact_scores(self, query: SparseVector) -> np.ndarray:
        scores = np.zeros(len(self.aliases), dtype=np.float64)
        for gi, w in zip(query.indices, query.weights):
            posting = self._postings.get(int(gi))
            if posting is not None:
                rows, ws = posting
                scores[rows] += float(w) * ws
        return scores

    def _select_top(self, scores: np.ndarray, k: int, rows: np.ndarray | None = None):
        """Rows of the top-k by (score desc, alias lexicographic asc)."""
        if rows is None:
            order = np.lexsort((self._lex_rank, -scores))
            return order[:k], scores
        order = np.lexsort((self._lex_rank[rows], -scores))
        return rows[order[:k]], None

    def nearest_aliases(self, query: SparseVector, k: int) -> list[tuple[str, float]]:
        """Up to k (alias, cosine) pairs, best first.

        Zero-similarity aliases are never returned, so fewer than k
        results can come back; a zero query vector yields none.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        if query.is_zero or not self.aliases:
            return []
        if self.backend == BACKEND_EXACT:
            scores = self._exact_scores(query)
            top, _ = self._select_top(scores, k)
            return [(self.aliases[int(r)], float(scores[int(r)]))
                    for r in top if scores[int(r)] > 0.0]
        return self._nearest_lsh(query, k)

    def _nearest_lsh(self, query: SparseVector, k: int) -> list[tuple[str, float]]:
        sig = self._signature(query)
        dist = np.zeros(len(self.aliases), dtype=np.int64)
        for word in range(self._signatures.shape[1]):
            x = np.bitwise_xor(self._signatures[:, word], sig[word])
            dist += np.unpackbits(
                x.view(np.uint8).reshape(-1, 8), axis=1
            ).sum(axis=1).astype(np.int64)
        m = min(max(self.lsh_params.rescore, k), len(self.aliases))
        cand = np.argpartition(dist, m - 1)[:m] if m < len(self.aliases) \
            else np.arange(len(self.aliases))
        scores = np.array([query.dot(self.vectors[int(r)]) for r in cand])
        order = np.lexsort((self._lex_rank[cand], -scores))[:k]
        return [(self.aliases[int(cand[i])], float(scores[int(i)]))
                for i in order if scores[int(i)] > 0.0]


def build_index(
    kb: KnowledgeBase,
    vectorizer: NgramVectorizer,
    backend: str = BACKEND_EXACT,
    lsh_params: LshParams | None = None,
) -> AliasIndex:
    """Index every distinct alias surface of the KB."""
    aliases = kb.alias_surfaces()
    vectors = [vectorizer.encode(a) for a in aliases]
    return AliasIndex(aliases, vectors, vectorizer, dict(kb.alias_table),
                      backend, lsh_params)


# -- persistence --------------------------------------------------------

def _write_str(fp: BinaryIO, s: str) -> None:
    data = s.encode("utf-8")
    fp.write(struct.pack("<I", len(data)))
    fp.write(data)


def _read_str(fp: BinaryIO) -> str:
    (n,) = struct.unpack("<I", _read_exact(fp, 4))
    return _read_exact(fp, n).decode("utf-8")


def _read_exact(fp: BinaryIO, n: int) -> bytes:
    data = fp.read(n)
    if len(data) != n:
        raise IndexFormatError("unexpected end of file")
    return data


def _write_array(fp: BinaryIO, arr: np.ndarray, dtype: str) -> None:
    arr = np.asarray(arr, dtype=dtype)
    fp.write(struct.pack("<Q", len(arr)))
    fp.write(arr.tobytes())


def _read_array(fp: BinaryIO, dtype: str) -> np.ndarray:
    (n,) = struct.unpack("<Q", _read_exact(fp, 8))
    return np.frombuffer(_read_exact(fp, n * np.dtype(dtype).itemsize), dtype=dtype)


def save_index(index: AliasIndex, path: str) -> None:
    with open(path, "wb") as fp:
        fp.write(MAGIC)
        fp.write(struct.pack("<H", FORMAT_VERSION))
        # vectorizer
        v = index.vectorizer
        fp.write(struct.pack("<III", v.n_docs, v.min_df, v.vocab_size))
        for gram in v.grams:
            _write_str(fp, gram)
        _write_array(fp, v.df, "<i8")
        # aliases
        fp.write(struct.pack("<I", len(index.aliases)))
        for alias in index.aliases:
            _write_str(fp, alias)
        # vectors, CSR-style
        indptr = np.zeros(len(index.vectors) + 1, dtype=np.int64)
        for i, vec in enumerate(index.vectors):
            indptr[i + 1] = indptr[i] + vec.nnz
        _write_array(fp, indptr, "<i8")
        if index.vectors:
            _write_array(fp, np.concatenate([v.indices for v in index.vectors]), "<i4")
            _write_array(fp, np.concatenate([v.weights for v in index.vectors]), "<f8")
        else:
            _write_array(fp, np.empty(0), "<i4")
            _write_array(fp, np.empty(0), "<f8")
        # alias -> concept ids
        fp.write(struct.pack("<I", len(index.alias_table)))
        for key in sorted(index.alias_table):
            _write_str(fp, key)
            ids = sorted(index.alias_table[key])
            fp.write(struct.pack("<I", len(ids)))
            for cid in ids:
                _write_str(fp, cid)
        # backend
        if index.backend == BACKEND_EXACT:
            fp.write(struct.pack("<B", 0))
        else:
            fp.write(struct.pack("<B", 1))
            p = index.lsh_params
            fp.write(struct.pack("<QII", p.seed, p.n_bits, p.rescore))


def load_index(path: str) -> AliasIndex:
    with open(path, "rb") as fp:
        magic = fp.read(4)
        if magic != MAGIC:
            raise IndexFormatError(f"{path}: not an index file (bad magic)")
        (version,) = struct.unpack("<H", _read_exact(fp, 2))
        if version != FORMAT_VERSION:
            raise IndexFormatError(
                f"{path}: unsupported format version {version} "
                f"(expected {FORMAT_VERSION})"
            )
        n_docs, min_df, vocab_size = struct.unpack("<III", _read_exact(fp, 12))
        grams = [_read_str(fp) for _ in range(vocab_size)]
        df = _read_array(fp, "<i8")
        vectorizer = NgramVectorizer(grams, df, n_docs, min_df)
        (n_aliases,) = struct.unpack("<I", _read_exact(fp, 4))
        aliases = [_read_str(fp) for _ in range(n_aliases)]
        indptr = _read_array(fp, "<i8")
        all_indices = _read_array(fp, "<i4")
        all_weights = _read_array(fp, "<f8")
        vectors = []
        for i in range(n_aliases):
            lo, hi = int(indptr[i]), int(indptr[i + 1])
            if lo == hi:
                vectors.append(zero_vector())
            else:
                vectors.append(SparseVector(
                    all_indices[lo:hi].astype(np.int32),
                    all_weights[lo:hi].astype(np.float64),
                ))
        (n_table,) = struct.unpack("<I", _read_exact(fp, 4))
        alias_table: dict[str, frozenset[str]] = {}
        for _ in range(n_table):
            key = _read_str(fp)
            (n_ids,) = struct.unpack("<I", _read_exact(fp, 4))
            alias_table[key] = frozenset(_read_str(fp) for _ in range(n_ids))
        (tag,) = struct.unpack("<B", _read_exact(fp, 1))
        if tag == 0:
            return AliasIndex(aliases, vectors, vectorizer, alias_table,
                              BACKEND_EXACT)
        seed, n_bits, rescore = struct.unpack("<QII", _read_exact(fp, 16))
        return AliasIndex(aliases, vectors, vectorizer, alias_table,
                          BACKEND_LSH, LshParams(n_bits, rescore, seed))
