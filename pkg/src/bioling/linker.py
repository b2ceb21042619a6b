"""Candidate generation: mention -> plausible KB concepts.

The mention (after optional abbreviation expansion) is TF-IDF encoded
and its k nearest alias strings retrieved; each alias fans out to every
concept it names, so the candidate set may be smaller or larger than k.
Per concept, the best-scoring alias and its cosine are kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .index import AliasIndex
from .kb import normalize_alias

REASON_OUT_OF_VOCABULARY = "out_of_vocabulary"


@dataclass(frozen=True)
class Candidate:
    concept_id: str
    alias: str
    similarity: float


@dataclass(frozen=True)
class CandidateSet:
    mention: str
    query_text: str
    candidates: tuple[Candidate, ...]
    start: int | None = None
    end: int | None = None
    reason: str | None = None

    def concept_ids(self) -> set[str]:
        return {c.concept_id for c in self.candidates}


def generate_candidates(
    index: AliasIndex,
    alias_table: Mapping[str, frozenset[str]],
    mention: str,
    k: int,
    expansion: Mapping[str, str] | None = None,
    start: int | None = None,
    end: int | None = None,
) -> CandidateSet:
    """Deduplicated concept candidates for one mention string."""
    if not mention:
        raise ValueError("mention must be nonempty")
    if k < 1:
        raise ValueError("k must be >= 1")
    query_text = expansion.get(mention, mention) if expansion else mention
    query = index.vectorizer.encode(query_text)
    if query.is_zero:
        return CandidateSet(mention, query_text, (), start, end,
                            reason=REASON_OUT_OF_VOCABULARY)
    best: dict[str, tuple[float, str]] = {}
    for alias, sim in index.nearest_aliases(query, k):
        for cid in alias_table.get(normalize_alias(alias), ()):
            prev = best.get(cid)
            if prev is None or sim > prev[0]:
                best[cid] = (sim, alias)
    ranked = sorted(best.items(), key=lambda kv: (-kv[1][0], kv[0]))
    return CandidateSet(
        mention, query_text,
        tuple(Candidate(cid, alias, sim) for cid, (sim, alias) in ranked),
        start, end,
    )
