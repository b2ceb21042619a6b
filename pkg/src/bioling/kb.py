"""Knowledge-base ingestion, validation and persistence.

The KB format is JSONL, one concept per line:

    {"concept_id": str, "canonical_name": str, "aliases": [str],
     "types": [str], "definition": str|null}

Aliases are many-to-many: one normalized alias string may map to several
concepts. Normalization is applied to lookup keys only; original alias
surfaces are kept for display and vectorizer input.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

__all__ = [
    "Concept", "KnowledgeBase", "KBFormatError", "KBStats",
    "load_kb", "save_kb", "normalize_alias", "kb_stats",
]


class KBFormatError(ValueError):
    """Raised when a KB file violates the format or its invariants."""


@dataclass(frozen=True)
class Concept:
    concept_id: str
    canonical_name: str
    aliases: tuple[str, ...]
    types: tuple[str, ...] = ()
    definition: str | None = None

    @property
    def has_definition(self) -> bool:
        return self.definition is not None


@dataclass(frozen=True)
class KBStats:
    n_concepts: int
    n_aliases: int
    n_shared_aliases: int
    bytes_on_disk: int


@dataclass
class KnowledgeBase:
    concepts: dict[str, Concept] = field(default_factory=dict)
    alias_table: dict[str, frozenset[str]] = field(default_factory=dict)
    source_path: str | None = None

    def alias_surfaces(self) -> list[str]:
        """Distinct original alias surfaces, in KB insertion order."""
        seen: dict[str, None] = {}
        for concept in self.concepts.values():
            for alias in concept.aliases:
                seen.setdefault(alias)
        return list(seen)


def normalize_alias(s: str) -> str:
    """Lowercase, collapse internal whitespace, strip; idempotent."""
    return " ".join(s.split()).lower()


def _parse_concept(obj: dict, lineno: int) -> Concept:
    try:
        concept_id = obj["concept_id"]
        canonical = obj["canonical_name"]
    except KeyError as exc:
        raise KBFormatError(f"line {lineno}: missing field {exc}") from exc
    if not isinstance(concept_id, str) or not concept_id:
        raise KBFormatError(f"line {lineno}: concept_id must be a nonempty string")
    if not isinstance(canonical, str) or not canonical:
        raise KBFormatError(f"line {lineno}: canonical_name must be a nonempty string")
    aliases = obj.get("aliases", [])
    types = obj.get("types", [])
    definition = obj.get("definition")
    if not isinstance(aliases, list) or not all(isinstance(a, str) for a in aliases):
        raise KBFormatError(f"line {lineno}: aliases must be a list of strings")
    # canonical name is always an alias of its own concept
    if normalize_alias(canonical) not in {normalize_alias(a) for a in aliases}:
        aliases = [canonical, *aliases]
    return Concept(concept_id, canonical, tuple(aliases), tuple(types), definition)


def load_kb(path: str) -> KnowledgeBase:
    """Load and validate a KB file; raises KBFormatError with line context."""
    concepts: dict[str, Concept] = {}
    table: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise KBFormatError(f"line {lineno}: invalid JSON: {exc}") from exc
            concept = _parse_concept(obj, lineno)
            if concept.concept_id in concepts:
                raise KBFormatError(
                    f"line {lineno}: duplicate concept_id {concept.concept_id!r}"
                )
            concepts[concept.concept_id] = concept
            for alias in concept.aliases:
                table.setdefault(normalize_alias(alias), set()).add(concept.concept_id)
    alias_table = {k: frozenset(v) for k, v in table.items()}
    return KnowledgeBase(concepts, alias_table, source_path=path)


def save_kb(kb: KnowledgeBase, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        for concept in kb.concepts.values():
            fp.write(json.dumps({
                "concept_id": concept.concept_id,
                "canonical_name": concept.canonical_name,
                "aliases": list(concept.aliases),
                "types": list(concept.types),
                "definition": concept.definition,
            }, ensure_ascii=False))
            fp.write("\n")


def kb_stats(kb: KnowledgeBase) -> KBStats:
    shared = sum(1 for ids in kb.alias_table.values() if len(ids) > 1)
    size = 0
    if kb.source_path is not None and os.path.exists(kb.source_path):
        size = os.path.getsize(kb.source_path)
    return KBStats(
        n_concepts=len(kb.concepts),
        n_aliases=len(kb.alias_table),
        n_shared_aliases=shared,
        bytes_on_disk=size,
    )
