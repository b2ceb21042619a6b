import json
import random

import numpy as np
import pytest

from bioling.index import build_index
from bioling.kb import KnowledgeBase, load_kb
from bioling.vectorizer import NgramVectorizer

# word pool for synthetic aliases; drawn from recognizable biomedical
# morphemes so character 3-grams overlap heavily across aliases
_STEMS = [
    "card", "hepat", "nephr", "neur", "cyt", "derm", "gastr", "hem", "oste",
    "path", "scler", "therm", "tox", "vas", "angi", "arthr", "bronch",
    "cerebr", "chondr", "crani", "encephal", "fibr", "gluc", "lip", "my",
    "necr", "pneum", "ren", "splen", "thromb",
]
_SUFFIXES = [
    "oma", "itis", "osis", "emia", "pathy", "ectomy", "plasty", "gram",
    "cyte", "blast", "gen", "lysis", "trophy", "plasia", "oid",
]
_MODIFIERS = [
    "acute", "chronic", "benign", "malignant", "primary", "secondary",
    "diffuse", "focal", "bilateral", "recurrent", "familial", "idiopathic",
    "juvenile", "systemic", "localized",
]


def synth_word(rng: random.Random) -> str:
    return rng.choice(_STEMS) + rng.choice(_SUFFIXES)


def synth_alias(rng: random.Random) -> str:
    parts = []
    if rng.random() < 0.6:
        parts.append(rng.choice(_MODIFIERS))
    parts.append(synth_word(rng))
    if rng.random() < 0.3:
        parts.append(synth_word(rng))
    return " ".join(parts)


def make_synthetic_kb(
    n_aliases: int, n_concepts: int, seed: int = 0
) -> KnowledgeBase:
    """KB with exactly n_aliases distinct surfaces over n_concepts."""
    rng = random.Random(seed)
    surfaces: list[str] = []
    seen = set()
    while len(surfaces) < n_aliases:
        a = synth_alias(rng)
        if a not in seen:
            seen.add(a)
            surfaces.append(a)
    from bioling.kb import Concept, normalize_alias

    concepts = {}
    table: dict[str, set[str]] = {}
    per_concept = len(surfaces) / n_concepts
    pos = 0
    for i in range(n_concepts):
        cid = f"C{i:07d}"
        take = max(1, round(per_concept * (i + 1)) - round(per_concept * i))
        aliases = list(surfaces[pos:pos + take]) or [surfaces[pos % len(surfaces)]]
        pos += take
        # every so often, share an alias with the previous concept
        if i % 97 == 1 and pos > take + 1:
            aliases.append(surfaces[pos - take - 1])
        concept = Concept(cid, aliases[0], tuple(aliases))
        concepts[cid] = concept
        for a in concept.aliases:
            table.setdefault(normalize_alias(a), set()).add(cid)
    return KnowledgeBase(concepts, {k: frozenset(v) for k, v in table.items()})


@pytest.fixture(scope="session")
def toy_kb_path(tmp_path_factory):
    """3-concept KB mirroring the shared-alias situation: 'cancer' names
    lung cancer, breast cancer, and a third concept."""
    lines = [
        {"concept_id": "C01", "canonical_name": "Lung Cancer",
         "aliases": ["cancer", "lung carcinoma", "pulmonary cancer"],
         "types": ["T191"], "definition": "a lung neoplasm"},
        {"concept_id": "C02", "canonical_name": "Breast Cancer",
         "aliases": ["cancer", "mammary carcinoma"],
         "types": ["T191"], "definition": None},
        {"concept_id": "C03", "canonical_name": "Cancer",
         "aliases": ["malignant neoplasm", "tumor"],
         "types": ["T191"], "definition": None},
        {"concept_id": "C04", "canonical_name": "Heat Shock Protein",
         "aliases": ["HSP", "heat shock proteins"],
         "types": ["T116"], "definition": None},
        {"concept_id": "C05", "canonical_name": "Interleukin-2",
         "aliases": ["IL-2", "interleukin 2"],
         "types": ["T116"], "definition": None},
    ]
    path = tmp_path_factory.mktemp("kb") / "toy_kb.jsonl"
    with open(path, "w") as fp:
        for line in lines:
            fp.write(json.dumps(line) + "\n")
    return str(path)


@pytest.fixture(scope="session")
def toy_kb(toy_kb_path):
    return load_kb(toy_kb_path)


@pytest.fixture(scope="session")
def toy_index(toy_kb):
    vec = NgramVectorizer.fit(toy_kb.alias_surfaces(), min_df=1)
    return build_index(toy_kb, vec)


@pytest.fixture(scope="session")
def synth_kb():
    return make_synthetic_kb(10_000, 4_000, seed=42)


@pytest.fixture(scope="session")
def synth_index(synth_kb):
    vec = NgramVectorizer.fit(synth_kb.alias_surfaces(), min_df=10)
    return build_index(synth_kb, vec)


class BruteForceOracle:
    """Independent search oracle: the query is scored against every alias
    via a scipy sparse matrix product, ranked (score desc, alias asc),
    zero scores dropped. Built once per index; shares nothing with the
    inverted-index scoring path."""

    def __init__(self, index):
        import scipy.sparse as sp

        n = len(index.aliases)
        vocab = index.vectorizer.vocab_size
        rows, cols, data = [], [], []
        for i, vec in enumerate(index.vectors):
            rows.extend([i] * vec.nnz)
            cols.extend(int(c) for c in vec.indices)
            data.extend(float(w) for w in vec.weights)
        self.matrix = sp.csr_matrix((data, (rows, cols)), shape=(n, vocab))
        self.aliases = list(index.aliases)
        order = sorted(range(n), key=lambda i: self.aliases[i])
        self.alias_rank = np.empty(n, dtype=np.int64)
        for rank, row in enumerate(order):
            self.alias_rank[row] = rank
        self.vocab = vocab
        self._sp = sp

    def top_k(self, query, k):
        if query.is_zero:
            return []
        q = self._sp.csr_matrix(
            ([float(w) for w in query.weights],
             ([0] * query.nnz, [int(c) for c in query.indices])),
            shape=(1, self.vocab),
        )
        scores = np.asarray((self.matrix @ q.T).todense()).ravel()
        order = np.lexsort((self.alias_rank, -scores))
        return [
            (self.aliases[int(i)], float(scores[int(i)]))
            for i in order[:k] if scores[int(i)] > 0.0
        ]
