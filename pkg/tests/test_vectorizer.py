import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bioling.vectorizer import (
    NgramVectorizer, extract_3grams, zero_vector,
)


def reference_tfidf_cosine(corpus, a, b, min_df=1):
    """Pure-python TF-IDF cosine, sharing no code with the vectorizer."""
    df = Counter()
    for text in corpus:
        df.update(set(extract_3grams(text)))
    vocab = {g for g, d in df.items() if d >= min_df}
    n = len(corpus)

    def encode(s):
        vec = {}
        for g, tf in extract_3grams(s).items():
            if g in vocab:
                vec[g] = tf * (math.log((1 + n) / (1 + df[g])) + 1)
        norm = math.sqrt(sum(w * w for w in vec.values()))
        return {g: w / norm for g, w in vec.items()} if norm else {}

    va, vb = encode(a), encode(b)
    return sum(w * vb.get(g, 0.0) for g, w in va.items())


def test_extract_3grams_two_char_word():
    assert set(extract_3grams("ab")) == {" ab", "ab "}


def test_extract_3grams_single_char_word():
    # " x " has exactly one window
    assert extract_3grams("x") == Counter({" x "})


def test_extract_3grams_no_cross_word_grams():
    grams = extract_3grams("lung cancer")
    assert len(grams) == 10
    assert "g c" not in grams
    assert " lu" in grams and "er " in grams


def test_extract_3grams_repeated_counts():
    assert extract_3grams("aaaa")["aaa"] == 2


def test_extract_3grams_case_folded():
    assert extract_3grams("ABC") == extract_3grams("abc")


def test_fit_rejects_empty_corpus():
    with pytest.raises(ValueError, match="empty training corpus"):
        NgramVectorizer.fit([])


def test_fit_rejects_vocabulary_wipeout():
    with pytest.raises(ValueError, match="min_df"):
        NgramVectorizer.fit(["abc"], min_df=2)


def test_min_df_threshold_is_inclusive():
    # "abc" appears in exactly 2 strings, "xyz" in 1
    corpus = ["abc", "abc", "xyz"]
    vec2 = NgramVectorizer.fit(corpus, min_df=2)
    assert set(vec2.grams) == {" ab", "abc", "bc "}
    vec1 = NgramVectorizer.fit(corpus, min_df=1)
    assert " xy" in vec1.vocabulary


def test_df_counts_distinct_strings_not_occurrences():
    # gram "aaa" occurs twice inside one string but df must count it once
    vec = NgramVectorizer.fit(["aaaa", "zzz"], min_df=1)
    assert vec.df[vec.vocabulary["aaa"]] == 1


def test_idf_value_single_doc():
    # N = df = 1: idf = ln(2/2) + 1 = 1
    vec = NgramVectorizer.fit(["ab"], min_df=1)
    assert np.allclose(vec.idf, 1.0)


def test_idf_formula():
    vec = NgramVectorizer.fit(["ab", "ab", "cd"], min_df=1)
    i = vec.vocabulary[" ab"]
    assert vec.idf[i] == pytest.approx(math.log(4 / 3) + 1)
    j = vec.vocabulary[" cd"]
    assert vec.idf[j] == pytest.approx(math.log(4 / 2) + 1)


def test_encode_unit_norm():
    vec = NgramVectorizer.fit(["lung cancer", "breast cancer", "cancer"], min_df=1)
    v = vec.encode("lung cancer")
    assert np.dot(v.weights, v.weights) == pytest.approx(1.0, abs=1e-12)
    assert list(v.indices) == sorted(v.indices)


def test_encode_oov_gives_zero_vector():
    vec = NgramVectorizer.fit(["lung cancer"], min_df=1)
    v = vec.encode("ΩΩΩΩ")
    assert v.is_zero
    assert vec.encode("").is_zero


def test_partial_oov_uses_known_grams_only():
    vec = NgramVectorizer.fit(["lung cancer"], min_df=1)
    v = vec.encode("lung qqqq")
    assert not v.is_zero
    known = {vec.grams[i] for i in v.indices}
    assert all("q" not in g for g in known)


def test_self_similarity_is_one():
    vec = NgramVectorizer.fit(["heat shock protein", "shock"], min_df=1)
    v = vec.encode("heat shock protein")
    assert v.dot(v) == pytest.approx(1.0, abs=1e-12)


def test_zero_vector_dot():
    vec = NgramVectorizer.fit(["abc"], min_df=1)
    assert zero_vector().dot(vec.encode("abc")) == 0.0


WORDS = st.lists(
    st.text(alphabet="abcdefgh-", min_size=1, max_size=8), min_size=1, max_size=4,
)


@given(WORDS, WORDS)
@settings(max_examples=150, deadline=None)
def test_cosine_matches_reference(words_a, words_b):
    a, b = " ".join(words_a), " ".join(words_b)
    corpus = [a, b, "abc def", "gh"]
    vec = NgramVectorizer.fit(corpus, min_df=1)
    got = vec.encode(a).dot(vec.encode(b))
    want = reference_tfidf_cosine(corpus, a, b)
    assert got == pytest.approx(want, abs=1e-9)


def test_scale_invariance_of_tf():
    # multiplying every term count by a constant leaves the cosine unchanged
    vec = NgramVectorizer.fit(["lung cancer", "breast cancer"], min_df=1)
    base = vec.encode("lung cancer")
    scaled_counts = {g: 7 * tf for g, tf in extract_3grams("lung cancer").items()}
    pairs = sorted(
        (vec.vocabulary[g], tf) for g, tf in scaled_counts.items()
        if g in vec.vocabulary
    )
    idx = np.array([p[0] for p in pairs], dtype=np.int32)
    w = np.array([float(p[1]) for p in pairs]) * vec.idf[idx]
    w /= math.sqrt(float(np.dot(w, w)))
    from bioling.vectorizer import SparseVector
    scaled = SparseVector(idx, w)
    other = vec.encode("breast cancer")
    assert scaled.dot(other) == pytest.approx(base.dot(other), abs=1e-12)


def test_equality_and_determinism():
    corpus = ["lung cancer", "breast cancer", "tumor"]
    a = NgramVectorizer.fit(corpus, min_df=1)
    b = NgramVectorizer.fit(corpus, min_df=1)
    assert a == b
    assert a != NgramVectorizer.fit(corpus[:2], min_df=1)
