import pytest

from bioling.doc import SentenceSpan
from bioling.evals import (
    ADVERSARIAL_FAMILIES, CITATION_FAMILIES, GoldMention, RecallCurve,
    RecallPoint, make_citation_corpus, recall_at_k, segmentation_accuracy,
)
from bioling.segmenter import default_segmenter_config, segment
from bioling.tokenizer import tokenize

BASE_SENTENCES = [
    "Treatment significantly reduced tumor growth in the cohort.",
    "Expression of the receptor was elevated in affected tissue.",
    "The intervention improved survival across both study arms.",
    "Protein levels declined steadily over the observation period.",
    "Mutations in the pathway were detected in most samples.",
]


def test_gold_mention_validation():
    with pytest.raises(ValueError):
        GoldMention("", "C01")
    with pytest.raises(ValueError):
        GoldMention("tumor", "")


def test_recall_curve_lookup():
    curve = RecallCurve((RecallPoint(1, 0.5, 1.0, 1), RecallPoint(5, 0.8, 4.0, 6)))
    assert curve.recall_at(5) == 0.8
    with pytest.raises(KeyError):
        curve.recall_at(3)


def test_recall_at_k_toy(toy_index):
    gold = [
        GoldMention("lung carcinoma", "C01"),
        GoldMention("mammary carcinoma", "C02"),
        GoldMention("tumor", "C03"),
        GoldMention("completely unrelated xyzzy", "C01"),
    ]
    curve = recall_at_k(toy_index, toy_index.alias_table, gold, ks=[1, 5])
    assert curve.recall_at(1) >= 0.75
    assert curve.recall_at(5) >= curve.recall_at(1)
    p5 = curve.points[1]
    assert p5.max_candidates >= p5.mean_candidates > 0


def test_recall_monotone_in_k(toy_index):
    gold = [
        GoldMention("pulmonary cancer", "C01"),
        GoldMention("cancer", "C02"),
        GoldMention("heat shock proteins", "C04"),
        GoldMention("interleukin 2", "C05"),
    ]
    curve = recall_at_k(toy_index, toy_index.alias_table, gold, ks=[1, 2, 4, 8])
    recalls = [p.recall for p in curve.points]
    assert recalls == sorted(recalls)


def test_recall_with_expansion(toy_index):
    gold = [GoldMention("HSP", "C04")]
    expansion = {"HSP": "heat shock protein"}
    with_exp = recall_at_k(toy_index, toy_index.alias_table, gold, [1],
                           expansion=expansion)
    assert with_exp.recall_at(1) == 1.0


def test_recall_input_validation(toy_index):
    with pytest.raises(ValueError, match="gold"):
        recall_at_k(toy_index, toy_index.alias_table, [], [1])
    with pytest.raises(ValueError, match="increasing"):
        recall_at_k(toy_index, toy_index.alias_table,
                    [GoldMention("tumor", "C03")], [5, 1])


def test_segmentation_accuracy_perfect():
    docs = [segment(tokenize("One sentence. Another one."))]
    acc = segmentation_accuracy(docs, docs)
    assert acc.sentence_acc == 1.0 and acc.abstract_acc == 1.0


def test_segmentation_accuracy_partial():
    text = "First part. Second part."
    gold = segment(tokenize(text))
    assert len(gold.sentences) == 2
    pred = tokenize(text).with_sentences(
        [SentenceSpan(0, len(gold.tokens) - 1)]  # one sentence covering all
    )
    acc = segmentation_accuracy([pred, gold], [gold, gold])
    assert acc.sentence_acc == pytest.approx(0.5)
    assert acc.abstract_acc == pytest.approx(0.5)


def test_segmentation_accuracy_rejects_text_mismatch():
    a = segment(tokenize("Alpha."))
    b = segment(tokenize("Beta."))
    with pytest.raises(ValueError, match="document 0"):
        segmentation_accuracy([a], [b])


def test_segmentation_accuracy_rejects_length_mismatch():
    doc = segment(tokenize("Alpha."))
    with pytest.raises(ValueError):
        segmentation_accuracy([doc], [doc, doc])


def test_citation_corpus_deterministic():
    a = make_citation_corpus(BASE_SENTENCES, seed=5, n=50)
    b = make_citation_corpus(BASE_SENTENCES, seed=5, n=50)
    assert a == b
    c = make_citation_corpus(BASE_SENTENCES, seed=6, n=50)
    assert a != c


def test_citation_corpus_labels_and_families():
    labeled = make_citation_corpus(BASE_SENTENCES, seed=1, n=400, with_labels=True)
    families = {fam for _, fam in labeled}
    assert families == set(CITATION_FAMILIES)
    assert ADVERSARIAL_FAMILIES <= families


def test_citation_corpus_capacity_bound():
    capacity = len(BASE_SENTENCES) * len(CITATION_FAMILIES) * 99
    with pytest.raises(ValueError, match="capacity"):
        make_citation_corpus(BASE_SENTENCES, seed=0, n=capacity + 1)
    with pytest.raises(ValueError, match="empty"):
        make_citation_corpus([], seed=0, n=1)


def test_citation_corpus_sentences_differ_from_base():
    out = make_citation_corpus(BASE_SENTENCES, seed=2, n=len(BASE_SENTENCES))
    for sent, base in zip(out, BASE_SENTENCES):
        assert sent != base


def test_default_segmenter_keeps_corpus_sentences_intact():
    cfg = default_segmenter_config()
    corpus = make_citation_corpus(BASE_SENTENCES, seed=3, n=200)
    intact = sum(
        1 for sent in corpus if len(segment(tokenize(sent), cfg).sentences) == 1
    )
    assert intact / len(corpus) >= 0.95
