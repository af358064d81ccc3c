import json

import pytest

from lexclass.corpus import (
    Corpus,
    Judgement,
    LabelAssignment,
    corpus_stats,
    dump_corpus,
    load_corpus,
    parse_corpus,
    serialize_corpus,
)
from lexclass.errors import CorpusError

SOCIAL = {"order": "social", "categories": ["derecho del trabajo", "despido", "improcedente"]}
PENAL = {"order": "penal", "categories": ["derecho penal", "robo", "hurto"]}


def record(doc_id, labels=(SOCIAL,), **extra):
    return json.dumps({"id": doc_id, "text": "texto", "labels": list(labels), **extra})


def test__parse_corpus_keeps_order():
    corpus = parse_corpus([record("b"), "", record("a", (SOCIAL, PENAL), gin="1" * 19)])
    assert [d.id for d in corpus] == ["b", "a"]
    assert corpus[1].gin == "1" * 19
    assert len(corpus[1].label_set) == 2


@pytest.mark.parametrize(
    "line, message",
    [
        ("{not json", "line 1"),
        (json.dumps({"id": "x", "text": "t"}), "labels"),
        (record("x", ()), "label set size"),
        (record("x", (SOCIAL, SOCIAL)), "duplicate label"),
        (record("x", ({"order": "maritime", "categories": ["a", "b", "c"]},)), "substantive order"),
        (record("x", ({"order": "civil", "categories": ["a", "b"]},)), "exactly 3"),
        (record("x", gin="123"), "19 decimal digits"),
    ],
)
def test__parse_corpus_rejects(line, message):
    with pytest.raises(CorpusError, match=message):
        parse_corpus([line])


def test__duplicate_id_names_both_lines():
    with pytest.raises(CorpusError, match="line 2: duplicate id 'a' \\(first seen on line 1\\)"):
        parse_corpus([record("a"), record("a")])


def test__empty_corpus():
    with pytest.raises(CorpusError, match="empty"):
        parse_corpus(["", "  "])


def test__label_identity_ignores_case_and_spacing():
    a = LabelAssignment("Social", ["Derecho  del trabajo", "despido", "x"])
    b = LabelAssignment("social", ["derecho del trabajo", "DESPIDO", "x"])
    assert a == b
    assert len({a, b}) == 1
    assert a.order == "Social"


def test__serialize_then_parse(tmp_path):
    corpus = parse_corpus([record("1", (SOCIAL, PENAL), gin="0" * 19), record("2")])
    file_path = str(tmp_path / "corpus.jsonl")
    dump_corpus(corpus, file_path)
    assert load_corpus(file_path) == corpus
    assert serialize_corpus(corpus).count("\n") == 2


def test__load_missing_file(tmp_path):
    with pytest.raises(CorpusError, match="not found"):
        load_corpus(str(tmp_path / "missing.jsonl"))


def test__corpus_stats():
    corpus = parse_corpus([record("1", (SOCIAL, PENAL)), record("2"), record("3", (PENAL,))])
    stats = corpus_stats(corpus)
    assert stats.label_set_size_histogram == {1: 2, 2: 1}
    assert stats.label_cardinality == pytest.approx(4 / 3)
    assert stats.class_count == 2


def test__find_by_id_then_position():
    corpus = Corpus(
        (
            Judgement("a", "t", annotations=(LabelAssignment.from_dict(SOCIAL),)),
            Judgement("b", "t", annotations=(LabelAssignment.from_dict(PENAL),)),
        )
    )
    assert corpus.find("b").id == "b"
    assert corpus.find(0).id == "a"
    with pytest.raises(CorpusError):
        corpus.find("zzz")
