import re

import numpy as np
import pytest

from lexclass.anonymiser import (
    AnonymiserLexica,
    anonymize,
    anonymize_corpus,
    detect_references,
    expand_names,
    jaro,
    unify_names,
)
from lexclass.corpus import Corpus, Judgement, LabelAssignment
from lexclass.errors import ConfigError

LABEL = LabelAssignment("civil", ("derecho civil", "contratos", "arrendamientos"))

TEXTS = [
    ("El Magistrado D. Juan García López dictó sentencia.", "El Magistrado @Judge dictó sentencia."),
    ("frente a la empresa Construcciones Levante S.L. por despido", "frente a la empresa @Corporate por despido"),
    ("Comparece José Martín Gómez en nombre propio.", "Comparece @Person en nombre propio."),
    ("asistido por la Letrada Dña. Carmen Díaz Moreno, y", "asistido por la Letrada @Lawyer, y"),
    ("El juez dictó auto.", "El @Judge dictó auto."),
    ("La señora compareció sola.", "La señora compareció sola."),
    ("demanda de don Pedro Sánchez Ruiz", "demanda de @Person"),
    (
        "El Magistrado D. Juan Pérez falló. Después Pérez declaró y Juan calló.",
        "El Magistrado @Judge falló. Después @Person declaró y @Person calló.",
    ),
]


@pytest.mark.parametrize("text, expected", TEXTS)
def test__anonymize(text, expected, anonymiser_lexica):
    result, _ = anonymize(text, anonymiser_lexica)
    assert result == expected


@pytest.mark.parametrize("text", [t for t, _ in TEXTS])
def test__anonymize_is_idempotent(text, anonymiser_lexica):
    once, _ = anonymize(text, anonymiser_lexica)
    twice, report = anonymize(once, anonymiser_lexica)
    assert twice == once
    assert report.replaced_names == []


FIRST_NAMES = ["Juan", "María", "José", "Carmen", "Pedro", "Ana", "Luis", "Rosa", "Jesús", "Elena"]
SURNAMES = ["García", "López", "Pérez", "Martín", "Gómez", "Díaz", "Ruiz", "Sanz", "Serrano", "Rubio", "Álvarez"]
PREFIXES = ["", "El Magistrado D.", "la Letrada Dña.", "el Procurador don", "el Fiscal", "Después", "comparece", "doña"]
ENDINGS = ["declaró.", "falló.", "calló.", "compareció en nombre propio.", "interpuso recurso de suplicación."]


def constructed_texts(n, seed=0):
    """Sentences mixing titles, honorifics and runs of one to three lexicon names."""
    rng = np.random.default_rng(seed)
    texts = []
    for _ in range(n):
        sentences = []
        for _ in range(rng.integers(1, 5)):
            names = [str(rng.choice(FIRST_NAMES))] if rng.random() < 0.7 else []
            names += [str(s) for s in rng.choice(SURNAMES, size=rng.integers(0 if names else 1, 3))]
            words = [str(rng.choice(PREFIXES)), *names, str(rng.choice(ENDINGS))]
            sentence = " ".join(w for w in words if w)
            sentences.append(sentence[0].upper() + sentence[1:])
        texts.append(" ".join(sentences))
    return texts


@pytest.mark.parametrize("seed", range(4))
def test__anonymize_constructed_texts(seed, anonymiser_lexica):
    for text in constructed_texts(50, seed):
        once, _ = anonymize(text, anonymiser_lexica)
        twice, report = anonymize(once, anonymiser_lexica)
        assert twice == once, text
        assert report.replaced_names == [], text
        survivors = [t for t in re.findall(r"[^\W\d_]+", once) if t[0].isupper() and anonymiser_lexica.is_name(t)]
        assert survivors == [], text


def test__report_counts(anonymiser_lexica):
    _, report = anonymize(
        "El Magistrado D. Juan García López y el Letrado D. Pedro Ruiz Sanz ante Servicios Norte S.A.",
        anonymiser_lexica,
    )
    assert report.counts["@Judge"] == 1
    assert report.counts["@Lawyer"] == 1
    assert report.counts["@Corporate"] == 1
    assert ("Juan García López", "Juan García López") in report.replaced_names


def test__longest_trigger_wins(anonymiser_lexica):
    spans = detect_references("la Magistrada-Juez doña", anonymiser_lexica)
    assert [s.surface for s in spans] == ["Magistrada-Juez", "doña"]
    assert spans[0].tag == "@Judge"


def test__expand_names(anonymiser_lexica):
    text = "El Magistrado D. Juan García López dictó sentencia. Comparece José Martín Gómez."
    spans = expand_names(text, detect_references(text, anonymiser_lexica), anonymiser_lexica)
    assert [(s.surface, s.tag, s.names) for s in spans] == [
        ("D. Juan García López", "@Judge", ("Juan", "García", "López")),
        ("José Martín Gómez", "@Person", ("José", "Martín", "Gómez")),
    ]


def test__role_registry_retags(anonymiser_lexica):
    result, report = anonymize("declaró doña Rosa Serrano Rubio", anonymiser_lexica)
    assert result == "declaró @Judge"
    assert report.counts["@Judge"] == 1


def test__unknown_tag_in_lexicon():
    with pytest.raises(ConfigError, match="unknown tag"):
        AnonymiserLexica({"magistrado": "@Judge"}, {"don": "@Nobody"}, [], [], [])


def test__jaro():
    assert jaro("martha", "marhta") == pytest.approx(0.9444, abs=1e-4)
    assert jaro("abc", "abc") == 1.0
    assert jaro("", "abc") == 0.0


def test__unify_names_prefers_the_frequent_form():
    mapping = unify_names(["Juan García", "Juan Garcia", "Juan García", "Pedro Ruiz"])
    assert mapping["Juan Garcia"] == "Juan García"
    assert mapping["Juan García"] == "Juan García"
    assert mapping["Pedro Ruiz"] == "Pedro Ruiz"


def test__unify_names_exact_at_threshold_one():
    mapping = unify_names(["Juan García", "Juan Garcia", "juan garcía", "Juan García"], 1.0)
    assert mapping == {name: name for name in mapping}
    assert len(mapping) == 3


@pytest.mark.parametrize("threshold", [0, 1.5])
def test__unify_names_threshold(threshold):
    with pytest.raises(ConfigError, match="anonymiser.threshold"):
        unify_names(["a"], threshold)


def test__corpus_wide_unification(anonymiser_lexica):
    corpus = Corpus(
        (
            Judgement("1", "El Magistrado D. Juan García López dictó.", annotations=(LABEL,)),
            Judgement("2", "Ante el Magistrado D. Juan Garcia Lopez compareció.", annotations=(LABEL,)),
        )
    )
    anonymised, report = anonymize_corpus(corpus, anonymiser_lexica)
    assert [d.raw_text for d in anonymised] == [
        "El Magistrado @Judge dictó.",
        "Ante el Magistrado @Judge compareció.",
    ]
    canonical = {canon for _, canon in report.replaced_names}
    assert canonical == {"Juan Garcia Lopez"}
    assert anonymised[0].annotations == corpus[0].annotations


def test__no_lexicon_name_survives(synthetic_corpus, anonymiser_lexica):
    anonymised, report = anonymize_corpus(synthetic_corpus, anonymiser_lexica)
    for doc in anonymised:
        names = [t for t in re.findall(r"[^\W\d_]+", doc.raw_text) if anonymiser_lexica.is_name(t)]
        assert names == [], doc.id
    assert report.counts["@Judge"] >= len(synthetic_corpus)
    assert report.counts["@Corporate"] == len(synthetic_corpus)
