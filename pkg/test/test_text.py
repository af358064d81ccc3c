import pytest
from hypothesis import given, strategies as st

from lexclass.errors import ConfigError
from lexclass.text import TextProcessor, clean, lemmatize, load_lemma_lexicon, remove_stopwords, tokenize


@pytest.mark.parametrize(
    "text, expected",
    [
        ("Ver  https://x.y/z.\tFin.", "ver fin"),
        ("Artículo 5º, apartado 2ª.", "artículo 5º apartado 2ª"),
        ("«SENTENCIA»\x0cnº 12/2019", "sentencia nº 12 2019"),
        ("www.poderjudicial.es y más", "y más"),
        ("", ""),
    ],
)
def test__clean(text, expected):
    assert clean(text) == expected


@given(st.text(alphabet=st.characters(max_codepoint=0x24F)))
def test__clean_is_idempotent(text):
    assert clean(clean(text)) == clean(text)


def test__stopwords_and_lemmas():
    tokens = tokenize(clean("Los recursos de la parte"))
    assert remove_stopwords(tokens, {"los", "de", "la"}) == ["recursos", "parte"]
    stream = lemmatize(["recursos", "parte"], {"recursos": "recurso"}, "doc-1")
    assert stream.tokens == ("recurso", "parte")
    assert stream.source_id == "doc-1"


def test__processor_with_bundled_lexica(resources):
    stream = resources.text.process("Las SENTENCIAS de los Tribunales, y sus recursos.", "7")
    assert stream.tokens == ("sentencia", "tribunal", "recurso")
    assert len(stream) == 3


def test__lemma_lexicon_needs_two_columns(tmp_path):
    lexicon = tmp_path / "lemmas.tsv"
    lexicon.write_text("recursos\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="at least 2"):
        load_lemma_lexicon(str(lexicon))


def test__missing_lexica_directory(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        TextProcessor.from_directory(str(tmp_path))
