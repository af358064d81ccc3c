import os

import pytest

from lexclass.errors import ConfigError
from lexclass.utils import atomic_write, fold, lexicon_regex, matched_entry, read_lines, read_tsv
from lexclass.utils.hash import derive_seed, fingerprint, hash_string


@pytest.mark.parametrize(
    "method, expected",
    [
        ("sha256", "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"),
        ("md5", "900150983cd24fb0d6963f7d28e17f72"),
    ],
)
def test__hash_string(method, expected):
    assert hash_string("abc", method) == expected
    assert hash_string("abc", method, length=8) == expected[:8]


def test__hash_string_unknown_method():
    with pytest.raises(ValueError, match="Invalid hash method"):
        hash_string("abc", "crc32")


def test__fingerprint():
    assert fingerprint("abc") == "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


def test__derive_seed():
    seed = derive_seed(0, "doc", 17)
    assert seed == derive_seed(0, "doc", "17")
    assert 0 <= seed < 2 ** 63
    assert seed != derive_seed(1, "doc", 17)
    assert seed != derive_seed(0, "doc", 18)


@pytest.mark.parametrize(
    "text, expected",
    [("Sentencia", "sentencia"), ("SUPLICACIÓN", "suplicacion"), ("Nº", "nº"), ("Dª. Pérez", "dª. perez")],
)
def test__fold(text, expected):
    assert fold(text) == expected


def test__read_lines_and_tsv(tmp_path):
    file_path = tmp_path / "lexicon.tsv"
    file_path.write_text("# comment\n\nfiscal\t@Attorney\nponente\n", encoding="utf-8")
    assert read_lines(str(file_path)) == ["fiscal\t@Attorney", "ponente"]
    assert read_tsv(str(file_path), 1, 2) == [("fiscal", "@Attorney"), ("ponente", None)]
    with pytest.raises(ConfigError, match="entry 2 needs at least 2"):
        read_tsv(str(file_path), 2)
    with pytest.raises(ConfigError, match="not found"):
        read_lines(str(tmp_path / "missing.txt"))


def test__lexicon_regex_prefers_longest():
    pattern, entries = lexicon_regex(["recurso", "recurso de suplicación"])
    match = pattern.search("Visto el Recurso  de Suplicación nº 12")
    assert match.group(0) == "Recurso  de Suplicación"
    assert matched_entry(match, entries) == "recurso de suplicación"
    assert pattern.search("recursos") is None
    assert lexicon_regex([]) == (None, [])


def test__atomic_write(tmp_path):
    file_path = str(tmp_path / "out" / "file.txt")
    atomic_write(file_path, "uno\n")
    atomic_write(file_path, "dos\n")
    with open(file_path, encoding="utf-8") as f:
        assert f.read() == "dos\n"
    assert os.listdir(tmp_path / "out") == ["file.txt"]
