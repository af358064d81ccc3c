import os
import re
import tempfile
import unicodedata
from os import path

from lexclass.errors import ConfigError

# Directory of the lexica bundled with the package.
BUNDLED_LEXICA = path.join(path.dirname(path.dirname(path.abspath(__file__))), "lexica")


def fold(text):
    """NFC-normalise, lowercase and strip diacritics. Used for matching only."""
    decomposed = unicodedata.normalize("NFD", text.lower())
    stripped = "".join(c for c in decomposed if not unicodedata.combining(c))
    return unicodedata.normalize("NFC", stripped)


def read_lines(file_path):
    """Read a one-entry-per-line UTF-8 lexicon.

    Blank lines and lines starting with '#' are skipped.

    Raises:
        ConfigError: If the file does not exist.
    """
    if not path.isfile(file_path):
        raise ConfigError(f"Lexicon file not found: {file_path}")
    with open(file_path, encoding="utf-8") as f:
        return [
            line.rstrip("\n").strip()
            for line in f
            if line.strip() and not line.lstrip().startswith("#")
        ]


def read_tsv(file_path, min_cols=1, max_cols=None):
    """Read a tab-separated lexicon into a list of tuples.

    Rows shorter than 'max_cols' are padded with None.

    Raises:
        ConfigError: If the file is missing or a row has too few columns.
    """
    rows = []
    max_cols = max_cols or min_cols
    for i, line in enumerate(read_lines(file_path), start=1):
        cells = [c.strip() for c in line.split("\t")]
        if len(cells) < min_cols:
            raise ConfigError(
                f"{file_path}: entry {i} needs at least {min_cols} tab-separated columns: {line!r}"
            )
        cells = cells[:max_cols] + [None] * (max_cols - len(cells))
        rows.append(tuple(c or None for c in cells))
    return rows


def phrase_pattern(phrase):
    """Regex source matching 'phrase' with flexible inner whitespace and word edges."""
    words = [re.escape(w) for w in phrase.split()]
    return r"(?<!\w)" + r"\s+".join(words) + r"(?!\w)"


def lexicon_regex(phrases, flags=re.IGNORECASE, suffix=""):
    """Compile an alternation of 'phrases', longest first.

    Python's regex engine returns the leftmost match and, at equal position, the
    first alternative that matches; ordering by length gives longest-match.

    Args:
        phrases (iterable[str]): Lexicon entries.
        flags (int, optional): Regex flags. Defaults to re.IGNORECASE.
        suffix (str, optional): Pattern appended after the alternation.

    Returns:
        tuple: (re.Pattern|None, list[str]) the compiled pattern and the entries
            in group order. The pattern is None if 'phrases' is empty.
    """
    unique = sorted(set(p for p in phrases if p), key=lambda p: (-len(p), p))
    if not unique:
        return None, []
    alternation = "|".join(f"({phrase_pattern(p)})" for p in unique)
    return re.compile(f"(?:{alternation}){suffix}", flags), unique


def atomic_write(file_path, content, encoding="utf-8"):
    """Write 'content' to 'file_path' through a temporary file and a rename."""
    directory = path.dirname(path.abspath(file_path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=path.basename(file_path))
    try:
        with os.fdopen(fd, "w", encoding=encoding, newline="") as f:
            f.write(content)
        os.replace(tmp_path, file_path)
    except BaseException:
        if path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    return file_path


def matched_entry(match, entries):
    """Return the lexicon entry whose alternative produced 'match'."""
    groups = match.groups()
    for i, entry in enumerate(entries):
        if groups[i] is not None:
            return entry
    return None
