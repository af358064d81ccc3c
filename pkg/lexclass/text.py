import re
import unicodedata
from dataclasses import dataclass
from os import path

from lexclass.errors import ConfigError
from lexclass.logger import logger
from lexclass.utils import read_lines, read_tsv

STOPWORDS_FILE = "stopwords.txt"
LEMMAS_FILE = "lemmas.tsv"

# Scheme-prefixed maximal non-space runs.
URL_RE = re.compile(r"(?:https?://|www\.)\S*", re.IGNORECASE)
SPACES_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class TokenStream:
    tokens: tuple
    source_id: str = ""

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def _blank(char):
    category = unicodedata.category(char)
    # Control/format characters (page breaks, tab stops) and punctuation.
    return category in ("Cc", "Cf", "Zl", "Zp") or category.startswith("P")


def clean(text):
    """Remove URLs, control characters and punctuation, lowercase and squeeze spaces.

    Ordinal indicators (`º`, `ª`) are letters and survive. The function is
    idempotent.

    Example:
        "Ver  https://x.y/z.\\tFin." -> "ver fin"
    """
    text = unicodedata.normalize("NFC", text)
    text = URL_RE.sub(" ", text)
    text = "".join(" " if _blank(c) else c for c in text)
    return SPACES_RE.sub(" ", text.lower()).strip()


def tokenize(text):
    return text.split()


def remove_stopwords(tokens, stoplist):
    return [t for t in tokens if t not in stoplist]


def lemmatize(tokens, lemma_lexicon, source_id=""):
    """Replace each token by its lexicon lemma; unknown forms pass through."""
    return TokenStream(tuple(lemma_lexicon.get(t, t) for t in tokens), source_id)


def load_stoplist(file_path):
    """One stop-word per line. A missing file is a configuration error."""
    return frozenset(clean(w) for w in read_lines(file_path) if clean(w))


def load_lemma_lexicon(file_path):
    """Tab-separated `form<TAB>lemma` pairs."""
    lexicon = {}
    for form, lemma in read_tsv(file_path, min_cols=2):
        if lemma is None:
            raise ConfigError(f"{file_path}: empty lemma for form {form!r}")
        lexicon[clean(form)] = clean(lemma)
    return lexicon


class TextProcessor:
    """Clean → tokenize → stop-word removal → lemmatisation with loaded lexica."""

    def __init__(self, stoplist, lemma_lexicon):
        self.stoplist = frozenset(stoplist)
        self.lemma_lexicon = dict(lemma_lexicon)

    @classmethod
    def from_directory(cls, lexica_dir):
        processor = cls(
            load_stoplist(path.join(lexica_dir, STOPWORDS_FILE)),
            load_lemma_lexicon(path.join(lexica_dir, LEMMAS_FILE)),
        )
        logger.debug(
            f"Text lexica: {len(processor.stoplist)} stop-words, "
            f"{len(processor.lemma_lexicon)} lemma forms"
        )
        return processor

    def process(self, text, source_id=""):
        tokens = remove_stopwords(tokenize(clean(text)), self.stoplist)
        return lemmatize(tokens, self.lemma_lexicon, source_id)
