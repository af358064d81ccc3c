import json
import re
from collections import Counter
from dataclasses import dataclass, field
from os import path

from lexclass.errors import CorpusError
from lexclass.logger import logger
from lexclass.utils import atomic_write

SUBSTANTIVE_ORDERS = (
    "penal",
    "civil",
    "social",
    "administrative",
    "civil/mercantile",
    "mercantile",
    "tributary",
)

GIN_RE = re.compile(r"[0-9]{19}")

MAX_LABELS = 3


def _normalise(value):
    return " ".join(value.split()).casefold()


class LabelAssignment:
    """One class λ: a substantive order plus exactly three law categories.

    Strings are kept verbatim for display. Identity, hashing and ordering use
    `key`, the case-folded, whitespace-normalised `order|cat1|cat2|cat3`.
    """

    __slots__ = ("order", "categories", "key")

    def __init__(self, order, categories):
        if not isinstance(order, str) or _normalise(order) not in SUBSTANTIVE_ORDERS:
            raise CorpusError(
                f"Unknown substantive order {order!r}; expected one of {', '.join(SUBSTANTIVE_ORDERS)}"
            )
        categories = tuple(categories)
        if len(categories) != 3:
            raise CorpusError(
                f"A label assignment needs exactly 3 law categories, got {len(categories)}"
            )
        if any(not isinstance(c, str) or not c.strip() for c in categories):
            raise CorpusError(f"Empty law category in {categories!r}")
        self.order = order.strip()
        self.categories = tuple(c.strip() for c in categories)
        self.key = "|".join(_normalise(v) for v in (self.order, *self.categories))

    def __eq__(self, other):
        return isinstance(other, LabelAssignment) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return f"LabelAssignment({self.key!r})"

    def to_dict(self):
        return {"order": self.order, "categories": list(self.categories)}

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "order" not in data or "categories" not in data:
            raise CorpusError(f"Label must be an object with 'order' and 'categories': {data!r}")
        return cls(data["order"], data["categories"])


@dataclass(frozen=True)
class Judgement:
    id: str
    raw_text: str
    gin: str = None
    annotations: tuple = ()

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise CorpusError("Document id must be a nonempty string")
        if not isinstance(self.raw_text, str):
            raise CorpusError(f"Document '{self.id}': text must be a string")
        if self.gin is not None and not (isinstance(self.gin, str) and GIN_RE.fullmatch(self.gin)):
            raise CorpusError(f"Document '{self.id}': gin must be exactly 19 decimal digits")
        annotations = tuple(self.annotations)
        object.__setattr__(self, "annotations", annotations)
        if not 1 <= len(annotations) <= MAX_LABELS:
            raise CorpusError(
                f"Document '{self.id}': label set size out of [1,{MAX_LABELS}] ({len(annotations)})"
            )
        if len(set(annotations)) != len(annotations):
            raise CorpusError(f"Document '{self.id}': duplicate label assignment")

    @property
    def label_set(self):
        return frozenset(self.annotations)

    def to_dict(self):
        record = {"id": self.id, "text": self.raw_text}
        if self.gin is not None:
            record["gin"] = self.gin
        record["labels"] = [a.to_dict() for a in self.annotations]
        return record

    @classmethod
    def from_dict(cls, record):
        if not isinstance(record, dict):
            raise CorpusError("Record must be an object")
        for key in ("id", "text", "labels"):
            if key not in record:
                raise CorpusError(f"Record is missing field '{key}'")
        if not isinstance(record["labels"], list):
            raise CorpusError("Field 'labels' must be an array")
        return cls(
            id=record["id"],
            raw_text=record["text"],
            gin=record.get("gin"),
            annotations=tuple(LabelAssignment.from_dict(l) for l in record["labels"]),
        )


@dataclass(frozen=True)
class Corpus:
    documents: tuple = field(default_factory=tuple)

    def __post_init__(self):
        documents = tuple(self.documents)
        object.__setattr__(self, "documents", documents)
        if not documents:
            raise CorpusError("Corpus is empty")
        seen = set()
        for doc in documents:
            if doc.id in seen:
                raise CorpusError(f"Duplicate document id: {doc.id}")
            seen.add(doc.id)

    @property
    def n(self):
        return len(self.documents)

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __getitem__(self, item):
        return self.documents[item]

    @property
    def label_sets(self):
        return [doc.label_set for doc in self.documents]

    def subset(self, indices):
        return Corpus(tuple(self.documents[i] for i in indices))

    def find(self, sample):
        """Return the document whose id is 'sample', else the one at position 'sample'."""
        sample = str(sample)
        for doc in self.documents:
            if doc.id == sample:
                return doc
        if sample.lstrip("-").isdigit() and -self.n <= int(sample) < self.n:
            return self.documents[int(sample)]
        raise CorpusError(f"No document with id or position {sample!r}")


@dataclass(frozen=True)
class CorpusStats:
    label_set_size_histogram: dict
    label_cardinality: float
    class_count: int


def parse_corpus(lines, source="<corpus>"):
    """Parse line-delimited JSON records into a `Corpus`.

    Blank lines are skipped; every other line must be one document.

    Raises:
        CorpusError: On malformed records, duplicate ids or an empty input.
            The message names the line number.
    """
    documents = []
    seen = {}
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorpusError(f"{source}: line {i}: not a valid JSON record ({e.msg})")
        try:
            doc = Judgement.from_dict(record)
        except CorpusError as e:
            raise CorpusError(f"{source}: line {i}: {e}")
        if doc.id in seen:
            raise CorpusError(
                f"{source}: line {i}: duplicate id '{doc.id}' (first seen on line {seen[doc.id]})"
            )
        seen[doc.id] = i
        documents.append(doc)

    if not documents:
        raise CorpusError(f"{source}: corpus is empty")
    return Corpus(tuple(documents))


def load_corpus(file_path):
    """Load and validate a corpus file (one JSON document per line, UTF-8).

    Each record has fields `id` (str), `text` (str), `gin` (optional str) and
    `labels` (array of `{order, categories[3]}`). Order is preserved.

    Args:
        file_path (str): Path of the corpus file.

    Returns:
        Corpus: Validated corpus.
    """
    if not path.isfile(file_path):
        raise CorpusError(f"Corpus file not found: {file_path}")
    with open(file_path, encoding="utf-8") as f:
        corpus = parse_corpus(f, source=file_path)
    logger.info(f"Loaded {corpus.n} documents from '{file_path}'")
    return corpus


def serialize_corpus(corpus):
    """Inverse of `parse_corpus`: one compact JSON object per line."""
    return "".join(
        json.dumps(doc.to_dict(), ensure_ascii=False, separators=(",", ":")) + "\n"
        for doc in corpus
    )


def dump_corpus(corpus, file_path):
    atomic_write(file_path, serialize_corpus(corpus))
    logger.info(f"Wrote {corpus.n} documents to '{file_path}'")
    return file_path


def corpus_stats(corpus):
    """Label-set size histogram, label cardinality and number of distinct classes."""
    sizes = Counter(len(doc.annotations) for doc in corpus)
    classes = {a for doc in corpus for a in doc.annotations}
    cardinality = sum(size * count for size, count in sizes.items()) / corpus.n
    return CorpusStats(
        label_set_size_histogram=dict(sorted(sizes.items())),
        label_cardinality=cardinality,
        class_count=len(classes),
    )
