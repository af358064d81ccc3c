import re
from collections import Counter
from dataclasses import dataclass, field, replace
from os import path

import jellyfish

from lexclass.corpus import Corpus
from lexclass.errors import ConfigError
from lexclass.logger import logger
from lexclass.utils import fold, phrase_pattern, read_lines, read_tsv

TAGS = ("@Judge", "@Attorney", "@Lawyer", "@Corporate", "@Person")
# Lower rank wins when several lexica claim the same text.
TAG_PRECEDENCE = {tag: rank for rank, tag in enumerate(TAGS)}

TITLE = "title"
HONORIFIC = "honorific"
CORPORATE = "corporate"
NAME = "name"

TITLES_FILE = "titles.tsv"
IMPLICIT_REFS_FILE = "implicit_refs.tsv"
CORPORATE_FORMS_FILE = "corporate_forms.txt"
FIRST_NAMES_FILE = "first_names.txt"
SURNAMES_FILE = "surnames.txt"
ROLE_REGISTRY_FILE = "role_registry.tsv"

DEFAULT_THRESHOLD = 0.90
# Capitalised tokens swallowed to the left of a corporate form.
MAX_COMPANY_TOKENS = 6

WORD = r"[^\W\d_][\w'\-]*"
NEXT_WORD_RE = re.compile(r"[ \t]+(" + WORD + r")")
PREV_WORD_RE = re.compile(r"(" + WORD + r")(,?[ \t]+)$")
TAG_AHEAD_RE = re.compile(r"[ \t]*@[A-Z]\w*")
TOKEN_RE = re.compile(WORD)


@dataclass(frozen=True)
class ReferenceSpan:
    start: int
    end: int
    tag: str
    surface: str
    kind: str = NAME
    names: tuple = ()


@dataclass
class AnonymisationReport:
    counts: dict = field(default_factory=lambda: {tag: 0 for tag in TAGS})
    replaced_names: list = field(default_factory=list)

    def merge(self, other):
        for tag, count in other.counts.items():
            self.counts[tag] = self.counts.get(tag, 0) + count
        self.replaced_names.extend(other.replaced_names)
        return self

    def to_dict(self):
        return {
            "counts": dict(self.counts),
            "replaced_names": [list(pair) for pair in self.replaced_names],
        }


class AnonymiserLexica:
    """Trigger lexica, name lexica and the local role registry.

    Args:
        titles (dict): personal title -> tag (e.g. "magistrado" -> "@Judge").
        implicit_refs (dict): honorific / implicit reference -> tag.
        corporate_forms (list[str]): legal forms such as "S.L.".
        first_names (iterable[str]), surnames (iterable[str]): name lexica.
        role_registry (dict, optional): known name -> tag, overriding detection.
    """

    def __init__(self, titles, implicit_refs, corporate_forms, first_names, surnames, role_registry=None):
        for source, mapping in ((TITLES_FILE, titles), (IMPLICIT_REFS_FILE, implicit_refs)):
            for trigger, tag in mapping.items():
                if tag not in TAGS:
                    raise ConfigError(f"{source}: unknown tag {tag!r} for {trigger!r}")
        role_registry = role_registry or {}
        for name, tag in role_registry.items():
            if tag not in TAGS:
                raise ConfigError(f"{ROLE_REGISTRY_FILE}: unknown tag {tag!r} for {name!r}")

        self.first_names = frozenset(fold(n) for n in first_names)
        self.surnames = frozenset(fold(n) for n in surnames)
        self.role_registry = {fold(" ".join(n.split())): t for n, t in role_registry.items()}

        self.triggers = []
        for trigger, tag in titles.items():
            self.triggers.append((re.compile(phrase_pattern(trigger), re.IGNORECASE), tag, TITLE))
        for trigger, tag in implicit_refs.items():
            self.triggers.append((re.compile(phrase_pattern(trigger), re.IGNORECASE), tag, HONORIFIC))
        for form in corporate_forms:
            self.triggers.append(
                (re.compile(phrase_pattern(form), re.IGNORECASE), "@Corporate", CORPORATE)
            )

    @classmethod
    def from_directory(cls, lexica_dir):
        def mapping(file_name, default_tag=None):
            rows = read_tsv(path.join(lexica_dir, file_name), min_cols=1 if default_tag else 2, max_cols=2)
            return {trigger: tag or default_tag for trigger, tag in rows}

        registry_path = path.join(lexica_dir, ROLE_REGISTRY_FILE)
        lexica = cls(
            titles=mapping(TITLES_FILE),
            implicit_refs=mapping(IMPLICIT_REFS_FILE, default_tag="@Person"),
            corporate_forms=read_lines(path.join(lexica_dir, CORPORATE_FORMS_FILE)),
            first_names=read_lines(path.join(lexica_dir, FIRST_NAMES_FILE)),
            surnames=read_lines(path.join(lexica_dir, SURNAMES_FILE)),
            role_registry=dict(read_tsv(registry_path, min_cols=2)) if path.isfile(registry_path) else {},
        )
        logger.debug(
            f"Anonymiser lexica: {len(lexica.triggers)} triggers, "
            f"{len(lexica.first_names)} first names, {len(lexica.surnames)} surnames"
        )
        return lexica

    def is_name(self, token):
        key = fold(token)
        return key in self.first_names or key in self.surnames


def _capitalised(token):
    return token[:1].isupper()


# Detection
# ---------------------------------------------------------------------------- #


def detect_references(text, lexica):
    """Trigger spans of titles, implicit references and corporate forms.

    Left to right, longest match first; at equal extent the tag precedence
    @Judge > @Attorney > @Lawyer > @Corporate > @Person decides. The result
    is non-overlapping.
    """
    candidates = []
    for pattern, tag, kind in lexica.triggers:
        for match in pattern.finditer(text):
            candidates.append((match.start(), -(match.end() - match.start()), TAG_PRECEDENCE[tag], match, tag, kind))
    candidates.sort(key=lambda c: c[:3])

    spans = []
    covered_until = 0
    for start, _, _, match, tag, kind in candidates:
        if start < covered_until:
            continue
        spans.append(ReferenceSpan(start, match.end(), tag, match.group(0), kind))
        covered_until = match.end()
    return spans


def _names_right(text, pos, lexica, limit):
    """Name tokens directly to the right of 'pos': (end, [tokens])."""
    names = []
    end = pos
    while True:
        match = NEXT_WORD_RE.match(text, end)
        if not match or match.start(1) >= limit:
            break
        token = match.group(1)
        if not (_capitalised(token) and lexica.is_name(token)):
            break
        names.append(token)
        end = match.end(1)
    return end, names


def _tokens_left(text, pos, accept, floor, max_tokens=None):
    """Tokens directly to the left of 'pos' accepted by 'accept': (start, [tokens])."""
    tokens = []
    start = pos
    while max_tokens is None or len(tokens) < max_tokens:
        match = PREV_WORD_RE.search(text, floor, start)
        if not match or not accept(match.group(1)):
            break
        tokens.insert(0, match.group(1))
        start = match.start(1)
    return start, tokens


def expand_names(text, spans, lexica):
    """Grow trigger spans over adjacent names and add standalone-name spans.

    - A title followed by honorifics and/or names moves onto them: the title
      word stays in the text, the honorific and the names get the title's tag.
      A title directly followed by a tag is already anonymised and is dropped.
    - An honorific not claimed by a title covers the names after it (@Person);
      with no names after it, it is dropped.
    - A corporate form grows leftward over the capitalised company name.
    - Any other run of capitalised lexicon names, a lone first name or
      surname included, becomes an @Person span.
    Spans are then re-tagged from the role registry.
    """
    spans = sorted(spans, key=lambda s: s.start)
    expanded = []
    i = 0
    while i < len(spans):
        span = spans[i]
        limit = spans[i + 1].start if i + 1 < len(spans) else len(text)

        if span.kind == TITLE:
            if TAG_AHEAD_RE.match(text, span.end):
                i += 1
                continue
            # Honorifics right after the title belong to it.
            start = None
            end = span.end
            j = i + 1
            while j < len(spans) and spans[j].kind == HONORIFIC and not text[end : spans[j].start].strip():
                start = spans[j].start if start is None else start
                end = spans[j].end
                j += 1
            next_limit = spans[j].start if j < len(spans) else len(text)
            end, names = _names_right(text, end, lexica, next_limit)
            if names or start is not None:
                if start is None:
                    start = text.index(names[0], span.end)
                expanded.append(
                    ReferenceSpan(start, end, span.tag, text[start:end], NAME, tuple(names))
                )
            else:
                expanded.append(span)
            i = j
            continue

        if span.kind == HONORIFIC:
            end, names = _names_right(text, span.end, lexica, limit)
            if names:
                expanded.append(
                    ReferenceSpan(span.start, end, span.tag, text[span.start : end], NAME, tuple(names))
                )
            i += 1
            continue

        # Corporate form.
        floor = expanded[-1].end if expanded else 0
        start, company = _tokens_left(text, span.start, _capitalised, floor, MAX_COMPANY_TOKENS)
        expanded.append(
            ReferenceSpan(start, span.end, span.tag, text[start : span.end], CORPORATE, tuple(company))
        )
        i += 1

    expanded.extend(_standalone_names(text, expanded, lexica))
    expanded.sort(key=lambda s: s.start)
    return [_registry_tag(span, lexica) for span in expanded]


def _standalone_names(text, spans, lexica):
    covered = [(s.start, s.end) for s in spans]
    found = []
    run = []

    def flush():
        if run:
            start, end = run[0].start(), run[-1].end()
            names = tuple(m.group(0) for m in run)
            found.append(ReferenceSpan(start, end, "@Person", text[start:end], NAME, names))
        run.clear()

    for match in TOKEN_RE.finditer(text):
        token = match.group(0)
        if any(a < match.end() and match.start() < b for a, b in covered):
            flush()
            continue
        adjacent = run and not text[run[-1].end() : match.start()].strip(" \t")
        if _capitalised(token) and lexica.is_name(token):
            if run and not adjacent:
                flush()
            run.append(match)
        else:
            flush()
    flush()
    return found


def _registry_tag(span, lexica):
    if not span.names or not lexica.role_registry:
        return span
    tag = lexica.role_registry.get(fold(" ".join(span.names)))
    return replace(span, tag=tag) if tag and tag != span.tag else span


# Name unification
# ---------------------------------------------------------------------------- #


def jaro(a, b):
    """Jaro similarity in [0, 1] (jellyfish implementation)."""
    if a == b:
        return 1.0
    if not a or not b:
        return 0.0
    return jellyfish.jaro_similarity(a, b)


def unify_names(names, threshold=DEFAULT_THRESHOLD):
    """Group similar names and map every member to its group's canonical form.

    Below a threshold of 1 names are compared case- and accent-insensitively;
    at 1 only identical strings are grouped. Groups are the single-link
    closure of pairs with `jaro >= threshold`; the canonical form is the most
    frequent member, ties broken lexicographically.

    Args:
        names (list[str]): Occurrences (repetitions count as frequency).
        threshold (float): Similarity threshold in (0, 1].

    Returns:
        dict: name -> canonical name.
    """
    if not 0 < threshold <= 1:
        raise ConfigError(f"anonymiser.threshold: must be in (0, 1], got {threshold}")
    frequency = Counter(names)
    distinct = sorted(frequency)
    keys = distinct if threshold == 1 else [fold(n) for n in distinct]

    parent = list(range(len(distinct)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(distinct)):
        for j in range(i + 1, len(distinct)):
            if find(i) != find(j) and jaro(keys[i], keys[j]) >= threshold:
                parent[find(j)] = find(i)

    groups = {}
    for i, name in enumerate(distinct):
        groups.setdefault(find(i), []).append(name)

    mapping = {}
    for members in groups.values():
        canonical = min(members, key=lambda n: (-frequency[n], n))
        for name in members:
            mapping[name] = canonical
    return mapping


# Replacement
# ---------------------------------------------------------------------------- #


def _spans_for(text, lexica):
    return expand_names(text, detect_references(text, lexica), lexica)


def _replace(text, spans):
    out = []
    last = 0
    for span in spans:
        out.append(text[last : span.start])
        out.append(span.tag)
        last = span.end
    out.append(text[last:])
    return "".join(out)


def _report(spans, canonical):
    report = AnonymisationReport()
    for span in spans:
        report.counts[span.tag] += 1
        if span.names:
            name = " ".join(span.names)
            report.replaced_names.append((name, canonical.get(name, name)))
    return report


def anonymize(text, lexica, threshold=DEFAULT_THRESHOLD):
    """Replace references to people and companies by role tags.

    Returns:
        tuple: (anonymised text, AnonymisationReport)
    """
    spans = _spans_for(text, lexica)
    canonical = unify_names([" ".join(s.names) for s in spans if s.names], threshold)
    return _replace(text, spans), _report(spans, canonical)


def anonymize_corpus(corpus, lexica, threshold=DEFAULT_THRESHOLD):
    """Anonymise every document, unifying name variants across the corpus.

    Detection runs per document; unification is one corpus-wide pass.

    Returns:
        tuple: (Corpus, AnonymisationReport) the anonymised corpus and the
            aggregated report.
    """
    spans_per_doc = [_spans_for(doc.raw_text, lexica) for doc in corpus]
    all_names = [" ".join(s.names) for spans in spans_per_doc for s in spans if s.names]
    canonical = unify_names(all_names, threshold)

    documents = []
    report = AnonymisationReport()
    for doc, spans in zip(corpus, spans_per_doc):
        documents.append(replace(doc, raw_text=_replace(doc.raw_text, spans)))
        report.merge(_report(spans, canonical))

    logger.info(
        "Anonymised corpus: "
        + ", ".join(f"{tag} {count}" for tag, count in report.counts.items())
        + f"; {len(set(canonical.values()))} distinct names"
    )
    return Corpus(tuple(documents)), report
