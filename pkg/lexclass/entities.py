import re
import unicodedata
from dataclasses import asdict, dataclass
from os import path

from lexclass.errors import ConfigError, CorpusError
from lexclass.logger import logger
from lexclass.utils import fold, lexicon_regex, matched_entry, read_lines, read_tsv

UNKNOWN = "unknown"
MULTIPLE_DECISION = "multiple decision"

JURISDICTIONS = ("civil", "contentious-administrative", "penal", "social")
RESOLUTION_TYPES = ("sentencia", "orden", "decreto")
DECISION_TYPES = ("substantive", "procedural")
INSTANCE_TYPES = ("first", "second", "third", "higher")

ENTITY_FIELDS = (
    "case_type",
    "court",
    "decision",
    "decision_type",
    "instance_type",
    "jurisdiction",
    "resolution_type",
)

CASE_TYPES_FILE = "case_types.tsv"
COURTS_FILE = "courts.txt"
DECISIONS_FILE = "decisions.tsv"
DIVISIONS_FILE = "divisions.tsv"
GIN_MAP_FILE = "gin_jurisdictions.tsv"

# Section markers, matched at the start of a line.
PLEAS_OF_FACT_RE = re.compile(
    r"^[ \t]*antecedentes\s+de\s+hecho\b", re.MULTILINE | re.IGNORECASE
)
DECISION_MARKER_RE = re.compile(
    r"^[ \t]*(?:fallo|fallamos|parte\s+dispositiva)\b", re.MULTILINE | re.IGNORECASE
)
# Case number / year next to a case-type name, e.g. "123/2019" or "nº 4567".
CASE_NUMBER = r"(?:\s*(?:n[º°o]\.?\s*)?(\d+/\d{1,4}|\d{2,}))?"
SPACED_LETTERS_RE = re.compile(r"(?<!\w)(?:[^\W\d_] ){2,}[^\W\d_](?!\w)")
RESOLUTION_RE = re.compile(r"(?<!\w)(sentencia|orden|decreto)(?!\w)")
GIN_MARKER_RE = re.compile(r"n\.?\s?i\.?\s?g\.?\s*:?\s*([0-9]{19})(?![0-9])", re.IGNORECASE)
GIN_BARE_RE = re.compile(r"(?<![0-9])([0-9]{19})(?![0-9])")

HEADING_TAIL_LINES = 3


@dataclass(frozen=True)
class GinFields:
    province: str
    court_code: str
    jurisdiction_digit: str
    year: str
    sequence: str

    @property
    def gin(self):
        return self.province + self.court_code + self.jurisdiction_digit + self.year + self.sequence


@dataclass(frozen=True)
class EntityRecord:
    case_type: str = UNKNOWN
    court: str = UNKNOWN
    decision: str = UNKNOWN
    decision_type: str = UNKNOWN
    instance_type: str = "higher"
    jurisdiction: str = UNKNOWN
    resolution_type: str = UNKNOWN

    def __post_init__(self):
        expected = decision_type_for(self.resolution_type)
        if self.decision_type != expected:
            raise CorpusError(
                f"decision_type {self.decision_type!r} inconsistent with "
                f"resolution_type {self.resolution_type!r}"
            )

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**{k: data[k] for k in ENTITY_FIELDS})


class LegalLexica:
    """Lexica driving the judicial entity detectors.

    Args:
        case_types (list[tuple]): (name, jurisdiction|None, abbreviations) rows.
        courts (list[str]): Court names, returned verbatim when matched.
        decisions (dict): keyword -> canonical decision.
        divisions (dict): judicial-division phrase -> jurisdiction.
        gin_jurisdictions (dict): GIN digit 8 -> jurisdiction.
    """

    def __init__(self, case_types, courts, decisions, divisions, gin_jurisdictions):
        self.case_type_jurisdiction = {}
        case_forms = {}
        for name, jurisdiction, abbreviations in case_types:
            _check_jurisdiction(jurisdiction, CASE_TYPES_FILE)
            self.case_type_jurisdiction[name] = jurisdiction
            case_forms[fold(name)] = name
            for abbr in (abbreviations or "").split(","):
                if abbr.strip():
                    case_forms[fold(abbr.strip())] = name
        for jurisdiction in list(divisions.values()) + list(gin_jurisdictions.values()):
            _check_jurisdiction(jurisdiction, DIVISIONS_FILE)

        self.case_forms = case_forms
        self.case_re, self.case_entries = lexicon_regex(case_forms, suffix=CASE_NUMBER)
        self.court_forms = {fold(c): c for c in courts}
        self.court_re, self.court_entries = lexicon_regex(self.court_forms)
        self.decision_forms = {fold(k): v for k, v in decisions.items()}
        self.decision_re, self.decision_entries = lexicon_regex(self.decision_forms)
        self.division_forms = {fold(k): v for k, v in divisions.items()}
        self.division_re, self.division_entries = lexicon_regex(self.division_forms)
        self.gin_jurisdictions = dict(gin_jurisdictions)

    @classmethod
    def from_directory(cls, lexica_dir):
        case_types = read_tsv(path.join(lexica_dir, CASE_TYPES_FILE), min_cols=1, max_cols=3)
        courts = read_lines(path.join(lexica_dir, COURTS_FILE))
        decisions = {
            keyword: canonical or keyword
            for keyword, canonical in read_tsv(
                path.join(lexica_dir, DECISIONS_FILE), min_cols=1, max_cols=2
            )
        }
        divisions = dict(read_tsv(path.join(lexica_dir, DIVISIONS_FILE), min_cols=2))
        gin_map = dict(read_tsv(path.join(lexica_dir, GIN_MAP_FILE), min_cols=2))
        for digit in gin_map:
            if not re.fullmatch(r"[0-9]", digit):
                raise ConfigError(f"{GIN_MAP_FILE}: key must be a single digit, got {digit!r}")
        lexica = cls(case_types, courts, decisions, divisions, gin_map)
        logger.debug(
            f"Legal lexica: {len(case_types)} case types, {len(courts)} courts, "
            f"{len(decisions)} decision keywords, {len(divisions)} divisions"
        )
        return lexica


def _check_jurisdiction(value, source):
    if value is not None and value not in JURISDICTIONS:
        raise ConfigError(f"{source}: unknown jurisdiction {value!r}")


# Section segmentation
# ---------------------------------------------------------------------------- #


def heading_section(text):
    """Text before the first pleas-of-fact marker (whole text if absent)."""
    match = PLEAS_OF_FACT_RE.search(text)
    return text[: match.start()] if match else text


def decision_section(text):
    """Text after the last decision marker line ('' if there is none)."""
    matches = list(DECISION_MARKER_RE.finditer(text))
    return text[matches[-1].end() :] if matches else ""


def heading_tail(heading, lines=HEADING_TAIL_LINES):
    nonblank = [line for line in heading.splitlines() if line.strip()]
    return "\n".join(nonblank[-lines:])


def collapse_spaced_letters(text):
    """'S E N T E N C I A' -> 'SENTENCIA'."""
    return SPACED_LETTERS_RE.sub(lambda m: m.group(0).replace(" ", ""), text)


# Detectors
# ---------------------------------------------------------------------------- #


def parse_gin(gin):
    """Slice a General Identification Number into its fields.

    Digits 1-5 province, 6-7 court, 8 jurisdiction, 9-12 year, 13-19 sequence.

    Raises:
        CorpusError: If 'gin' is not exactly 19 decimal digits.
    """
    if not isinstance(gin, str) or not re.fullmatch(r"[0-9]{19}", gin):
        raise CorpusError(f"Invalid GIN {gin!r}: expected 19 decimal digits")
    return GinFields(gin[0:5], gin[5:7], gin[7], gin[8:12], gin[12:19])


def find_gin(text):
    """GIN written in the text: after an 'NIG' marker, else the first bare 19-digit run."""
    match = GIN_MARKER_RE.search(text) or GIN_BARE_RE.search(text)
    return match.group(1) if match else None


def _first_entry(pattern, entries, forms, text):
    if pattern is None:
        return None
    match = pattern.search(fold(text))
    if match is None:
        return None
    return forms[matched_entry(match, entries)]


def detect_case_type(text, lexica):
    """First case type (longest at equal position) in 'text', or UNKNOWN.

    A case number such as `123/2019` may follow the name.
    """
    return _first_entry(lexica.case_re, lexica.case_entries, lexica.case_forms, text) or UNKNOWN


def detect_court(text, lexica):
    return _first_entry(lexica.court_re, lexica.court_entries, lexica.court_forms, text) or UNKNOWN


def detect_decision(section, lexica):
    """Single decision keyword, MULTIPLE_DECISION for several distinct ones, else UNKNOWN."""
    if lexica.decision_re is None:
        return UNKNOWN
    found = []
    for match in lexica.decision_re.finditer(fold(section)):
        decision = lexica.decision_forms[matched_entry(match, lexica.decision_entries)]
        if decision not in found:
            found.append(decision)
    if not found:
        return UNKNOWN
    return found[0] if len(found) == 1 else MULTIPLE_DECISION


def derive_instance_type(case_type):
    """Instance from the case type name; third > second > first > higher."""
    name = fold(case_type or "")
    if "casacion" in name or "unificacion" in name:
        return "third"
    if "apelacion" in name or "suplicacion" in name:
        return "second"
    if re.search(r"(?<!\w)recurso(?!\w)", name):
        return "first"
    return "higher"


def detect_jurisdiction(text, gin, case_type, lexica):
    """Judicial division phrase, then GIN digit 8, then the case-type lexicon."""
    division = _first_entry(
        lexica.division_re, lexica.division_entries, lexica.division_forms, text
    )
    if division:
        return division
    if gin:
        jurisdiction = lexica.gin_jurisdictions.get(parse_gin(gin).jurisdiction_digit)
        if jurisdiction:
            return jurisdiction
    return lexica.case_type_jurisdiction.get(case_type) or UNKNOWN


def detect_resolution_type(tail):
    """Last of sentencia/orden/decreto in the heading tail, or UNKNOWN."""
    matches = RESOLUTION_RE.findall(fold(collapse_spaced_letters(tail)))
    return matches[-1] if matches else UNKNOWN


def decision_type_for(resolution_type):
    if resolution_type == "sentencia":
        return "substantive"
    if resolution_type in ("orden", "decreto"):
        return "procedural"
    return UNKNOWN


def extract_entities(judgement, lexica):
    """Run every detector over one judgement's raw text.

    Entity detection works on the raw (uncleaned) text: the rules need
    punctuation, casing and line structure.
    """
    text = unicodedata.normalize("NFC", judgement.raw_text)
    heading = heading_section(text)
    gin = judgement.gin or find_gin(text)

    case_type = detect_case_type(heading, lexica)
    resolution_type = detect_resolution_type(heading_tail(heading))
    record = EntityRecord(
        case_type=case_type,
        court=detect_court(heading, lexica),
        decision=detect_decision(decision_section(text), lexica),
        decision_type=decision_type_for(resolution_type),
        instance_type=derive_instance_type(case_type),
        jurisdiction=detect_jurisdiction(heading, gin, case_type, lexica),
        resolution_type=resolution_type,
    )
    logger.debug(f"Entities for '{judgement.id}': {record.to_dict()}")
    return record
