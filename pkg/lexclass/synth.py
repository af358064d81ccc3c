"""Synthetic judgement corpus.

Documents look like Spanish judgements closely enough for every pipeline
stage to have work to do: a heading with court, division, case type, GIN
and a spaced-out resolution word, people and companies to anonymise, a
body written from class-specific keyword vocabularies, and a FALLAMOS
section with a decision keyword.
"""
import itertools
from os import path

import numpy as np

from lexclass.corpus import Corpus, Judgement, LabelAssignment
from lexclass.errors import ConfigError
from lexclass.logger import logger
from lexclass.utils import BUNDLED_LEXICA, fold, read_lines
from lexclass.utils.hash import derive_seed

# Share of documents with 1, 2 and 3 label assignments.
LABEL_SET_SHARES = (0.676, 0.259, 0.066)

KEYWORDS_PER_CLASS = 12
KEYWORDS_PER_LABEL = 10
FILLER_PER_PARAGRAPH = 12

ATOMS = (
    ("social", ("derecho del trabajo", "derecho de la contratacion laboral", "derecho relativo al contrato de trabajo")),
    ("penal", ("derecho penal", "delitos contra el patrimonio", "robo y hurto")),
    ("civil", ("derecho civil", "obligaciones y contratos", "arrendamientos urbanos")),
    ("administrative", ("derecho administrativo", "funcion publica", "regimen disciplinario")),
    ("tributary", ("derecho tributario", "impuestos indirectos", "impuesto sobre el valor añadido")),
    ("social", ("derecho del trabajo", "seguridad social", "prestaciones por incapacidad")),
    ("mercantile", ("derecho mercantil", "derecho concursal", "calificacion del concurso")),
    ("civil/mercantile", ("derecho mercantil", "sociedades de capital", "impugnacion de acuerdos sociales")),
)

JURISDICTION_OF_ORDER = {
    "social": "social",
    "penal": "penal",
    "civil": "civil",
    "mercantile": "civil",
    "civil/mercantile": "civil",
    "administrative": "contentious-administrative",
    "tributary": "contentious-administrative",
}
GIN_DIGIT = {"civil": "1", "penal": "2", "contentious-administrative": "3", "social": "4"}

# (court, division, case type) headings per jurisdiction.
HEADINGS = {
    "social": (
        ("TRIBUNAL SUPERIOR DE JUSTICIA DE {city}", "SALA DE LO SOCIAL", "Recurso de Suplicación"),
        ("JUZGADO DE LO SOCIAL Nº {court_no} DE {city}", "", "Despido"),
        ("JUZGADO DE LO SOCIAL Nº {court_no} DE {city}", "", "Reclamación de cantidad"),
    ),
    "penal": (
        ("AUDIENCIA PROVINCIAL DE {city}", "SECCIÓN {court_no}", "Procedimiento Abreviado"),
        ("JUZGADO DE LO PENAL Nº {court_no} DE {city}", "", "Juicio Oral"),
    ),
    "civil": (
        ("AUDIENCIA PROVINCIAL DE {city}", "SECCIÓN {court_no}", "Recurso de Apelación"),
        ("JUZGADO DE PRIMERA INSTANCIA Nº {court_no} DE {city}", "", "Juicio Ordinario"),
        ("JUZGADO DE LO MERCANTIL Nº {court_no} DE {city}", "", "Concurso Ordinario"),
    ),
    "contentious-administrative": (
        ("TRIBUNAL SUPERIOR DE JUSTICIA DE {city}", "SALA DE LO CONTENCIOSO-ADMINISTRATIVO", "Recurso de Apelación"),
        ("JUZGADO DE LO CONTENCIOSO-ADMINISTRATIVO Nº {court_no} DE {city}", "", "Procedimiento Ordinario"),
    ),
}
CITIES = ("MADRID", "BARCELONA", "VALENCIA", "SEVILLA", "ZARAGOZA", "BILBAO", "MURCIA", "OVIEDO")

RESOLUTIONS = (("S E N T E N C I A", 0.9), ("D E C R E T O", 0.1))
DECISION_PHRASES = (
    "Que debemos desestimar y desestimamos el recurso interpuesto",
    "Que estimamos el recurso interpuesto y revocamos la resolución recurrida",
    "Que estimando parcialmente la demanda formulada",
    "Que confirmamos la resolución recurrida en todos sus extremos",
    "Que absolvemos a la parte demandada de las pretensiones deducidas",
)
JUDGE_TITLES = ("Magistrado", "Magistrada", "Magistrado-Juez")
COUNSEL_TITLES = ("Letrado", "Letrada", "Procurador", "Procuradora", "Graduado Social")
HONORIFICS = ("D.", "Dña.", "don", "doña")
COMPANY_WORDS = ("Construcciones", "Levante", "Servicios", "Integrales", "Transportes", "Norte", "Limpiezas", "Atlántico")
CORPORATE_FORMS = ("S.L.", "S.A.", "S.L.U.")

FILLER = (
    "parte", "demanda", "recurso", "resolucion", "actuaciones", "prueba", "hechos",
    "procedimiento", "tribunal", "juzgado", "instancia", "fundamento", "derecho",
    "pretension", "alegaciones", "escrito", "plazo", "motivo", "doctrina", "costas",
)
SYLLABLES = (
    "ba", "be", "bi", "bo", "ca", "ce", "co", "cu", "da", "de", "do", "fa", "fe", "fi",
    "ga", "go", "la", "le", "li", "lo", "ma", "me", "mi", "mo", "na", "ne", "no", "pa",
    "pe", "po", "ra", "re", "ri", "ro", "sa", "se", "so", "ta", "te", "to", "va", "ve",
)


def set_sizes(n_classes):
    """Number of label-set combinations with one, two and three assignments."""
    n3 = int(round(LABEL_SET_SHARES[2] * n_classes))
    n2 = int(round(LABEL_SET_SHARES[1] * n_classes))
    n1 = n_classes - n2 - n3
    # Enough single assignments to build the distinct pairs and triples from.
    while n3 and len(list(itertools.combinations(range(n1), 3))) < n3:
        n3, n1 = n3 - 1, n1 + 1
    while n2 and len(list(itertools.combinations(range(n1), 2))) < n2:
        n2, n1 = n2 - 1, n1 + 1
    return n1, n2, n3


def make_atoms(n_atoms):
    """'n_atoms' distinct label assignments."""
    atoms = []
    for k in range(n_atoms):
        order, categories = ATOMS[k % len(ATOMS)]
        if k >= len(ATOMS):
            categories = categories[:2] + (f"{categories[2]} {k // len(ATOMS) + 1}",)
        atoms.append(LabelAssignment(order, categories))
    return atoms


def make_vocabularies(n_atoms, rng, reserved=()):
    """Disjoint pseudo-word keyword vocabularies, one per assignment.

    Words in 'reserved' (the name lexica) are never drawn: the anonymiser
    would erase them.
    """
    used = set(FILLER) | {fold(w) for w in reserved}
    vocabularies = []
    for _ in range(n_atoms):
        words = []
        while len(words) < KEYWORDS_PER_CLASS:
            word = "".join(rng.choice(SYLLABLES, size=int(rng.integers(3, 5))))
            if word not in used:
                used.add(word)
                words.append(word)
        vocabularies.append(words)
    return vocabularies


def make_combinations(atoms, n1, n2, n3, rng):
    combos = [(k,) for k in range(n1)]
    for size, count in ((2, n2), (3, n3)):
        candidates = list(itertools.combinations(range(n1), size))
        order = rng.permutation(len(candidates))
        combos.extend(candidates[i] for i in order[:count])
    return [tuple(atoms[k] for k in combo) for combo in combos]


def _person(rng, first_names, surnames):
    return " ".join([str(rng.choice(first_names)), *rng.choice(surnames, size=2)])


def _gin(jurisdiction, year, rng):
    province = f"{int(rng.integers(1, 52)):02d}{int(rng.integers(0, 1000)):03d}"
    court = f"{int(rng.integers(0, 100)):02d}"
    sequence = f"{int(rng.integers(0, 10**7)):07d}"
    return province + court + GIN_DIGIT[jurisdiction] + str(year) + sequence


def _paragraph(keywords, rng):
    words = list(keywords) + list(rng.choice(FILLER, size=FILLER_PER_PARAGRAPH))
    rng.shuffle(words)
    return " ".join(words).capitalize() + "."


def render_document(labels, vocabularies, atom_index, noise, rng, first_names, surnames):
    """Text and GIN of one synthetic judgement carrying 'labels'."""
    jurisdiction = JURISDICTION_OF_ORDER[labels[0].order.lower()]
    court, division, case_type = HEADINGS[jurisdiction][int(rng.integers(len(HEADINGS[jurisdiction])))]
    city = str(rng.choice(CITIES))
    court_no = int(rng.integers(1, 40))
    year = int(rng.integers(2005, 2021))
    gin = _gin(jurisdiction, year, rng)
    resolution = RESOLUTIONS[0][0] if rng.random() < RESOLUTIONS[0][1] else RESOLUTIONS[1][0]

    heading = [court.format(city=city, court_no=court_no)]
    if division:
        heading.append(division)
    heading += [
        f"{case_type} nº {int(rng.integers(1, 5000))}/{year}",
        f"NIG: {gin}",
        f"{rng.choice(JUDGE_TITLES)} {rng.choice(HONORIFICS)} {_person(rng, first_names, surnames)}",
        f"{resolution} Nº {int(rng.integers(1, 900))}/{year}",
    ]

    keywords = []
    for label in labels:
        for word in rng.choice(vocabularies[atom_index[label]], size=KEYWORDS_PER_LABEL):
            if rng.random() < noise:
                word = str(rng.choice(vocabularies[int(rng.integers(len(vocabularies)))]))
            keywords.append(str(word))
    half = len(keywords) // 2

    company = " ".join(rng.choice(COMPANY_WORDS, size=2, replace=False)) + " " + str(rng.choice(CORPORATE_FORMS))
    facts = [
        "ANTECEDENTES DE HECHO",
        "",
        f"PRIMERO.- La demanda fue presentada por {rng.choice(HONORIFICS)} {_person(rng, first_names, surnames)}, "
        f"asistido por el {rng.choice(COUNSEL_TITLES)} {rng.choice(HONORIFICS)} {_person(rng, first_names, surnames)}, "
        f"frente a la empresa {company}",
        "",
        "SEGUNDO.- " + _paragraph(keywords[:half], rng),
        "",
        "FUNDAMENTOS DE DERECHO",
        "",
        "PRIMERO.- " + _paragraph(keywords[half:], rng),
        "",
        "FALLAMOS",
        "",
        f"{rng.choice(DECISION_PHRASES)}, con imposición de costas.",
    ]
    return "\n".join(heading) + "\n\n" + "\n".join(facts) + "\n", gin


def generate_corpus(n_docs=2000, n_classes=8, noise=0.2, seed=0, lexica_dir=None):
    """Generate a labelled synthetic corpus.

    Label-set sizes follow LABEL_SET_SHARES, giving a label cardinality of
    about 1.4. Every combination class owns the keywords of its assignments;
    with probability 'noise' a keyword is swapped for one of a random class.

    Args:
        n_docs (int, optional): Number of documents. Defaults to 2000.
        n_classes (int, optional): Number of distinct label sets (MTS classes).
            Defaults to 8.
        noise (float, optional): Keyword swap probability. Defaults to 0.2.
        seed (int, optional): Base seed; document i draws from
            derive_seed(seed, "doc", i). Defaults to 0.
        lexica_dir (str, optional): Source of the first-name and surname
            lexica. Defaults to the bundled lexica.

    Returns:
        Corpus
    """
    if n_docs < 1:
        raise ConfigError(f"synth.n_docs: must be >= 1, got {n_docs}")
    if n_classes < 1:
        raise ConfigError(f"synth.n_classes: must be >= 1, got {n_classes}")
    if not 0 <= noise <= 1:
        raise ConfigError(f"synth.noise: must be in [0, 1], got {noise}")
    lexica_dir = lexica_dir or BUNDLED_LEXICA
    first_names = read_lines(path.join(lexica_dir, "first_names.txt"))
    surnames = read_lines(path.join(lexica_dir, "surnames.txt"))

    rng = np.random.default_rng(derive_seed(seed, "synth", n_classes))
    n1, n2, n3 = set_sizes(n_classes)
    atoms = make_atoms(n1)
    atom_index = {atom: k for k, atom in enumerate(atoms)}
    vocabularies = make_vocabularies(n1, rng, first_names + surnames)
    combos = make_combinations(atoms, n1, n2, n3, rng)
    by_size = {size: [c for c in combos if len(c) == size] for size in (1, 2, 3)}
    sizes = [size for size in (1, 2, 3) if by_size[size]]
    shares = np.array([LABEL_SET_SHARES[size - 1] for size in sizes])

    documents = []
    for i in range(n_docs):
        doc_rng = np.random.default_rng(derive_seed(seed, "doc", i))
        size = sizes[int(doc_rng.choice(len(sizes), p=shares / shares.sum()))]
        labels = by_size[size][int(doc_rng.integers(len(by_size[size])))]
        text, gin = render_document(labels, vocabularies, atom_index, noise, doc_rng, first_names, surnames)
        documents.append(
            Judgement(id=str(i), raw_text=text, gin=gin if doc_rng.random() < 0.5 else None, annotations=labels)
        )
    logger.info(
        f"Generated {n_docs} synthetic documents: {len(combos)} label sets "
        f"({n1} single, {n2} double, {n3} triple), noise {noise}"
    )
    return Corpus(tuple(documents))
