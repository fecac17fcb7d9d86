"""Corpus ingestion: record parsing, validation, QC, and corpus filters.

Input is line-delimited JSON, one publication per line:

    {"id", "year", "doc_type", "discipline",
     "citations_by_year" (optional), "tc3" (optional), "n_refs",
     "affiliations": [{"inst_id", "name", "country", "org_type" (optional)}],
     "authors": [{"name", "affs": [int]}]}

Parsing never aborts on a bad record: each invalid line produces exactly one
QC entry (line number, error kind, message) and is excluded from the corpus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .reference import DOC_TYPES, FIELD_BY_DISCIPLINE, ISO_3166_ALPHA2, ORG_TYPES, field_of

__all__ = [
    "Affiliation",
    "AuthorRecord",
    "Publication",
    "QCEntry",
    "Corpus",
    "RecordError",
    "IncompleteWindowError",
    "parse_corpus",
    "load_corpus",
    "serialize_corpus",
    "write_corpus",
    "publication_to_record",
    "compute_tc",
    "filter_collaborative",
    "map_field",
]


class RecordError(ValueError):
    """A single-record validation failure; `kind` is a stable QC category."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind
        self.message = message


class IncompleteWindowError(ValueError):
    """Citation data cannot cover the requested citation window."""


@dataclass(frozen=True)
class Affiliation:
    inst_id: str
    name: str
    country: str
    org_type: str | None = None


@dataclass(frozen=True)
class AuthorRecord:
    name: str
    affs: tuple[int, ...]  # zero-based indices into the publication's affiliation list


@dataclass(frozen=True)
class Publication:
    id: str
    year: int
    doc_type: str
    discipline: str
    n_refs: int
    affiliations: tuple[Affiliation, ...]
    authors: tuple[AuthorRecord, ...]
    citations_by_year: tuple[int, ...] | None = None
    tc3: int | None = None

    def distinct_inst_ids(self) -> frozenset[str]:
        return frozenset(a.inst_id for a in self.affiliations)

    def distinct_countries(self) -> frozenset[str]:
        return frozenset(a.country for a in self.affiliations)

    def author_affiliations(self, author: AuthorRecord) -> tuple[Affiliation, ...]:
        return tuple(self.affiliations[i] for i in author.affs)


@dataclass(frozen=True)
class QCEntry:
    line: int
    kind: str
    message: str


@dataclass(frozen=True)
class Corpus:
    publications: tuple[Publication, ...]
    qc: tuple[QCEntry, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.publications)


def compute_tc(pub: Publication, window: int = 3) -> int:
    """Citation count over the first `window` calendar years.

    Sums citations_by_year[0:window] when the per-year list is usable for
    the window; otherwise falls back to the precomputed 3-year total (valid
    only for window == 3). Raises IncompleteWindowError when neither source
    can cover the window.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    cby = pub.citations_by_year
    if cby is not None and len(cby) >= window:
        return sum(cby[:window])
    if pub.tc3 is not None and window == 3:
        return pub.tc3
    raise IncompleteWindowError(
        f"publication {pub.id!r}: citation data does not cover a {window}-year window"
    )


def filter_collaborative(corpus: Corpus) -> Corpus:
    """Retain publications whose affiliations span >= 2 distinct institutions.

    Distinctness is by inst_id. The result is the denominator population for
    all share and regression statistics. Idempotent; QC entries are kept.
    """
    kept = tuple(p for p in corpus.publications if len(p.distinct_inst_ids()) >= 2)
    return Corpus(publications=kept, qc=corpus.qc)


def map_field(discipline: str) -> str:
    """Map a discipline abbreviation to its broader field group."""
    return field_of(discipline)


# --- record-level validation -------------------------------------------------

_REQUIRED_FIELDS = ("id", "year", "doc_type", "discipline", "n_refs", "affiliations", "authors")


def _require(obj: dict, key: str):
    if key not in obj:
        raise RecordError("missing_field", f"missing required field {key!r}")
    return obj[key]


def _check_str(value, key: str) -> str:
    if not isinstance(value, str):
        raise RecordError("bad_value", f"field {key!r} must be a string")
    return value


def _check_int(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise RecordError("bad_value", f"field {key!r} must be an integer")
    return value


def _check_nonneg(value: int, key: str) -> int:
    if value < 0:
        raise RecordError("negative_count", f"field {key!r} must be non-negative, got {value}")
    return value


def _parse_affiliation(obj, pos: int) -> Affiliation:
    if not isinstance(obj, dict):
        raise RecordError("bad_value", f"affiliations[{pos}] must be an object")
    inst_id = _check_str(_require(obj, "inst_id"), "inst_id")
    if not inst_id:
        raise RecordError("bad_value", f"affiliations[{pos}].inst_id must be non-empty")
    name = _check_str(_require(obj, "name"), "name")
    country = _check_str(_require(obj, "country"), "country")
    if country not in ISO_3166_ALPHA2:
        raise RecordError("unknown_country", f"unknown country code {country!r}")
    org_type = obj.get("org_type")
    if org_type is not None:
        org_type = _check_str(org_type, "org_type")
        if org_type not in ORG_TYPES:
            raise RecordError(
                "bad_value",
                f"org_type must be one of {ORG_TYPES}, got {org_type!r}",
            )
    return Affiliation(inst_id=inst_id, name=name, country=country, org_type=org_type)


def _parse_author(obj, pos: int, n_affiliations: int) -> AuthorRecord:
    if not isinstance(obj, dict):
        raise RecordError("bad_value", f"authors[{pos}] must be an object")
    name = _check_str(_require(obj, "name"), "name")
    affs = _require(obj, "affs")
    if not isinstance(affs, list) or not affs:
        raise RecordError("bad_value", f"authors[{pos}].affs must be a non-empty list")
    indices = []
    for a in affs:
        idx = _check_int(a, "affs")
        if not 0 <= idx < n_affiliations:
            raise RecordError(
                "dangling_index",
                f"authors[{pos}] references affiliation {idx}, "
                f"but only {n_affiliations} affiliations are listed",
            )
        indices.append(idx)
    return AuthorRecord(name=name, affs=tuple(indices))


def _parse_record(obj: dict) -> Publication:
    for key in _REQUIRED_FIELDS:
        _require(obj, key)

    pub_id = _check_str(obj["id"], "id")
    year = _check_int(obj["year"], "year")
    doc_type = _check_str(obj["doc_type"], "doc_type")
    if doc_type not in DOC_TYPES:
        raise RecordError("bad_value", f"doc_type must be one of {DOC_TYPES}, got {doc_type!r}")

    discipline = obj["discipline"]
    if isinstance(discipline, list):
        # ESI journal mapping is one-to-one; multi-valued disciplines would
        # double count, so they are rejected rather than exploded.
        raise RecordError("bad_value", "discipline must be a single code, not a list")
    discipline = _check_str(discipline, "discipline")
    if discipline not in FIELD_BY_DISCIPLINE:
        raise RecordError("unknown_discipline", f"unknown discipline code {discipline!r}")

    n_refs = _check_nonneg(_check_int(obj["n_refs"], "n_refs"), "n_refs")

    cby = obj.get("citations_by_year")
    citations_by_year: tuple[int, ...] | None = None
    if cby is not None:
        if not isinstance(cby, list):
            raise RecordError("bad_value", "citations_by_year must be a list of integers")
        citations_by_year = tuple(
            _check_nonneg(_check_int(c, "citations_by_year"), "citations_by_year") for c in cby
        )

    tc3 = obj.get("tc3")
    if tc3 is not None:
        tc3 = _check_nonneg(_check_int(tc3, "tc3"), "tc3")

    if (citations_by_year is None or len(citations_by_year) < 3) and tc3 is None:
        raise RecordError(
            "incomplete_citations",
            "citation data must provide citations_by_year with >= 3 entries or tc3",
        )

    raw_affs = obj["affiliations"]
    if not isinstance(raw_affs, list) or not raw_affs:
        raise RecordError("bad_value", "affiliations must be a non-empty list")
    affiliations = tuple(_parse_affiliation(a, i) for i, a in enumerate(raw_affs))

    raw_authors = obj["authors"]
    if not isinstance(raw_authors, list) or not raw_authors:
        raise RecordError("bad_value", "authors must be a non-empty list")
    authors = tuple(_parse_author(a, i, len(affiliations)) for i, a in enumerate(raw_authors))

    return Publication(
        id=pub_id,
        year=year,
        doc_type=doc_type,
        discipline=discipline,
        n_refs=n_refs,
        affiliations=affiliations,
        authors=authors,
        citations_by_year=citations_by_year,
        tc3=tc3,
    )


def parse_corpus(lines: Iterable[str]) -> Corpus:
    """Parse line-delimited publication records into a Corpus.

    Valid records are kept in input order; each invalid record yields exactly
    one QC entry, so len(publications) + len(qc) equals the number of
    non-blank input lines. Blank lines are skipped without numbering.
    """
    publications: list[Publication] = []
    qc: list[QCEntry] = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            qc.append(QCEntry(line_no, "malformed", f"invalid JSON: {exc.msg}"))
            continue
        if not isinstance(obj, dict):
            qc.append(QCEntry(line_no, "malformed", "record must be a JSON object"))
            continue
        try:
            publications.append(_parse_record(obj))
        except RecordError as exc:
            qc.append(QCEntry(line_no, exc.kind, exc.message))
    return Corpus(publications=tuple(publications), qc=tuple(qc))


def load_corpus(source: str | IO[str]) -> Corpus:
    """Parse a corpus from a file path or an open text stream."""
    if isinstance(source, str):
        with open(source, encoding="utf-8") as fh:
            return parse_corpus(fh)
    return parse_corpus(source)


# --- serialization ------------------------------------------------------------


def publication_to_record(pub: Publication) -> dict:
    """Rebuild the JSON record object for a publication (round-trip safe)."""
    record: dict = {
        "id": pub.id,
        "year": pub.year,
        "doc_type": pub.doc_type,
        "discipline": pub.discipline,
    }
    if pub.citations_by_year is not None:
        record["citations_by_year"] = list(pub.citations_by_year)
    if pub.tc3 is not None:
        record["tc3"] = pub.tc3
    record["n_refs"] = pub.n_refs
    record["affiliations"] = [
        {"inst_id": a.inst_id, "name": a.name, "country": a.country}
        | ({"org_type": a.org_type} if a.org_type is not None else {})
        for a in pub.affiliations
    ]
    record["authors"] = [{"name": a.name, "affs": list(a.affs)} for a in pub.authors]
    return record


def serialize_corpus(corpus: Corpus) -> Iterator[str]:
    """Yield one JSON line per publication (QC entries are not records)."""
    for pub in corpus.publications:
        yield json.dumps(publication_to_record(pub), ensure_ascii=False)


def write_corpus(corpus: Corpus, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in serialize_corpus(corpus):
            fh.write(line + "\n")
