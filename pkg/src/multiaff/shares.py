"""Descriptive share statistics over a classified, collaborative corpus.

All operations here expect the collaborative subset (see
`ingest.filter_collaborative`); shares are exact `fractions.Fraction`
values and are only rounded at report time. Country attribution uses full
counting: a publication belongs to every country appearing in its
affiliation list.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .classify import AuthorClass, classify_author, classify_publication, domestic_flags
from .ingest import Corpus
from .reference import DISCIPLINES

__all__ = [
    "ShareCell",
    "CorpusSummary",
    "DisciplineShares",
    "ShareMatrix",
    "InstitutionRank",
    "HospUnivShares",
    "corpus_summary",
    "discipline_shares",
    "country_discipline_shares",
    "normalize",
    "top_institutions",
    "hosp_univ_combination_share",
]

logger = logging.getLogger(__name__)

MARK_KINDS = ("NM", "IM")


@dataclass(frozen=True)
class ShareCell:
    numerator: int
    denominator: int

    def __post_init__(self):
        if self.denominator <= 0:
            raise ValueError("ShareCell denominator must be positive")
        if not 0 <= self.numerator <= self.denominator:
            raise ValueError("ShareCell numerator must lie in [0, denominator]")

    @property
    def share(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)


@dataclass(frozen=True)
class CorpusSummary:
    """Publication counts and shares by multi-affiliation class."""

    total: int
    p_m: ShareCell
    p_nm: ShareCell
    p_im: ShareCell
    p_nom: ShareCell

    @property
    def overlap(self) -> int:
        """Publications counted in both P_NM and P_IM (inclusion-exclusion)."""
        return self.p_nm.numerator + self.p_im.numerator - self.p_m.numerator


@dataclass(frozen=True)
class DisciplineShares:
    share_p_m: ShareCell
    share_p_nm: ShareCell
    share_p_im: ShareCell


@dataclass(frozen=True)
class ShareMatrix:
    """Country x discipline share cells with a per-column global baseline."""

    kind: str
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    cells: Mapping[tuple[str, str], ShareCell]
    baseline: Mapping[str, ShareCell]


@dataclass(frozen=True)
class InstitutionRank:
    inst_id: str
    inst_name: str
    count: int
    total: int

    @property
    def share_in_total(self) -> Fraction:
        return Fraction(self.count, self.total)


@dataclass(frozen=True)
class HospUnivShares:
    """Per-discipline hospital/university combination shares.

    `computable` is False when the corpus carries no org_type annotations at
    all; a None cell means the discipline had no hospital-affiliated
    multi-affiliated author (empty denominator).
    """

    computable: bool
    shares: Mapping[str, ShareCell | None]


def corpus_summary(corpus: Corpus) -> CorpusSummary:
    """Counts and shares of P_M / P_NM / P_IM / P_NoM over the corpus."""
    total = len(corpus.publications)
    if total == 0:
        raise ValueError("empty corpus")
    n_m = n_nm = n_im = 0
    for pub in corpus.publications:
        cls = classify_publication(pub)
        n_nm += cls.has_nm
        n_im += cls.has_im
        n_m += cls.is_multi
    return CorpusSummary(
        total=total,
        p_m=ShareCell(n_m, total),
        p_nm=ShareCell(n_nm, total),
        p_im=ShareCell(n_im, total),
        p_nom=ShareCell(total - n_m, total),
    )


def discipline_shares(corpus: Corpus, disciplines: Sequence[str] = DISCIPLINES) -> dict[str, DisciplineShares]:
    """Per-discipline shares of P_M / P_NM / P_IM.

    Denominators are per-discipline collaborative totals. Disciplines with no
    publications are omitted with a warning.
    """
    counts: dict[str, list[int]] = {d: [0, 0, 0, 0] for d in disciplines}
    for pub in corpus.publications:
        if pub.discipline not in counts:
            continue
        c = counts[pub.discipline]
        cls = classify_publication(pub)
        c[0] += 1
        c[1] += cls.is_multi
        c[2] += cls.has_nm
        c[3] += cls.has_im
    out: dict[str, DisciplineShares] = {}
    for d in disciplines:
        total, n_m, n_nm, n_im = counts[d]
        if total == 0:
            logger.warning("discipline %s has no collaborative publications; omitted", d)
            continue
        out[d] = DisciplineShares(
            share_p_m=ShareCell(n_m, total),
            share_p_nm=ShareCell(n_nm, total),
            share_p_im=ShareCell(n_im, total),
        )
    return out


def _check_kind(kind: str) -> None:
    if kind not in MARK_KINDS:
        raise ValueError(f"kind must be one of {MARK_KINDS}, got {kind!r}")


def country_discipline_shares(
    corpus: Corpus,
    countries: Sequence[str],
    kind: str,
    disciplines: Sequence[str] = DISCIPLINES,
) -> ShareMatrix:
    """Domestic multi-affiliation share per (country, discipline).

    cell(c, d) = publications in discipline d carrying country c's domestic
    NM (or IM) authorship, over collaborative publications in d with c in
    their address list. The baseline is the global per-discipline share of
    the same kind.
    """
    _check_kind(kind)
    present: set[str] = set()
    for pub in corpus.publications:
        present.update(pub.distinct_countries())
    absent = [c for c in countries if c not in present]
    if absent:
        raise ValueError(f"countries absent from corpus: {', '.join(absent)}")

    num: dict[tuple[str, str], int] = {}
    den: dict[tuple[str, str], int] = {}
    for pub in corpus.publications:
        if pub.discipline not in disciplines:
            continue
        pub_countries = pub.distinct_countries()
        for c in countries:
            if c not in pub_countries:
                continue
            key = (c, pub.discipline)
            den[key] = den.get(key, 0) + 1
            flags = domestic_flags(pub, c)
            hit = flags.p_nm_domestic if kind == "NM" else flags.p_im_domestic
            if hit:
                num[key] = num.get(key, 0) + 1

    cells = {
        key: ShareCell(num.get(key, 0), d_count)
        for key, d_count in den.items()
    }
    globals_ = discipline_shares(corpus, disciplines)
    baseline = {
        d: (s.share_p_nm if kind == "NM" else s.share_p_im) for d, s in globals_.items()
    }
    return ShareMatrix(
        kind=kind,
        rows=tuple(countries),
        cols=tuple(disciplines),
        cells=cells,
        baseline=baseline,
    )


def normalize(matrix: ShareMatrix) -> dict[tuple[str, str], Fraction]:
    """Cell shares divided by the column baseline share.

    Values above 1 mean the country sits above the world average in that
    discipline. Columns whose baseline share is zero or missing are
    undefined and omitted from the result.
    """
    out: dict[tuple[str, str], Fraction] = {}
    for (c, d), cell in matrix.cells.items():
        base = matrix.baseline.get(d)
        if base is None or base.share == 0:
            continue
        out[(c, d)] = cell.share / base.share
    return out


def top_institutions(
    corpus: Corpus, country: str, kind: str, k: int = 3
) -> list[InstitutionRank]:
    """Top-k institutions of `country` by domestic-flagged publication count.

    An institution's count is the number of publications carrying the
    country's domestic flag of the given kind in which it appears; its share
    denominator is its own collaborative-publication total. Ties are broken
    by inst_id ascending.
    """
    _check_kind(kind)
    if k < 1:
        raise ValueError("k must be >= 1")
    flagged: dict[str, int] = {}
    totals: dict[str, int] = {}
    names: dict[str, str] = {}
    seen_country = False
    for pub in corpus.publications:
        insts = {a.inst_id: a.name for a in pub.affiliations if a.country == country}
        if not insts:
            continue
        seen_country = True
        flags = domestic_flags(pub, country)
        hit = flags.p_nm_domestic if kind == "NM" else flags.p_im_domestic
        for inst_id, name in insts.items():
            totals[inst_id] = totals.get(inst_id, 0) + 1
            if hit:
                flagged[inst_id] = flagged.get(inst_id, 0) + 1
            if inst_id not in names or name < names[inst_id]:
                names[inst_id] = name
    if not seen_country:
        raise ValueError(f"country absent from corpus: {country}")
    ranked = sorted(flagged.items(), key=lambda item: (-item[1], item[0]))
    return [
        InstitutionRank(inst_id=i, inst_name=names[i], count=n, total=totals[i])
        for i, n in ranked[:k]
    ]


def hosp_univ_combination_share(
    corpus: Corpus, disciplines: Iterable[str]
) -> HospUnivShares:
    """Share of hospital-affiliated multi-affiliated authorship that also
    involves a university or college affiliation, per discipline.

    For each discipline, the denominator counts publications having at least
    one multi-affiliated author with a hospital-type affiliation; the
    numerator counts those where some such author also lists a university or
    college affiliation.
    """
    disciplines = tuple(disciplines)
    has_org_data = any(
        a.org_type is not None for pub in corpus.publications for a in pub.affiliations
    )
    if not has_org_data:
        return HospUnivShares(computable=False, shares={d: None for d in disciplines})

    num = {d: 0 for d in disciplines}
    den = {d: 0 for d in disciplines}
    for pub in corpus.publications:
        if pub.discipline not in num:
            continue
        hosp_author = False
        combo_author = False
        for author in pub.authors:
            if classify_author(author, pub.affiliations) is AuthorClass.S:
                continue
            org_types = {pub.affiliations[i].org_type for i in author.affs}
            if "hospital" not in org_types:
                continue
            hosp_author = True
            if org_types & {"university", "college"}:
                combo_author = True
        den[pub.discipline] += hosp_author
        num[pub.discipline] += combo_author

    shares: dict[str, ShareCell | None] = {
        d: ShareCell(num[d], den[d]) if den[d] > 0 else None for d in disciplines
    }
    return HospUnivShares(computable=True, shares=shares)
