"""Authorship taxonomy: 3-way author classes, publication flags, and the
6-way country-perspective classification.

An author is classified per publication from the distinct institutions and
countries of their listed affiliations:

  IM  - institutions span two or more countries
  NM  - two or more institutions, all in one country
  S   - a single institution

The classes are mutually exclusive and total; IM takes precedence over NM,
so an author spanning countries is never also NM. From the perspective of a
country, each class splits into Domestic (the country appears among the
author's affiliation countries) and Foreign.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .ingest import Affiliation, AuthorRecord, Publication

__all__ = [
    "AuthorClass",
    "CountryAuthorClass",
    "PubClass",
    "DomesticFlags",
    "classify_author",
    "classify_publication",
    "classify_author_for_country",
    "domestic_flags",
]


class AuthorClass(enum.Enum):
    S = "S"
    NM = "NM"
    IM = "IM"


class CountryAuthorClass(enum.Enum):
    NM_DOMESTIC = "NM_Domestic"
    NM_FOREIGN = "NM_Foreign"
    IM_DOMESTIC = "IM_Domestic"
    IM_FOREIGN = "IM_Foreign"
    S_DOMESTIC = "S_Domestic"
    S_FOREIGN = "S_Foreign"

    @property
    def base(self) -> AuthorClass:
        return AuthorClass[self.value.split("_")[0]]

    @property
    def domestic(self) -> bool:
        return self.value.endswith("_Domestic")


@dataclass(frozen=True)
class PubClass:
    has_nm: bool
    has_im: bool

    @property
    def is_multi(self) -> bool:
        """True when the publication has any multi-affiliated authorship."""
        return self.has_nm or self.has_im


@dataclass(frozen=True)
class DomesticFlags:
    p_nm_domestic: bool
    p_im_domestic: bool


def classify_author(author: AuthorRecord, affiliations: Sequence[Affiliation]) -> AuthorClass:
    """Classify one author from the affiliations their indices point to."""
    affs = [affiliations[i] for i in author.affs]
    countries = {a.country for a in affs}
    if len(countries) >= 2:
        return AuthorClass.IM
    if len({a.inst_id for a in affs}) >= 2:
        return AuthorClass.NM
    return AuthorClass.S


def classify_publication(pub: Publication) -> PubClass:
    """Publication-level flags: any NM author, any IM author."""
    has_nm = False
    has_im = False
    for author in pub.authors:
        cls = classify_author(author, pub.affiliations)
        if cls is AuthorClass.NM:
            has_nm = True
        elif cls is AuthorClass.IM:
            has_im = True
    return PubClass(has_nm=has_nm, has_im=has_im)


def classify_author_for_country(
    author: AuthorRecord, affiliations: Sequence[Affiliation], country: str
) -> CountryAuthorClass:
    """6-way class of an author from the perspective of `country`.

    The base S/NM/IM class is unchanged; the Domestic suffix applies iff
    `country` is among the author's affiliation countries.
    """
    base = classify_author(author, affiliations)
    author_countries = {affiliations[i].country for i in author.affs}
    suffix = "Domestic" if country in author_countries else "Foreign"
    return CountryAuthorClass(f"{base.value}_{suffix}")


def domestic_flags(pub: Publication, country: str) -> DomesticFlags:
    """Whether the publication carries `country`'s domestic NM / IM authorship."""
    p_nm = False
    p_im = False
    for author in pub.authors:
        cls = classify_author_for_country(author, pub.affiliations, country)
        if cls is CountryAuthorClass.NM_DOMESTIC:
            p_nm = True
        elif cls is CountryAuthorClass.IM_DOMESTIC:
            p_im = True
    return DomesticFlags(p_nm_domestic=p_nm, p_im_domestic=p_im)
