"""Shared test utilities: record builders, random publication generation,
a brute-force set-theoretic reimplementation of the authorship rules, and a
direct-formula likelihood grid evaluator, all used as independent oracles."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from multiaff.ingest import Affiliation, AuthorRecord, Corpus, Publication

COUNTRY_POOL = ("FR", "US", "CN", "DE", "JP", "ZA")


def aff(inst: str, country: str, org: str | None = None) -> Affiliation:
    return Affiliation(inst_id=inst, name=f"Institute {inst}", country=country, org_type=org)


def author(*indices: int, name: str = "A") -> AuthorRecord:
    return AuthorRecord(name=name, affs=tuple(indices))


def pub(
    affiliations,
    authors,
    *,
    pid: str = "P1",
    discipline: str = "CHE",
    year: int = 2013,
    tc3: int = 5,
    n_refs: int = 20,
    citations_by_year=None,
) -> Publication:
    return Publication(
        id=pid,
        year=year,
        doc_type="Article",
        discipline=discipline,
        n_refs=n_refs,
        affiliations=tuple(affiliations),
        authors=tuple(authors),
        citations_by_year=tuple(citations_by_year) if citations_by_year is not None else None,
        tc3=tc3 if citations_by_year is None else None,
    )


def random_publication(rng: np.random.Generator, index: int = 0, max_countries: int = 3) -> Publication:
    """A random publication with <= 6 authors, <= 5 affiliations and a small
    institution pool so duplicate inst_ids and countries occur often."""
    countries = list(rng.choice(COUNTRY_POOL, size=rng.integers(1, max_countries + 1), replace=False))
    n_affs = int(rng.integers(1, 6))
    affiliations = []
    for k in range(n_affs):
        c = countries[int(rng.integers(len(countries)))]
        inst = f"{c}-{int(rng.integers(1, 4))}"  # tiny pool: collisions intended
        org = (None, "university", "college", "hospital", "other")[int(rng.integers(5))]
        affiliations.append(aff(inst, c, org))
    n_authors = int(rng.integers(1, 7))
    authors = []
    for j in range(n_authors):
        k = int(rng.integers(1, 4))
        indices = tuple(int(i) for i in rng.integers(0, n_affs, size=k))
        authors.append(AuthorRecord(name=f"A{j}", affs=indices))
    return pub(
        affiliations,
        authors,
        pid=f"R{index:05d}",
        discipline=("CHE", "PHY", "CLI", "MATH")[int(rng.integers(4))],
        tc3=int(rng.integers(0, 40)),
        n_refs=int(rng.integers(0, 60)),
    )


def random_corpus(rng: np.random.Generator, n: int) -> Corpus:
    return Corpus(publications=tuple(random_publication(rng, i) for i in range(n)), qc=())


# --- independent oracle: exhaustive set construction --------------------------


def oracle_author_sets(a: AuthorRecord, affs) -> tuple[set[str], set[str]]:
    insts = {affs[i].inst_id for i in a.affs}
    countries = {affs[i].country for i in a.affs}
    return insts, countries


def oracle_author_class(a: AuthorRecord, affs) -> str:
    insts, countries = oracle_author_sets(a, affs)
    if len(countries) >= 2:
        return "IM"
    if len(insts) >= 2:
        return "NM"
    return "S"


def oracle_label_sets(p: Publication, country: str) -> dict[str, set[int]]:
    """All six country-perspective label sets, built by exhaustive construction."""
    sets: dict[str, set[int]] = {
        f"{base}_{side}": set() for base in ("S", "NM", "IM") for side in ("Domestic", "Foreign")
    }
    for j, a in enumerate(p.authors):
        base = oracle_author_class(a, p.affiliations)
        _, countries = oracle_author_sets(a, p.affiliations)
        side = "Domestic" if country in countries else "Foreign"
        sets[f"{base}_{side}"].add(j)
    return sets


def oracle_pub_flags(p: Publication) -> tuple[bool, bool]:
    classes = {oracle_author_class(a, p.affiliations) for a in p.authors}
    return "NM" in classes, "IM" in classes


def oracle_domestic_flags(p: Publication, country: str) -> tuple[bool, bool]:
    sets = oracle_label_sets(p, country)
    return bool(sets["NM_Domestic"]), bool(sets["IM_Domestic"])


# --- independent likelihood evaluation for grid searches -----------------------


def grid_best_loglik(data, beta_center, theta_center, half_width=0.6, steps=41) -> float:
    """Best log-likelihood over a dense [intercept, slope, ln alpha] grid.

    Evaluates the NB2 likelihood directly from lgamma differences, fully
    independent of the package's internal evaluation path.
    """
    y = np.asarray(data.y, dtype=float)
    x = data.x
    b0s = np.linspace(beta_center[0] - half_width, beta_center[0] + half_width, steps)
    b1s = np.linspace(beta_center[1] - half_width, beta_center[1] + half_width, steps)
    thetas = np.linspace(theta_center - half_width, theta_center + half_width, steps)
    lgy = gammaln(y + 1.0).sum()
    best = -np.inf
    for theta in thetas:
        alpha = math.exp(theta)
        a = 1.0 / alpha
        eta = b0s[:, None, None] + b1s[None, :, None] * x[None, None, :, 1]
        mu = np.exp(eta)
        ll = (
            (gammaln(y + a) - gammaln(a)).sum()
            - lgy
            + (y * (theta + eta)).sum(axis=2)
            - ((y + a) * np.log1p(alpha * mu)).sum(axis=2)
        )
        best = max(best, float(ll.max()))
    return best
