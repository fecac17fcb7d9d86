"""Static reference data: discipline codes, field groups, country samples.

Everything in this module is plain data. The discipline list and its
grouping into ten broader fields, and the twelve-country G7/BRICS sample,
are the default analysis configuration; the ISO 3166-1 alpha-2 list backs
country-code validation at ingest time.
"""

from __future__ import annotations

# Discipline abbreviation -> broader field group (19 disciplines, 10 fields).
FIELD_BY_DISCIPLINE: dict[str, str] = {
    "SPA": "Space Science",
    "NEU": "Medicine related",
    "PSY": "Medicine related",
    "IMM": "Medicine related",
    "CLI": "Medicine related",
    "PHA": "Medicine related",
    "PHY": "Physics",
    "MOL": "Biology related",
    "BIO": "Biology related",
    "MIC": "Biology related",
    "PLA": "Biology related",
    "ENV": "Environment/Ecology",
    "GEO": "Geosciences",
    "CHE": "Chemistry",
    "AGR": "Agricultural Sciences",
    "MATE": "Engineering related",
    "COM": "Engineering related",
    "ENG": "Engineering related",
    "MATH": "Mathematics",
}

# Canonical discipline order used for table rows and columns.
DISCIPLINES: tuple[str, ...] = tuple(FIELD_BY_DISCIPLINE)

FIELDS: tuple[str, ...] = (
    "Space Science",
    "Medicine related",
    "Physics",
    "Biology related",
    "Environment/Ecology",
    "Geosciences",
    "Chemistry",
    "Agricultural Sciences",
    "Engineering related",
    "Mathematics",
)

G7_COUNTRIES: tuple[str, ...] = ("CA", "DE", "FR", "GB", "IT", "JP", "US")
BRICS_COUNTRIES: tuple[str, ...] = ("BR", "CN", "IN", "RU", "ZA")

# Default country sample for country-perspective tables.
SAMPLE_COUNTRIES: tuple[str, ...] = G7_COUNTRIES + BRICS_COUNTRIES

DOC_TYPES: tuple[str, ...] = ("Article", "Review")

ORG_TYPES: tuple[str, ...] = ("university", "college", "hospital", "other")

# ISO 3166-1 alpha-2, officially assigned codes (249 entries).
ISO_3166_ALPHA2: frozenset[str] = frozenset(
    """
    AD AE AF AG AI AL AM AO AQ AR AS AT AU AW AX AZ
    BA BB BD BE BF BG BH BI BJ BL BM BN BO BQ BR BS BT BV BW BY BZ
    CA CC CD CF CG CH CI CK CL CM CN CO CR CU CV CW CX CY CZ
    DE DJ DK DM DO DZ
    EC EE EG EH ER ES ET
    FI FJ FK FM FO FR
    GA GB GD GE GF GG GH GI GL GM GN GP GQ GR GS GT GU GW GY
    HK HM HN HR HT HU
    ID IE IL IM IN IO IQ IR IS IT
    JE JM JO JP
    KE KG KH KI KM KN KP KR KW KY KZ
    LA LB LC LI LK LR LS LT LU LV LY
    MA MC MD ME MF MG MH MK ML MM MN MO MP MQ MR MS MT MU MV MW MX MY MZ
    NA NC NE NF NG NI NL NO NP NR NU NZ
    OM
    PA PE PF PG PH PK PL PM PN PR PS PT PW PY
    QA
    RE RO RS RU RW
    SA SB SC SD SE SG SH SI SJ SK SL SM SN SO SR SS ST SV SX SY SZ
    TC TD TF TG TH TJ TK TL TM TN TO TR TT TV TW TZ
    UA UG UM US UY UZ
    VA VC VE VG VI VN VU
    WF WS
    YE YT
    ZA ZM ZW
    """.split()
)


def field_of(discipline: str) -> str:
    """Map a discipline abbreviation to its broader field group."""
    try:
        return FIELD_BY_DISCIPLINE[discipline]
    except KeyError:
        raise ValueError(f"unknown discipline code: {discipline!r}") from None
