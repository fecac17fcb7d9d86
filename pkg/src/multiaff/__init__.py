"""Multi-affiliated authorship analysis toolkit.

Classifies national and international multi-affiliated authorship in
publication corpora, computes share statistics and normalized country by
discipline matrices, and quantifies citation effects through a from-scratch
negative binomial (NB2) regression with Wald inference and VIF diagnostics.
"""

from .classify import (
    AuthorClass,
    CountryAuthorClass,
    DomesticFlags,
    PubClass,
    classify_author,
    classify_author_for_country,
    classify_publication,
    domestic_flags,
)
from .ingest import (
    Affiliation,
    AuthorRecord,
    Corpus,
    Publication,
    QCEntry,
    compute_tc,
    filter_collaborative,
    load_corpus,
    map_field,
    parse_corpus,
    serialize_corpus,
    write_corpus,
)
from .nbrm import (
    DESIGN_COLUMNS,
    FitResult,
    RegressionInput,
    VIFReport,
    build_design,
    nb2_fit,
    nb2_loglik,
    nb2_score,
    percent_change,
    pseudo_r2,
    run_table,
    vif,
    wald_stats,
)
from .shares import (
    CorpusSummary,
    DisciplineShares,
    InstitutionRank,
    ShareCell,
    ShareMatrix,
    corpus_summary,
    country_discipline_shares,
    discipline_shares,
    hosp_univ_combination_share,
    normalize,
    top_institutions,
)
from .synth import SynthSpec, gen_corpus, gen_nb_counts

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # ingest
    "Affiliation",
    "AuthorRecord",
    "Publication",
    "QCEntry",
    "Corpus",
    "parse_corpus",
    "load_corpus",
    "serialize_corpus",
    "write_corpus",
    "compute_tc",
    "filter_collaborative",
    "map_field",
    # classify
    "AuthorClass",
    "CountryAuthorClass",
    "PubClass",
    "DomesticFlags",
    "classify_author",
    "classify_publication",
    "classify_author_for_country",
    "domestic_flags",
    # shares
    "ShareCell",
    "CorpusSummary",
    "DisciplineShares",
    "ShareMatrix",
    "InstitutionRank",
    "corpus_summary",
    "discipline_shares",
    "country_discipline_shares",
    "normalize",
    "top_institutions",
    "hosp_univ_combination_share",
    # nbrm
    "DESIGN_COLUMNS",
    "RegressionInput",
    "FitResult",
    "VIFReport",
    "build_design",
    "nb2_loglik",
    "nb2_score",
    "nb2_fit",
    "wald_stats",
    "percent_change",
    "pseudo_r2",
    "vif",
    "run_table",
    # synth
    "SynthSpec",
    "gen_corpus",
    "gen_nb_counts",
]
