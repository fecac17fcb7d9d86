"""Report emission: CSV tables and per-fit JSON, written atomically.

Shares arrive as exact fractions and are rounded here and only here:
percentages to one decimal place, normalized ratios to two. Files are
written through a temp file plus rename so partial outputs never appear,
and with fixed newline handling so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .classify import classify_publication, domestic_flags
from .ingest import Corpus, QCEntry
from .nbrm import EffectTable, FitResult, VIFReport
from .shares import (
    CorpusSummary,
    DisciplineShares,
    HospUnivShares,
    InstitutionRank,
    ShareMatrix,
)

__all__ = [
    "format_percent",
    "format_ratio",
    "atomic_write_text",
    "write_qc_csv",
    "write_classify_csv",
    "write_table3_csv",
    "write_table_a1_csv",
    "write_matrix_csv",
    "write_normalized_csv",
    "write_topk_csv",
    "write_fig_a1_csv",
    "write_effect_table_csv",
    "write_fit_json",
]


def format_percent(x: Fraction) -> str:
    """Exact half-up rounding of a fraction to one decimal percent."""
    scaled = x * 1000  # integer tenths of a percent
    tenths = (2 * scaled.numerator + scaled.denominator) // (2 * scaled.denominator)
    return f"{tenths // 10}.{tenths % 10}"


def format_ratio(x: Fraction) -> str:
    """Exact half-up rounding of a fraction to two decimals."""
    scaled = x * 100
    hundredths = (2 * scaled.numerator + scaled.denominator) // (2 * scaled.denominator)
    return f"{hundredths // 100}.{hundredths % 100:02d}"


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_rows(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    atomic_write_text(path, buf.getvalue())


def write_qc_csv(path: str, qc: Sequence[QCEntry]) -> None:
    _write_rows(path, ("line", "kind", "message"), ((e.line, e.kind, e.message) for e in qc))


def write_classify_csv(path: str, corpus: Corpus, country: str | None = None) -> None:
    """Per-publication flags; domestic-flag columns appear in country mode."""
    if country is None:
        header = ("pub_id", "discipline", "has_nm", "has_im")
        rows = []
        for pub in corpus.publications:
            cls = classify_publication(pub)
            rows.append((pub.id, pub.discipline, int(cls.has_nm), int(cls.has_im)))
    else:
        header = (
            "pub_id",
            "discipline",
            "has_nm",
            "has_im",
            "country",
            "p_nm_domestic",
            "p_im_domestic",
        )
        rows = []
        for pub in corpus.publications:
            cls = classify_publication(pub)
            flags = domestic_flags(pub, country)
            rows.append(
                (
                    pub.id,
                    pub.discipline,
                    int(cls.has_nm),
                    int(cls.has_im),
                    country,
                    int(flags.p_nm_domestic),
                    int(flags.p_im_domestic),
                )
            )
    _write_rows(path, header, rows)


def write_table3_csv(path: str, summary: CorpusSummary) -> None:
    header = ("", "total", "p_m", "p_nm", "p_im", "p_nom")
    pubs = (
        "pubs",
        summary.total,
        summary.p_m.numerator,
        summary.p_nm.numerator,
        summary.p_im.numerator,
        summary.p_nom.numerator,
    )
    share = (
        "share",
        "",
        format_percent(summary.p_m.share),
        format_percent(summary.p_nm.share),
        format_percent(summary.p_im.share),
        format_percent(summary.p_nom.share),
    )
    _write_rows(path, header, (pubs, share))


def write_table_a1_csv(path: str, shares: Mapping[str, DisciplineShares]) -> None:
    rows = (
        (
            d,
            format_percent(s.share_p_m.share),
            format_percent(s.share_p_nm.share),
            format_percent(s.share_p_im.share),
        )
        for d, s in shares.items()
    )
    _write_rows(path, ("discipline", "share_p_m", "share_p_nm", "share_p_im"), rows)


def write_matrix_csv(path: str, matrix: ShareMatrix) -> None:
    """Country rows x discipline columns of one-decimal percent shares."""
    rows = []
    for c in matrix.rows:
        row: list[str] = [c]
        for d in matrix.cols:
            cell = matrix.cells.get((c, d))
            row.append("" if cell is None else format_percent(cell.share))
        rows.append(row)
    _write_rows(path, ("country", *matrix.cols), rows)


def write_normalized_csv(
    path: str, matrix: ShareMatrix, ratios: Mapping[tuple[str, str], Fraction]
) -> None:
    """Normalized (share / global baseline) ratios, two decimals."""
    rows = []
    for c in matrix.rows:
        row: list[str] = [c]
        for d in matrix.cols:
            ratio = ratios.get((c, d))
            row.append("" if ratio is None else format_ratio(ratio))
        rows.append(row)
    _write_rows(path, ("country", *matrix.cols), rows)


def write_topk_csv(path: str, ranks: Mapping[tuple[str, str], Sequence[InstitutionRank]]) -> None:
    """Rankings keyed by (country, kind), flattened with a rank column."""
    rows = []
    for (country, kind), entries in ranks.items():
        for position, r in enumerate(entries, start=1):
            rows.append(
                (
                    country,
                    kind,
                    position,
                    r.inst_id,
                    r.inst_name,
                    r.count,
                    format_percent(r.share_in_total),
                )
            )
    _write_rows(
        path,
        ("country", "kind", "rank", "inst_id", "inst_name", "count", "share_in_total"),
        rows,
    )


def write_fig_a1_csv(path: str, result: HospUnivShares) -> None:
    rows = []
    for d, cell in result.shares.items():
        if not result.computable or cell is None:
            rows.append((d, "", "", ""))
        else:
            rows.append((d, cell.denominator, cell.numerator, format_percent(cell.share)))
    _write_rows(path, ("discipline", "hospital_pubs", "combination_pubs", "share"), rows)


def write_effect_table_csv(path: str, table: EffectTable) -> None:
    _write_rows(path, table.header, table.rows)


def write_fit_json(path: str, fit: FitResult, vif_report: VIFReport | None = None) -> None:
    payload: dict = {
        "columns": list(fit.columns),
        "n_obs": fit.n_obs,
        "beta": [float(v) for v in fit.beta],
        "alpha": float(fit.alpha),
        "se": [float(v) for v in fit.se],
        "z": [float(v) for v in fit.z],
        "p": [float(v) for v in fit.p],
        "stars": list(fit.stars),
        "pct_change": [float(v) for v in fit.pct_change],
        "loglik": float(fit.loglik),
        "loglik_null": float(fit.loglik_null),
        "pseudo_r2": float(fit.pseudo_r2),
        "converged": fit.converged,
        "iterations": fit.iterations,
    }
    if vif_report is not None:
        payload["vif"] = {k: float(v) for k, v in vif_report.values.items()}
        if vif_report.infinite:
            payload["vif_infinite"] = list(vif_report.infinite)
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")
