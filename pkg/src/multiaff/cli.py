"""Command-line interface.

Subcommands: validate, classify, shares, regress, synth. Flags may come
from a JSON config file (--config) with the same field names; explicit
flags take precedence. Defaults reproduce the standard analysis setup:
the 12-country G7/BRICS sample, all 19 disciplines, a 3-year citation
window, and the 10-author regression cap.

Exit codes: 0 success, 1 usage or I/O error, 2 validation failure,
3 nothing computable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import Sequence

from . import report
from .ingest import Corpus, filter_collaborative, load_corpus, serialize_corpus
from .nbrm import build_design, run_table, vif
from .reference import DISCIPLINES, SAMPLE_COUNTRIES
from .shares import (
    corpus_summary,
    country_discipline_shares,
    discipline_shares,
    hosp_univ_combination_share,
    normalize,
    top_institutions,
)
from .synth import SynthSpec, gen_corpus

log = logging.getLogger("multiaff")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NOTHING = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we reserve that
        raise _UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    input: str | None
    outdir: str
    countries: tuple[str, ...]
    disciplines: tuple[str, ...]
    max_authors: int = 10
    min_rows: int = 50
    citation_window: int = 3
    seed: int = 0
    topk: int = 3


def _split_codes(value: str) -> tuple[str, ...]:
    return tuple(code.strip() for code in value.split(",") if code.strip())


def _load_config_file(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise _UsageError(f"config file {path} must contain a JSON object")
    return obj


def _resolve(args: argparse.Namespace) -> RunConfig:
    cfg = _load_config_file(args.config) if getattr(args, "config", None) else {}

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return cfg.get(key, default)

    countries = pick(args.countries, "countries", SAMPLE_COUNTRIES)
    if isinstance(countries, str):
        countries = _split_codes(countries)
    disciplines = pick(args.disciplines, "disciplines", DISCIPLINES)
    if isinstance(disciplines, str):
        disciplines = _split_codes(disciplines)
    window_default = cfg.get("citation_window", cfg.get("window", 3))
    return RunConfig(
        input=pick(getattr(args, "input", None), "input", None),
        outdir=pick(getattr(args, "outdir", None), "outdir", "."),
        countries=tuple(countries),
        disciplines=tuple(disciplines),
        max_authors=int(pick(getattr(args, "max_authors", None), "max_authors", 10)),
        min_rows=int(pick(getattr(args, "min_rows", None), "min_rows", 50)),
        citation_window=int(window_default if getattr(args, "window", None) is None else args.window),
        seed=int(pick(getattr(args, "seed", None), "seed", 0)),
        topk=int(pick(getattr(args, "topk", None), "topk", 3)),
    )


def _read_corpus(config: RunConfig) -> Corpus:
    if not config.input:
        raise _UsageError("an input file is required (--input or config)")
    if not os.path.exists(config.input):
        raise FileNotFoundError(config.input)
    return load_corpus(config.input)


def _outpath(config: RunConfig, name: str) -> str:
    os.makedirs(config.outdir, exist_ok=True)
    return os.path.join(config.outdir, name)


def _warn_qc(corpus: Corpus) -> None:
    if corpus.qc:
        log.warning("%d record(s) failed validation and were excluded", len(corpus.qc))


def cmd_validate(config: RunConfig) -> int:
    corpus = _read_corpus(config)
    report.write_qc_csv(_outpath(config, "qc.csv"), corpus.qc)
    if not corpus.publications and not corpus.qc:
        log.error("empty corpus")
        return EXIT_VALIDATION
    return EXIT_VALIDATION if corpus.qc else EXIT_OK


def _collaborative_or_exit(config: RunConfig) -> Corpus | int:
    corpus = _read_corpus(config)
    _warn_qc(corpus)
    if not corpus.publications:
        log.error("empty corpus")
        return EXIT_VALIDATION
    collaborative = filter_collaborative(corpus)
    if not collaborative.publications:
        log.error("no institutionally collaborative publications")
        return EXIT_NOTHING
    return collaborative


def cmd_classify(config: RunConfig, country: str | None) -> int:
    corpus = _collaborative_or_exit(config)
    if isinstance(corpus, int):
        return corpus
    report.write_classify_csv(_outpath(config, "classify.csv"), corpus, country)
    return EXIT_OK


def cmd_shares(config: RunConfig) -> int:
    corpus = _collaborative_or_exit(config)
    if isinstance(corpus, int):
        return corpus

    present = set()
    for pub in corpus.publications:
        present.update(pub.distinct_countries())
    countries = tuple(c for c in config.countries if c in present)
    for c in config.countries:
        if c not in present:
            log.warning("country %s absent from corpus; omitted from matrices", c)

    report.write_table3_csv(_outpath(config, "table3.csv"), corpus_summary(corpus))
    by_discipline = discipline_shares(corpus, config.disciplines)
    report.write_table_a1_csv(_outpath(config, "tableA1.csv"), by_discipline)

    for kind, matrix_name, fig_name in (("NM", "tableA4.csv", "fig5_nm.csv"), ("IM", "tableA5.csv", "fig5_im.csv")):
        matrix = country_discipline_shares(corpus, countries, kind, config.disciplines)
        report.write_matrix_csv(_outpath(config, matrix_name), matrix)
        report.write_normalized_csv(_outpath(config, fig_name), matrix, normalize(matrix))

    ranks = {
        (c, kind): top_institutions(corpus, c, kind, config.topk)
        for c in countries
        for kind in ("NM", "IM")
    }
    report.write_topk_csv(_outpath(config, "topk.csv"), ranks)
    report.write_fig_a1_csv(
        _outpath(config, "figA1.csv"),
        hosp_univ_combination_share(corpus, config.disciplines),
    )
    return EXIT_OK


def cmd_regress(config: RunConfig, country: str | None, country_mode: bool) -> int:
    corpus = _collaborative_or_exit(config)
    if isinstance(corpus, int):
        return corpus

    if country is not None:
        countries: tuple[str, ...] | None = (country,)
    elif country_mode:
        countries = config.countries
    else:
        countries = None

    table = run_table(
        corpus,
        config.disciplines,
        countries,
        max_authors=config.max_authors,
        min_rows=config.min_rows,
        window=config.citation_window,
    )
    table_name = "table4.csv" if countries is None else "table5.csv"
    report.write_effect_table_csv(_outpath(config, table_name), table)

    for (disc, ctry), fit in table.fits.items():
        design = build_design(
            corpus,
            disc,
            ctry,
            max_authors=config.max_authors,
            min_rows=config.min_rows,
            window=config.citation_window,
        )
        name = f"fit_{disc}.json" if ctry is None else f"fit_{ctry}_{disc}.json"
        report.write_fit_json(_outpath(config, name), fit, vif(design))

    for (disc, ctry), reason in table.skipped.items():
        cell = disc if ctry is None else f"{ctry}/{disc}"
        log.warning("skipped %s: %s", cell, reason)
    if not table.fits:
        log.error("no cell produced a fit")
        return EXIT_NOTHING
    return EXIT_OK


def _parse_prob(value: str) -> float | dict[str, float]:
    if ":" in value:
        out = {}
        for piece in value.split(","):
            code, _, prob = piece.partition(":")
            out[code.strip()] = float(prob)
        return out
    return float(value)


def _parse_mix(value: str) -> dict[str, float]:
    if ":" in value:
        mix = {}
        for piece in value.split(","):
            code, _, prob = piece.partition(":")
            mix[code.strip()] = float(prob)
        return mix
    codes = _split_codes(value)
    return {c: 1.0 / len(codes) for c in codes}


def cmd_synth(args: argparse.Namespace) -> int:
    mix = _parse_mix(args.discipline_mix) if args.discipline_mix else None
    spec = SynthSpec(
        n_pubs=args.n_pubs,
        seed=args.seed if args.seed is not None else 0,
        **({"discipline_mix": mix} if mix else {}),
        countries=_split_codes(args.countries) if args.countries else SAMPLE_COUNTRIES,
        p_nm=_parse_prob(args.p_nm),
        p_im=_parse_prob(args.p_im),
        collab_prob=args.collab_prob,
        foreign_author_prob=args.foreign_author_prob,
        author_mean=args.author_mean,
        refs_mean=args.refs_mean,
        beta=tuple(float(b) for b in args.beta.split(",")),
        alpha=args.alpha,
    )
    try:
        spec.validate()
    except ValueError as exc:
        log.error("invalid synthesis spec: %s", exc)
        return EXIT_USAGE
    corpus = gen_corpus(spec)
    text = "".join(line + "\n" for line in serialize_corpus(corpus))
    directory = os.path.dirname(os.path.abspath(args.output))
    os.makedirs(directory, exist_ok=True)
    report.atomic_write_text(args.output, text)
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", help="line-delimited publication records")
    parser.add_argument("--outdir", help="output directory (default: current)")
    parser.add_argument("--countries", type=_split_codes, help="comma-separated country codes")
    parser.add_argument("--disciplines", type=_split_codes, help="comma-separated discipline codes")
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--seed", type=int, help="random seed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multiaff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check records and emit a QC report")
    _add_common(p)

    p = sub.add_parser("classify", help="per-publication multi-affiliation flags")
    _add_common(p)
    p.add_argument("--country", help="add this country's domestic-flag columns")

    p = sub.add_parser("shares", help="share tables, matrices, and rankings")
    _add_common(p)
    p.add_argument("--topk", type=int, help="institutions per country ranking (default 3)")

    p = sub.add_parser("regress", help="citation-effect regressions")
    _add_common(p)
    p.add_argument("--country", help="restrict to one country (domestic marks)")
    p.add_argument("--by-country", action="store_true", help="one fit per sample country")
    p.add_argument("--max-authors", type=int, dest="max_authors", help="author cap (default 10)")
    p.add_argument("--min-rows", type=int, dest="min_rows", help="minimum rows per fit (default 50)")
    p.add_argument("--window", type=int, help="citation window in years (default 3)")

    p = sub.add_parser("synth", help="generate a synthetic record file")
    p.add_argument("--output", required=True, help="destination record file")
    p.add_argument("--n-pubs", type=int, required=True, dest="n_pubs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--discipline-mix", dest="discipline_mix", help="codes or CODE:prob pairs")
    p.add_argument("--countries", help="comma-separated country codes")
    p.add_argument("--p-nm", dest="p_nm", default="0.35", help="NM insertion probability")
    p.add_argument("--p-im", dest="p_im", default="0.15", help="IM insertion probability")
    p.add_argument("--collab-prob", dest="collab_prob", type=float, default=1.0)
    p.add_argument("--foreign-author-prob", dest="foreign_author_prob", type=float, default=0.15)
    p.add_argument("--author-mean", dest="author_mean", type=float, default=4.0)
    p.add_argument("--refs-mean", dest="refs_mean", type=float, default=30.0)
    p.add_argument("--beta", default="0.5,0.3,0.2,0.005,0.05,0.08,0.03", help="7 comma-separated values")
    p.add_argument("--alpha", type=float, default=0.8)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "synth":
            return cmd_synth(args)
        try:
            config = _resolve(args)
        except (ValueError, OSError) as exc:
            raise _UsageError(str(exc)) from exc
        if args.command == "validate":
            return cmd_validate(config)
        if args.command == "classify":
            return cmd_classify(config, args.country)
        if args.command == "shares":
            return cmd_shares(config)
        if args.command == "regress":
            if args.country and args.by_country:
                raise _UsageError("--country and --by-country are mutually exclusive")
            return cmd_regress(config, args.country, args.by_country)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOTHING


if __name__ == "__main__":
    sys.exit(main())
