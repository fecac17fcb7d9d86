#!/usr/bin/env python3
"""Regenerate the bundled fixture and golden outputs.

The shares goldens are computed here by an independent brute-force pass over
the raw JSON records (own classification, own counting, own formatting), so
the CLI's output is cross-validated byte for byte against a second
implementation of the table contracts. The regress goldens freeze one CLI
run: regression values are validated by dedicated statistical tests, and the
frozen bytes pin determinism.

Run from the repository root:

    python3 tools/gen_goldens.py
"""

from __future__ import annotations

import csv
import io
import json
import os
import subprocess
import sys
import tempfile
from fractions import Fraction

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURE = os.path.join(ROOT, "tests", "data", "fixture_200.jsonl")
GOLDEN = os.path.join(ROOT, "tests", "golden")

DISCIPLINES = (
    "SPA", "NEU", "PSY", "IMM", "CLI", "PHA", "PHY", "MOL", "BIO", "MIC",
    "PLA", "ENV", "GEO", "CHE", "AGR", "MATE", "COM", "ENG", "MATH",
)
COUNTRIES = ("CA", "DE", "FR", "GB", "IT", "JP", "US", "BR", "CN", "IN", "RU", "ZA")

FIXTURE_ARGS = [
    "--n-pubs", "200",
    "--seed", "2",
    "--discipline-mix", "CHE:0.4,PHY:0.3,CLI:0.3",
    "--p-nm", "0.5",
    "--p-im", "0.3",
    "--collab-prob", "0.9",
]


# --- independent share computation (raw dicts, set logic) ----------------------


def pct(x: Fraction) -> str:
    t = (2 * (x * 1000).numerator + (x * 1000).denominator) // (2 * (x * 1000).denominator)
    return f"{t // 10}.{t % 10}"


def ratio2(x: Fraction) -> str:
    h = (2 * (x * 100).numerator + (x * 100).denominator) // (2 * (x * 100).denominator)
    return f"{h // 100}.{h % 100:02d}"


def author_sets(rec: dict, a: dict) -> tuple[set, set]:
    affs = [rec["affiliations"][i] for i in a["affs"]]
    return {x["inst_id"] for x in affs}, {x["country"] for x in affs}


def author_class(rec: dict, a: dict) -> str:
    insts, countries = author_sets(rec, a)
    if len(countries) >= 2:
        return "IM"
    return "NM" if len(insts) >= 2 else "S"


def pub_flags(rec: dict) -> tuple[bool, bool]:
    classes = {author_class(rec, a) for a in rec["authors"]}
    return "NM" in classes, "IM" in classes


def domestic(rec: dict, country: str) -> tuple[bool, bool]:
    nm = im = False
    for a in rec["authors"]:
        cls = author_class(rec, a)
        _, countries = author_sets(rec, a)
        if country in countries:
            nm = nm or cls == "NM"
            im = im or cls == "IM"
    return nm, im


def rec_countries(rec: dict) -> set:
    return {x["country"] for x in rec["affiliations"]}


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def shares_goldens(records: list[dict]) -> dict[str, str]:
    collab = [r for r in records if len({a["inst_id"] for a in r["affiliations"]}) >= 2]
    out: dict[str, str] = {}

    total = len(collab)
    n_nm = sum(pub_flags(r)[0] for r in collab)
    n_im = sum(pub_flags(r)[1] for r in collab)
    n_m = sum(any(pub_flags(r)) for r in collab)
    out["table3.csv"] = csv_text(
        ("", "total", "p_m", "p_nm", "p_im", "p_nom"),
        [
            ("pubs", total, n_m, n_nm, n_im, total - n_m),
            (
                "share",
                "",
                pct(Fraction(n_m, total)),
                pct(Fraction(n_nm, total)),
                pct(Fraction(n_im, total)),
                pct(Fraction(total - n_m, total)),
            ),
        ],
    )

    per_d: dict[str, list[int]] = {}
    for r in collab:
        c = per_d.setdefault(r["discipline"], [0, 0, 0, 0])
        has_nm, has_im = pub_flags(r)
        c[0] += 1
        c[1] += has_nm or has_im
        c[2] += has_nm
        c[3] += has_im
    rows = []
    baseline_nm: dict[str, Fraction] = {}
    baseline_im: dict[str, Fraction] = {}
    for d in DISCIPLINES:
        if d not in per_d:
            continue
        t, m, nm, im = per_d[d]
        baseline_nm[d] = Fraction(nm, t)
        baseline_im[d] = Fraction(im, t)
        rows.append((d, pct(Fraction(m, t)), pct(Fraction(nm, t)), pct(Fraction(im, t))))
    out["tableA1.csv"] = csv_text(("discipline", "share_p_m", "share_p_nm", "share_p_im"), rows)

    for kind, table_name, fig_name in (("NM", "tableA4.csv", "fig5_nm.csv"), ("IM", "tableA5.csv", "fig5_im.csv")):
        baseline = baseline_nm if kind == "NM" else baseline_im
        table_rows, fig_rows = [], []
        for c in COUNTRIES:
            trow, frow = [c], [c]
            for d in DISCIPLINES:
                num = den = 0
                for r in collab:
                    if r["discipline"] != d or c not in rec_countries(r):
                        continue
                    den += 1
                    flags = domestic(r, c)
                    num += flags[0] if kind == "NM" else flags[1]
                if den == 0:
                    trow.append("")
                    frow.append("")
                else:
                    share = Fraction(num, den)
                    trow.append(pct(share))
                    base = baseline.get(d)
                    frow.append(ratio2(share / base) if base else "")
            table_rows.append(trow)
            fig_rows.append(frow)
        out[table_name] = csv_text(("country", *DISCIPLINES), table_rows)
        out[fig_name] = csv_text(("country", *DISCIPLINES), fig_rows)

    topk_rows = []
    for c in COUNTRIES:
        for kind in ("NM", "IM"):
            flagged: dict[str, int] = {}
            totals: dict[str, int] = {}
            names: dict[str, str] = {}
            for r in collab:
                insts = {
                    a["inst_id"]: a["name"] for a in r["affiliations"] if a["country"] == c
                }
                if not insts:
                    continue
                flags = domestic(r, c)
                hit = flags[0] if kind == "NM" else flags[1]
                for inst_id, name in insts.items():
                    totals[inst_id] = totals.get(inst_id, 0) + 1
                    if hit:
                        flagged[inst_id] = flagged.get(inst_id, 0) + 1
                    if inst_id not in names or name < names[inst_id]:
                        names[inst_id] = name
            ranked = sorted(flagged.items(), key=lambda kv: (-kv[1], kv[0]))[:3]
            for position, (inst_id, count) in enumerate(ranked, start=1):
                topk_rows.append(
                    (
                        c,
                        kind,
                        position,
                        inst_id,
                        names[inst_id],
                        count,
                        pct(Fraction(count, totals[inst_id])),
                    )
                )
    out["topk.csv"] = csv_text(
        ("country", "kind", "rank", "inst_id", "inst_name", "count", "share_in_total"), topk_rows
    )

    has_org = any(a.get("org_type") for r in collab for a in r["affiliations"])
    fig_rows = []
    for d in DISCIPLINES:
        num = den = 0
        for r in collab:
            if r["discipline"] != d:
                continue
            hosp = combo = False
            for a in r["authors"]:
                if author_class(r, a) == "S":
                    continue
                orgs = {r["affiliations"][i].get("org_type") for i in a["affs"]}
                if "hospital" not in orgs:
                    continue
                hosp = True
                if orgs & {"university", "college"}:
                    combo = True
            den += hosp
            num += combo
        if not has_org or den == 0:
            fig_rows.append((d, "", "", ""))
        else:
            fig_rows.append((d, den, num, pct(Fraction(num, den))))
    out["figA1.csv"] = csv_text(("discipline", "hospital_pubs", "combination_pubs", "share"), fig_rows)
    return out


def main() -> None:
    os.makedirs(os.path.dirname(FIXTURE), exist_ok=True)
    os.makedirs(GOLDEN, exist_ok=True)

    subprocess.check_call(
        [sys.executable, "-m", "multiaff.cli", "synth", "--output", FIXTURE, *FIXTURE_ARGS]
    )
    print(f"fixture: {FIXTURE}")

    with open(FIXTURE, encoding="utf-8") as fh:
        records = [json.loads(line) for line in fh if line.strip()]

    for name, text in shares_goldens(records).items():
        path = os.path.join(GOLDEN, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(f"golden (oracle): {path}")

    with tempfile.TemporaryDirectory() as tmp:
        subprocess.check_call(
            [sys.executable, "-m", "multiaff.cli", "regress", "--input", FIXTURE, "--outdir", tmp]
        )
        for name in sorted(os.listdir(tmp)):
            if name == "table4.csv" or (name.startswith("fit_") and name.endswith(".json")):
                with open(os.path.join(tmp, name), "rb") as src:
                    payload = src.read()
                with open(os.path.join(GOLDEN, name), "wb") as dst:
                    dst.write(payload)
                print(f"golden (frozen CLI): {os.path.join(GOLDEN, name)}")


if __name__ == "__main__":
    main()
