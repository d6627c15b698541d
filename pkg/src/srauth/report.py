"""Rendering analysis reports and verdict matrices as JSON, CSV and Markdown."""
from __future__ import annotations

import csv
import io
import json
from typing import Iterable

from .authsim import AttackOutcome
from .issues import IssueReport

FORMATS = ("json", "csv", "markdown")
EXTENSIONS = {"json": "json", "csv": "csv", "markdown": "md"}

VERDICT_MARKS = {
    "VULNERABLE": "●",
    "PARTIAL": "◐",
    "NOT_VULNERABLE": "○",
    "NOT_APPLICABLE": "N/A",
}

MATRIX_COLUMNS = ("method", "setting", "terminal_reader", "smartphone_reader", "attack", "verdict")


def dumps_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _markdown(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(c) for c in r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def _pivot(cells: dict[tuple[str, str], str], row_keys: list[str], col_keys: list[str]):
    return [[r] + [cells.get((r, c), "") for c in col_keys] for r in row_keys]


def _ordered(items: Iterable[str]) -> list[str]:
    return list(dict.fromkeys(items))


# -- analysis ----------------------------------------------------------------

def communicability_cells(reports: Iterable[IssueReport]) -> dict[tuple[str, str], str]:
    """(method, reader) -> space-joined codes; an empty string means no issue."""
    cells: dict[tuple[str, str], set[str]] = {}
    for r in reports:
        cells.setdefault((r.method, r.reader), set()).update(r.codes)
    return {k: " ".join(sorted(v)) for k, v in cells.items()}


def comprehensibility_cells(reports: Iterable[IssueReport]) -> dict[tuple[str, str], str]:
    """(method, reader) -> mean score in percent, two decimals."""
    acc: dict[tuple[str, str], list[float]] = {}
    for r in reports:
        acc.setdefault((r.method, r.reader), []).append(r.comprehensibility.score)
    return {k: f"{100 * sum(v) / len(v):.2f}%" for k, v in acc.items()}


def render_method_reader_matrix(cells: dict[tuple[str, str], str], fmt: str, title: str) -> str:
    methods = sorted({m for m, _ in cells})
    readers = sorted({r for _, r in cells})
    rows = _pivot(cells, methods, readers)
    if fmt == "json":
        return dumps_json({"title": title, "readers": readers,
                           "rows": {m: dict(zip(readers, row[1:])) for m, row in zip(methods, rows)}})
    if fmt == "csv":
        return _csv(["method"] + readers, rows)
    return f"### {title}\n\n" + _markdown(["method"] + readers, rows)


def render_report(report: IssueReport) -> str:
    return dumps_json(report.to_dict())


# -- simulation --------------------------------------------------------------

def render_outcomes(outcomes: list[AttackOutcome], fmt: str) -> str:
    if fmt == "json":
        return dumps_json([o.to_dict() for o in outcomes])
    if fmt == "csv":
        rows = [[o.method, o.setting.value, o.terminal_reader or "", o.smartphone_reader or "",
                 o.attack.value, o.verdict.value] for o in outcomes]
        return _csv(MATRIX_COLUMNS, rows)
    # reader setting and attack down the side, methods across, like the printed threat tables
    def row_label(o):
        readers = " with ".join(r for r in (o.terminal_reader, o.smartphone_reader) if r)
        return f"{readers} / {o.attack.value}"

    cells = {(row_label(o), o.method): VERDICT_MARKS[o.verdict.value] for o in outcomes}
    rows_k = _ordered(row_label(o) for o in outcomes)
    cols_k = _ordered(o.method for o in outcomes)
    legend = "\n● vulnerable, ◐ fifty-fifty, ○ not vulnerable, N/A infeasible; blank: not simulated\n"
    return _markdown(["readers / attack"] + cols_k, _pivot(cells, rows_k, cols_k)) + legend


def golden_key(row: dict[str, str]) -> tuple[str, str, str, str, str]:
    return (row["method"], row["setting"], row["terminal_reader"], row["smartphone_reader"], row["attack"])


def compare_golden(outcomes: Iterable[AttackOutcome], golden: Iterable[dict[str, str]]) -> list[str]:
    """Describe each golden cell that the simulation misses or contradicts."""
    got = {o.key: o.verdict.value for o in outcomes}
    problems = []
    for row in golden:
        k = golden_key(row)
        if k not in got:
            problems.append(f"missing cell {k} (golden {row['verdict']}, {row['source_anchor']})")
        elif got[k] != row["verdict"]:
            problems.append(f"cell {k}: simulated {got[k]}, golden {row['verdict']} ({row['source_anchor']})")
    return problems
