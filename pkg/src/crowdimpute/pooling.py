"""Pooling of multiple imputations and side-by-side method reports.

Continuous cells pool to the arithmetic mean and report median(p25,p75);
categorical cells report per-category vote counts and the majority winner.
The comparison report lines the two provenances up per ground-truth cell and
adds coverage/accuracy aggregates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .crowd import JudgmentSet
from .dataset import (
    CATEGORICAL,
    CONTINUOUS,
    Cell,
    Dataset,
    GroundTruth,
    quantile_linear,
)
from .mice import ImputationSet
from .questionnaire import Question, format_cell


class PoolingError(ValueError):
    """Empty input, mixed value kinds, or mismatched cell coverage."""


def pool_point(values: Sequence[float]) -> float:
    """Arithmetic mean of the m point estimates (exact under permutation)."""
    if not values:
        raise PoolingError("cannot pool an empty list")
    return math.fsum(values) / len(values)


@dataclass(frozen=True)
class PooledCellSummary:
    """Pooled view of one cell's m imputed values."""

    cell: tuple[int, str]
    kind: str
    m: int
    mean: float | None = None
    median: float | None = None
    p25: float | None = None
    p75: float | None = None
    values: tuple[float, ...] | None = None
    between_variance: float | None = None
    total_variance: float | None = None
    votes: tuple[tuple[str, int], ...] | None = None
    winner: str | None = None
    margin: int | None = None

    def __post_init__(self) -> None:
        if self.kind == CONTINUOUS:
            if not (self.p25 <= self.median <= self.p75):  # type: ignore[operator]
                raise PoolingError(f"cell {self.cell}: quantiles out of order")
        elif self.votes is not None and sum(c for _, c in self.votes) != self.m:
            raise PoolingError(f"cell {self.cell}: vote counts do not sum to m")

    def display(self) -> str:
        """Table cell: "median(p25,p75)" for continuous, "a - b" votes otherwise."""
        if self.kind == CONTINUOUS:
            return f"{self.median:.1f}({self.p25:.1f},{self.p75:.1f})"
        return " - ".join(str(c) for _, c in self.votes or ())

    def to_dict(self) -> dict:
        d: dict = {"row": self.cell[0], "column": self.cell[1], "kind": self.kind, "m": self.m}
        if self.kind == CONTINUOUS:
            d.update(
                mean=self.mean,
                median=self.median,
                p25=self.p25,
                p75=self.p75,
                values=list(self.values or ()),
                between_variance=self.between_variance,
                total_variance=self.total_variance,
            )
        else:
            d.update(
                votes=[[label, c] for label, c in self.votes or ()],
                winner=self.winner,
                margin=self.margin,
            )
        return d


def summarize_cell(
    values: Sequence[Cell],
    kind: str,
    cell: tuple[int, str] = (-1, ""),
    categories: Sequence[str] | None = None,
) -> PooledCellSummary:
    """Pool one cell's imputed values into a PooledCellSummary.

    Continuous values yield mean/median/p25/p75 (type-7 quantiles) plus
    between-imputation variance and the no-within-component total
    (1 + 1/m) * between.  Categorical values yield vote counts in
    `categories` order (first-appearance order when not given), the majority
    winner, and the margin; exact ties report winner "tie".
    """
    if not values:
        raise PoolingError("cannot summarize an empty value list")
    m = len(values)
    if kind == CONTINUOUS:
        try:
            vals = [float(v) for v in values]  # type: ignore[arg-type]
        except (TypeError, ValueError):
            raise PoolingError(f"cell {cell}: non-numeric value in continuous summary")
        mean = pool_point(vals)
        ordered = sorted(vals)
        between = (
            math.fsum((v - mean) ** 2 for v in vals) / (m - 1) if m > 1 else 0.0
        )
        return PooledCellSummary(
            cell=tuple(cell),
            kind=CONTINUOUS,
            m=m,
            mean=mean,
            median=quantile_linear(ordered, 0.5),
            p25=quantile_linear(ordered, 0.25),
            p75=quantile_linear(ordered, 0.75),
            values=tuple(vals),
            between_variance=between,
            total_variance=(1.0 + 1.0 / m) * between,
        )
    if kind != CATEGORICAL:
        raise PoolingError(f"unknown kind {kind!r}")
    labels = [str(v) for v in values]
    if any(isinstance(v, float) for v in values):
        raise PoolingError(f"cell {cell}: numeric value in categorical summary")
    order: list[str] = list(categories) if categories else []
    for l in labels:
        if l not in order:
            order.append(l)
    counts = [(label, labels.count(label)) for label in order]
    ranked = sorted(counts, key=lambda t: -t[1])
    top = ranked[0][1]
    contenders = [label for label, c in counts if c == top]
    winner = contenders[0] if len(contenders) == 1 else "tie"
    margin = top - (ranked[1][1] if len(ranked) > 1 else 0)
    return PooledCellSummary(
        cell=tuple(cell),
        kind=CATEGORICAL,
        m=m,
        votes=tuple(counts),
        winner=winner,
        margin=0 if winner == "tie" else margin,
    )


def summarize_imputation_set(s: ImputationSet) -> list[PooledCellSummary]:
    """One pooled summary per originally-missing cell."""
    out = []
    schema = {c.name: c for c in s.datasets[0].columns}
    for row, col in s.cells:
        spec = schema[col]
        out.append(
            summarize_cell(
                s.values_for(row, col),
                spec.kind,
                cell=(row, col),
                categories=spec.categories,
            )
        )
    return out


def imputation_set_from_judgments(
    base: Dataset,
    questions: Sequence[Question],
    judgments: JudgmentSet,
    seed: int | None = None,
) -> ImputationSet:
    """Turn k accepted judgments per question into k completed dataset copies.

    The j-th copy takes every cell's j-th accepted answer, so copies are
    exchangeable draws; every question must have the same accepted count.
    """
    per_cell: dict[tuple[int, str], list[Cell]] = {}
    for q in questions:
        vals = judgments.accepted_values(q.id)
        if not vals:
            raise PoolingError(f"question {q.id}: no accepted judgments")
        per_cell[(q.row, q.column)] = vals
    counts = {len(v) for v in per_cell.values()}
    if len(counts) != 1:
        raise PoolingError(f"unequal accepted-judgment counts per question: {sorted(counts)}")
    m = counts.pop()
    datasets = []
    for j in range(m):
        datasets.append(base.replace_cells({cell: vals[j] for cell, vals in per_cell.items()}))
    return ImputationSet(
        datasets=tuple(datasets),
        provenance="crowd",
        cells=tuple(per_cell),
        seed=seed,
    )


# -- method comparison ---------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    row: int
    column: str
    kind: str
    original: Cell
    left: PooledCellSummary
    right: PooledCellSummary


@dataclass(frozen=True)
class EvaluationReport:
    labels: tuple[str, str]
    rows: tuple[ReportRow, ...]
    metrics: Mapping[str, object]

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "rows": [
                {
                    "row": r.row,
                    "column": r.column,
                    "kind": r.kind,
                    "original": r.original,
                    self.labels[0]: r.left.to_dict(),
                    self.labels[1]: r.right.to_dict(),
                }
                for r in self.rows
            ],
            "metrics": dict(self.metrics),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def _table_cells(self) -> tuple[list[str], list[list[str]]]:
        header = ["row", "column", "original", *self.labels]
        body = [
            [
                str(r.row),
                r.column,
                format_cell(r.original),
                r.left.display(),
                r.right.display(),
            ]
            for r in self.rows
        ]
        return header, body

    def _metric_lines(self) -> list[str]:
        la, lb = self.labels
        out = []
        cov = self.metrics.get("iqr_coverage")
        if cov is not None:
            out.append(f"IQR coverage: {la} {cov[la]:.2f}, {lb} {cov[lb]:.2f}")
        mae = self.metrics.get("median_abs_error")
        if mae is not None:
            out.append(f"Median absolute error of medians: {la} {mae[la]:.2f}, {lb} {mae[lb]:.2f}")
        acc = self.metrics.get("winner_accuracy")
        if acc is not None:
            out.append(f"Winner accuracy: {la} {acc[la]:.2f}, {lb} {acc[lb]:.2f}")
        if "agreement_count" in self.metrics:
            out.append(
                f"Method agreement: {self.metrics['agreement_count']} of "
                f"{self.metrics['categorical_cells']} categorical cells"
            )
        return out

    def to_markdown(self) -> str:
        header, body = self._table_cells()
        lines = [
            "| " + " | ".join(header) + " |",
            "| " + " | ".join("---" for _ in header) + " |",
        ]
        lines += ["| " + " | ".join(row) + " |" for row in body]
        lines.append("")
        lines += self._metric_lines()
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        header, body = self._table_cells()
        widths = [max(len(h), *(len(row[i]) for row in body)) for i, h in enumerate(header)]
        def fmt(cells: list[str]) -> str:
            return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
        lines = [fmt(header), fmt(["-" * w for w in widths])]
        lines += [fmt(row) for row in body]
        lines.append("")
        lines += self._metric_lines()
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "md":
            return self.to_markdown()
        if fmt == "txt":
            return self.to_text()
        raise PoolingError(f"unknown report format {fmt!r}")


def _median(values: list[float]) -> float:
    return quantile_linear(sorted(values), 0.5)


def compare(gt: GroundTruth, a: ImputationSet, b: ImputationSet) -> EvaluationReport:
    """Per-cell comparison of two imputation sets against the ground truth.

    Both sets must cover exactly the ground-truth cells; they may differ in
    m.  Aggregates: IQR coverage and median absolute error of medians over
    continuous cells; winner accuracy and cross-method agreement over
    categorical ones.
    """
    want = set(gt.cells())
    for name, s in (("first", a), ("second", b)):
        have = set(s.cells)
        if have != want:
            missing = sorted(want - have)
            extra = sorted(have - want)
            raise PoolingError(
                f"{name} imputation set does not cover the ground-truth cells "
                f"(missing {missing}, extra {extra})"
            )

    la, lb = a.provenance, b.provenance
    if la == lb:
        la, lb = f"{la}-a", f"{lb}-b"

    sum_a = {s.cell: s for s in summarize_imputation_set(a)}
    sum_b = {s.cell: s for s in summarize_imputation_set(b)}
    schema = {c.name: c for c in a.datasets[0].columns}

    rows = []
    cont: list[ReportRow] = []
    cat: list[ReportRow] = []
    for r, c, original in gt.entries:
        row = ReportRow(
            row=r,
            column=c,
            kind=schema[c].kind,
            original=original,
            left=sum_a[(r, c)],
            right=sum_b[(r, c)],
        )
        rows.append(row)
        (cont if row.kind == CONTINUOUS else cat).append(row)

    metrics: dict[str, object] = {
        "continuous_cells": len(cont),
        "categorical_cells": len(cat),
    }
    if cont:
        def coverage(side: str) -> float:
            hits = 0
            for row in cont:
                s = row.left if side == "left" else row.right
                if s.p25 <= float(row.original) <= s.p75:  # type: ignore[arg-type]
                    hits += 1
            return hits / len(cont)

        def mae(side: str) -> float:
            return _median(
                [
                    abs((row.left if side == "left" else row.right).median - float(row.original))  # type: ignore[arg-type]
                    for row in cont
                ]
            )

        metrics["iqr_coverage"] = {la: coverage("left"), lb: coverage("right")}
        metrics["median_abs_error"] = {la: mae("left"), lb: mae("right")}
    if cat:
        def accuracy(side: str) -> float:
            hits = sum(
                1
                for row in cat
                if (row.left if side == "left" else row.right).winner == str(row.original)
            )
            return hits / len(cat)

        agree = sum(1 for row in cat if row.left.winner == row.right.winner)
        metrics["winner_accuracy"] = {la: accuracy("left"), lb: accuracy("right")}
        metrics["agreement_count"] = agree
        metrics["agreement_rate"] = agree / len(cat)
    else:
        metrics["agreement_rate"] = 1.0

    return EvaluationReport(labels=(la, lb), rows=tuple(rows), metrics=metrics)
