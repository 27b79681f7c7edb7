"""Survey generation: intro narrative, plot payloads, and per-cell questions.

A missing cell becomes one Question whose prompt embeds the row's observed
values; questions are grouped into questionnaires of at most ten, each
carrying the same statistics-derived intro text, plot data, and required
judgment count k.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .dataset import (
    CATEGORICAL,
    CONTINUOUS,
    Cell,
    Dataset,
    SummaryStats,
    correlation_rank,
    quantile_linear,
)

MAX_QUESTIONS_PER_FORM = 10


class QuestionnaireError(ValueError):
    """Bad generation input: wrong cell state, bad template, empty batch."""


def format_number(v: float) -> str:
    """Render a float without a trailing .0 so prompts read naturally."""
    if isinstance(v, float) and v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return str(v)


def format_cell(v: Cell) -> str:
    if isinstance(v, float):
        return format_number(v)
    return str(v)


def _fmt1(v: float) -> str:
    """Intro-text precision: one decimal place, no trailing zero."""
    return f"{round(v, 1):g}"


def _fmt_bound(v: float) -> str:
    return f"{v:g}"


def join_phrases(phrases: Sequence[str]) -> str:
    if len(phrases) <= 1:
        return "".join(phrases)
    if len(phrases) == 2:
        return f"{phrases[0]} and {phrases[1]}"
    return ", ".join(phrases[:-1]) + f", and {phrases[-1]}"


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    value: Cell = None
    reason: str | None = None


@dataclass(frozen=True)
class AnswerConstraint:
    """What counts as a valid answer: an inclusive numeric range or a choice list."""

    kind: str
    lo: float | None = None
    hi: float | None = None
    choices: tuple[str, ...] | None = None
    hint_text: str = ""

    def __post_init__(self) -> None:
        if self.kind == "numeric_range":
            if self.lo is None or self.hi is None or not self.lo < self.hi:
                raise QuestionnaireError("numeric_range needs lo < hi")
            object.__setattr__(self, "lo", float(self.lo))
            object.__setattr__(self, "hi", float(self.hi))
            if not self.hint_text:
                object.__setattr__(
                    self, "hint_text", f"valid range {_fmt_bound(self.lo)}–{_fmt_bound(self.hi)}"
                )
        elif self.kind == "categorical_choice":
            if self.choices is None or len(self.choices) < 2:
                raise QuestionnaireError("categorical_choice needs >=2 choices")
            object.__setattr__(self, "choices", tuple(self.choices))
            if not self.hint_text:
                object.__setattr__(self, "hint_text", "choose one of " + ", ".join(self.choices))
        else:
            raise QuestionnaireError(f"unknown constraint kind {self.kind!r}")

    def check(self, raw: Cell) -> ValidationResult:
        """Validate a raw answer; total (never raises on bad input)."""
        if self.kind == "numeric_range":
            try:
                v = float(raw)  # type: ignore[arg-type]
            except (TypeError, ValueError):
                return ValidationResult(False, reason=f"not a number: {raw!r}")
            if math.isnan(v) or math.isinf(v):
                return ValidationResult(False, reason=f"not a finite number: {raw!r}")
            if not self.lo <= v <= self.hi:  # type: ignore[operator]
                return ValidationResult(
                    False,
                    reason=f"out of range {_fmt_bound(self.lo)}–{_fmt_bound(self.hi)}",  # type: ignore[arg-type]
                )
            return ValidationResult(True, value=v)
        label = str(raw).strip()
        if label not in self.choices:  # type: ignore[operator]
            return ValidationResult(False, reason="not one of " + ", ".join(self.choices))  # type: ignore[arg-type]
        return ValidationResult(True, value=label)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "lo": self.lo,
            "hi": self.hi,
            "choices": list(self.choices) if self.choices else None,
            "hint_text": self.hint_text,
        }

    @staticmethod
    def from_dict(d: Mapping) -> "AnswerConstraint":
        return AnswerConstraint(
            kind=d["kind"],
            lo=d.get("lo"),
            hi=d.get("hi"),
            choices=tuple(d["choices"]) if d.get("choices") else None,
            hint_text=d.get("hint_text", ""),
        )


@dataclass(frozen=True)
class Question:
    """One missing cell posed as a survey question."""

    id: str
    row: int
    column: str
    kind: str
    prompt_text: str
    constraint: AnswerConstraint
    context_fields: tuple[tuple[str, Cell], ...]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "row": self.row,
            "column": self.column,
            "kind": self.kind,
            "prompt": self.prompt_text,
            "constraint": self.constraint.to_dict(),
            "context": [[c, v] for c, v in self.context_fields],
        }

    @staticmethod
    def from_dict(d: Mapping) -> "Question":
        return Question(
            id=d["id"],
            row=d["row"],
            column=d["column"],
            kind=d["kind"],
            prompt_text=d["prompt"],
            constraint=AnswerConstraint.from_dict(d["constraint"]),
            context_fields=tuple((c, v) for c, v in d["context"]),
        )


@dataclass(frozen=True)
class PlotSpec:
    """Data payload for one client-rendered plot; no pixels here."""

    kind: str
    x_column: str
    y_column: str
    caption: str
    points: tuple[tuple[float, float], ...] | None = None
    groups: tuple[Mapping, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "x_column": self.x_column,
            "y_column": self.y_column,
            "caption": self.caption,
            "points": [[x, y] for x, y in self.points] if self.points is not None else None,
            "groups": [dict(g) for g in self.groups] if self.groups is not None else None,
        }

    @staticmethod
    def from_dict(d: Mapping) -> "PlotSpec":
        return PlotSpec(
            kind=d["kind"],
            x_column=d["x_column"],
            y_column=d["y_column"],
            caption=d["caption"],
            points=tuple((x, y) for x, y in d["points"]) if d.get("points") is not None else None,
            groups=tuple(d["groups"]) if d.get("groups") is not None else None,
        )


@dataclass(frozen=True)
class Questionnaire:
    id: str
    intro_text: str
    questions: tuple[Question, ...]
    k: int
    prior_blurb: str | None = None
    plots: tuple[PlotSpec, ...] = ()

    def __post_init__(self) -> None:
        if not 1 <= len(self.questions) <= MAX_QUESTIONS_PER_FORM:
            raise QuestionnaireError(
                f"questionnaire must hold 1..{MAX_QUESTIONS_PER_FORM} questions, got {len(self.questions)}"
            )
        if self.k < 1:
            raise QuestionnaireError("k must be >= 1")
        object.__setattr__(self, "questions", tuple(self.questions))
        object.__setattr__(self, "plots", tuple(self.plots))

    def question(self, question_id: str) -> Question:
        for q in self.questions:
            if q.id == question_id:
                return q
        raise QuestionnaireError(f"no question {question_id!r} in questionnaire {self.id}")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "intro": self.intro_text,
            "prior_blurb": self.prior_blurb,
            "plots": [p.to_dict() for p in self.plots],
            "questions": [q.to_dict() for q in self.questions],
            "k": self.k,
        }

    @staticmethod
    def from_dict(d: Mapping) -> "Questionnaire":
        return Questionnaire(
            id=d["id"],
            intro_text=d["intro"],
            prior_blurb=d.get("prior_blurb"),
            plots=tuple(PlotSpec.from_dict(p) for p in d.get("plots", [])),
            questions=tuple(Question.from_dict(q) for q in d["questions"]),
            k=d["k"],
        )


# -- question rendering ------------------------------------------------------


def context_phrase(column: str, value: Cell, unit: str | None = None) -> str:
    text = f"{column} is {format_cell(value)}"
    if unit:
        text += f" {unit}"
    return text


_PLACEHOLDER = re.compile(r"\{(target|context|col:([A-Za-z0-9_]+)(\??))\}")


def _interpolate(
    template: str,
    target: str,
    phrases: Mapping[str, str],
    values: Mapping[str, str],
    all_columns: Sequence[str],
) -> str:
    def sub(m: re.Match) -> str:
        token = m.group(1)
        if token == "target":
            return target
        if token == "context":
            return join_phrases(list(phrases.values()))
        name = m.group(2)
        optional = m.group(3) == "?"
        if name not in all_columns:
            raise QuestionnaireError(f"template references unknown column {name!r}")
        if name in values:
            return values[name]
        if optional:
            return ""
        raise QuestionnaireError(
            f"template references missing context field {name!r} without the '?' omission marker"
        )

    return _PLACEHOLDER.sub(sub, template)


def default_template(kind: str, has_context: bool) -> str:
    if kind == CATEGORICAL:
        if has_context:
            return "What is the {target} given that {context}?"
        return "What do you think is the most probable {target}?"
    if has_context:
        return (
            "We have a record with an unknown {target}. Given that {context}, "
            "what do you think is the most probable {target}?"
        )
    return "We have a record with an unknown {target}. What do you think is the most probable {target}?"


def default_constraint(d: Dataset, column: str) -> AnswerConstraint:
    spec = d.spec(column)
    if spec.kind == CATEGORICAL:
        return AnswerConstraint(kind="categorical_choice", choices=spec.categories)
    if spec.valid_range is None:
        raise QuestionnaireError(
            f"column {column}: continuous target needs a valid_range or an explicit constraint"
        )
    lo, hi = spec.valid_range
    return AnswerConstraint(kind="numeric_range", lo=lo, hi=hi)


def render_question(
    d: Dataset,
    cell: tuple[int, str],
    constraint: AnswerConstraint | None = None,
    template: str | None = None,
) -> Question:
    """Pose one masked cell as a question embedding the row's observed values.

    Context is every other column observed in that row, in schema order;
    unobserved context columns are left out of the prompt.  Categorical
    targets always get a choice constraint over the column's categories.
    """
    row, column = cell
    spec = d.spec(column)
    if not d.is_missing(row, column):
        raise QuestionnaireError(f"cell ({row}, {column}) is not missing; nothing to ask")

    context_fields: list[tuple[str, Cell]] = []
    phrases: dict[str, str] = {}
    values: dict[str, str] = {}
    for other in d.columns:
        if other.name == column:
            continue
        if d.is_missing(row, other.name):
            continue
        value = d.cell(row, other.name)
        context_fields.append((other.name, value))
        phrases[other.name] = context_phrase(other.name, value, other.unit)
        values[other.name] = format_cell(value) + (f" {other.unit}" if other.unit else "")

    if constraint is None:
        constraint = default_constraint(d, column)
    elif spec.kind == CATEGORICAL and constraint.kind != "categorical_choice":
        raise QuestionnaireError(f"column {column}: categorical target needs a choice constraint")

    if template is None:
        template = default_template(spec.kind, bool(context_fields))
    prompt = _interpolate(template, column, phrases, values, list(d.column_names))
    prompt = re.sub(r"  +", " ", prompt).strip()

    return Question(
        id=f"q{row:04d}-{column}",
        row=row,
        column=column,
        kind=spec.kind,
        prompt_text=prompt,
        constraint=constraint,
        context_fields=tuple(context_fields),
    )


def parse_prompt_context(prompt: str, question: Question) -> dict[str, str]:
    """Recover the context values embedded in a prompt (round-trip check)."""
    found: dict[str, str] = {}
    for name, value in question.context_fields:
        needle = f"{name} is {format_cell(value)}"
        if needle in prompt:
            found[name] = format_cell(value)
    return found


# -- intro narrative and plots -----------------------------------------------


def _five_number(values: Sequence[float]) -> dict:
    vals = sorted(values)
    return {
        "n": len(vals),
        "min": vals[0],
        "p25": quantile_linear(vals, 0.25),
        "median": quantile_linear(vals, 0.5),
        "p75": quantile_linear(vals, 0.75),
        "max": vals[-1],
    }


def _observed_pairs(d: Dataset, x: str, y: str) -> list[tuple[Cell, Cell]]:
    xs = set(d.observed_rows(x))
    return [(d.cell(r, x), d.cell(r, y)) for r in d.observed_rows(y) if r in xs]


def _direction_word(r: float | None) -> str | None:
    if r is None or abs(r) < 0.05:
        return None
    return "increase" if r > 0 else "decrease"


def build_intro(
    stats: SummaryStats,
    target: str,
    top_m: int = 3,
    prior_blurb: str | None = None,
    *,
    prepend_prior: bool = False,
    dataset: Dataset | None = None,
    context_sentence: str | None = None,
) -> tuple[str, tuple[PlotSpec, ...]]:
    """Build the survey intro: context sentence, target range, grouped-mean
    bullets for the `top_m` strongest-associated attributes, and the optional
    prior blurb (appended by default, prepended on request).

    Returns the intro text plus plot payloads: a scatter (or grouped box)
    per top-ranked continuous attribute and a box per categorical one.
    Scatter points come from `dataset`; without it plots carry no points.
    """
    if top_m < 1:
        raise QuestionnaireError("top_m must be >= 1")
    ranked = correlation_rank(stats, target)
    if not ranked:
        raise QuestionnaireError(f"no associations computed for target {target!r}")
    top = [name for name, _ in ranked[:top_m]]
    target_kind = stats.kind_of(target)

    lines: list[str] = []
    if context_sentence is None:
        context_sentence = (
            f"We are studying a dataset of {stats.n_rows} records with attributes "
            + ", ".join(stats.column_order)
            + "."
        )
    lines.append(context_sentence)

    if target_kind == CONTINUOUS:
        ts = stats.continuous_summary(target)
        unit = f" {ts.unit}" if ts.unit else ""
        lines.append(
            f"{target} values range from {_fmt1(ts.min)} to {_fmt1(ts.max)}{unit}, "
            f"with an average of {_fmt1(ts.mean)}."
        )
    else:
        cs = stats.categorical_summary(target)
        parts = [f"{_fmt1(p * 100)}% are {label}" for label, p in cs.proportions.items()]
        lines.append(f"Across the records, {join_phrases(parts)}.")

    for attr in top:
        attr_kind = stats.kind_of(attr)
        bullet = _bullet(stats, target, target_kind, attr, attr_kind)
        if bullet:
            lines.append("- " + bullet)

    if prior_blurb:
        if prepend_prior:
            lines.insert(0, prior_blurb)
        else:
            lines.append(prior_blurb)

    plots = _build_plots(stats, target, target_kind, top, dataset)
    return "\n".join(lines), plots


def _bullet(stats: SummaryStats, target: str, target_kind: str, attr: str, attr_kind: str) -> str | None:
    if target_kind == CONTINUOUS and attr_kind == CONTINUOUS:
        direction = _direction_word(stats.association(target, attr))
        buckets = stats.bucket_stats(target, attr)
        head = f"{target} tends to {direction} with {attr}" if direction else f"{target} varies with {attr}"
        if not buckets:
            return head + "."
        parts = []
        for i, b in enumerate(buckets):
            if i == 0:
                where = f"{attr} up to {_fmt1(b.hi)}"
            elif i == len(buckets) - 1:
                where = f"{attr} above {_fmt1(b.lo)}"
            else:
                where = f"{attr} between {_fmt1(b.lo)} and {_fmt1(b.hi)}"
            parts.append(f"{_fmt1(b.mean)} for {where}")
        return f"{head}: the average {target} is {join_phrases(parts)}."
    if target_kind == CONTINUOUS and attr_kind == CATEGORICAL:
        groups = stats.group_stats(target, attr)
        if not groups:
            return None
        parts = [f"{_fmt1(g.mean)} for {g.label}" for g in groups]
        return f"The average {target} is {join_phrases(parts)}."
    if target_kind == CATEGORICAL and attr_kind == CONTINUOUS:
        groups = stats.group_stats(attr, target)
        if not groups:
            return None
        parts = [f"{_fmt1(g.mean)} for {g.label}" for g in groups]
        return f"The average {attr} is {join_phrases(parts)}."
    return None


def _build_plots(
    stats: SummaryStats,
    target: str,
    target_kind: str,
    top: Sequence[str],
    dataset: Dataset | None,
) -> tuple[PlotSpec, ...]:
    plots: list[PlotSpec] = []
    for attr in top:
        attr_kind = stats.kind_of(attr)
        if attr_kind == CONTINUOUS and target_kind == CONTINUOUS:
            points: tuple[tuple[float, float], ...] = ()
            if dataset is not None:
                points = tuple(
                    (float(x), float(y)) for x, y in _observed_pairs(dataset, attr, target)
                )
            plots.append(
                PlotSpec(
                    kind="scatter",
                    x_column=attr,
                    y_column=target,
                    caption=f"{target} versus {attr}",
                    points=points,
                )
            )
        elif attr_kind == CONTINUOUS and target_kind == CATEGORICAL:
            plots.append(
                _box_plot(stats, value_column=attr, by_column=target, dataset=dataset)
            )
        elif attr_kind == CATEGORICAL and target_kind == CONTINUOUS:
            plots.append(
                _box_plot(stats, value_column=target, by_column=attr, dataset=dataset)
            )
    return tuple(plots)


def _box_plot(stats: SummaryStats, value_column: str, by_column: str, dataset: Dataset | None) -> PlotSpec:
    groups: list[dict] = []
    if dataset is not None:
        by_label: dict[str, list[float]] = {}
        for label, value in _observed_pairs(dataset, by_column, value_column):
            by_label.setdefault(str(label), []).append(float(value))
        for label in dataset.spec(by_column).categories or sorted(by_label):
            if by_label.get(label):
                groups.append({"label": label, **_five_number(by_label[label])})
    else:
        for g in stats.group_stats(value_column, by_column) or ():
            groups.append({"label": g.label, "n": g.n, "mean": g.mean, "sd": g.sd})
    return PlotSpec(
        kind="box",
        x_column=by_column,
        y_column=value_column,
        caption=f"{value_column} by {by_column}",
        groups=tuple(groups),
    )


# -- batching ----------------------------------------------------------------


def batch(
    questions: Sequence[Question],
    intro_text: str,
    plots: Sequence[PlotSpec],
    k: int,
    prior_blurb: str | None = None,
    id_prefix: str = "qn",
) -> list[Questionnaire]:
    """Split questions into questionnaires of at most ten, sharing intro/plots/k."""
    if not questions:
        raise QuestionnaireError("no questions to batch")
    out = []
    for i in range(0, len(questions), MAX_QUESTIONS_PER_FORM):
        chunk = tuple(questions[i : i + MAX_QUESTIONS_PER_FORM])
        out.append(
            Questionnaire(
                id=f"{id_prefix}-{i // MAX_QUESTIONS_PER_FORM + 1:03d}",
                intro_text=intro_text,
                prior_blurb=prior_blurb,
                plots=tuple(plots),
                questions=chunk,
                k=k,
            )
        )
    return out
