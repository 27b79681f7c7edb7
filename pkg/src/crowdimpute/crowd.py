"""Simulated survey respondents.

A Persona answers questions the way the intro text suggests a careful reader
would (with probability `attention`), or essentially at random otherwise.
Attentive continuous answers are normal draws around the grouped mean of the
stratum matching the question's context; attentive categorical answers follow
the published category proportions, tilted by per-attribute evidence from the
grouped means and by the persona's own bias.  Inattentive answers are uniform
over an inflated range, or bias-only over the choices.

All randomness is split per question from one master seed, so results do not
depend on evaluation order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .dataset import (
    CATEGORICAL,
    CONTINUOUS,
    Cell,
    Dataset,
    DatasetError,
    SummaryStats,
    correlation_rank,
)
from .questionnaire import Question, Questionnaire

RESOLICIT_CAP_FACTOR = 10
MAX_REDRAWS = 100
SMOOTHING = 0.5


class CrowdError(ValueError):
    """Bad persona config or an unsatisfiable collection run."""


@dataclass(frozen=True)
class Persona:
    """One simulated respondent profile.

    `attention` is the probability of answering from the intro statistics
    rather than at random; `noise_sd_scale` widens or narrows the spread of
    attentive continuous answers; `shift` is an additive offset on attentive
    continuous answers; `category_bias` holds per-label log-odds offsets.
    Personas with `respects_constraints` keep redrawing (then clamp) until
    the answer satisfies the question's constraint.
    """

    name: str
    attention: float
    noise_sd_scale: float
    shift: float = 0.0
    category_bias: Mapping[str, float] = field(default_factory=dict)
    respects_constraints: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.attention <= 1.0:
            raise CrowdError(f"persona {self.name}: attention must be in [0, 1]")
        if not self.noise_sd_scale > 0:
            raise CrowdError(f"persona {self.name}: noise_sd_scale must be > 0")
        object.__setattr__(self, "category_bias", dict(self.category_bias))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "attention": self.attention,
            "noise_sd_scale": self.noise_sd_scale,
            "shift": self.shift,
            "category_bias": dict(self.category_bias),
            "respects_constraints": self.respects_constraints,
        }

    @staticmethod
    def from_dict(d: Mapping) -> "Persona":
        return Persona(
            name=d["name"],
            attention=d["attention"],
            noise_sd_scale=d["noise_sd_scale"],
            shift=d.get("shift", 0.0),
            category_bias=d.get("category_bias", {}),
            respects_constraints=d.get("respects_constraints", True),
        )


# Presets reproducing the qualitative behaviors seen in crowd pilots: novices
# mostly guess (heavy male lean, stray ages); experienced workers read the
# intro but keep a residual lean toward males and older ages.
PRESETS: dict[str, Persona] = {
    "novice-unconstrained": Persona(
        name="novice-unconstrained",
        attention=0.1,
        noise_sd_scale=1.2,
        shift=0.0,
        category_bias={"Male": 1.6},
        respects_constraints=False,
    ),
    "novice-constrained": Persona(
        name="novice-constrained",
        attention=0.1,
        noise_sd_scale=1.2,
        shift=0.0,
        category_bias={"Male": 1.10},
        respects_constraints=True,
    ),
    "experienced": Persona(
        name="experienced",
        attention=0.7,
        noise_sd_scale=0.8,
        shift=2.0,
        category_bias={"Male": 0.72},
        respects_constraints=True,
    ),
}


@dataclass(frozen=True)
class PersonaMix:
    """Weighted persona pool; weights must sum to 1."""

    entries: tuple[tuple[Persona, float], ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise CrowdError("persona mix is empty")
        total = math.fsum(w for _, w in self.entries)
        if abs(total - 1.0) > 1e-9:
            raise CrowdError(f"persona weights must sum to 1, got {total}")
        if any(w < 0 for _, w in self.entries):
            raise CrowdError("persona weights must be nonnegative")
        object.__setattr__(self, "entries", tuple(self.entries))

    @staticmethod
    def single(p: Persona) -> "PersonaMix":
        return PersonaMix(((p, 1.0),))

    def to_dict(self) -> dict:
        return {"personas": [{**p.to_dict(), "weight": w} for p, w in self.entries]}

    @staticmethod
    def from_dict(d: Mapping) -> "PersonaMix":
        entries = []
        for e in d["personas"]:
            if "preset" in e:
                p = PRESETS[e["preset"]]
            else:
                p = Persona.from_dict(e)
            entries.append((p, e["weight"]))
        return PersonaMix(tuple(entries))

    @staticmethod
    def load(path: str | Path) -> "PersonaMix":
        return PersonaMix.from_dict(json.loads(Path(path).read_text()))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


@dataclass(frozen=True)
class Judgment:
    question_id: str
    worker_id: str
    raw_answer: Cell
    accepted: bool
    timestamp: float
    reason: str | None = None
    persona: str | None = None

    def to_dict(self) -> dict:
        d = {
            "question_id": self.question_id,
            "worker_id": self.worker_id,
            "raw_answer": self.raw_answer,
            "accepted": self.accepted,
            "timestamp": self.timestamp,
        }
        if self.reason is not None:
            d["reason"] = self.reason
        if self.persona is not None:
            d["persona"] = self.persona
        return d

    @staticmethod
    def from_dict(d: Mapping) -> "Judgment":
        return Judgment(
            question_id=d["question_id"],
            worker_id=d["worker_id"],
            raw_answer=d["raw_answer"],
            accepted=d["accepted"],
            timestamp=d["timestamp"],
            reason=d.get("reason"),
            persona=d.get("persona"),
        )


@dataclass(frozen=True)
class JudgmentSet:
    """All recorded judgments per question, accepted and rejected alike."""

    by_question: Mapping[str, tuple[Judgment, ...]]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "by_question", {q: tuple(js) for q, js in self.by_question.items()}
        )
        for qid, js in self.by_question.items():
            workers = [j.worker_id for j in js]
            if len(set(workers)) != len(workers):
                raise CrowdError(f"question {qid}: duplicate worker ids in judgment set")

    def accepted(self, question_id: str) -> list[Judgment]:
        return [j for j in self.by_question.get(question_id, ()) if j.accepted]

    def accepted_values(self, question_id: str) -> list[Cell]:
        return [j.raw_answer for j in self.accepted(question_id)]

    def all_judgments(self) -> list[Judgment]:
        return [j for qid in self.by_question for j in self.by_question[qid]]

    def save_jsonl(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            for j in self.all_judgments():
                fh.write(json.dumps(j.to_dict()) + "\n")

    @staticmethod
    def load_jsonl(path: str | Path) -> "JudgmentSet":
        by_question: dict[str, list[Judgment]] = {}
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                j = Judgment.from_dict(json.loads(line))
                by_question.setdefault(j.question_id, []).append(j)
        return JudgmentSet({q: tuple(js) for q, js in by_question.items()})


# -- the answer model ---------------------------------------------------------


def _softmax(scores: Sequence[float]) -> list[float]:
    top = max(scores)
    exps = [math.exp(s - top) for s in scores]
    z = math.fsum(exps)
    return [e / z for e in exps]


def _ranked_context(stats: SummaryStats, target: str) -> list[str]:
    if not stats.has_column(target):
        return []
    try:
        return [name for name, _ in correlation_rank(stats, target)]
    except DatasetError:
        return []


def _stratum(stats: SummaryStats, q: Question) -> tuple[float, float] | None:
    """(mean, sd) of the target within the stratum the context points at.

    Strata follow the intro text: categories of the strongest-associated
    categorical attribute, or the low/mid/high buckets of the strongest
    continuous one (boundary values fall to the lower bucket).  Returns None
    when no context attribute has usable grouped statistics.
    """
    target = q.column
    overall = stats.continuous_summary(target)
    ctx = dict(q.context_fields)
    for name in _ranked_context(stats, target):
        if name not in ctx:
            continue
        if stats.kind_of(name) == CATEGORICAL:
            groups = stats.group_stats(target, name) or ()
            for g in groups:
                if g.label == str(ctx[name]):
                    return g.mean, g.sd if g.sd is not None else _fallback_sd(overall)
        else:
            buckets = stats.bucket_stats(target, name)
            if not buckets:
                continue
            v = float(ctx[name])
            chosen = buckets[-1]
            for b in buckets:
                if v <= b.hi:
                    chosen = b
                    break
            return chosen.mean, chosen.sd if chosen.sd is not None else _fallback_sd(overall)
    return None


def _fallback_sd(summary) -> float:
    if summary.sd is not None and summary.sd > 0:
        return summary.sd
    span = summary.max - summary.min
    return span / 4 if span > 0 else 1.0


def answer_category_probs(p: Persona, q: Question, stats: SummaryStats) -> dict[str, float]:
    """Theoretical answer distribution of `p` on a choice question.

    Attentive component: softmax over log smoothed category proportions,
    plus a squared-distance evidence term per continuous context attribute
    (distance of the context value to that attribute's grouped mean per
    category, scaled by the attribute's overall spread), plus bias.
    Inattentive component: softmax over bias alone (uniform when unbiased).
    The answer law is the attention-weighted mixture.
    """
    choices = list(q.constraint.choices or ())
    if not choices:
        raise CrowdError(f"question {q.id}: not a choice question")
    bias = [float(p.category_bias.get(c, 0.0)) for c in choices]
    inattentive = _softmax(bias)

    scores = list(bias)
    if stats.has_column(q.column) and stats.kind_of(q.column) == CATEGORICAL:
        csum = stats.categorical_summary(q.column)
        counts = dict(csum.counts)
        denom = csum.n_obs + SMOOTHING * len(choices)
        for i, c in enumerate(choices):
            scores[i] += math.log((counts.get(c, 0) + SMOOTHING) / denom)
    for name, value in q.context_fields:
        if not stats.has_column(name) or stats.kind_of(name) != CONTINUOUS:
            continue
        groups = {g.label: g for g in (stats.group_stats(name, q.column) or ())}
        if any(c not in groups for c in choices):
            continue
        sd = stats.continuous_summary(name).sd
        if sd is None or sd <= 0:
            continue
        v = float(value)
        for i, c in enumerate(choices):
            scores[i] -= (v - groups[c].mean) ** 2 / (2 * sd * sd)
    attentive = _softmax(scores)

    return {
        c: p.attention * a + (1.0 - p.attention) * r
        for c, a, r in zip(choices, attentive, inattentive)
    }


def _round_to(value: float, decimals: int) -> float:
    return float(round(value, decimals)) if decimals > 0 else float(round(value))


def _draw_continuous(p: Persona, q: Question, stats: SummaryStats, rng: np.random.Generator) -> float:
    attentive = rng.random() < p.attention
    have_stats = stats.has_column(q.column) and stats.kind_of(q.column) == CONTINUOUS
    if have_stats:
        overall = stats.continuous_summary(q.column)
        lo, hi = overall.min, overall.max
        decimals = overall.decimals
    else:
        lo, hi = q.constraint.lo, q.constraint.hi  # type: ignore[assignment]
        decimals = 2

    def one_draw() -> float:
        if attentive and have_stats:
            stratum = _stratum(stats, q)
            if stratum is not None:
                center, sd = stratum
            else:
                center, sd = overall.mean, _fallback_sd(overall)
            return rng.normal(center + p.shift, sd * p.noise_sd_scale)
        span = hi - lo
        return rng.uniform(lo - span, hi + span)

    raw = _round_to(one_draw(), decimals)
    if not p.respects_constraints:
        return raw
    for _ in range(MAX_REDRAWS):
        if q.constraint.check(raw).ok:
            return raw
        raw = _round_to(one_draw(), decimals)
    # give up redrawing and clamp to the allowed range
    clo, chi = q.constraint.lo, q.constraint.hi  # type: ignore[assignment]
    raw = min(max(raw, clo), chi)
    rounded = _round_to(raw, decimals)
    if q.constraint.check(rounded).ok:
        return rounded
    scale = 10**decimals
    rounded = math.ceil(clo * scale) / scale if rounded < clo else math.floor(chi * scale) / scale
    return rounded if q.constraint.check(rounded).ok else raw


def answer(p: Persona, q: Question, intro_stats: SummaryStats, rng: np.random.Generator) -> Cell:
    """One raw answer from persona `p`; may violate the constraint if the
    persona ignores it.  Continuous answers are reported at the target
    column's observed precision."""
    if q.constraint.kind == "categorical_choice":
        probs = answer_category_probs(p, q, intro_stats)
        labels = list(probs)
        idx = rng.choice(len(labels), p=np.asarray([probs[c] for c in labels]))
        return labels[int(idx)]
    return _draw_continuous(p, q, intro_stats, rng)


# -- collection ---------------------------------------------------------------


def run_crowd(
    qn: Questionnaire,
    persona_mix: PersonaMix,
    seed: int,
    intro_stats: SummaryStats,
) -> JudgmentSet:
    """Collect exactly k accepted judgments per question from fresh workers.

    Constraint-violating answers are recorded with accepted=false and
    re-solicited; a question that cannot reach k accepted answers within
    10*k attempts is an error.
    """
    weights = np.asarray([w for _, w in persona_mix.entries])
    personas = [p for p, _ in persona_mix.entries]
    master = np.random.SeedSequence(seed)
    children = master.spawn(len(qn.questions))

    by_question: dict[str, tuple[Judgment, ...]] = {}
    for qi, q in enumerate(qn.questions):
        rng = np.random.default_rng(children[qi])
        judgments: list[Judgment] = []
        n_accepted = 0
        attempts = 0
        cap = RESOLICIT_CAP_FACTOR * qn.k
        while n_accepted < qn.k:
            if attempts >= cap:
                raise CrowdError(
                    f"question {q.id}: only {n_accepted}/{qn.k} valid judgments after {cap} attempts"
                )
            attempts += 1
            persona = personas[int(rng.choice(len(personas), p=weights))]
            raw = answer(persona, q, intro_stats, rng)
            result = q.constraint.check(raw)
            judgments.append(
                Judgment(
                    question_id=q.id,
                    worker_id=f"w{qi:03d}-{attempts:05d}",
                    raw_answer=raw,
                    accepted=result.ok,
                    timestamp=float(attempts),
                    reason=result.reason,
                    persona=persona.name,
                )
            )
            if result.ok:
                n_accepted += 1
        by_question[q.id] = tuple(judgments)
    return JudgmentSet(by_question)


def perturb_scenario(d: Dataset, column: str, delta: float) -> Dataset:
    """Shift every observed value of a continuous column by delta, clamped
    to the column's valid range."""
    spec = d.spec(column)
    if not spec.is_continuous:
        raise CrowdError(f"column {column} is categorical; only continuous columns can be shifted")
    if delta == 0:
        return d
    updates: dict[tuple[int, str], Cell] = {}
    for r in d.observed_rows(column):
        v = float(d.cell(r, column)) + delta
        if spec.valid_range is not None:
            lo, hi = spec.valid_range
            v = min(max(v, lo), hi)
        updates[(r, column)] = v
    return d.replace_cells(updates)
