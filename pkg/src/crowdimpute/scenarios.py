"""Seeded end-to-end scenarios for exercising the simulated crowd.

Two setups: a school-age calibration cohort (age + gender, questions with no
usable context) for measuring raw persona behavior, and a lung-function
cohort (age, height, fev, gender) for measuring how context perturbations
move categorical votes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crowd import JudgmentSet, Persona, PersonaMix, perturb_scenario, run_crowd
from .dataset import CATEGORICAL, CONTINUOUS, ColumnSpec, Dataset, mask_cells, summarize
from .questionnaire import AnswerConstraint, batch, render_question

AGE_RANGE = (3.0, 19.0)
_AMPUTE_SEED = 7
_COHORT_SEED = 11
_N_MISSING = 10


def calibration_dataset() -> Dataset:
    """400 students: ages 3..19 (exactly half at 10 or under, mean 10.7),
    genders split 51% male / 49% female.  Fully deterministic."""
    ages: list[float] = []
    for a in range(3, 11):
        ages.extend([float(a)] * 25)
    for a in range(11, 20):
        ages.extend([float(a)] * 22)
    ages.extend([11.0, 12.0])
    assert len(ages) == 400

    genders = ["Male" if i % 2 == 0 else "Female" for i in range(400)]
    for i in (1, 101, 201, 301):
        genders[i] = "Male"

    columns = (
        ColumnSpec(name="age", kind=CONTINUOUS, valid_range=AGE_RANGE, unit="years"),
        ColumnSpec(name="gender", kind=CATEGORICAL, categories=("Male", "Female")),
    )
    rows = [(a, g) for a, g in zip(ages, genders)]
    mask = [(False, False)] * 400
    return Dataset(columns=columns, rows=rows, mask=mask)


@dataclass(frozen=True)
class CalibrationResult:
    male_share: float
    female_share: float
    out_of_range_age_share: float
    age_le10_share: float
    accepted_out_of_range: int
    gender_judgments: JudgmentSet
    age_judgments: JudgmentSet


def run_calibration(
    persona: Persona,
    seed: int,
    k: int = 30,
    enforce_age_range: bool = True,
) -> CalibrationResult:
    """Mask age and gender on 10 rows, ask the crowd, measure vote shares.

    With `enforce_age_range` off, the age questions accept any number (the
    unvetted-collection setup); out-of-range shares are always measured
    against the true age range regardless.
    """
    d = calibration_dataset()
    rng = np.random.default_rng(_AMPUTE_SEED)
    rows = sorted(rng.choice(d.n_rows, size=_N_MISSING, replace=False).tolist())
    amputed, _ = mask_cells(d, [(r, c) for r in rows for c in ("age", "gender")])
    stats = summarize(amputed)

    age_constraint = None
    if not enforce_age_range:
        age_constraint = AnswerConstraint(kind="numeric_range", lo=-1000.0, hi=1000.0)
    age_questions = [render_question(amputed, (r, "age"), constraint=age_constraint) for r in rows]
    gender_questions = [render_question(amputed, (r, "gender")) for r in rows]

    intro = f"Students aged {AGE_RANGE[0]:g} to {AGE_RANGE[1]:g}."
    (age_qn,) = batch(age_questions, intro, (), k, id_prefix="cal-age")
    (gender_qn,) = batch(gender_questions, intro, (), k, id_prefix="cal-gender")

    mix = PersonaMix.single(persona)
    age_js = run_crowd(age_qn, mix, seed, stats)
    gender_js = run_crowd(gender_qn, mix, seed + 1, stats)

    gender_votes = [v for q in gender_questions for v in gender_js.accepted_values(q.id)]
    male_share = gender_votes.count("Male") / len(gender_votes)

    lo, hi = AGE_RANGE
    recorded = [float(j.raw_answer) for j in age_js.all_judgments()]
    out_of_range_share = sum(1 for v in recorded if not lo <= v <= hi) / len(recorded)
    accepted_ages = [float(v) for q in age_questions for v in age_js.accepted_values(q.id)]
    accepted_out_of_range = sum(1 for v in accepted_ages if not lo <= v <= hi)
    age_le10_share = sum(1 for v in accepted_ages if v <= 10) / len(accepted_ages)

    return CalibrationResult(
        male_share=male_share,
        female_share=1.0 - male_share,
        out_of_range_age_share=out_of_range_share,
        age_le10_share=age_le10_share,
        accepted_out_of_range=accepted_out_of_range,
        gender_judgments=gender_js,
        age_judgments=age_js,
    )


def lung_function_dataset(n: int = 300, seed: int = _COHORT_SEED) -> Dataset:
    """Synthetic spirometry cohort where boys run younger and taller than
    girls, so age and height both carry gender signal."""
    rng = np.random.default_rng(seed)
    male = rng.random(n) < 0.5
    age = np.where(male, rng.normal(8.5, 3.0, n), rng.normal(12.0, 3.0, n))
    age = np.clip(np.round(age), 3, 19)
    height = 42.0 + 1.6 * age + np.where(male, 2.5, 0.0) + rng.normal(0.0, 2.0, n)
    height = np.round(np.clip(height, 45, 75), 1)
    fev = 0.18 * age + 0.025 * height + rng.normal(0.0, 0.3, n)
    fev = np.round(np.clip(fev, 0.5, 6.0), 2)

    columns = (
        ColumnSpec(name="age", kind=CONTINUOUS, valid_range=AGE_RANGE, unit="years"),
        ColumnSpec(name="fev", kind=CONTINUOUS, valid_range=(0.5, 6.0), unit="liters"),
        ColumnSpec(name="height", kind=CONTINUOUS, valid_range=(45.0, 75.0), unit="inches"),
        ColumnSpec(name="gender", kind=CATEGORICAL, categories=("Male", "Female")),
    )
    rows = [
        (float(a), float(f), float(h), "Male" if m else "Female")
        for a, f, h, m in zip(age, fev, height, male)
    ]
    mask = [(False, False, False, False)] * n
    return Dataset(columns=columns, rows=rows, mask=mask)


@dataclass(frozen=True)
class PerturbedResult:
    baseline_male_share: float
    perturbed_male_share: float
    baseline: JudgmentSet
    perturbed: JudgmentSet


def run_perturbed(persona: Persona, seed: int, k: int = 30, delta: float = -3.0) -> PerturbedResult:
    """Gender votes before and after shifting every observed age by delta.

    The intro statistics stay those of the unperturbed data; only the
    question contexts change, mirroring a survey whose narrative was written
    before the records drifted.
    """
    d = lung_function_dataset()
    rng = np.random.default_rng(_AMPUTE_SEED)
    rows = sorted(rng.choice(d.n_rows, size=_N_MISSING, replace=False).tolist())
    amputed, _ = mask_cells(d, [(r, "gender") for r in rows])
    stats = summarize(amputed)
    intro = "Clinic visit records."
    mix = PersonaMix.single(persona)

    def collect(source: Dataset) -> tuple[JudgmentSet, float]:
        questions = [render_question(source, (r, "gender")) for r in rows]
        (qn,) = batch(questions, intro, (), k, id_prefix="lung-gender")
        js = run_crowd(qn, mix, seed, stats)
        votes = [v for q in questions for v in js.accepted_values(q.id)]
        return js, votes.count("Male") / len(votes)

    baseline_js, baseline_share = collect(amputed)
    shifted = perturb_scenario(amputed, "age", delta)
    perturbed_js, perturbed_share = collect(shifted)

    return PerturbedResult(
        baseline_male_share=baseline_share,
        perturbed_male_share=perturbed_share,
        baseline=baseline_js,
        perturbed=perturbed_js,
    )
