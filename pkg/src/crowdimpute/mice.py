"""Machine imputation: Bayesian linear draws, predictive mean matching, and
chained-equation cycling into m completed datasets.

The matching rule: regress the target on all other columns (one-hot encoding
categoricals), draw coefficients from their posterior, predict for every
row, and for each missing row copy the observed value of one of the k_d
observed rows whose predictions sit closest.  Categorical targets run the
same machinery per category indicator and match on the predicted-probability
vector, so imputations are always observed labels.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .dataset import CATEGORICAL, Cell, ColumnSpec, Dataset, load_csv

DEFAULT_DONORS = 5
DEFAULT_CYCLES = 10
_RANK_TOL = 1e-8


class MiceError(ValueError):
    """Unusable regression setup or imputation input."""


@dataclass(frozen=True)
class RegressionTask:
    """Least-squares setup for one target column.

    X holds the observed rows of the design matrix (intercept first), y the
    observed target values, X_all the design rows for the whole dataset so a
    posterior draw can predict everywhere.
    """

    target: str
    predictors: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    X_all: np.ndarray
    observed_rows: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise MiceError("design matrix and response have mismatched rows")
        if self.X_all.shape[1] != self.X.shape[1]:
            raise MiceError("X and X_all have different widths")


@dataclass(frozen=True)
class PosteriorDraw:
    """One draw (beta_star, sigma_star) from the coefficient posterior.

    beta_star is expressed in the full design space: columns dropped for
    collinearity carry coefficient 0, so `X_all @ beta_star` is always valid.
    sigma_star is 0 only when the observed data fit exactly.
    """

    beta_star: np.ndarray
    sigma_star: float
    beta_hat: np.ndarray
    dropped: tuple[int, ...] = ()


def _independent_columns(X: np.ndarray) -> list[int]:
    """Greedy left-to-right pick of linearly independent columns."""
    keep: list[int] = []
    basis: list[np.ndarray] = []
    for j in range(X.shape[1]):
        v = X[:, j].astype(float)
        norm = np.linalg.norm(v)
        resid = v.copy()
        for b in basis:
            resid -= (b @ resid) * b
        if np.linalg.norm(resid) > _RANK_TOL * max(1.0, norm):
            keep.append(j)
            basis.append(resid / np.linalg.norm(resid))
    return keep


def bayes_draw(
    task: RegressionTask,
    rng: np.random.Generator,
    force_sigma: float | None = None,
) -> PosteriorDraw:
    """Draw regression coefficients from their posterior.

    beta_hat is the least-squares fit on observed rows; sigma_star^2 is
    RSS divided by a chi-square draw with nu = n_obs - p - 1 degrees of
    freedom; beta_star is normal around beta_hat with covariance
    sigma_star^2 (X'X)^-1.  `force_sigma` pins sigma_star (0 gives the
    deterministic beta_star = beta_hat limit).
    """
    keep = _independent_columns(task.X)
    dropped = tuple(j for j in range(task.X.shape[1]) if j not in keep)
    if dropped:
        labels = ["intercept", *task.predictors]
        warnings.warn(
            f"target {task.target}: dropped collinear design columns "
            f"{[labels[j] for j in dropped]}",
            stacklevel=2,
        )
    X = task.X[:, keep]
    n_obs, width = X.shape
    if width == 0:
        raise MiceError(f"target {task.target}: empty design after dropping")
    nu = n_obs - width  # width counts the intercept, so this is n - p - 1
    if nu <= 0:
        raise MiceError(
            f"target {task.target}: need at least {width + 1} observed rows, have {n_obs}"
        )

    beta_hat_k, _, _, _ = np.linalg.lstsq(X, task.y, rcond=None)
    resid = task.y - X @ beta_hat_k
    rss = float(resid @ resid)

    if force_sigma is not None:
        sigma = float(force_sigma)
    else:
        sigma = math.sqrt(rss / rng.chisquare(nu)) if rss > 0 else 0.0

    if sigma > 0:
        cov = sigma * sigma * np.linalg.inv(X.T @ X)
        beta_star_k = rng.multivariate_normal(beta_hat_k, cov)
    else:
        beta_star_k = beta_hat_k.copy()

    beta_star = np.zeros(task.X.shape[1])
    beta_hat = np.zeros(task.X.shape[1])
    beta_star[keep] = beta_star_k
    beta_hat[keep] = beta_hat_k
    return PosteriorDraw(beta_star=beta_star, sigma_star=sigma, beta_hat=beta_hat, dropped=dropped)


def match_donors(
    pred_obs: np.ndarray,
    pred_miss: np.ndarray,
    k_d: int,
    rng: np.random.Generator,
) -> list[int]:
    """For each missing-row prediction, pick one of the k_d nearest observed
    predictions uniformly; returns indices into the observed set.

    Ties resolve to the lower observed index (stable sort), so results are
    reproducible.
    """
    if pred_obs.shape[0] < k_d:
        raise MiceError(f"need at least k_d={k_d} observed rows, have {pred_obs.shape[0]}")
    if pred_obs.ndim == 1:
        pred_obs = pred_obs[:, None]
        pred_miss = np.atleast_1d(pred_miss)[:, None]
    picks = []
    for pm in pred_miss:
        dist = np.linalg.norm(pred_obs - pm, axis=1)
        pool = np.argsort(dist, kind="stable")[:k_d]
        picks.append(int(pool[int(rng.integers(k_d))]))
    return picks


# -- column-level imputation on a working copy --------------------------------


class _Working:
    """Mutable numeric view of a dataset while chaining."""

    def __init__(self, d: Dataset):
        self.source = d
        self.columns = d.columns
        self.values: dict[str, list[Cell]] = {
            c.name: [d.rows[r][i] for r in range(d.n_rows)] for i, c in enumerate(d.columns)
        }
        self.observed: dict[str, list[int]] = {c.name: d.observed_rows(c.name) for c in d.columns}
        self.missing: dict[str, list[int]] = {c.name: d.missing_rows(c.name) for c in d.columns}
        self.n_rows = d.n_rows

    def design(self, target: str) -> tuple[np.ndarray, tuple[str, ...]]:
        """Full-dataset design matrix from every column but the target."""
        cols: list[np.ndarray] = [np.ones(self.n_rows)]
        names: list[str] = []
        for spec in self.columns:
            if spec.name == target:
                continue
            vals = self.values[spec.name]
            if spec.is_continuous:
                cols.append(np.asarray([float(v) for v in vals]))
                names.append(spec.name)
            else:
                for cat in spec.categories[1:]:  # type: ignore[index]
                    cols.append(np.asarray([1.0 if v == cat else 0.0 for v in vals]))
                    names.append(f"{spec.name}={cat}")
        return np.column_stack(cols), tuple(names)

    def task(self, target: str, y: np.ndarray) -> RegressionTask:
        X_all, names = self.design(target)
        obs = self.observed[target]
        return RegressionTask(
            target=target,
            predictors=names,
            X=X_all[obs],
            y=y,
            X_all=X_all,
            observed_rows=tuple(obs),
        )

    def impute_continuous(
        self, target: str, k_d: int, rng: np.random.Generator, force_sigma: float | None = None
    ) -> dict[int, float]:
        obs = self.observed[target]
        miss = self.missing[target]
        y = np.asarray([float(self.values[target][r]) for r in obs])
        task = self.task(target, y)
        draw = bayes_draw(task, rng, force_sigma=force_sigma)
        pred = task.X_all @ draw.beta_star
        picks = match_donors(pred[obs], pred[miss], k_d, rng)
        return {r: float(y[p]) for r, p in zip(miss, picks)}

    def impute_categorical(
        self, target: str, k_d: int, rng: np.random.Generator, force_sigma: float | None = None
    ) -> dict[int, str]:
        spec = next(c for c in self.columns if c.name == target)
        obs = self.observed[target]
        miss = self.missing[target]
        labels = [str(self.values[target][r]) for r in obs]
        prob_cols = []
        for cat in spec.categories[1:]:  # type: ignore[index]
            y = np.asarray([1.0 if l == cat else 0.0 for l in labels])
            task = self.task(target, y)
            draw = bayes_draw(task, rng, force_sigma=force_sigma)
            prob_cols.append(task.X_all @ draw.beta_star)
        probs = np.column_stack(prob_cols)
        picks = match_donors(probs[obs], probs[miss], k_d, rng)
        return {r: labels[p] for r, p in zip(miss, picks)}

    def apply(self, target: str, imputed: Mapping[int, Cell]) -> None:
        for r, v in imputed.items():
            self.values[target][r] = v

    def snapshot(self) -> Dataset:
        rows = [
            tuple(self.values[c.name][r] for c in self.columns) for r in range(self.n_rows)
        ]
        mask = [(False,) * len(self.columns)] * self.n_rows
        return Dataset(self.columns, rows, mask, self.source.ids, self.source.id_name)


def pmm_impute_column(
    d: Dataset,
    column: str,
    k_d: int = DEFAULT_DONORS,
    rng: np.random.Generator | int | None = None,
    force_sigma: float | None = None,
) -> dict[int, Cell]:
    """One-shot predictive mean matching for a single incomplete column.

    Every other column must be complete (the chained loop handles general
    missingness).  Returns {row: imputed value}; every imputed value is an
    observed value of the column.
    """
    rng = np.random.default_rng(rng)
    spec = d.spec(column)
    if not d.missing_rows(column):
        return {}
    if not d.observed_rows(column):
        raise MiceError(f"column {column} has no observed values")
    for other in d.columns:
        if other.name != column and d.missing_rows(other.name):
            raise MiceError(
                f"predictor column {other.name} has missing cells; use mice_cycle instead"
            )
    w = _Working(d)
    if spec.is_continuous:
        return dict(w.impute_continuous(column, k_d, rng, force_sigma))
    return dict(w.impute_categorical(column, k_d, rng, force_sigma))


def mice_cycle(
    d: Dataset,
    order: Sequence[str] | None = None,
    cycles: int = DEFAULT_CYCLES,
    k_d: int = DEFAULT_DONORS,
    rng: np.random.Generator | int | None = None,
    trace: list | None = None,
) -> Dataset:
    """Chained-equation sweep: initialize missing cells with random observed
    draws, then `cycles` rounds of per-column predictive mean matching using
    all other columns as predictors.  Returns a completed dataset.

    `trace`, if given, collects one {column: mean} dict per cycle over the
    continuous columns being imputed.
    """
    incomplete = [c.name for c in d.columns if d.missing_rows(c.name)]
    if not incomplete:
        return d
    for name in incomplete:
        if not d.observed_rows(name):
            raise MiceError(f"column {name} has no observed values at all")
    if order is None:
        order = incomplete
    else:
        unknown = [c for c in order if c not in incomplete]
        if unknown:
            raise MiceError(f"order names complete or unknown columns: {unknown}")
    rng = np.random.default_rng(rng)

    w = _Working(d)
    for name in incomplete:
        observed_values = [w.values[name][r] for r in w.observed[name]]
        for r in w.missing[name]:
            w.values[name][r] = observed_values[int(rng.integers(len(observed_values)))]

    kinds = {c.name: c.kind for c in d.columns}
    for _ in range(cycles):
        for name in order:
            if kinds[name] == CATEGORICAL:
                w.apply(name, w.impute_categorical(name, k_d, rng))
            else:
                w.apply(name, w.impute_continuous(name, k_d, rng))
        if trace is not None:
            trace.append(
                {
                    name: float(np.mean([float(v) for v in w.values[name]]))
                    for name in order
                    if kinds[name] != CATEGORICAL
                }
            )
    return w.snapshot()


# -- multiple imputation -------------------------------------------------------


@dataclass(frozen=True)
class ImputationSet:
    """m completed copies of one dataset plus where they came from."""

    datasets: tuple[Dataset, ...]
    provenance: str
    cells: tuple[tuple[int, str], ...]
    seed: int | None = None
    cycles: int | None = None
    k_d: int | None = None

    def __post_init__(self) -> None:
        if not self.datasets:
            raise MiceError("imputation set needs at least one completed dataset")
        if self.provenance not in ("crowd", "machine"):
            raise MiceError(f"unknown provenance {self.provenance!r}")
        first = self.datasets[0]
        for ds in self.datasets:
            if ds.column_names != first.column_names or ds.n_rows != first.n_rows:
                raise MiceError("imputation copies disagree on shape")
            if any(any(mr) for mr in ds.mask):
                raise MiceError("imputation copies must be complete (no missing cells)")
        cellset = set(self.cells)
        for r in range(first.n_rows):
            for c in first.column_names:
                if (r, c) in cellset:
                    continue
                vals = {ds.cell(r, c) for ds in self.datasets}
                if len(vals) != 1:
                    raise MiceError(f"copies disagree on originally-observed cell ({r}, {c})")
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "cells", tuple((r, c) for r, c in self.cells))

    @property
    def m(self) -> int:
        return len(self.datasets)

    def values_for(self, row: int, column: str) -> list[Cell]:
        return [ds.cell(row, column) for ds in self.datasets]

    def save(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        manifest = {
            "seed": self.seed,
            "m": self.m,
            "cycles": self.cycles,
            "k_d": self.k_d,
            "provenance": self.provenance,
            "cells": [{"row": r, "column": c} for r, c in self.cells],
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
        for i, ds in enumerate(self.datasets, start=1):
            ds.write_csv(out / f"imp-{i:03d}.csv")

    @staticmethod
    def load(in_dir: str | Path, schema: Sequence[ColumnSpec], id_column: str | None = None) -> "ImputationSet":
        src = Path(in_dir)
        manifest = json.loads((src / "manifest.json").read_text())
        datasets = []
        for i in range(1, manifest["m"] + 1):
            datasets.append(load_csv(src / f"imp-{i:03d}.csv", schema, id_column=id_column))
        return ImputationSet(
            datasets=tuple(datasets),
            provenance=manifest["provenance"],
            cells=tuple((e["row"], e["column"]) for e in manifest["cells"]),
            seed=manifest.get("seed"),
            cycles=manifest.get("cycles"),
            k_d=manifest.get("k_d"),
        )


def multiple_impute(
    d: Dataset,
    m: int = 30,
    cycles: int = DEFAULT_CYCLES,
    k_d: int = DEFAULT_DONORS,
    seed: int = 0,
) -> ImputationSet:
    """m independent chained-equation runs with split seeds."""
    if m < 1:
        raise MiceError("m must be >= 1")
    children = np.random.SeedSequence(seed).spawn(m)
    datasets = tuple(
        mice_cycle(d, cycles=cycles, k_d=k_d, rng=np.random.default_rng(children[i]))
        for i in range(m)
    )
    return ImputationSet(
        datasets=datasets,
        provenance="machine",
        cells=tuple(d.missing_cells()),
        seed=seed,
        cycles=cycles,
        k_d=k_d,
    )
