"""Shared fixtures and hypothesis strategies for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from crowdimpute.dataset import CATEGORICAL, CONTINUOUS, ColumnSpec, Dataset

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


# A small pool of plausible column names so generated schemas stay readable.
CONT_NAMES = ("age", "height", "weight", "score", "income", "fev", "temp")
CAT_NAMES = ("gender", "status", "grade", "region")
LABEL_POOL = ("A", "B", "C", "D", "Male", "Female", "Yes", "No")


@st.composite
def schemas(draw, max_continuous: int = 4, max_categorical: int = 2):
    """Random column schemas mixing continuous and categorical columns."""
    n_cont = draw(st.integers(min_value=1, max_value=max_continuous))
    n_cat = draw(st.integers(min_value=0, max_value=max_categorical))
    cols: list[ColumnSpec] = []
    for name in CONT_NAMES[:n_cont]:
        cols.append(ColumnSpec(name, CONTINUOUS, valid_range=(-1000.0, 1000.0)))
    for name in CAT_NAMES[:n_cat]:
        k = draw(st.integers(min_value=2, max_value=4))
        cols.append(ColumnSpec(name, CATEGORICAL, categories=LABEL_POOL[:k]))
    draw(st.randoms()).shuffle(cols)
    return tuple(cols)


@st.composite
def datasets(draw, min_rows: int = 3, max_rows: int = 25, with_missing: bool = False):
    """Random complete (or lightly masked) datasets over a random schema."""
    cols = draw(schemas())
    n = draw(st.integers(min_value=min_rows, max_value=max_rows))
    seed = draw(st.integers(min_value=0, max_value=2**31 - 1))
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n):
        row = []
        for c in cols:
            if c.kind == CONTINUOUS:
                row.append(round(float(rng.normal(10.0, 4.0)), 3))
            else:
                row.append(c.categories[int(rng.integers(len(c.categories)))])
        rows.append(tuple(row))
    mask = [[False] * len(cols) for _ in range(n)]
    if with_missing:
        n_miss = draw(st.integers(min_value=0, max_value=min(5, n - 2)))
        flat = [(r, ci) for r in range(n) for ci in range(len(cols))]
        for pick in rng.choice(len(flat), size=n_miss, replace=False):
            r, ci = flat[int(pick)]
            rows[r] = tuple(None if j == ci else v for j, v in enumerate(rows[r]))
            mask[r][ci] = True
    return Dataset(cols, rows, mask)


def make_xy_dataset(n: int, seed: int, slope: float = 2.0, noise: float = 0.0) -> Dataset:
    """Simple two-column continuous dataset y = 1 + slope*x + noise."""
    rng = np.random.default_rng(seed)
    x = rng.normal(0.0, 1.0, n)
    y = 1.0 + slope * x + (rng.normal(0.0, noise, n) if noise else 0.0)
    cols = (ColumnSpec("x", CONTINUOUS), ColumnSpec("y", CONTINUOUS))
    rows = [(round(float(a), 4), round(float(b), 4)) for a, b in zip(x, y)]
    return Dataset(cols, rows, [(False, False)] * n)


@pytest.fixture
def fev_schema() -> tuple[ColumnSpec, ...]:
    return (
        ColumnSpec("age", CONTINUOUS, valid_range=(3.0, 19.0), unit="years"),
        ColumnSpec("fev", CONTINUOUS, valid_range=(0.5, 6.0), unit="liters"),
        ColumnSpec("height", CONTINUOUS, valid_range=(45.0, 75.0), unit="inches"),
        ColumnSpec("gender", CATEGORICAL, categories=("Male", "Female")),
        ColumnSpec("smoker", CATEGORICAL, categories=("No", "Yes")),
    )


@pytest.fixture
def tiny_fev(fev_schema) -> Dataset:
    rows = [
        (9.0, 1.708, 57.0, "Female", "No"),
        (8.0, 1.724, 67.5, "Female", "No"),
        (7.0, 1.72, 54.5, "Female", "No"),
        (9.0, 1.558, 53.0, "Male", "No"),
        (9.0, 1.895, 57.0, "Male", "No"),
        (8.0, 2.336, 61.0, "Female", "No"),
        (6.0, 1.919, 58.0, "Female", "No"),
        (6.0, 1.415, 56.0, "Female", "No"),
        (8.0, 1.987, 58.5, "Female", "No"),
        (9.0, 1.942, 60.0, "Female", "No"),
        (11.0, 2.531, 61.0, "Male", "Yes"),
        (12.0, 3.029, 66.0, "Male", "Yes"),
    ]
    return Dataset(fev_schema, rows, [[False] * 5 for _ in rows])
