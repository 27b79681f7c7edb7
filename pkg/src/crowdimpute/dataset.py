"""Tabular data model with an explicit missingness mask.

Holds the column schema, the cell grid, and a boolean mask marking missing
cells.  Everything here is immutable: operations return new objects, so
values can be shared freely across threads.

Statistics are accumulated with ``math.fsum`` so that summaries are exactly
invariant under row permutation (ordinary left-to-right float summation is
not).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

Cell = float | str | None

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"

MAX_DECIMALS = 6


class DatasetError(ValueError):
    """Schema violation, parse failure, or bad operation argument."""


@dataclass(frozen=True)
class ColumnSpec:
    """Declared type and domain of one column."""

    name: str
    kind: str
    categories: tuple[str, ...] | None = None
    valid_range: tuple[float, float] | None = None
    unit: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise DatasetError(f"column {self.name}: unknown kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            if self.categories is None or len(set(self.categories)) < 2:
                raise DatasetError(
                    f"column {self.name}: categorical needs >=2 distinct categories"
                )
            if len(set(self.categories)) != len(self.categories):
                raise DatasetError(f"column {self.name}: duplicate category labels")
            if self.valid_range is not None:
                raise DatasetError(f"column {self.name}: valid_range is for continuous columns")
            object.__setattr__(self, "categories", tuple(self.categories))
        else:
            if self.categories is not None:
                raise DatasetError(f"column {self.name}: categories are for categorical columns")
            if self.valid_range is not None:
                lo, hi = self.valid_range
                if not lo < hi:
                    raise DatasetError(f"column {self.name}: valid_range needs lo < hi")
                object.__setattr__(self, "valid_range", (float(lo), float(hi)))

    @property
    def is_continuous(self) -> bool:
        return self.kind == CONTINUOUS

    def to_dict(self) -> dict:
        d: dict = {"name": self.name, "kind": self.kind}
        if self.categories is not None:
            d["categories"] = list(self.categories)
        if self.valid_range is not None:
            d["valid_range"] = list(self.valid_range)
        if self.unit is not None:
            d["unit"] = self.unit
        return d

    @staticmethod
    def from_dict(d: Mapping) -> "ColumnSpec":
        return ColumnSpec(
            name=d["name"],
            kind=d["kind"],
            categories=tuple(d["categories"]) if d.get("categories") else None,
            valid_range=tuple(d["valid_range"]) if d.get("valid_range") else None,
            unit=d.get("unit"),
        )

    def check_value(self, value: Cell, where: str = "") -> Cell:
        """Validate (and normalize) a non-missing cell value."""
        ctx = f"{where}: " if where else ""
        if self.kind == CONTINUOUS:
            try:
                v = float(value)  # type: ignore[arg-type]
            except (TypeError, ValueError):
                raise DatasetError(f"{ctx}column {self.name}: {value!r} is not numeric")
            if math.isnan(v) or math.isinf(v):
                raise DatasetError(f"{ctx}column {self.name}: {value!r} is not finite")
            if self.valid_range is not None:
                lo, hi = self.valid_range
                if not lo <= v <= hi:
                    raise DatasetError(
                        f"{ctx}column {self.name}: {v} outside valid range [{lo}, {hi}]"
                    )
            return v
        label = str(value)
        if label not in self.categories:  # type: ignore[operator]
            raise DatasetError(f"{ctx}column {self.name}: unknown category {label!r}")
        return label


@dataclass(frozen=True)
class Dataset:
    """n x p cell grid plus mask; mask[r][c] is True where the cell is missing.

    Cells are floats for continuous columns and category labels for
    categorical ones; masked cells hold None.  Rows are addressed by index,
    columns by name.
    """

    columns: tuple[ColumnSpec, ...]
    rows: tuple[tuple[Cell, ...], ...]
    mask: tuple[tuple[bool, ...], ...]
    ids: tuple[str, ...] | None = None
    id_name: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        object.__setattr__(self, "mask", tuple(tuple(bool(b) for b in m) for m in self.mask))
        p = len(self.columns)
        if len(self.rows) != len(self.mask):
            raise DatasetError("rows and mask have different lengths")
        names = [c.name for c in self.columns]
        if len(set(names)) != p:
            raise DatasetError("duplicate column names")
        for r, (row, mrow) in enumerate(zip(self.rows, self.mask)):
            if len(row) != p or len(mrow) != p:
                raise DatasetError(f"row {r}: width mismatch")
            for c, (value, missing) in enumerate(zip(row, mrow)):
                if missing:
                    if value is not None:
                        raise DatasetError(f"row {r}, column {names[c]}: masked cell holds a value")
                else:
                    self.columns[c].check_value(value, where=f"row {r}")
        if self.ids is not None and len(self.ids) != len(self.rows):
            raise DatasetError("ids length does not match row count")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def col_index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise DatasetError(f"no such column: {name}")

    def spec(self, name: str) -> ColumnSpec:
        return self.columns[self.col_index(name)]

    def cell(self, row: int, column: str) -> Cell:
        return self.rows[row][self.col_index(column)]

    def is_missing(self, row: int, column: str) -> bool:
        return self.mask[row][self.col_index(column)]

    def observed_rows(self, column: str) -> list[int]:
        c = self.col_index(column)
        return [r for r in range(self.n_rows) if not self.mask[r][c]]

    def missing_rows(self, column: str) -> list[int]:
        c = self.col_index(column)
        return [r for r in range(self.n_rows) if self.mask[r][c]]

    def observed_values(self, column: str) -> list[Cell]:
        c = self.col_index(column)
        return [self.rows[r][c] for r in range(self.n_rows) if not self.mask[r][c]]

    def missing_cells(self) -> list[tuple[int, str]]:
        names = self.column_names
        return [
            (r, names[c])
            for r in range(self.n_rows)
            for c in range(self.n_cols)
            if self.mask[r][c]
        ]

    def replace_cells(self, updates: Mapping[tuple[int, str], Cell]) -> "Dataset":
        """Return a copy with the given (row, column) -> value cells filled in."""
        idx = {name: i for i, name in enumerate(self.column_names)}
        rows = [list(r) for r in self.rows]
        mask = [list(m) for m in self.mask]
        for (r, name), value in updates.items():
            c = idx[name]
            rows[r][c] = self.columns[c].check_value(value, where=f"row {r}")
            mask[r][c] = False
        return Dataset(self.columns, rows, mask, self.ids, self.id_name)

    def write_csv(self, path: str | Path, missing_token: str = "?") -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            header = list(self.column_names)
            if self.id_name is not None:
                header = [self.id_name] + header
            w.writerow(header)
            for r in range(self.n_rows):
                out = []
                if self.id_name is not None:
                    out.append(self.ids[r] if self.ids else str(r))
                for c in range(self.n_cols):
                    if self.mask[r][c]:
                        out.append(missing_token)
                    else:
                        v = self.rows[r][c]
                        out.append(str(v) if isinstance(v, float) else str(v))
                w.writerow(out)


@dataclass(frozen=True)
class GroundTruth:
    """Original values of deliberately masked cells, for benchmarking."""

    entries: tuple[tuple[int, str, Cell], ...]

    def cells(self) -> list[tuple[int, str]]:
        return [(r, c) for r, c, _ in self.entries]

    def value(self, row: int, column: str) -> Cell:
        for r, c, v in self.entries:
            if r == row and c == column:
                return v
        raise DatasetError(f"no ground-truth entry for ({row}, {column})")

    def to_json(self, path: str | Path) -> None:
        payload = [{"row": r, "column": c, "value": v} for r, c, v in self.entries]
        Path(path).write_text(json.dumps(payload, indent=2) + "\n")

    @staticmethod
    def from_json(path: str | Path) -> "GroundTruth":
        payload = json.loads(Path(path).read_text())
        return GroundTruth(tuple((e["row"], e["column"], e["value"]) for e in payload))


def load_csv(
    path: str | Path,
    schema: Sequence[ColumnSpec],
    missing_token: str = "?",
    id_column: str | None = None,
) -> Dataset:
    """Read an RFC-4180 style CSV with a header row into a Dataset.

    The header must match the schema column names in order; `id_column`, if
    given, may appear anywhere in the header and is carried as a row
    identifier rather than a data column.  Cells equal to `missing_token`
    are masked.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file, header row required")
        id_pos = None
        if id_column is not None:
            if id_column not in header:
                raise DatasetError(f"{path}: id column {id_column!r} not in header")
            id_pos = header.index(id_column)
            data_header = header[:id_pos] + header[id_pos + 1 :]
        else:
            data_header = header
        expected = [c.name for c in schema]
        if data_header != expected:
            raise DatasetError(f"{path}: header {data_header} does not match schema {expected}")

        rows: list[list[Cell]] = []
        mask: list[list[bool]] = []
        ids: list[str] = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise DatasetError(f"{path}:{lineno}: expected {len(header)} fields, got {len(record)}")
            if id_pos is not None:
                ids.append(record[id_pos])
                record = record[:id_pos] + record[id_pos + 1 :]
            row: list[Cell] = []
            mrow: list[bool] = []
            for spec, raw in zip(schema, record):
                text = raw.strip()
                if text == missing_token:
                    row.append(None)
                    mrow.append(True)
                else:
                    row.append(spec.check_value(text, where=f"{path}:{lineno}"))
                    mrow.append(False)
            rows.append(row)
            mask.append(mrow)
    return Dataset(
        columns=tuple(schema),
        rows=rows,
        mask=mask,
        ids=tuple(ids) if id_column else None,
        id_name=id_column,
    )


def load_schema(path: str | Path) -> tuple[list[ColumnSpec], str | None]:
    """Read a schema JSON file: {"columns": [...], "id_column": optional}."""
    payload = json.loads(Path(path).read_text())
    cols = [ColumnSpec.from_dict(d) for d in payload["columns"]]
    return cols, payload.get("id_column")


def mask_cells(d: Dataset, cells: Iterable[tuple[int, str]]) -> tuple[Dataset, GroundTruth]:
    """Mask the given observed cells, recording their original values."""
    idx = {name: i for i, name in enumerate(d.column_names)}
    rows = [list(r) for r in d.rows]
    mask = [list(m) for m in d.mask]
    entries = []
    for r, name in cells:
        c = idx[name]
        if mask[r][c]:
            raise DatasetError(f"cell ({r}, {name}) is already missing")
        entries.append((r, name, rows[r][c]))
        rows[r][c] = None
        mask[r][c] = True
    out = Dataset(d.columns, rows, mask, d.ids, d.id_name)
    return out, GroundTruth(tuple(entries))


def ampute(d: Dataset, column: str, n: int, seed: int) -> tuple[Dataset, GroundTruth]:
    """Mask n uniformly chosen observed cells of one column.

    Deterministic for a fixed seed; returns the masked dataset and the
    ground truth of removed values.
    """
    observed = d.observed_rows(column)
    if n < 0:
        raise DatasetError("n must be >= 0")
    if n > len(observed):
        raise DatasetError(
            f"cannot ampute {n} cells from column {column}: only {len(observed)} observed"
        )
    rng = np.random.default_rng(seed)
    chosen = sorted(rng.choice(len(observed), size=n, replace=False).tolist())
    return mask_cells(d, [(observed[i], column) for i in chosen])


def restore(d: Dataset, gt: GroundTruth) -> Dataset:
    """Put ground-truth values back into their masked cells."""
    return d.replace_cells({(r, c): v for r, c, v in gt.entries})


# -- summaries ---------------------------------------------------------------


def quantile_linear(sorted_values: Sequence[float], p: float) -> float:
    """Quantile by linear interpolation between order statistics (type 7)."""
    n = len(sorted_values)
    if n == 0:
        raise DatasetError("quantile of empty list")
    if n == 1:
        return float(sorted_values[0])
    h = (n - 1) * p
    j = int(math.floor(h))
    if j >= n - 1:
        return float(sorted_values[-1])
    g = h - j
    return float(sorted_values[j] + g * (sorted_values[j + 1] - sorted_values[j]))


def value_decimals(values: Iterable[float], cap: int = MAX_DECIMALS) -> int:
    """Smallest number of decimal places that reproduces every value exactly."""
    best = 0
    for v in values:
        for d in range(best, cap + 1):
            if round(v, d) == v:
                if d > best:
                    best = d
                break
        else:
            best = cap
    return best


def _fsum_mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def _fsum_sd(values: Sequence[float], mean: float) -> float | None:
    if len(values) < 2:
        return None
    ss = math.fsum((v - mean) ** 2 for v in values)
    return math.sqrt(ss / (len(values) - 1))


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Two-pass Pearson correlation; None when either side has no variance."""
    n = len(xs)
    if n < 2:
        return None
    mx = _fsum_mean(xs)
    my = _fsum_mean(ys)
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    if sxx <= 0.0 or syy <= 0.0:
        return None
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class ContinuousSummary:
    name: str
    n_obs: int
    min: float
    max: float
    mean: float
    median: float
    p25: float
    p75: float
    sd: float | None
    decimals: int
    unit: str | None = None


@dataclass(frozen=True)
class CategoricalSummary:
    name: str
    n_obs: int
    counts: tuple[tuple[str, int], ...]

    @property
    def proportions(self) -> dict[str, float]:
        total = sum(c for _, c in self.counts)
        return {label: c / total for label, c in self.counts}


@dataclass(frozen=True)
class GroupStats:
    label: str
    n: int
    mean: float
    sd: float | None


@dataclass(frozen=True)
class BucketStats:
    lo: float
    hi: float
    n: int
    mean: float
    sd: float | None


@dataclass(frozen=True)
class SummaryStats:
    """Descriptive statistics over observed cells only.

    `grouped` holds the mean/sd of each continuous column within each
    category of each categorical column.  `bucketed` holds the same for a
    continuous column within low/mid/high buckets of another continuous
    column (buckets split at that column's p25 and p75; a value on a
    boundary belongs to the lower bucket).
    """

    n_rows: int
    continuous: tuple[ContinuousSummary, ...]
    categorical: tuple[CategoricalSummary, ...]
    associations: tuple[tuple[str, str, float], ...]
    grouped: Mapping[tuple[str, str], tuple[GroupStats, ...]]
    bucketed: Mapping[tuple[str, str], tuple[BucketStats, ...]]
    excluded: tuple[str, ...] = ()
    column_order: tuple[str, ...] = ()

    def continuous_summary(self, name: str) -> ContinuousSummary:
        for s in self.continuous:
            if s.name == name:
                return s
        raise DatasetError(f"no continuous summary for column {name}")

    def categorical_summary(self, name: str) -> CategoricalSummary:
        for s in self.categorical:
            if s.name == name:
                return s
        raise DatasetError(f"no categorical summary for column {name}")

    def has_column(self, name: str) -> bool:
        return name in self.column_order

    def kind_of(self, name: str) -> str:
        if any(s.name == name for s in self.continuous):
            return CONTINUOUS
        if any(s.name == name for s in self.categorical):
            return CATEGORICAL
        raise DatasetError(f"no summary for column {name}")

    def association(self, a: str, b: str) -> float | None:
        for x, y, r in self.associations:
            if (x, y) == (a, b) or (x, y) == (b, a):
                return r
        return None

    def group_stats(self, value_column: str, by_column: str) -> tuple[GroupStats, ...] | None:
        return self.grouped.get((value_column, by_column))

    def bucket_stats(self, value_column: str, by_column: str) -> tuple[BucketStats, ...] | None:
        return self.bucketed.get((value_column, by_column))

    def to_dict(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "column_order": list(self.column_order),
            "excluded": list(self.excluded),
            "continuous": [
                {
                    "name": s.name, "n_obs": s.n_obs, "min": s.min, "max": s.max,
                    "mean": s.mean, "median": s.median, "p25": s.p25, "p75": s.p75,
                    "sd": s.sd, "decimals": s.decimals, "unit": s.unit,
                }
                for s in self.continuous
            ],
            "categorical": [
                {"name": s.name, "n_obs": s.n_obs, "counts": [[l, c] for l, c in s.counts]}
                for s in self.categorical
            ],
            "associations": [[a, b, r] for a, b, r in self.associations],
            "grouped": [
                {
                    "value_column": vc, "by_column": bc,
                    "groups": [
                        {"label": g.label, "n": g.n, "mean": g.mean, "sd": g.sd} for g in groups
                    ],
                }
                for (vc, bc), groups in self.grouped.items()
            ],
            "bucketed": [
                {
                    "value_column": vc, "by_column": bc,
                    "buckets": [
                        {"lo": b.lo, "hi": b.hi, "n": b.n, "mean": b.mean, "sd": b.sd}
                        for b in buckets
                    ],
                }
                for (vc, bc), buckets in self.bucketed.items()
            ],
        }

    @staticmethod
    def from_dict(d: Mapping) -> "SummaryStats":
        return SummaryStats(
            n_rows=d["n_rows"],
            continuous=tuple(
                ContinuousSummary(
                    name=s["name"], n_obs=s["n_obs"], min=s["min"], max=s["max"],
                    mean=s["mean"], median=s["median"], p25=s["p25"], p75=s["p75"],
                    sd=s["sd"], decimals=s["decimals"], unit=s.get("unit"),
                )
                for s in d["continuous"]
            ),
            categorical=tuple(
                CategoricalSummary(
                    name=s["name"], n_obs=s["n_obs"],
                    counts=tuple((l, c) for l, c in s["counts"]),
                )
                for s in d["categorical"]
            ),
            associations=tuple((a, b, r) for a, b, r in d["associations"]),
            grouped={
                (g["value_column"], g["by_column"]): tuple(
                    GroupStats(label=x["label"], n=x["n"], mean=x["mean"], sd=x["sd"])
                    for x in g["groups"]
                )
                for g in d["grouped"]
            },
            bucketed={
                (b["value_column"], b["by_column"]): tuple(
                    BucketStats(lo=x["lo"], hi=x["hi"], n=x["n"], mean=x["mean"], sd=x["sd"])
                    for x in b["buckets"]
                )
                for b in d["bucketed"]
            },
            excluded=tuple(d["excluded"]),
            column_order=tuple(d["column_order"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @staticmethod
    def load(path: str | Path) -> "SummaryStats":
        return SummaryStats.from_dict(json.loads(Path(path).read_text()))


def _one_hot_association(values: list[float], labels: list[str], categories: Sequence[str]) -> float | None:
    """Continuous-categorical association.

    Point-biserial for binary categories; otherwise the max-|r| correlation
    of the continuous column against each category indicator, keeping the
    sign of the winning indicator.
    """
    if len(categories) == 2:
        indicator = [1.0 if l == categories[1] else 0.0 for l in labels]
        return pearson(values, indicator)
    best: float | None = None
    for cat in categories:
        indicator = [1.0 if l == cat else 0.0 for l in labels]
        r = pearson(values, indicator)
        if r is not None and (best is None or abs(r) > abs(best)):
            best = r
    return best


def summarize(d: Dataset) -> SummaryStats:
    """Descriptive statistics of the observed cells.

    Columns with zero observed cells are listed in `excluded` and take no
    part in associations or grouping; zero-variance columns keep their
    univariate summary but produce no association entries.
    """
    if d.n_rows == 0:
        raise DatasetError("cannot summarize an empty dataset")

    cont: list[ContinuousSummary] = []
    cat: list[CategoricalSummary] = []
    excluded: list[str] = []
    observed: dict[str, list[tuple[int, Cell]]] = {}

    for spec in d.columns:
        cells = [(r, d.cell(r, spec.name)) for r in d.observed_rows(spec.name)]
        observed[spec.name] = cells
        if not cells:
            excluded.append(spec.name)
            continue
        if spec.is_continuous:
            vals = sorted(float(v) for _, v in cells)
            mean = _fsum_mean(vals)
            cont.append(
                ContinuousSummary(
                    name=spec.name,
                    n_obs=len(vals),
                    min=vals[0],
                    max=vals[-1],
                    mean=mean,
                    median=quantile_linear(vals, 0.5),
                    p25=quantile_linear(vals, 0.25),
                    p75=quantile_linear(vals, 0.75),
                    sd=_fsum_sd(vals, mean),
                    decimals=value_decimals(vals),
                    unit=spec.unit,
                )
            )
        else:
            counts = {label: 0 for label in spec.categories}  # type: ignore[union-attr]
            for _, v in cells:
                counts[str(v)] += 1
            cat.append(
                CategoricalSummary(
                    name=spec.name,
                    n_obs=len(cells),
                    counts=tuple((label, counts[label]) for label in spec.categories),  # type: ignore[union-attr]
                )
            )

    # pairwise associations over rows where both columns are observed
    associations: list[tuple[str, str, float]] = []
    usable = [s for s in d.columns if s.name not in excluded]
    for i, a in enumerate(usable):
        for b in usable[i + 1 :]:
            if not a.is_continuous and not b.is_continuous:
                continue
            rows_a = dict(observed[a.name])
            pairs = [(rows_a[r], v) for r, v in observed[b.name] if r in rows_a]
            if len(pairs) < 2:
                continue
            va = [p[0] for p in pairs]
            vb = [p[1] for p in pairs]
            if a.is_continuous and b.is_continuous:
                r = pearson([float(x) for x in va], [float(y) for y in vb])
            elif a.is_continuous:
                r = _one_hot_association([float(x) for x in va], [str(y) for y in vb], b.categories)  # type: ignore[arg-type]
            else:
                r = _one_hot_association([float(y) for y in vb], [str(x) for x in va], a.categories)  # type: ignore[arg-type]
            if r is not None:
                associations.append((a.name, b.name, r))

    def _group(pairs: list[tuple[float, str]]) -> dict[str, list[float]]:
        out: dict[str, list[float]] = {}
        for v, key in pairs:
            out.setdefault(key, []).append(v)
        return out

    grouped: dict[tuple[str, str], tuple[GroupStats, ...]] = {}
    for vc in [s for s in usable if s.is_continuous]:
        for bc in [s for s in usable if not s.is_continuous]:
            rows_v = dict(observed[vc.name])
            pairs = [(float(rows_v[r]), str(v)) for r, v in observed[bc.name] if r in rows_v]
            if not pairs:
                continue
            by_label = _group(pairs)
            stats = []
            for label in bc.categories:  # type: ignore[union-attr]
                vals = sorted(by_label.get(label, []))
                if not vals:
                    continue
                mean = _fsum_mean(vals)
                stats.append(GroupStats(label=label, n=len(vals), mean=mean, sd=_fsum_sd(vals, mean)))
            if stats:
                grouped[(vc.name, bc.name)] = tuple(stats)

    bucketed: dict[tuple[str, str], tuple[BucketStats, ...]] = {}
    cont_specs = [s for s in usable if s.is_continuous]
    cont_by_name = {s.name: s for s in cont}
    for vc in cont_specs:
        for bc in cont_specs:
            if vc.name == bc.name:
                continue
            bsum = cont_by_name.get(bc.name)
            if bsum is None or not (bsum.min < bsum.p25 < bsum.p75 < bsum.max):
                continue
            rows_v = dict(observed[vc.name])
            pairs = [(float(rows_v[r]), float(v)) for r, v in observed[bc.name] if r in rows_v]
            if not pairs:
                continue
            edges = [(bsum.min, bsum.p25), (bsum.p25, bsum.p75), (bsum.p75, bsum.max)]
            buckets = []
            for i, (lo, hi) in enumerate(edges):
                # value on a shared boundary belongs to the lower bucket
                if i == 0:
                    members = sorted(v for v, b in pairs if b <= hi)
                else:
                    members = sorted(v for v, b in pairs if lo < b <= hi)
                if not members:
                    continue
                mean = _fsum_mean(members)
                buckets.append(
                    BucketStats(lo=lo, hi=hi, n=len(members), mean=mean, sd=_fsum_sd(members, mean))
                )
            if buckets:
                bucketed[(vc.name, bc.name)] = tuple(buckets)

    return SummaryStats(
        n_rows=d.n_rows,
        continuous=tuple(cont),
        categorical=tuple(cat),
        associations=tuple(associations),
        grouped=grouped,
        bucketed=bucketed,
        excluded=tuple(excluded),
        column_order=d.column_names,
    )


def correlation_rank(stats: SummaryStats, target: str) -> list[tuple[str, float]]:
    """All other columns ordered by |association| with the target, descending.

    Ties keep schema order.  Columns with no defined association against
    the target are omitted.
    """
    if not stats.has_column(target):
        raise DatasetError(f"no such column in stats: {target}")
    scored = []
    for name in stats.column_order:
        if name == target:
            continue
        r = stats.association(target, name)
        if r is not None:
            scored.append((name, abs(r)))
    order = {name: i for i, name in enumerate(stats.column_order)}
    scored.sort(key=lambda t: (-t[1], order[t[0]]))
    return scored
