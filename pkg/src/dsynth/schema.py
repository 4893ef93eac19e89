"""Tabular ingestion: CSV parsing, schema inference, discretization, and splits.

Everything downstream works on integer category indices.  Continuous columns
are mapped onto equal-width bins during `discretize`; categorical columns keep
their (sorted) label order.  All container types are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

CATEGORICAL = "categorical"
CONTINUOUS = "continuous"

#: fractions handed to split() must sum to 1 within this slack
FRACTION_TOL = 1e-9


class DataError(ValueError):
    """Malformed input data, schema violation, or contract breach."""


def _fmt_edge(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class AttributeSchema:
    """One column: its name, kind, category domain, and (if binned) edges.

    For a categorical attribute the domain is the sorted list of observed
    labels.  For a continuous attribute the domain holds one label per bin and
    ``bin_edges`` has ``len(domain) + 1`` ascending boundaries.  A continuous
    attribute fresh out of `infer_schema` has neither (they are filled in by
    `discretize`).
    """

    name: str
    kind: str
    domain: tuple[str, ...] = ()
    bin_edges: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in (CATEGORICAL, CONTINUOUS):
            raise DataError(f"attribute {self.name!r}: unknown kind {self.kind!r}")
        if len(set(self.domain)) != len(self.domain):
            raise DataError(f"attribute {self.name!r}: duplicate domain labels")
        if self.kind == CATEGORICAL:
            if not self.domain:
                raise DataError(f"attribute {self.name!r}: empty categorical domain")
            if self.bin_edges:
                raise DataError(f"attribute {self.name!r}: bin_edges on a categorical attribute")
        else:
            if self.bin_edges:
                edges = self.bin_edges
                if any(b <= a for a, b in zip(edges, edges[1:])):
                    raise DataError(f"attribute {self.name!r}: bin_edges not strictly increasing")
                if len(self.domain) != len(edges) - 1:
                    raise DataError(f"attribute {self.name!r}: domain size does not match bin count")
            elif self.domain:
                raise DataError(f"attribute {self.name!r}: continuous domain without bin_edges")

    @property
    def cardinality(self) -> int:
        return len(self.domain)

    def index_of(self, label: str) -> int:
        try:
            return self.domain.index(label)
        except ValueError:
            raise DataError(f"unseen label {label!r} in column {self.name!r}") from None


@dataclass(frozen=True)
class RawTable:
    """Header names plus a rectangular matrix of string cells."""

    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        return len(self.header)

    def column(self, j: int) -> list[str]:
        return [r[j] for r in self.rows]


@dataclass(frozen=True)
class DiscreteTable:
    """Rows of category indices under a fixed schema."""

    schema: tuple[AttributeSchema, ...]
    rows: np.ndarray  # shape (n, m), int64, read-only

    def __post_init__(self) -> None:
        arr = np.asarray(self.rows, dtype=np.int64)
        if arr.ndim != 2:
            arr = arr.reshape((arr.shape[0] if arr.size else 0, len(self.schema)))
        if arr.shape[1] != len(self.schema):
            raise DataError(
                f"row width {arr.shape[1]} does not match schema width {len(self.schema)}"
            )
        for j, attr in enumerate(self.schema):
            if not attr.domain:
                raise DataError(f"attribute {attr.name!r} has no finalized domain")
            if arr.shape[0]:
                col = arr[:, j]
                if col.min() < 0 or col.max() >= attr.cardinality:
                    raise DataError(f"index out of domain range in column {attr.name!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "rows", arr)

    @property
    def n_rows(self) -> int:
        return int(self.rows.shape[0])

    @property
    def m(self) -> int:
        return len(self.schema)

    def column(self, j: int) -> np.ndarray:
        return self.rows[:, j]

    def take(self, indices) -> "DiscreteTable":
        idx = np.asarray(indices, dtype=np.int64)
        return DiscreteTable(self.schema, self.rows[idx].copy())

    def labels_row(self, i: int) -> tuple[str, ...]:
        return tuple(self.schema[j].domain[int(v)] for j, v in enumerate(self.rows[i]))


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint subsets for seeding (ds), structure (dt) and parameters (dp)."""

    ds: DiscreteTable
    dt: DiscreteTable
    dp: DiscreteTable
    ds_indices: tuple[int, ...] = ()
    dt_indices: tuple[int, ...] = ()
    dp_indices: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not (self.ds.schema == self.dt.schema == self.dp.schema):
            raise DataError("split parts do not share one schema")
        all_idx = self.ds_indices + self.dt_indices + self.dp_indices
        if all_idx and len(set(all_idx)) != len(all_idx):
            raise DataError("split parts overlap by origin row index")


# ---------------------------------------------------------------- ingestion

def ingest_csv(path, declared_schema: list[AttributeSchema] | None = None) -> RawTable:
    """Parse an RFC-4180-style CSV with a header row into a RawTable.

    Raises DataError on an empty file, on ragged rows (with the offending file
    row number, header = row 1), and on a header that does not match
    ``declared_schema`` when one is given.
    """
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"empty file: {path}") from None
        width = len(header)
        rows: list[tuple[str, ...]] = []
        for rownum, rec in enumerate(reader, start=2):
            if len(rec) != width:
                raise DataError(
                    f"ragged row at row {rownum}: expected {width} cells, got {len(rec)}"
                )
            rows.append(tuple(rec))
    if declared_schema is not None:
        expected = [a.name for a in declared_schema]
        if len(header) != len(expected):
            raise DataError(
                f"header has {len(header)} columns, schema expects {len(expected)}"
            )
        for j, (got, want) in enumerate(zip(header, expected)):
            if got != want:
                raise DataError(f"schema mismatch at column {j}: {got!r} != expected {want!r}")
    return RawTable(tuple(header), tuple(rows))


def _is_float(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def infer_schema(raw: RawTable, max_categories: int) -> list[AttributeSchema]:
    """Classify each column as categorical or continuous.

    A column is categorical when its distinct non-empty value count is at most
    ``max_categories`` or when any cell fails to parse as a number; otherwise
    it is continuous (domain and edges left for `discretize`).
    """
    if max_categories < 1:
        raise DataError("max_categories must be >= 1")
    if raw.n_rows == 0:
        raise DataError("cannot infer a schema from an empty table")
    out: list[AttributeSchema] = []
    for j, name in enumerate(raw.header):
        cells = [c for c in raw.column(j) if c != ""]
        if not cells:
            raise DataError(f"column {name!r} has no non-empty cells")
        distinct = sorted(set(cells))
        numeric = all(_is_float(c) for c in cells)
        if len(distinct) <= max_categories or not numeric:
            out.append(AttributeSchema(name, CATEGORICAL, tuple(distinct)))
        else:
            out.append(AttributeSchema(name, CONTINUOUS))
    return out


def _bin_labels(edges: np.ndarray) -> tuple[str, ...]:
    labels = []
    last = len(edges) - 2
    for b in range(len(edges) - 1):
        close = "]" if b == last else ")"
        labels.append(f"[{_fmt_edge(edges[b])},{_fmt_edge(edges[b + 1])}{close}")
    return tuple(labels)


def discretize(raw: RawTable, schema: list[AttributeSchema], bins: int) -> DiscreteTable:
    """Map string cells to category indices, fitting equal-width bins.

    Continuous columns get ``bins`` equal-width bins over the observed
    [min, max]; the maximum falls in the last (closed) bin.  A constant
    continuous column becomes a single bin.  Categorical cells map to their
    domain index.  Empty cells and labels outside the domain are errors.
    """
    if bins < 1:
        raise DataError("bins must be >= 1")
    if len(schema) != raw.n_cols:
        raise DataError("schema width does not match table width")
    n = raw.n_rows
    final_schema: list[AttributeSchema] = []
    cols: list[np.ndarray] = []
    for j, attr in enumerate(schema):
        cells = raw.column(j)
        idx = np.zeros(n, dtype=np.int64)
        if attr.kind == CATEGORICAL:
            lookup = {lab: i for i, lab in enumerate(attr.domain)}
            for i, cell in enumerate(cells):
                if cell == "":
                    raise DataError(f"missing value in column {attr.name!r} at row {i + 2}")
                try:
                    idx[i] = lookup[cell]
                except KeyError:
                    raise DataError(
                        f"unseen label {cell!r} in column {attr.name!r}"
                    ) from None
            final_schema.append(attr)
        else:
            vals = np.empty(n, dtype=float)
            for i, cell in enumerate(cells):
                if cell == "":
                    raise DataError(f"missing value in column {attr.name!r} at row {i + 2}")
                try:
                    vals[i] = float(cell)
                except ValueError:
                    raise DataError(
                        f"non-numeric cell {cell!r} in continuous column {attr.name!r}"
                    ) from None
            lo = float(vals.min()) if n else 0.0
            hi = float(vals.max()) if n else 1.0
            if hi <= lo:
                edges = np.array([lo, lo + 1.0])
            else:
                edges = np.linspace(lo, hi, bins + 1)
            nbins = len(edges) - 1
            width = (edges[-1] - edges[0]) / nbins
            bidx = np.floor((vals - edges[0]) / width).astype(np.int64)
            idx = np.clip(bidx, 0, nbins - 1)
            final_schema.append(
                AttributeSchema(attr.name, CONTINUOUS, _bin_labels(edges), tuple(float(e) for e in edges))
            )
        cols.append(idx)
    rows = np.stack(cols, axis=1) if cols else np.zeros((n, 0), dtype=np.int64)
    if n == 0:
        rows = np.zeros((0, len(final_schema)), dtype=np.int64)
    return DiscreteTable(tuple(final_schema), rows)


def apply_schema(raw: RawTable, schema: list[AttributeSchema] | tuple[AttributeSchema, ...]) -> DiscreteTable:
    """Map cells to indices under an already-finalized schema.

    Continuous cells may be numeric (placed by the stored bin edges, clamped
    to the outer bins) or the exact bin label written by this package.
    """
    schema = tuple(schema)
    if len(schema) != raw.n_cols:
        raise DataError("schema width does not match table width")
    n = raw.n_rows
    cols: list[np.ndarray] = []
    for j, attr in enumerate(schema):
        if not attr.domain:
            raise DataError(f"attribute {attr.name!r} has no finalized domain")
        lookup = {lab: i for i, lab in enumerate(attr.domain)}
        cells = raw.column(j)
        idx = np.zeros(n, dtype=np.int64)
        if attr.kind == CATEGORICAL:
            for i, cell in enumerate(cells):
                if cell == "":
                    raise DataError(f"missing value in column {attr.name!r} at row {i + 2}")
                try:
                    idx[i] = lookup[cell]
                except KeyError:
                    raise DataError(f"unseen label {cell!r} in column {attr.name!r}") from None
        else:
            edges = np.asarray(attr.bin_edges)
            nbins = len(edges) - 1
            for i, cell in enumerate(cells):
                if cell == "":
                    raise DataError(f"missing value in column {attr.name!r} at row {i + 2}")
                hit = lookup.get(cell)
                if hit is not None:
                    idx[i] = hit
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"unseen label {cell!r} in column {attr.name!r}") from None
                b = int(np.searchsorted(edges, v, side="right")) - 1
                idx[i] = min(max(b, 0), nbins - 1)
        cols.append(idx)
    rows = np.stack(cols, axis=1) if cols else np.zeros((n, 0), dtype=np.int64)
    if n == 0:
        rows = np.zeros((0, len(schema)), dtype=np.int64)
    return DiscreteTable(schema, rows)


# -------------------------------------------------------------------- split

def split(table: DiscreteTable, fractions, rng: np.random.Generator) -> DatasetSplit:
    """Shuffle rows and partition them into ds/dt/dp by cumulative fractions.

    Part sizes are rounded; the remainder goes to ds.  Origin row indices are
    recorded on the returned split so disjointness can be audited and the
    partition persisted.
    """
    f = tuple(float(x) for x in fractions)
    if len(f) != 3:
        raise DataError("fractions must have exactly three entries")
    if any(x < 0 for x in f):
        raise DataError("fractions must be nonnegative")
    if abs(sum(f) - 1.0) > FRACTION_TOL:
        raise DataError(f"fractions must sum to 1 (got {sum(f)!r})")
    n = table.n_rows
    nonzero_parts = sum(1 for x in f if x > 0)
    if n < nonzero_parts:
        raise DataError(f"{n} rows cannot cover {nonzero_parts} nonzero parts")
    if n < 3:
        raise DataError("split needs at least 3 rows")
    perm = rng.permutation(n)
    n_dt = min(int(round(f[1] * n)), n)
    n_dp = min(int(round(f[2] * n)), n - n_dt)
    n_ds = n - n_dt - n_dp
    ds_idx = perm[:n_ds]
    dt_idx = perm[n_ds:n_ds + n_dt]
    dp_idx = perm[n_ds + n_dt:]
    return DatasetSplit(
        ds=table.take(ds_idx),
        dt=table.take(dt_idx),
        dp=table.take(dp_idx),
        ds_indices=tuple(int(i) for i in ds_idx),
        dt_indices=tuple(int(i) for i in dt_idx),
        dp_indices=tuple(int(i) for i in dp_idx),
    )
