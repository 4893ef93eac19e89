"""Persistence for learned models, schemas, and split manifests.

All three artifacts use one flat ``key = value`` text format.  Floats are
written with 17 significant digits so every value round-trips exactly;
free-form strings (attribute names, domain labels) are percent-encoded so any
CSV-legal label survives unchanged.  Writing is canonical: load followed by
save reproduces the file byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from urllib.parse import quote, unquote

import numpy as np

from .params import AttributeCpt, CptSet
from .schema import AttributeSchema, CATEGORICAL, CONTINUOUS, DataError, DatasetSplit, DiscreteTable
from .structure import ParentSets

MODEL_FORMAT = "dsynth-model"
SCHEMA_FORMAT = "dsynth-schema"
SPLIT_FORMAT = "dsynth-split"
FORMAT_VERSION = "1"


def fmt_float(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".17g")


def parse_float(s: str) -> float:
    return float(s)


def _enc(label: str) -> str:
    return quote(label, safe="")


def _dec(token: str) -> str:
    return unquote(token)


def _ints(values) -> str:
    return ",".join(str(int(v)) for v in values)


def _parse_ints(s: str) -> tuple[int, ...]:
    if s == "":
        return ()
    return tuple(int(t) for t in s.split(","))


@dataclass(frozen=True)
class SynthModel:
    """Everything needed to synthesize: schema, DAG, CPTs, and noise budgets."""

    schema: tuple[AttributeSchema, ...]
    structure: ParentSets
    cpts: CptSet
    epsilon_s: float = math.inf

    @property
    def m(self) -> int:
        return len(self.schema)


@dataclass(frozen=True)
class SplitManifest:
    """Origin row indices of each split part, for audit and re-selection."""

    rng_seed: int
    fractions: tuple[float, float, float]
    n_rows: int
    ds_indices: tuple[int, ...]
    dt_indices: tuple[int, ...]
    dp_indices: tuple[int, ...]


# ----------------------------------------------------------------- kv core

class _KvWriter:
    def __init__(self) -> None:
        self.lines: list[str] = []

    def put(self, key: str, value: str) -> None:
        self.lines.append(f"{key} = {value}")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _read_kv(path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if " = " not in line:
                raise DataError(f"{path}: malformed line {lineno}: {line!r}")
            key, value = line.split(" = ", 1)
            out[key] = value
    return out


def _require(kv: dict[str, str], key: str, path) -> str:
    try:
        return kv[key]
    except KeyError:
        raise DataError(f"{path}: missing key {key!r}") from None


# ------------------------------------------------------------ schema block

def _write_schema_block(w: _KvWriter, schema) -> None:
    w.put("m", str(len(schema)))
    for i, attr in enumerate(schema):
        w.put(f"attr.{i}.name", _enc(attr.name))
        w.put(f"attr.{i}.kind", attr.kind)
        w.put(f"attr.{i}.domain", "|".join(_enc(lab) for lab in attr.domain))
        if attr.kind == CONTINUOUS:
            w.put(f"attr.{i}.bin_edges", ",".join(fmt_float(e) for e in attr.bin_edges))


def _read_schema_block(kv: dict[str, str], path) -> tuple[AttributeSchema, ...]:
    m = int(_require(kv, "m", path))
    out = []
    for i in range(m):
        name = _dec(_require(kv, f"attr.{i}.name", path))
        kind = _require(kv, f"attr.{i}.kind", path)
        dom_raw = _require(kv, f"attr.{i}.domain", path)
        domain = tuple(_dec(t) for t in dom_raw.split("|")) if dom_raw else ()
        edges: tuple[float, ...] = ()
        if kind == CONTINUOUS:
            edges_raw = _require(kv, f"attr.{i}.bin_edges", path)
            edges = tuple(parse_float(t) for t in edges_raw.split(",")) if edges_raw else ()
        out.append(AttributeSchema(name, kind, domain, edges))
    return tuple(out)


def save_schema(schema, path) -> None:
    w = _KvWriter()
    w.put("format", SCHEMA_FORMAT)
    w.put("version", FORMAT_VERSION)
    _write_schema_block(w, schema)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(w.text())


def load_schema(path) -> tuple[AttributeSchema, ...]:
    kv = _read_kv(path)
    if kv.get("format") != SCHEMA_FORMAT:
        raise DataError(f"{path}: not a {SCHEMA_FORMAT} file")
    return _read_schema_block(kv, path)


# ------------------------------------------------------------- model file

def save_model(model: SynthModel, path) -> None:
    w = _KvWriter()
    w.put("format", MODEL_FORMAT)
    w.put("version", FORMAT_VERSION)
    _write_schema_block(w, model.schema)
    w.put("epsilon_s", fmt_float(model.epsilon_s))
    w.put("alpha", fmt_float(model.cpts.alpha))
    w.put("epsilon_p", fmt_float(model.cpts.epsilon_p))
    w.put("adjacency", model.cpts.adjacency)
    w.put("order", _ints(model.structure.order))
    for i in range(model.m):
        w.put(f"parents.{i}", _ints(model.structure.parents[i]))
        w.put(f"score.{i}", fmt_float(model.structure.scores[i]))
    for i, cpt in enumerate(model.cpts.attributes):
        w.put(f"cpt.{i}.configs", str(cpt.probs.shape[0]))
        for cfg in range(cpt.probs.shape[0]):
            w.put(f"cpt.{i}.row.{cfg}", " ".join(fmt_float(p) for p in cpt.probs[cfg]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(w.text())


def load_model(path) -> SynthModel:
    kv = _read_kv(path)
    if kv.get("format") != MODEL_FORMAT:
        raise DataError(f"{path}: not a {MODEL_FORMAT} file")
    schema = _read_schema_block(kv, path)
    m = len(schema)
    order = _parse_ints(_require(kv, "order", path))
    parents = tuple(_parse_ints(_require(kv, f"parents.{i}", path)) for i in range(m))
    scores = tuple(parse_float(_require(kv, f"score.{i}", path)) for i in range(m))
    structure = ParentSets(parents, order, scores)
    alpha = parse_float(_require(kv, "alpha", path))
    epsilon_p = parse_float(_require(kv, "epsilon_p", path))
    epsilon_s = parse_float(_require(kv, "epsilon_s", path))
    adjacency = _require(kv, "adjacency", path)
    tables = []
    for i in range(m):
        n_cfg = int(_require(kv, f"cpt.{i}.configs", path))
        dims = tuple(schema[p].cardinality for p in parents[i])
        card = schema[i].cardinality
        probs = np.empty((n_cfg, card))
        for cfg in range(n_cfg):
            row = _require(kv, f"cpt.{i}.row.{cfg}", path).split(" ")
            if len(row) != card:
                raise DataError(f"{path}: cpt row {i}/{cfg} has {len(row)} entries, expected {card}")
            probs[cfg] = [parse_float(t) for t in row]
        tables.append(AttributeCpt(i, parents[i], dims, probs))
    cpts = CptSet(tuple(tables), alpha, epsilon_p, adjacency)
    return SynthModel(schema, structure, cpts, epsilon_s)


# ---------------------------------------------------------- split manifest

def save_split_manifest(manifest: SplitManifest, path) -> None:
    w = _KvWriter()
    w.put("format", SPLIT_FORMAT)
    w.put("version", FORMAT_VERSION)
    w.put("rng_seed", str(manifest.rng_seed))
    w.put("fractions", ",".join(fmt_float(f) for f in manifest.fractions))
    w.put("n_rows", str(manifest.n_rows))
    w.put("ds", _ints(manifest.ds_indices))
    w.put("dt", _ints(manifest.dt_indices))
    w.put("dp", _ints(manifest.dp_indices))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(w.text())


def load_split_manifest(path) -> SplitManifest:
    kv = _read_kv(path)
    if kv.get("format") != SPLIT_FORMAT:
        raise DataError(f"{path}: not a {SPLIT_FORMAT} file")
    fr = tuple(parse_float(t) for t in _require(kv, "fractions", path).split(","))
    if len(fr) != 3:
        raise DataError(f"{path}: fractions must have three entries")
    return SplitManifest(
        rng_seed=int(_require(kv, "rng_seed", path)),
        fractions=(fr[0], fr[1], fr[2]),
        n_rows=int(_require(kv, "n_rows", path)),
        ds_indices=_parse_ints(_require(kv, "ds", path)),
        dt_indices=_parse_ints(_require(kv, "dt", path)),
        dp_indices=_parse_ints(_require(kv, "dp", path)),
    )


def manifest_from_split(split: DatasetSplit, rng_seed: int, fractions) -> SplitManifest:
    n = len(split.ds_indices) + len(split.dt_indices) + len(split.dp_indices)
    return SplitManifest(
        rng_seed=int(rng_seed),
        fractions=tuple(float(f) for f in fractions),
        n_rows=n,
        ds_indices=split.ds_indices,
        dt_indices=split.dt_indices,
        dp_indices=split.dp_indices,
    )


def split_from_manifest(table: DiscreteTable, manifest: SplitManifest) -> DatasetSplit:
    if table.n_rows != manifest.n_rows:
        raise DataError(
            f"manifest was built for {manifest.n_rows} rows, table has {table.n_rows}"
        )
    return DatasetSplit(
        ds=table.take(manifest.ds_indices),
        dt=table.take(manifest.dt_indices),
        dp=table.take(manifest.dp_indices),
        ds_indices=manifest.ds_indices,
        dt_indices=manifest.dt_indices,
        dp_indices=manifest.dp_indices,
    )
