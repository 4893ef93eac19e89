"""Round-trip guarantees for model, schema, and split-manifest files."""

from __future__ import annotations

import math
import re

import numpy as np
import pytest

from dsynth.model import (
    SplitManifest,
    load_model,
    load_schema,
    load_split_manifest,
    manifest_from_split,
    save_model,
    save_schema,
    save_split_manifest,
    split_from_manifest,
)
from dsynth.schema import (
    CATEGORICAL,
    CONTINUOUS,
    AttributeSchema,
    DataError,
    split,
)

from conftest import random_model, random_table


def test_model_round_trip_lossless(tmp_path):
    model = random_model(np.random.default_rng(0), m=5)
    path = tmp_path / "model.txt"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.schema == model.schema
    assert loaded.structure == model.structure
    assert loaded.cpts.alpha == model.cpts.alpha
    assert math.isinf(loaded.cpts.epsilon_p)
    for a, b in zip(loaded.cpts.attributes, model.cpts.attributes):
        assert a.parents == b.parents
        assert np.array_equal(a.probs, b.probs)  # exact, not approximate


def test_model_resave_byte_identical(tmp_path):
    model = random_model(np.random.default_rng(1), m=4)
    p1, p2 = tmp_path / "m1.txt", tmp_path / "m2.txt"
    save_model(model, p1)
    save_model(load_model(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_model_probabilities_written_with_high_precision(tmp_path):
    model = random_model(np.random.default_rng(2), m=2)
    path = tmp_path / "model.txt"
    save_model(model, path)
    rows = [l for l in path.read_text().splitlines() if l.startswith("cpt.0.row.")]
    token = rows[0].split(" = ")[1].split(" ")[0]
    digits = re.sub(r"[^0-9]", "", token)
    assert len(digits) >= 15


def test_schema_file_bit_identical_round_trip(tmp_path):
    schema = (
        AttributeSchema("weird,name", CATEGORICAL, ("a|b", "c = d", "naïve", " x ")),
        AttributeSchema("xs", CONTINUOUS, ("[0.0,1.5)", "[1.5,3.0]"), (0.0, 1.5, 3.0)),
    )
    p1, p2 = tmp_path / "s1.txt", tmp_path / "s2.txt"
    save_schema(schema, p1)
    loaded = load_schema(p1)
    assert loaded == schema
    save_schema(loaded, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_split_manifest_round_trip(tmp_path):
    table = random_table(np.random.default_rng(3), 40, (3, 2))
    parts = split(table, (0.4, 0.3, 0.3), np.random.default_rng(4))
    manifest = manifest_from_split(parts, rng_seed=4, fractions=(0.4, 0.3, 0.3))
    path = tmp_path / "split.txt"
    save_split_manifest(manifest, path)
    loaded = load_split_manifest(path)
    assert loaded == manifest
    rebuilt = split_from_manifest(table, loaded)
    assert np.array_equal(rebuilt.ds.rows, parts.ds.rows)
    assert np.array_equal(rebuilt.dt.rows, parts.dt.rows)
    assert np.array_equal(rebuilt.dp.rows, parts.dp.rows)


def test_split_manifest_rejects_wrong_row_count(tmp_path):
    table = random_table(np.random.default_rng(5), 10, (2,))
    manifest = SplitManifest(0, (1.0, 0.0, 0.0), 11, tuple(range(11)), (), ())
    with pytest.raises(DataError):
        split_from_manifest(table, manifest)


def test_load_rejects_wrong_format(tmp_path):
    path = tmp_path / "junk.txt"
    path.write_text("format = something-else\n", encoding="utf-8")
    with pytest.raises(DataError):
        load_model(path)
    with pytest.raises(DataError):
        load_schema(path)
    with pytest.raises(DataError):
        load_split_manifest(path)


def test_load_names_missing_keys(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("format = dsynth-model\nversion = 1\n", encoding="utf-8")
    with pytest.raises(DataError, match="'m'"):
        load_model(path)
