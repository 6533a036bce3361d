from __future__ import annotations

import hashlib
import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load_or_skip
from oracles import shannon_imbalance_ref
from tabembed.dataset import (
    CATEGORICAL,
    CONTINUOUS,
    MISSING_TOKEN,
    SplitSpec,
    StratificationWarning,
    fetch_dataset,
    imbalance_from_counts,
    load_csv,
    load_split_indices,
    save_splits,
    shannon_imbalance,
    split,
    split_indices,
    table_from_rows,
)
from tabembed.dataset import fetch as fetch_mod
from tabembed.dataset.splitting import allocate, largest_remainder
from tabembed.errors import ConfigurationError, DegenerateTargetError, FetchError, IntegrityError, ParseError, RegistryError


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def synthetic_table(n_rows: int, levels=("a", "b", "c"), seed: int = 0):
    rng = np.random.default_rng(seed)
    y = rng.choice(levels, size=n_rows)
    rows = [[str(rng.integers(0, 3)), y[i]] for i in range(n_rows)]
    return table_from_rows(["f", "y"], rows, "y")


def test_role_inference_threshold(tmp_path):
    lines = ["num,small,y"] + [f"{i},{i % 3},{'p' if i % 2 else 'q'}" for i in range(12)]
    table = load_csv(write(tmp_path / "t.csv", "\n".join(lines)), "y")
    assert table.column_schema("num").role == CONTINUOUS
    assert table.column_schema("small").role == CATEGORICAL
    assert table.column_schema("small").levels == ("0", "1", "2")
    assert table.task == "binary"


def test_nine_distinct_numbers_stay_categorical(tmp_path):
    lines = ["v,y"] + [f"{i % 9},{i % 2}" for i in range(30)]
    assert load_csv(write(tmp_path / "t.csv", "\n".join(lines)), "y").column_schema("v").role == CATEGORICAL


def test_five_row_file_with_twelve_distinct_values_is_continuous(tmp_path):
    # 12 distinct values need 12 rows; the threshold counts distinct values, not rows
    lines = ["v,w,y"] + [f"{i}.5,x,{i % 2}" for i in range(12)]
    table = load_csv(write(tmp_path / "t.csv", "\n".join(lines)), "y")
    assert table.column_schema("v").role == CONTINUOUS
    assert table.column_schema("w").role == CATEGORICAL


def test_missing_cells_become_a_level(tmp_path):
    lines = ["c,y", "a,1", "?,0", ",1", "b,0"]
    table = load_csv(write(tmp_path / "t.csv", "\n".join(lines)), "y")
    schema = table.column_schema("c")
    assert MISSING_TOKEN in schema.levels
    assert list(table.columns["c"]) == ["a", MISSING_TOKEN, MISSING_TOKEN, "b"]


def test_missing_cells_in_continuous_column_are_nan(tmp_path):
    lines = ["v,y"] + [f"{i},{i % 2}" for i in range(15)] + ["?,1"]
    table = load_csv(write(tmp_path / "t.csv", "\n".join(lines)), "y")
    assert table.column_schema("v").role == CONTINUOUS
    assert math.isnan(table.columns["v"][-1])


def test_parse_error_reports_row_index(tmp_path):
    path = write(tmp_path / "bad.csv", "a,b,y\n1,2,x\n3,4\n")
    with pytest.raises(ParseError) as info:
        load_csv(path, "y")
    assert info.value.row_index == 1


def test_absent_target_is_a_configuration_error(tmp_path):
    with pytest.raises(ConfigurationError):
        load_csv(write(tmp_path / "t.csv", "a,b\n1,2\n"), "y")


def test_single_level_target_is_degenerate():
    table = table_from_rows(["f", "y"], [["1", "k"], ["2", "k"]], "y")
    with pytest.raises(DegenerateTargetError):
        _ = table.task
    with pytest.raises(DegenerateTargetError):
        shannon_imbalance(table)


def test_levels_are_lexicographic():
    table = table_from_rows(["f", "y"], [["b", "1"], ["a", "0"], ["10", "1"], ["9", "0"]], "y")
    assert table.column_schema("f").levels == ("10", "9", "a", "b")


def test_balanced_target_has_zero_imbalance():
    assert imbalance_from_counts({"a": 50, "b": 50}).imbalance == pytest.approx(0.0, abs=1e-12)


def test_ninety_ten_imbalance():
    # hand evaluation with base-2 logs: 1 - 0.4690 = 0.5310
    assert imbalance_from_counts({"a": 90, "b": 10}).imbalance == pytest.approx(0.531, abs=5e-4)


@given(st.lists(st.integers(1, 500), min_size=2, max_size=8))
def test_imbalance_is_base_free_and_bounded(counts):
    report = imbalance_from_counts({str(i): c for i, c in enumerate(counts)})
    assert 0.0 <= report.imbalance <= 1.0
    assert report.imbalance == pytest.approx(shannon_imbalance_ref(counts, math.log2), abs=1e-12)


def test_adult_shape_and_imbalance():
    table = load_or_skip("adult")
    assert len(table.feature_schema) == 14
    assert table.task == "binary"
    assert shannon_imbalance(table).imbalance == pytest.approx(0.203, abs=0.01)


def test_split_of_100_rows_is_exact():
    idx = split_indices(synthetic_table(100, levels=("a", "b")), SplitSpec(seed=1))
    assert tuple(len(i) for i in idx.as_tuple()) == (70, 15, 15)


def test_split_of_97_rows_is_within_one_of_quota():
    idx = split_indices(synthetic_table(97), SplitSpec(seed=3))
    sizes = [len(i) for i in idx.as_tuple()]
    assert sum(sizes) == 97
    assert all(abs(s - q) <= 1 for s, q in zip(sizes, (68, 15, 14)))


def test_largest_remainder_of_97():
    assert largest_remainder(97, (0.7, 0.15, 0.15)) in ([68, 15, 14], [68, 14, 15])


def test_split_is_deterministic():
    table = synthetic_table(200)
    a, b = split_indices(table, SplitSpec(seed=7)), split_indices(table, SplitSpec(seed=7))
    assert all(np.array_equal(x, y) for x, y in zip(a.as_tuple(), b.as_tuple()))


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(3, 60), min_size=2, max_size=5),
    st.integers(0, 2**31 - 1),
)
def test_split_is_partition_and_stratified(level_sizes, seed):
    rows = [["0", f"L{j}"] for j, n in enumerate(level_sizes) for _ in range(n)]
    table = table_from_rows(["f", "y"], rows, "y")
    idx = split_indices(table, SplitSpec(seed=seed))
    joined = np.concatenate(idx.as_tuple())
    assert sorted(joined.tolist()) == list(range(table.n_rows))
    y = table.target
    for part, frac in zip(idx.as_tuple(), (0.70, 0.15, 0.15)):
        for level, n in zip(sorted(set(y)), [level_sizes[int(s[1:])] for s in sorted(set(y))]):
            got = int(np.sum(y[part] == level))
            assert abs(got - frac * n) < 1.0 + 1e-9


@given(st.lists(st.integers(0, 80), min_size=1, max_size=6))
def test_allocation_rounds_every_cell_down_or_up(sizes):
    out = allocate(sizes, (0.7, 0.15, 0.15))
    assert [int(r.sum()) for r in out] == sizes
    for n, row in zip(sizes, out):
        for got, f in zip(row, (0.7, 0.15, 0.15)):
            assert math.floor(n * f - 1e-9) <= got <= math.ceil(n * f + 1e-9)


def test_tiny_level_goes_to_train_with_warning():
    rows = [["0", "big"]] * 30 + [["1", "tiny"]] * 2
    table = table_from_rows(["f", "y"], rows, "y")
    with pytest.warns(StratificationWarning):
        idx = split_indices(table)
    tiny = np.nonzero(table.target == "tiny")[0]
    assert set(tiny.tolist()) <= set(idx.train.tolist())


def test_splits_round_trip_through_sidecar(tmp_path):
    table = synthetic_table(60)
    spec = SplitSpec(seed=5)
    idx = split_indices(table, spec)
    sidecar = save_splits(tmp_path, table, idx, spec)
    loaded, spec2 = load_split_indices(sidecar)
    assert spec2 == spec
    assert all(np.array_equal(a, b) for a, b in zip(idx.as_tuple(), loaded.as_tuple()))
    first = sidecar.read_bytes()
    save_splits(tmp_path, table, split_indices(table, spec), spec)
    assert sidecar.read_bytes() == first
    train, _, _ = split(table, spec)
    reread = load_csv(tmp_path / "train.csv", "y")
    assert reread.n_rows == train.n_rows


def test_unknown_dataset_is_a_registry_error(isolated_cache):
    with pytest.raises(RegistryError):
        fetch_dataset("unknown")


def test_offline_with_empty_cache_fails(isolated_cache):
    with pytest.raises(FetchError):
        fetch_dataset("mushroom")


def test_registry_lists_ten_datasets_with_targets():
    entries = fetch_mod.registry()
    assert len(entries) == 10
    for entry in entries.values():
        assert entry.target in entry.columns
        assert entry.sources


def test_registry_rejects_orphan_source():
    with pytest.raises(RegistryError):
        fetch_mod.parse_registry("source ghost url=file:///x\n")


@pytest.fixture
def local_source(tmp_path, monkeypatch):
    """A registry with one dataset served from a local file URL."""
    raw = write(tmp_path / "toy.data", "x,1\ny,0\nx,1\n")
    digest = hashlib.sha256(raw.read_bytes()).hexdigest()

    def install(sha):
        text = (
            "dataset toy target=y columns=f,y\n"
            f"source toy url={raw.as_uri()} sha256={sha} format=delimited delimiter=comma\n"
        )
        monkeypatch.setattr(fetch_mod, "registry", lambda: fetch_mod.parse_registry(text))

    return raw, digest, install


def test_fetch_pinned_then_cache_hit(tmp_path, local_source):
    raw, digest, install = local_source
    install(digest)
    cache = tmp_path / "cache"
    path = fetch_dataset("toy", cache, offline=False)
    assert path.read_text().splitlines() == ["f,y", "x,1", "y,0", "x,1"]
    meta = json.loads((cache / "toy.json").read_text())
    assert meta["raw_sha256"] == digest and meta["rows"] == 3
    raw.unlink()
    assert fetch_dataset("toy", cache, offline=True) == path


def test_fetch_checksum_mismatch(tmp_path, local_source):
    _, _, install = local_source
    install("0" * 64)
    with pytest.raises(IntegrityError):
        fetch_dataset("toy", tmp_path / "cache", offline=False)


def test_unpinned_source_is_recorded_then_verified(tmp_path, local_source):
    _, digest, install = local_source
    install("-")
    cache = tmp_path / "cache"
    fetch_dataset("toy", cache, offline=False)
    record = cache / "downloads" / "toy.data.sha256"
    assert record.read_text().strip() == digest
    (cache / "toy.csv").unlink()
    (cache / "downloads" / "toy.data").write_text("tampered,1\n")
    with pytest.raises(IntegrityError):
        fetch_dataset("toy", cache, offline=True)


def test_tampered_cached_csv_is_detected(tmp_path, local_source):
    _, digest, install = local_source
    install(digest)
    cache = tmp_path / "cache"
    path = fetch_dataset("toy", cache, offline=False)
    path.write_text("f,y\nz,1\n")
    with pytest.raises(IntegrityError):
        fetch_dataset("toy", cache, offline=True)


def test_reordered_columns_are_normalized(tmp_path, monkeypatch):
    raw = write(tmp_path / "r.data", "1,a,b\n0,c,d\n")
    text = (
        "dataset r target=y columns=f,g,y\n"
        f"source r url={raw.as_uri()} sha256=- format=delimited delimiter=comma order=1-2,0\n"
    )
    monkeypatch.setattr(fetch_mod, "registry", lambda: fetch_mod.parse_registry(text))
    path = fetch_dataset("r", tmp_path / "cache", offline=False)
    assert path.read_text().splitlines() == ["f,g,y", "a,b,1", "c,d,0"]


def test_warnings_do_not_fire_for_healthy_split():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        split_indices(synthetic_table(50))
