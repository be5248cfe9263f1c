import tracemalloc

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from spicereg.errors import DataError
from spicereg.services.datagen_service import write_csv
from spicereg.services.io_service import (
    has_header,
    iter_csv_blocks,
    iter_samples,
    load_model,
    read_dataset,
    read_inputs,
    save_model,
)
from spicereg.services.spice_service import SpiceModel


def test_header_is_detected(write_rows):
    assert has_header(write_rows("h.csv", [[1, 2]], header="x1,y"))
    assert not has_header(write_rows("n.csv", [[1, 2]]))


def test_dataset_with_header(write_rows):
    X, y = read_dataset(write_rows("data.csv", [[1, 2, 3], [4, 5, 6]], header="a,b,y"))
    assert_array_equal(X, [[1.0, 2.0], [4.0, 5.0]])
    assert_array_equal(y, [3.0, 6.0])


def test_spaces_after_commas_are_accepted(write_rows):
    X, y = read_dataset(write_rows("spaced.csv", ["1.5, -2", "3, 4e-1"]))
    assert_array_equal(X, [[1.5], [3.0]])
    assert_array_equal(y, [-2.0, 0.4])


def test_blocks_respect_chunk_size(write_rows):
    path = write_rows("rows.csv", [[i, 2 * i] for i in range(5)])
    blocks = list(iter_csv_blocks(path, chunk_rows=2))
    assert [len(b) for b in blocks] == [2, 2, 1]
    assert_array_equal(np.vstack(blocks)[:, 1], [0.0, 2.0, 4.0, 6.0, 8.0])


def test_unparseable_field_reports_its_line(write_rows):
    path = write_rows("bad.csv", ["1,2", "3,abc"], header="x1,y")
    with pytest.raises(DataError, match="line 3"):
        read_dataset(path)


def test_line_numbers_count_across_chunks(write_rows):
    path = write_rows("late.csv", ["1,2", "3,4", "5,6", "7,?"])
    with pytest.raises(DataError, match="line 4"):
        list(iter_csv_blocks(path, chunk_rows=2))


def test_non_finite_values_are_rejected(write_rows):
    with pytest.raises(DataError, match="non-finite"):
        read_dataset(write_rows("inf.csv", ["1,2", "3,inf"]))


@pytest.mark.parametrize("rows", [["1,2", "3"], ["1,2", "3,4,5"]])
def test_ragged_rows_are_rejected(write_rows, rows):
    with pytest.raises(DataError):
        read_dataset(write_rows("ragged.csv", rows))


def test_declared_width_is_enforced(write_rows):
    with pytest.raises(DataError, match="expected 4 fields"):
        read_dataset(write_rows("narrow.csv", [[1, 2, 3]]), d=3)


@pytest.mark.parametrize("header", [None, "x1,y"])
def test_empty_files_have_no_rows(write_rows, header):
    path = write_rows("empty.csv", [], header=header)
    with pytest.raises(DataError, match="no rows"):
        list(iter_samples(path))


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match="not found"):
        read_dataset(tmp_path / "absent.csv")


def test_inputs_with_and_without_targets(write_rows):
    X, y = read_inputs(write_rows("with.csv", [[1, 2, 3]]), d=2)
    assert_array_equal(X, [[1.0, 2.0]])
    assert_array_equal(y, [3.0])

    X, y = read_inputs(write_rows("without.csv", [[1, 2]]), d=2)
    assert_array_equal(X, [[1.0, 2.0]])
    assert y is None

    with pytest.raises(DataError):
        read_inputs(write_rows("wide.csv", [[1, 2, 3, 4]]), d=2)


def test_model_file_roundtrip(tmp_path, make_linear_map, sparse_linear_data):
    X, y = sparse_linear_data
    model = SpiceModel(make_linear_map(5)).stream(X[:30], y[:30])
    path = save_model(model, tmp_path / "model.json")
    restored = load_model(path)
    assert restored.n == 30
    assert_array_equal(restored.weights, model.weights)


def test_missing_model_file(tmp_path):
    with pytest.raises(DataError, match="not found"):
        load_model(tmp_path / "absent.json")


def _peak_streaming_memory(path, fmap):
    model = SpiceModel(fmap)
    tracemalloc.start()
    try:
        for X, y in iter_samples(path, 2, chunk_rows=500):
            model.stream(X, y)
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    return peak


def test_streaming_memory_does_not_grow_with_rows(tmp_path, make_linear_map):
    rng = np.random.default_rng(0)
    peaks = []
    for rows in (1000, 10000):
        X = rng.standard_normal((rows, 2))
        path = tmp_path / f"rows{rows}.csv"
        write_csv(X, X @ np.array([1.0, -1.0]) + rng.standard_normal(rows), path)
        peaks.append(_peak_streaming_memory(path, make_linear_map(2)))
    assert peaks[1] < 2 * peaks[0]


@pytest.mark.slow
def test_million_row_soak(make_linear_map):
    model = SpiceModel(make_linear_map(2))
    rng = np.random.default_rng(1)
    tracemalloc.start()
    try:
        for _ in range(100):
            X = rng.standard_normal((10_000, 2))
            model.stream(X, 1.0 + X @ np.array([2.0, 0.0]) + rng.standard_normal(10_000))
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    assert model.n == 1_000_000
    assert peak < 5_000_000
    assert model.weights[1] == pytest.approx(2.0, abs=0.01)
