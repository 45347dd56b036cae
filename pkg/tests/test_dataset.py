import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covactive.dataset import (Dataset, DatasetError, PoolState, SplitSpec, load_dataset,
                               one_hot_encode, split_pools)
from covactive.presets import PRESETS, get_preset


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def _toy(n, k=3, classes=2):
    rng = np.random.default_rng(n)
    rows = rng.integers(0, 3, size=(n, k))
    labels = np.arange(n) % classes
    return Dataset(rows, labels, tuple(f"f{i}" for i in range(k)),
                   tuple(("a", "b", "c") for _ in range(k)), tuple(str(c) for c in range(classes)))


def test_load_indexes_values_in_first_appearance_order(tmp_path):
    p = _write(tmp_path, "d.csv", "x,y,pos\ny,y,neg\nx,z,pos\n")
    ds = load_dataset(p)
    assert ds.value_names == (("x", "y"), ("y", "z"))
    assert ds.class_names == ("pos", "neg")
    assert ds.rows.tolist() == [[0, 0], [1, 0], [0, 1]]
    assert ds.labels.tolist() == [0, 1, 0]
    assert ds.cardinalities == (2, 2)
    assert ds.name == "d"


def test_header_and_class_column(tmp_path):
    p = _write(tmp_path, "d.csv", "cls,a,b\nL,1,2\nR,2,2\n")
    ds = load_dataset(p, header=True, class_column=0)
    assert ds.feature_names == ("a", "b")
    assert ds.n_rows == 2 and ds.class_names == ("L", "R")


def test_whitespace_delimiter_and_dropped_column(tmp_path):
    p = _write(tmp_path, "m.train", " 1 1 2 data_1\n 0 2 1 data_2\n")
    ds = load_dataset(p, delimiter=None, class_column=0, drop_columns=(3,))
    assert ds.n_features == 2 and ds.class_names == ("1", "0")


def test_ragged_row_names_line(tmp_path):
    p = _write(tmp_path, "bad.csv", "a,b,c\na,b\n")
    with pytest.raises(DatasetError, match=r"bad\.csv:2"):
        load_dataset(p)


def test_empty_file_and_single_class(tmp_path):
    with pytest.raises(DatasetError):
        load_dataset(_write(tmp_path, "e.csv", "\n"))
    with pytest.warns(UserWarning):
        load_dataset(_write(tmp_path, "one.csv", "a,b,yes\nb,a,yes\n"))


def test_pre_split_test_file_shares_universe(tmp_path):
    tr = _write(tmp_path, "tr.csv", "a,b,p\nb,a,n\n")
    te = _write(tmp_path, "te.csv", "c,a,p\n")
    ds = load_dataset(tr, test_path=te)
    assert ds.n_train == 2 and ds.n_rows == 3
    assert ds.value_names[0] == ("a", "b", "c")
    pools = split_pools(ds, SplitSpec(initial_fraction=0.5, pre_split_test=True))
    assert pools.test.tolist() == [2]
    with pytest.raises(DatasetError):
        split_pools(_toy(10), SplitSpec(pre_split_test=True))


def test_encode_maps_unseen_to_reserved_index(ttt):
    row = ttt.encode(["x"] * 8 + ["?"])
    assert row[-1] == ttt.cardinalities[-1]
    with pytest.raises(DatasetError):
        ttt.encode(["x"])


def test_rows_are_read_only(ttt):
    with pytest.raises(ValueError):
        ttt.rows[0, 0] = 1


def test_split_sizes_for_957_rows(ttt):
    assert ttt.n_rows == 957
    pools = split_pools(ttt, SplitSpec(seed=4))
    assert (pools.test.size, pools.labeled.size, pools.unlabeled.size) == (95, 21, 841)
    assert pools.is_disjoint(ttt.n_rows)


def test_split_is_seeded():
    ds = _toy(200)
    a, b = split_pools(ds, SplitSpec(seed=1)), split_pools(ds, SplitSpec(seed=1))
    c = split_pools(ds, SplitSpec(seed=2))
    assert all(np.array_equal(getattr(a, n), getattr(b, n)) for n in ("labeled", "unlabeled", "test"))
    assert not np.array_equal(a.test, c.test)


@settings(max_examples=80, deadline=None)
@given(st.integers(45, 3000), st.floats(0.0, 0.5), st.floats(0.025, 0.5), st.integers(0, 9))
def test_split_floor_cardinalities(n, tf, inf, seed):
    ds = _toy(n)
    pools = split_pools(ds, SplitSpec(tf, inf, seed))
    n_test = math.floor(tf * n)
    assert pools.test.size == n_test
    assert pools.labeled.size == math.floor(inf * (n - n_test))
    assert pools.is_disjoint(n)


def test_split_errors():
    with pytest.raises(DatasetError):
        split_pools(_toy(10), SplitSpec())
    with pytest.raises(DatasetError):
        SplitSpec(test_fraction=1.2)


def test_pool_label_moves_rows_stably():
    pools = PoolState(np.array([0]), np.array([3, 5, 7, 9]), np.array([1]))
    moved = pools.label([2, 0])
    assert moved.tolist() == [7, 3]
    assert pools.labeled.tolist() == [0, 7, 3]
    assert pools.unlabeled.tolist() == [5, 9]
    with pytest.raises(ValueError):
        pools.label([0, 0])
    with pytest.raises(IndexError):
        pools.label([5])


def test_one_hot_blocks():
    X = one_hot_encode([[0, 2], [1, 3]], [2, 3])
    assert X.tolist() == [[1, 0, 0, 0, 1], [0, 1, 0, 0, 0]]
    with pytest.raises(ValueError):
        one_hot_encode([[0]])


@pytest.mark.parametrize("name", ["tic-tac-toe", "balance-scale", "car", "chess", "nursery"])
def test_preset_batch_counts_follow_from_floor_split(name):
    p = PRESETS[name]
    n = p.expected_rows
    rest = n - math.floor(0.1 * n)
    query = rest - math.floor(0.025 * rest)
    assert query // p.batch_size == p.batch_count


def test_preset_aliases():
    assert get_preset("KRKOPT").name == "chess"
    assert get_preset("balance").name == "balance-scale"
    with pytest.raises(ValueError):
        get_preset("iris")


def test_generated_presets_load_with_expected_rows(data_dir):
    for name in ("tic-tac-toe", "balance-scale"):
        p = get_preset(name)
        ds = load_dataset(data_dir / p.filename, **p.load_options())
        assert ds.n_rows == p.expected_rows
