import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairreg.data import (Dataset, gen_synthetic_regression, gen_zafar_classification, load_csv,
                          save_csv, split)


def _write(path, text):
    path.write_text(text)
    return path


def test_load_csv_three_rows(tmp_path):
    f = _write(tmp_path / "d.csv", "f1,f2,y,a\n1,2,0.5,0\n3,4,0.1,1\n5,6,0.9,1\n")
    ds = load_csv(f, "y", "a")
    assert (ds.m, ds.n) == (3, 2)
    assert ds.feature_names == ("f1", "f2")
    assert np.array_equal(ds.a, [0, 1, 1])
    assert np.array_equal(ds.X[:, 1], [2, 4, 6])


def test_load_csv_maps_sensitive_by_sorted_order(tmp_path):
    f = _write(tmp_path / "d.csv", "a,x,y\n7,1,1\n-2,2,1\n7,3,1\n")
    ds = load_csv(f, "y", "a")
    assert np.array_equal(ds.a, [1, 0, 1])
    assert ds.sensitive_values == (-2.0, 7.0)


def test_load_csv_single_group(tmp_path):
    f = _write(tmp_path / "d.csv", "x,y,a\n1,1,0\n2,1,0\n")
    with pytest.raises(ValueError, match="single sensitive group"):
        load_csv(f, "y", "a")


def test_load_csv_bad_cell_names_row_and_column(tmp_path):
    f = _write(tmp_path / "d.csv", "x,y,a\n1,1,0\n2,abc,1\n")
    with pytest.raises(ValueError, match=r"row 3, column 'y'"):
        load_csv(f, "y", "a")


@pytest.mark.parametrize("text,msg", [("", "empty"), ("x,y,a\n", "no data"),
                                      ("x,y\n1,2\n", "missing column")])
def test_load_csv_errors(tmp_path, text, msg):
    f = _write(tmp_path / "d.csv", text)
    with pytest.raises(ValueError, match=msg):
        load_csv(f, "y", "a")


def test_load_csv_classification_labels(tmp_path):
    f = _write(tmp_path / "d.csv", "x,y,a\n1,1,0\n2,0,1\n")
    with pytest.raises(ValueError, match="-1 or \\+1"):
        load_csv(f, "y", "a", "logit")


def test_csv_round_trip(tmp_path):
    ds, _ = gen_synthetic_regression(3, 12, 1)
    save_csv(ds, tmp_path / "s.csv")
    back = load_csv(tmp_path / "s.csv", "y", "a")
    assert np.array_equal(back.X, ds.X)
    assert np.array_equal(back.y, ds.y)
    assert np.array_equal(back.a, ds.a)


def test_dataset_rejects_nonfinite():
    with pytest.raises(ValueError):
        Dataset(np.array([[np.nan], [1.0]]), [0.0, 1.0], [0, 1])


def test_split_repeatable_halves():
    ds, _ = gen_synthetic_regression(4, 10, 0)
    ds = Dataset(ds.X, ds.y, [0, 1] * 5)
    a1, b1 = split(ds, 0.5, 7)
    a2, b2 = split(ds, 0.5, 7)
    assert a1.m == b1.m == 5
    assert np.array_equal(a1.X, a2.X) and np.array_equal(b1.X, b2.X)


def test_split_lone_protected_row_fails():
    X = np.arange(4.0)[:, None]
    ds = Dataset(X, np.zeros(4), [0, 0, 0, 1])
    with pytest.raises(ValueError, match="misses a sensitive group"):
        split(ds, 0.5, 0)


def test_split_2000_rows():
    ds, _ = gen_synthetic_regression(2, 2000, 3)
    tr, te = split(ds, 0.5, 1)
    assert (tr.m, te.m) == (1000, 1000)


@settings(max_examples=50, deadline=None)
@given(m=st.integers(6, 60), frac=st.floats(0.2, 0.8), seed=st.integers(0, 2**32 - 1))
def test_split_is_a_partition(m, frac, seed):
    X = np.arange(float(m))[:, None]
    ds = Dataset(X, np.zeros(m), np.arange(m) % 2)
    try:
        tr, te = split(ds, frac, seed)
    except ValueError:
        return
    rows = np.concatenate((tr.X[:, 0], te.X[:, 0]))
    assert np.array_equal(np.sort(rows), X[:, 0])
    assert tr.m == int(np.ceil(frac * m))


def test_synthetic_regression_layout():
    ds, w = gen_synthetic_regression(10, 100, 0)
    assert ds.m0 == 75 and ds.m1 == 25
    assert np.all(ds.a[:75] == 0)
    assert ds.y.min() == 0.0 and ds.y.max() == 1.0
    assert w[9] == 0.0
    assert np.all((-1 <= w[:5]) & (w[:5] <= 0)) and np.all((0 <= w[5:]) & (w[5:] <= 10))
    ds2, w2 = gen_synthetic_regression(10, 100, 0)
    assert np.array_equal(ds.X, ds2.X) and np.array_equal(ds.y, ds2.y) and np.array_equal(w, w2)


def test_generators_frozen_values():
    # pins the PCG64 stream; a change here breaks reproducibility of saved runs
    ds, w = gen_synthetic_regression(2, 4, 0)
    assert w.tolist() == [-0.3630383126785457, 0.0]
    assert ds.X[0].tolist() == [0.6404226504432821, 0.10490011715303971]
    assert ds.y.tolist() == [0.43754744528586, 0.9627437389517864, 0.0, 1.0]
    z = gen_zafar_classification(4, 0)
    assert z.X[0].tolist() == [0.7424042627419569, 1.039106599486668]
    assert z.y.tolist() == [1.0, 1.0, 1.0, -1.0]
    assert z.a.tolist() == [0, 1, 0, 1]


def test_zafar_shape_and_labels():
    ds = gen_zafar_classification(200, 0)
    assert (ds.m, ds.n) == (200, 2)
    assert set(np.unique(ds.y)) == {-1.0, 1.0}
    again = gen_zafar_classification(200, 0)
    assert np.array_equal(ds.X, again.X) and np.array_equal(ds.a, again.a)


def test_zafar_class_means():
    ds = gen_zafar_classification(10000, 1)
    pos = ds.y > 0
    # standard error is about sqrt(5 / 5000) = 0.03
    assert np.allclose(ds.X[pos].mean(axis=0), [2, 2], atol=0.15)
    assert np.allclose(ds.X[~pos].mean(axis=0), [-2, -2], atol=0.2)
    assert 0 < ds.m1 < ds.m
