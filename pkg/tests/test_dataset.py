import io
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mibdetect.dataset import (IP_GROUP, IP_GROUP_FEATURES, Dataset, MibSchema, class_distribution,
                               dump_csv, load_csv, project, stratified_folds, v_number)
from mibdetect.errors import BadValue, ClassTooSmall, EmptyFile, MissingColumn, UnknownFeature

HEADER = ",".join(IP_GROUP_FEATURES) + ",class\n"


def csv_bytes(rows, header=HEADER):
    return io.BytesIO((header + "".join(rows)).encode("utf-8"))


def test_schema_is_table_order():
    assert IP_GROUP.feature_names == (
        "ipInReceives", "ipInDelivers", "ipOutRequests", "ipOutDiscards",
        "ipInDiscards", "ipForwDatagrams", "ipOutNoRoutes", "ipInAddrErrors")
    assert IP_GROUP.n_features == 8
    assert v_number("ipInReceives") == "V1"
    assert v_number("ipInAddrErrors") == "V8"


def test_schema_rejects_duplicates():
    with pytest.raises(UnknownFeature):
        MibSchema(("a", "a"))


def test_load_three_rows():
    data = load_csv(csv_bytes(["1,2,3,4,5,6,7,8,normal\n",
                               "10,20,30,4,5,6,7,8,Slowpost\n",
                               "0,0,0,0,0,0,0,0, UDP-Flood \n"]))
    assert len(data) == 3
    assert data.labels == ("normal", "slowpost", "udp-flood")
    assert data.X[1, 2] == 30.0


def test_load_accepts_any_column_order():
    names = list(reversed(IP_GROUP_FEATURES))
    header = "class," + ",".join(names) + ",extra\n"
    data = load_csv(csv_bytes(["normal,8,7,6,5,4,3,2,1,zzz\n"], header))
    assert data.X.tolist() == [[1, 2, 3, 4, 5, 6, 7, 8]]


def test_missing_column():
    header = HEADER.replace("ipOutNoRoutes,", "")
    with pytest.raises(MissingColumn) as err:
        load_csv(csv_bytes(["1,2,3,4,5,6,8,normal\n"], header))
    assert err.value.column == "ipOutNoRoutes"


def test_missing_label_column():
    header = ",".join(IP_GROUP_FEATURES) + "\n"
    with pytest.raises(MissingColumn):
        load_csv(csv_bytes(["1,2,3,4,5,6,7,8\n"], header))
    data = load_csv(csv_bytes(["1,2,3,4,5,6,7,8\n"], header), require_label=False)
    assert not data.labeled


@pytest.mark.parametrize("cell", ["abc", "-1", "nan", "inf", ""])
def test_bad_value_reports_row_and_column(cell):
    rows = ["1,2,3,4,5,6,7,8,normal\n", f"{cell},2,3,4,5,6,7,8,normal\n"]
    with pytest.raises(BadValue) as err:
        load_csv(csv_bytes(rows))
    assert err.value.row == 2
    assert err.value.column == "ipInReceives"


def test_empty_label_is_rejected():
    with pytest.raises(BadValue):
        load_csv(csv_bytes(["1,2,3,4,5,6,7,8,  \n"]))


def test_empty_file():
    with pytest.raises(EmptyFile):
        load_csv(io.BytesIO(b""))
    with pytest.raises(EmptyFile):
        load_csv(csv_bytes([]))


def test_dataset_is_immutable(default_data):
    with pytest.raises(ValueError):
        default_data.X[0, 0] = 1.0
    with pytest.raises(AttributeError):
        default_data.labels = ()


counters = st.floats(min_value=0, max_value=1e12, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.lists(counters, min_size=8, max_size=8),
                          st.sampled_from(["normal", "tcp-syn", "slowloris"])),
                min_size=1, max_size=20))
def test_csv_round_trip(rows):
    data = Dataset(IP_GROUP, [r[0] for r in rows], [r[1] for r in rows])
    buf = io.StringIO()
    dump_csv(data, buf)
    again = load_csv(io.BytesIO(buf.getvalue().encode("utf-8")))
    assert again == data
    assert again.X.tobytes() == data.X.tobytes()


def test_project_identity(default_data):
    same = project(default_data, list(IP_GROUP_FEATURES))
    assert same == default_data
    assert same.X.tobytes() == default_data.X.tobytes()


def test_project_top3_infogain_subset(default_data):
    sub = project(default_data, ["ipInReceives", "ipOutDiscards", "ipInDiscards"])
    assert sub.feature_names == ("ipInReceives", "ipOutDiscards", "ipInDiscards")
    assert np.array_equal(sub.X, default_data.X[:, [0, 3, 4]])
    assert sub.labels == default_data.labels


def test_project_keeps_original_order(default_data):
    sub = project(default_data, ["ipInAddrErrors", "ipOutNoRoutes", "ipForwDatagrams"])
    assert sub.feature_names == ("ipForwDatagrams", "ipOutNoRoutes", "ipInAddrErrors")
    assert np.array_equal(sub.X, default_data.X[:, [5, 6, 7]])


@pytest.mark.parametrize("subset", [[], ["ipInReceives", "ipInReceives"], ["bogus"]])
def test_project_errors(default_data, subset):
    with pytest.raises(UnknownFeature):
        project(default_data, subset)


def test_class_distribution():
    empty = Dataset(MibSchema(("a",)), np.empty((0, 1)), [])
    assert class_distribution(empty) == {}
    labels = ["normal"] * 5 + ["slowpost"] * 3
    data = Dataset(MibSchema(("a",)), np.arange(8.0), labels)
    assert class_distribution(data) == {"normal": 5, "slowpost": 3}
    shuffled = data.take(np.random.default_rng(0).permutation(8))
    assert class_distribution(shuffled) == class_distribution(data)


def _toy(labels):
    return Dataset(MibSchema(("a",)), np.arange(float(len(labels))), labels)


def test_folds_even_split():
    plan = stratified_folds(_toy(["a"] * 50 + ["b"] * 50), 5, seed=3)
    for f in range(5):
        test = plan.test_indices(f)
        assert Counter(test < 50) == {True: 10, False: 10}


def test_folds_class_too_small():
    with pytest.raises(ClassTooSmall) as err:
        stratified_folds(_toy(["a"] * 7 + ["b"] * 20), 10, seed=0)
    assert (err.value.label, err.value.count, err.value.k) == ("a", 7, 10)


def test_folds_single_class_sizes():
    plan = stratified_folds(_toy(["a"] * 23), 4, seed=1)
    assert sorted(plan.sizes()) == [5, 6, 6, 6]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=12, max_size=80), st.integers(2, 4), st.integers(0, 2**31))
def test_fold_invariants(codes, k, seed):
    labels = [f"c{c}" for c in codes]
    counts = Counter(labels)
    data = _toy(labels)
    if min(counts.values()) < k:
        with pytest.raises(ClassTooSmall):
            stratified_folds(data, k, seed)
        return
    plan = stratified_folds(data, k, seed)
    assert plan == stratified_folds(data, k, seed)
    folds = [set(plan.test_indices(f).tolist()) for f in range(k)]
    assert set().union(*folds) == set(range(len(labels)))
    assert sum(len(f) for f in folds) == len(labels)
    for label in counts:
        per_fold = [sum(1 for i in f if labels[i] == label) for f in folds]
        assert max(per_fold) - min(per_fold) <= 1
