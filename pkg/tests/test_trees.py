import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_dataset, random_dataset
from oracles import depth1_best_accuracy, entropy_bits, midpoint_scan
from mibdetect.errors import ClassTooSmall, EmptyCounts, EmptyDataset, SchemaMismatch
from mibdetect.trees import (DecisionTree, Internal, Leaf, SplitTest, TreeConfig, add_errors,
                             best_split, entropy, grow_c45, grow_prune_split, grow_rep,
                             predict, reduced_error_prune)


def test_entropy_examples():
    assert entropy({"A": 5}) == 0.0
    assert entropy({"A": 5, "B": 5}) == 1.0
    assert entropy({"A": 9, "B": 3, "C": 3, "D": 1}) == pytest.approx(1.6225562489182659, abs=1e-15)
    assert entropy([9, 3, 3, 1]) == entropy_bits([9, 3, 3, 1])


def test_entropy_errors():
    with pytest.raises(EmptyCounts):
        entropy({})
    with pytest.raises(EmptyCounts):
        entropy([0, 0])


@given(st.lists(st.integers(0, 50), min_size=1, max_size=6).filter(lambda c: sum(c) > 0))
def test_entropy_bounds_and_permutation(counts):
    h = entropy(counts)
    assert 0.0 <= h <= np.log2(len(counts)) + 1e-12
    assert entropy(list(reversed(counts))) == pytest.approx(h, abs=1e-12)


def test_entropy_uniform_is_max_on_grid():
    for n_classes in (2, 3, 4):
        uniform = entropy([4] * n_classes)
        for counts in itertools.product(range(5), repeat=n_classes):
            if sum(counts):
                assert entropy(counts) <= uniform + 1e-12


def test_best_split_perfect_separation():
    assert best_split([[1], [2], [3], [4]], list("AABB"), 0) == (2.5, 1.0)


def test_best_split_constant_feature():
    assert best_split([[3], [3], [3]], list("ABA"), 0) is None


def test_best_split_alternating_matches_scan():
    values = [1, 2, 3, 4, 5, 6]
    labels = list("ABABAB")
    expected = midpoint_scan(values, labels)
    assert expected == (1.5, 0.19087450462110944)
    assert best_split(np.array(values)[:, None], labels, 0) == expected


def test_best_split_min_leaf():
    # with min_leaf=2 the only perfect cut (after one row) is not allowed
    got = best_split([[1], [2], [3], [4], [5]], list("ABBBB"), 0, min_leaf=2)
    assert got == midpoint_scan([1, 2, 3, 4, 5], list("ABBBB"), min_leaf=2)
    assert got[0] == 2.5


@pytest.mark.parametrize("criterion", ["gain", "gain_ratio"])
def test_best_split_random_ties(criterion):
    rng = np.random.default_rng(7)
    for _ in range(50):
        values = rng.integers(0, 6, 15).astype(float).tolist()
        labels = [f"c{c}" for c in rng.integers(0, 3, 15)]
        assert best_split(np.array(values)[:, None], labels, 0, criterion, 1) == \
            midpoint_scan(values, labels, criterion, 1)


def test_add_errors_reference_points():
    # zero observed errors: exact binomial bound n * (1 - cf ** (1 / n))
    assert add_errors(10, 0, 0.25) == pytest.approx(10 * (1 - 0.25 ** 0.1))
    assert add_errors(6, 6, 0.25) == 0.0
    # normal approximation is monotone in e and positive
    extras = [add_errors(100, e, 0.25) for e in range(1, 10)]
    assert all(x > 0 for x in extras)


def xor_dataset():
    rng = np.random.default_rng(5)
    rows, labels = [], []
    for qx in (0, 1):
        for qy in (0, 1):
            for _ in range(10):
                rows.append([qx + rng.uniform(0.05, 0.95), qy + rng.uniform(0.05, 0.95)])
                labels.append("A" if qx == qy else "B")
    return rows, labels


def test_c45_single_class_is_leaf():
    tree = grow_c45(make_dataset([[1, 2], [3, 4], [5, 6]], ["x"] * 3))
    assert isinstance(tree.root, Leaf)


def test_c45_one_split():
    data = make_dataset([1, 2, 3, 10, 11, 12], list("aaabbb"))
    tree = grow_c45(data)
    assert isinstance(tree.root, Internal)
    assert isinstance(tree.root.left, Leaf) and isinstance(tree.root.right, Leaf)
    assert tree.root.test == SplitTest(0, 6.5)


def test_c45_learns_xor():
    rows, labels = xor_dataset()
    # exhaustive check: a single threshold cannot do better than 60 %
    assert depth1_best_accuracy(rows, labels) == 0.6
    tree = grow_c45(make_dataset(rows, labels), TreeConfig(min_leaf=1, prune=False))
    assert tree.predict_labels(np.array(rows)) == labels
    assert tree.depth >= 2


def test_c45_empty():
    with pytest.raises(EmptyDataset):
        grow_c45(make_dataset(np.empty((0, 2)), []))


def test_unpruned_c45_memorizes_conflict_free_data():
    rng = np.random.default_rng(3)
    for _ in range(20):
        data = random_dataset(rng, 30, 3, 3)
        tree = grow_c45(data, TreeConfig(min_leaf=1, prune=False))
        assert tree.predict_labels(data.X) == list(data.labels)


def test_c45_pruning_shrinks_noisy_tree():
    rng = np.random.default_rng(0)
    data = random_dataset(rng, 200, 2, 2)  # labels are pure noise
    full = grow_c45(data, TreeConfig(prune=False))
    pruned = grow_c45(data, TreeConfig())
    assert pruned.size < full.size


def test_max_depth_zero_is_majority_leaf():
    data = make_dataset(np.arange(10.0), ["a"] * 9 + ["b"])
    tree = grow_c45(data, TreeConfig(max_depth=0))
    assert isinstance(tree.root, Leaf) and tree.root.counts == (9, 1)


def test_rep_pure_class_is_leaf():
    tree = grow_rep(make_dataset(np.arange(12.0), ["x"] * 12))
    assert isinstance(tree.root, Leaf)


def test_rep_grow_prune_split_is_stratified():
    y = np.array([0] * 30 + [1] * 12)
    grow, prune = grow_prune_split(y, ("a", "b"), 1 / 3, seed=4)
    assert sorted(np.concatenate([grow, prune]).tolist()) == list(range(42))
    assert np.bincount(y[prune]).tolist() == [10, 4]
    again = grow_prune_split(y, ("a", "b"), 1 / 3, seed=4)
    assert np.array_equal(grow, again[0]) and np.array_equal(prune, again[1])


def test_rep_class_too_small():
    data = make_dataset(np.arange(3.0), ["a", "a", "b"])
    with pytest.raises(ClassTooSmall):
        grow_rep(data, TreeConfig(rep_prune_fraction=0.9))


def noisy_grow_fixture():
    """40 grow rows with 5 flipped labels, 20 clean prune rows."""
    rng = np.random.default_rng(11)
    x = rng.uniform(0, 1, 60)
    y = (x > 0.5).astype(int)
    grow_y = y[:40].copy()
    grow_y[rng.choice(40, 5, replace=False)] ^= 1
    names = np.array(["lo", "hi"])
    return x, names[grow_y].tolist(), names[y[40:]].tolist()


def test_reduced_error_pruning_fixture():
    x, grow_labels, prune_labels = noisy_grow_fixture()
    full = grow_rep(make_dataset(x[:40], grow_labels), TreeConfig(min_leaf=1, prune=False))
    assert full.predict_labels(x[:40, None]) == grow_labels  # grow-set perfect
    y_prune = np.array([full.label_set.index(c) for c in prune_labels])
    root, err = reduced_error_prune(full.root, x[40:, None], y_prune)
    pruned = DecisionTree(root, full.feature_names, full.label_set, "rep")
    full_err = int(np.sum(full.predict_codes(x[40:, None]) != y_prune))
    pruned_err = int(np.sum(pruned.predict_codes(x[40:, None]) != y_prune))
    assert (full.size, full_err) == (19, 2)
    assert (pruned.size, pruned_err, err) == (3, 0, 0)


def test_reduced_error_pruning_steps_never_hurt():
    rng = np.random.default_rng(21)
    steps = 0
    for _ in range(30):
        data = random_dataset(rng, 45, 2, 3, n_values=8)

        def check(subtree, leaf, rows, subtree_err, leaf_err):
            nonlocal steps
            steps += 1
            held = data.X[prune_rows][rows]
            truth = y[prune_rows][rows]
            before = DecisionTree(subtree, data.feature_names, label_set).predict_codes(held)
            after = DecisionTree(leaf, data.feature_names, label_set).predict_codes(held)
            assert np.sum(after != truth) == leaf_err <= subtree_err == np.sum(before != truth)

        label_set, y = data.encoded()
        _, prune_rows = grow_prune_split(y, label_set, 1 / 3, seed=1)
        grow_rep(data, TreeConfig(seed=1), on_step=check)
    assert steps > 0


def test_predict_single_leaf_distribution():
    tree = DecisionTree(Leaf((3, 1)), ("f0",), ("A", "B"))
    label, dist = predict(tree, [0.0])
    assert label == "A"
    assert dist == {"A": 0.75, "B": 0.25}


def test_predict_ties_follow_label_order():
    tree = DecisionTree(Leaf((2, 2)), ("f0",), ("A", "B"))
    assert predict(tree, [1.0])[0] == "A"


def test_threshold_value_routes_left():
    root = Internal(SplitTest(0, 5.0), Leaf((1, 0)), Leaf((0, 1)), (1, 1))
    tree = DecisionTree(root, ("f0",), ("L", "R"))
    assert predict(tree, [5.0])[0] == "L"
    assert predict(tree, [np.nextafter(5.0, 6.0)])[0] == "R"


def test_predict_schema_mismatch():
    tree = DecisionTree(Leaf((1,)), ("a", "b"), ("A",))
    with pytest.raises(SchemaMismatch):
        predict(tree, [1.0, 2.0, 3.0])
    with pytest.raises(SchemaMismatch):
        tree.predict_codes(np.zeros((2, 3)))


def test_every_vector_reaches_one_leaf(default_data):
    tree = grow_c45(default_data)
    probes = np.random.default_rng(1).uniform(0, 40000, size=(500, 8))
    counts = tree.leaf_counts(probes)
    leaves = {n.counts for n in tree.nodes() if n.is_leaf}
    assert all(tuple(int(c) for c in row) in leaves for row in counts)


def test_learners_are_deterministic(default_data):
    for grow in (grow_c45, grow_rep):
        assert grow(default_data).structure() == grow(default_data).structure()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2))
def test_monotone_transform_invariance(seed, feature):
    rng = np.random.default_rng(seed)
    data = random_dataset(rng, 40, 3, 3)
    X = data.X.copy()
    X[:, feature] = np.exp(X[:, feature] / 10.0)
    other = make_dataset(X, data.labels)
    for grow in (grow_c45, grow_rep):
        a, b = grow(data), grow(other)
        assert np.array_equal(a.predict_codes(data.X), b.predict_codes(X))
