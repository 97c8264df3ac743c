"""Random forest of unpruned C4.5-style trees with hard majority voting."""

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDataset, InvalidConfig, NoOobVotes, SchemaMismatch
from .trees import DecisionTree, TreeConfig, _Grower, fingerprint


def default_features_per_split(n_features):
    return int(math.floor(math.log2(n_features))) + 1


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    features_per_split: int = None
    seed: int = 1
    base: TreeConfig = field(default_factory=lambda: TreeConfig(min_leaf=1, prune=False))
    # False swaps the bootstrap for the identity sample (used to compare against a single tree).
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise InvalidConfig("n_trees must be >= 1")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise InvalidConfig("features_per_split must be >= 1")
        if self.seed < 0:
            raise InvalidConfig("forest seed must be non-negative")

    def to_dict(self):
        return {"n_trees": self.n_trees, "features_per_split": self.features_per_split,
                "seed": self.seed, "base": self.base.to_dict(), "bootstrap": self.bootstrap}

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        doc["base"] = TreeConfig(**doc.get("base", {"min_leaf": 1, "prune": False}))
        return cls(**doc)


def tree_seed(seed, index):
    """Seed of tree ``index``; depends only on ``(seed, index)``."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def data_digest(data):
    h = hashlib.sha256()
    h.update("\x1f".join(data.feature_names).encode("utf-8"))
    h.update(np.ascontiguousarray(data.X).tobytes())
    h.update("\x1f".join(data.labels).encode("utf-8"))
    return h.hexdigest()[:16]


class RandomForest:
    def __init__(self, trees, oob_masks, label_set, feature_names, config,
                 tree_seeds, train_digest=None):
        self.trees = list(trees)
        self.oob_masks = [np.asarray(m, dtype=bool) for m in oob_masks]
        self.label_set = tuple(label_set)
        self.feature_names = tuple(feature_names)
        self.config = config
        self.tree_seeds = list(tree_seeds)
        self.train_digest = train_digest

    @property
    def schema_fingerprint(self):
        return fingerprint(self.feature_names)

    def votes(self, X):
        """Vote counts, shape (n_rows, n_labels)."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise SchemaMismatch(
                f"forest expects {len(self.feature_names)} features, got shape {X.shape}")
        votes = np.zeros((X.shape[0], len(self.label_set)), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            votes[rows, tree.predict_codes(X)] += 1
        return votes

    def predict_codes(self, X):
        return np.argmax(self.votes(X), axis=1)

    def predict_proba(self, X):
        return self.votes(X) / len(self.trees)

    def predict_labels(self, X):
        return [self.label_set[c] for c in self.predict_codes(X)]

    @property
    def size(self):
        return sum(t.size for t in self.trees)


def _train_one(X, y, label_set, feature_names, config, k, index):
    seed = tree_seed(config.seed, index)
    rng = np.random.default_rng(seed)
    n = X.shape[0]
    if config.bootstrap:
        rows = np.sort(rng.integers(0, n, size=n))
    else:
        rows = np.arange(n)
    in_bag = np.zeros(n, dtype=bool)
    in_bag[rows] = True
    sample = None if k >= X.shape[1] else (k, rng)
    grower = _Grower(X, y, len(label_set), "c45", config.base.min_leaf,
                     config.base.max_depth, sample)
    tree = DecisionTree(grower.grow(rows), feature_names, label_set, "c45", config.base)
    return seed, tree, in_bag


def train_forest(train, config=ForestConfig(), n_jobs=1):
    """Grow ``config.n_trees`` trees on bootstrap samples.

    Each node of each tree searches a fresh random subset of
    ``features_per_split`` attributes. Tree ``i`` draws all of its
    randomness from ``tree_seed(config.seed, i)``, so the result does not
    depend on ``n_jobs`` or on the order trees are built in.
    """
    if len(train) == 0 or not train.labeled:
        raise EmptyDataset("cannot train a forest on an empty or unlabeled dataset")
    d = len(train.feature_names)
    k = config.features_per_split or default_features_per_split(d)
    if k > d:
        raise InvalidConfig(f"features_per_split={k} exceeds the {d} available features")
    label_set, y = train.encoded()

    def job(index):
        return _train_one(train.X, y, label_set, train.feature_names, config, k, index)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            built = list(pool.map(job, range(config.n_trees)))
    else:
        built = [job(i) for i in range(config.n_trees)]
    seeds, trees, masks = zip(*built)
    return RandomForest(trees, masks, label_set, train.feature_names, config, seeds,
                        data_digest(train))


def predict_forest(forest, v):
    """Plurality vote for one vector; returns ``(label, {label: vote share})``."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != len(forest.feature_names):
        raise SchemaMismatch(f"forest expects {len(forest.feature_names)} features, got {v.shape}")
    votes = forest.votes(v[None, :])[0]
    code = int(np.argmax(votes))
    n = len(forest.trees)
    return forest.label_set[code], {c: votes[i] / n for i, c in enumerate(forest.label_set)}


def oob_error(forest, train):
    """Misclassification rate of out-of-bag plurality votes.

    Rows that are in-bag for every tree are skipped.
    """
    if tuple(train.feature_names) != forest.feature_names:
        raise SchemaMismatch("dataset features differ from the forest's")
    if forest.train_digest is not None and data_digest(train) != forest.train_digest:
        raise SchemaMismatch("dataset is not the one this forest was trained on")
    _, y = train.encoded(forest.label_set)
    n = len(train)
    votes = np.zeros((n, len(forest.label_set)), dtype=np.int64)
    for tree, in_bag in zip(forest.trees, forest.oob_masks):
        rows = np.flatnonzero(~in_bag)
        if rows.size:
            votes[rows, tree.predict_codes(train.X[rows])] += 1
    covered = votes.sum(axis=1) > 0
    if not covered.any():
        raise NoOobVotes("every row is in-bag for every tree")
    wrong = np.argmax(votes[covered], axis=1) != y[covered]
    return float(np.count_nonzero(wrong)) / float(np.count_nonzero(covered))
