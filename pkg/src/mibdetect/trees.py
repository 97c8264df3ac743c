"""Binary decision trees over numeric attributes.

Two learners share one grower:

* ``grow_c45`` picks splits by gain ratio, restricted to attributes whose
  information gain is at least the mean positive gain, then applies
  pessimistic subtree-replacement pruning (J48-style).
* ``grow_rep`` grows on two thirds of the data by information gain and
  prunes against the held-out third with reduced-error pruning.

Routing is always ``value <= threshold`` to the left child.
"""

import hashlib
import math
from collections.abc import Mapping
from dataclasses import asdict, dataclass
from statistics import NormalDist
from typing import Optional

import numpy as np

from .errors import ClassTooSmall, EmptyCounts, EmptyDataset, InvalidConfig, SchemaMismatch

# Vectorized scores within this distance of the best are rescored exactly.
_RESCORE_SLACK = 1e-9


@dataclass(frozen=True)
class TreeConfig:
    min_leaf: int = 2
    confidence: float = 0.25
    rep_prune_fraction: float = 1.0 / 3.0
    max_depth: Optional[int] = None
    seed: int = 1
    prune: bool = True

    def __post_init__(self):
        if self.min_leaf < 1:
            raise InvalidConfig("min_leaf must be >= 1")
        if not 0.0 < self.confidence < 1.0:
            raise InvalidConfig("confidence must lie in (0, 1)")
        if not 0.0 < self.rep_prune_fraction < 1.0:
            raise InvalidConfig("rep_prune_fraction must lie in (0, 1)")
        if self.max_depth is not None and self.max_depth < 0:
            raise InvalidConfig("max_depth must be >= 0 or None")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class SplitTest:
    feature_index: int
    threshold: float


@dataclass(frozen=True)
class Leaf:
    counts: tuple

    @property
    def is_leaf(self):
        return True


@dataclass(frozen=True)
class Internal:
    test: SplitTest
    left: object
    right: object
    counts: tuple

    @property
    def is_leaf(self):
        return False


def fingerprint(feature_names):
    return hashlib.sha256("\x1f".join(feature_names).encode("utf-8")).hexdigest()[:16]


class DecisionTree:
    """A trained tree plus the feature names and label order it was trained with."""

    def __init__(self, root, feature_names, label_set, kind="c45", config=None):
        self.root = root
        self.feature_names = tuple(feature_names)
        self.label_set = tuple(label_set)
        self.kind = kind
        self.config = config

    @property
    def schema_fingerprint(self):
        return fingerprint(self.feature_names)

    def leaf_counts(self, X):
        """Training class counts of the leaf each row of ``X`` lands in, shape (n, L)."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise SchemaMismatch(
                f"tree expects {len(self.feature_names)} features, got shape {X.shape}")
        out = np.empty((X.shape[0], len(self.label_set)))
        stack = [(self.root, np.arange(X.shape[0]))]
        while stack:
            node, rows = stack.pop()
            if node.is_leaf:
                out[rows] = node.counts
                continue
            go_left = X[rows, node.test.feature_index] <= node.test.threshold
            stack.append((node.left, rows[go_left]))
            stack.append((node.right, rows[~go_left]))
        return out

    def predict_codes(self, X):
        return np.argmax(self.leaf_counts(X), axis=1)

    def predict_proba(self, X):
        counts = self.leaf_counts(X)
        return counts / counts.sum(axis=1, keepdims=True)

    def predict_labels(self, X):
        return [self.label_set[c] for c in self.predict_codes(X)]

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.extend((node.right, node.left))

    @property
    def size(self):
        return sum(1 for _ in self.nodes())

    @property
    def n_leaves(self):
        return sum(1 for n in self.nodes() if n.is_leaf)

    @property
    def depth(self):
        def walk(node):
            return 0 if node.is_leaf else 1 + max(walk(node.left), walk(node.right))
        return walk(self.root)

    def structure(self):
        """Nested tuples describing the tree exactly; equal trees give equal structures."""
        def walk(node):
            if node.is_leaf:
                return ("leaf", node.counts)
            return (node.test.feature_index, node.test.threshold, node.counts,
                    walk(node.left), walk(node.right))
        return walk(self.root)

    def to_dict(self):
        def walk(node):
            if node.is_leaf:
                return {"counts": list(node.counts)}
            return {"feature": self.feature_names[node.test.feature_index],
                    "threshold": node.test.threshold,
                    "counts": list(node.counts),
                    "left": walk(node.left), "right": walk(node.right)}
        return walk(self.root)

    @classmethod
    def from_dict(cls, doc, feature_names, label_set, kind="c45", config=None):
        index = {name: i for i, name in enumerate(feature_names)}

        def build(d):
            counts = tuple(_as_count(c) for c in d["counts"])
            if len(counts) != len(label_set):
                raise SchemaMismatch("leaf counts do not match the label set")
            if "feature" not in d:
                return Leaf(counts)
            if d["feature"] not in index:
                raise SchemaMismatch(f"unknown feature {d['feature']!r} in tree")
            test = SplitTest(index[d["feature"]], float(d["threshold"]))
            return Internal(test, build(d["left"]), build(d["right"]), counts)

        return cls(build(doc), feature_names, label_set, kind, config)


def _as_count(c):
    return int(c) if float(c).is_integer() else float(c)


def entropy(class_counts):
    """Shannon entropy in bits of a class-count mapping or sequence."""
    counts = list(class_counts.values()) if isinstance(class_counts, Mapping) else list(class_counts)
    if any(c < 0 for c in counts):
        raise EmptyCounts("class counts must be non-negative")
    total = sum(counts)
    if total <= 0:
        raise EmptyCounts("class counts sum to zero")
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * math.log2(p)
    return h


def _split_gain(left, right):
    n_left, n_right = sum(left), sum(right)
    n = n_left + n_right
    parent = [a + b for a, b in zip(left, right)]
    return entropy(parent) - (n_left / n) * entropy(left) - (n_right / n) * entropy(right)


def _split_ratio(left, right):
    gain = _split_gain(left, right)
    info = entropy([sum(left), sum(right)])
    return gain / info


_SCALAR_SCORE = {"gain": _split_gain, "gain_ratio": _split_ratio}


_XLOG2X = np.zeros(1)


def _xlog2x(n):
    """Table of ``c * log2(c)`` for integer ``c`` in ``0..n`` (cached, grown on demand)."""
    global _XLOG2X
    if _XLOG2X.shape[0] <= n:
        c = np.arange(max(n + 1, 2 * _XLOG2X.shape[0]), dtype=np.float64)
        c[0] = 1.0
        table = c * np.log2(c)
        table[0] = 0.0
        _XLOG2X = table
    return _XLOG2X


def _scan(V, y, n_classes, min_leaf, criterion="gain"):
    """Best ``value <= t`` split of each column of ``V``.

    Returns one entry per column: ``(threshold, score, left_counts,
    right_counts)`` or ``None``. Candidate thresholds are midpoints of
    consecutive distinct sorted values leaving at least ``min_leaf`` rows on
    each side; ties go to the smaller threshold. Scores are screened in
    vectorized form, then the near-best candidates are rescored with scalar
    arithmetic so the reported score is exact and reproducible.
    """
    n, n_cols = V.shape
    if n < 2:
        return [None] * n_cols
    order = np.argsort(V, axis=0, kind="stable")
    Vs = np.take_along_axis(V, order, axis=0)
    ys = y[order]
    n_left = np.arange(1, n)
    ok = (Vs[1:] > Vs[:-1]) & ((n_left >= min_leaf) & (n - n_left >= min_leaf))[:, None]
    if not ok.any():
        return [None] * n_cols

    table = _xlog2x(n)
    total = np.bincount(y, minlength=n_classes)
    # rank[i] = rows of the same class before position i in sorted order
    by_class = np.argsort(ys, axis=0, kind="stable")
    first = np.concatenate(([0], np.cumsum(total)[:-1]))
    rank = np.empty_like(by_class)
    grouped = np.take_along_axis(ys, by_class, axis=0)
    np.put_along_axis(rank, by_class, np.arange(n)[:, None] - first[grouped], axis=0)
    remaining = total[ys] - rank
    # sum of c log2 c over the left / right class counts after each position
    s_left = np.cumsum(table[rank + 1] - table[rank], axis=0)[:-1]
    s_right = table[total].sum() + np.cumsum(table[remaining - 1] - table[remaining], axis=0)[:-1]
    h_parent = math.log2(n) - table[total].sum() / n
    # n * H(part) = m log2 m - sum c log2 c
    part = table[n_left] + table[n - n_left]
    gain = h_parent - (part[:, None] - s_left - s_right) / n
    if criterion == "gain_ratio":
        info = (n * math.log2(n) - part) / n
        score = gain / info[:, None]
    else:
        score = gain
    score = np.where(ok, score, -np.inf)

    scalar = _SCALAR_SCORE[criterion]
    results = []
    for col in range(n_cols):
        col_score = score[:, col]
        top = col_score.max()
        if top == -np.inf:
            results.append(None)
            continue
        best = None
        for i in np.flatnonzero(col_score >= top - _RESCORE_SLACK):
            lc = np.bincount(ys[:i + 1, col], minlength=n_classes).tolist()
            rc = [int(t) - c for t, c in zip(total, lc)]
            sc = scalar(lc, rc)
            if best is None or sc > best[0]:
                best = (sc, i, lc, rc)
        sc, i, lc, rc = best
        if not sc > 0.0:
            results.append(None)
            continue
        a, b = Vs[i, col], Vs[i + 1, col]
        threshold = (a + b) / 2.0
        if not a <= threshold < b:
            threshold = a
        results.append((float(threshold), sc, lc, rc))
    return results


def best_split(X, labels, feature_index, criterion="gain", min_leaf=1):
    """Best binary threshold on one attribute.

    ``X`` is an (n, d) array, ``labels`` any sequence of hashable class
    tokens. Returns ``(threshold, score)`` or ``None`` when no candidate
    threshold leaves ``min_leaf`` rows per side with a positive score.
    """
    if criterion not in _SCALAR_SCORE:
        raise ValueError(f"criterion must be 'gain' or 'gain_ratio', not {criterion!r}")
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    label_set = sorted(set(labels))
    index = {c: i for i, c in enumerate(label_set)}
    y = np.array([index[c] for c in labels], dtype=np.intp)
    found = _scan(X[:, [feature_index]], y, len(label_set), min_leaf, criterion)[0]
    if found is None:
        return None
    return found[0], found[1]


class _Grower:
    """Top-down induction shared by the C4.5, REP and forest learners.

    ``mode`` is ``"c45"`` (gain ratio with the mean-gain guard) or ``"gain"``.
    ``sample`` is ``None`` to consider all attributes, otherwise
    ``(n_features_per_node, numpy Generator)``.
    """

    def __init__(self, X, y, n_classes, mode, min_leaf, max_depth, sample=None):
        self.X = X
        self.y = y
        self.n_classes = n_classes
        self.mode = mode
        self.min_leaf = min_leaf
        self.max_depth = max_depth
        self.sample = sample

    def _features(self):
        d = self.X.shape[1]
        if self.sample is None:
            return range(d)
        k, rng = self.sample
        return sorted(int(f) for f in rng.choice(d, size=k, replace=False))

    def _choose(self, rows):
        features = list(self._features())
        scans = _scan(self.X[np.ix_(rows, features)], self.y[rows], self.n_classes, self.min_leaf)
        candidates = [(f, *found) for f, found in zip(features, scans) if found is not None]
        if not candidates:
            return None
        if self.mode == "gain":
            best = candidates[0]
            for c in candidates[1:]:
                if c[2] > best[2]:
                    best = c
            return best[0], best[1]
        mean_gain = sum(c[2] for c in candidates) / len(candidates)
        best, best_ratio = None, 0.0
        for f, t, gain, lc, rc in candidates:
            if gain < mean_gain - 1e-12:
                continue
            ratio = gain / entropy([sum(lc), sum(rc)])
            if ratio > best_ratio:
                best, best_ratio = (f, t), ratio
        return best

    def grow(self, rows, depth=0):
        counts = np.bincount(self.y[rows], minlength=self.n_classes)
        counts_t = tuple(int(c) for c in counts)
        if (np.count_nonzero(counts) <= 1 or rows.size < 2 * self.min_leaf
                or (self.max_depth is not None and depth >= self.max_depth)):
            return Leaf(counts_t)
        choice = self._choose(rows)
        if choice is None:
            return Leaf(counts_t)
        f, t = choice
        go_left = self.X[rows, f] <= t
        return Internal(SplitTest(f, t),
                        self.grow(rows[go_left], depth + 1),
                        self.grow(rows[~go_left], depth + 1),
                        counts_t)


def _require_rows(data):
    if len(data) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    if not data.labeled:
        raise EmptyDataset("training data has no class column")


def add_errors(n, e, cf):
    """Pessimistic extra errors for a leaf covering ``n`` rows with ``e`` errors.

    Upper bound of the binomial error rate at confidence ``cf`` via the
    normal approximation with continuity correction (the J48 estimate),
    returned as an error *count* to add to ``e``. Small ``e`` is handled by
    the exact ``e == 0`` bound and linear interpolation up to ``e == 1``.
    """
    if e < 1:
        base = n * (1.0 - cf ** (1.0 / n))
        if e == 0:
            return base
        return base + e * (add_errors(n, 1, cf) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = NormalDist().inv_cdf(1.0 - cf)
    f = (e + 0.5) / n
    r = (f + z * z / (2 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))) \
        / (1 + z * z / n)
    return r * n - e


def _leaf_errors(counts):
    return sum(counts) - max(counts)


def pessimistic_prune(node, cf):
    """Bottom-up subtree replacement; returns ``(node, estimated_errors)``."""
    n = sum(node.counts)
    e = _leaf_errors(node.counts)
    as_leaf = e + add_errors(n, e, cf)
    if node.is_leaf:
        return node, as_leaf
    left, el = pessimistic_prune(node.left, cf)
    right, er = pessimistic_prune(node.right, cf)
    if as_leaf <= el + er:
        return Leaf(node.counts), as_leaf
    return Internal(node.test, left, right, node.counts), el + er


def grow_c45(train, config=TreeConfig()):
    _require_rows(train)
    label_set, y = train.encoded()
    grower = _Grower(train.X, y, len(label_set), "c45", config.min_leaf, config.max_depth)
    root = grower.grow(np.arange(len(train)))
    if config.prune:
        root, _ = pessimistic_prune(root, config.confidence)
    return DecisionTree(root, train.feature_names, label_set, "c45", config)


def grow_prune_split(y, label_set, fraction, seed):
    """Stratified grow/prune partition of row indices.

    Each class (in label order) is shuffled and ``round(n_c * fraction)``
    of its rows go to the prune set. Raises ``ClassTooSmall`` if a class
    would be left with no grow rows.
    """
    rng = np.random.default_rng(seed)
    grow, prune = [], []
    for c, label in enumerate(label_set):
        members = np.flatnonzero(y == c)
        if members.size == 0:
            continue
        members = members[rng.permutation(members.size)]
        n_prune = int(math.floor(members.size * fraction + 0.5))
        if n_prune >= members.size:
            raise ClassTooSmall(label, members.size, n_prune + 1)
        prune.append(members[:n_prune])
        grow.append(members[n_prune:])
    return np.sort(np.concatenate(grow)), np.sort(np.concatenate(prune))


def reduced_error_prune(node, X, y, on_step=None):
    """Reduced-error pruning of ``node`` against held-out rows ``(X, y)``.

    Post-order: a subtree becomes a leaf predicting its majority training
    class whenever that does not increase the held-out error; ties prune.
    ``on_step(subtree, leaf, rows, subtree_errors, leaf_errors)`` is called
    for every replacement, where ``rows`` indexes the held-out rows reaching
    the node. Returns ``(pruned_node, held_out_errors)``.
    """
    def walk(node, rows):
        majority = int(np.argmax(node.counts))
        leaf_err = int(np.count_nonzero(y[rows] != majority))
        if node.is_leaf:
            return node, leaf_err
        go_left = X[rows, node.test.feature_index] <= node.test.threshold
        left, el = walk(node.left, rows[go_left])
        right, er = walk(node.right, rows[~go_left])
        subtree = Internal(node.test, left, right, node.counts)
        if leaf_err <= el + er:
            leaf = Leaf(node.counts)
            if on_step is not None:
                on_step(subtree, leaf, rows, el + er, leaf_err)
            return leaf, leaf_err
        return subtree, el + er

    return walk(node, np.arange(X.shape[0]))


def grow_rep(train, config=TreeConfig(), on_step=None):
    """Information-gain tree with reduced-error pruning on a stratified hold-out.

    With ``config.prune`` false the whole of ``train`` is used for growing.
    """
    _require_rows(train)
    label_set, y = train.encoded()
    grower = _Grower(train.X, y, len(label_set), "gain", config.min_leaf, config.max_depth)
    if not config.prune:
        root = grower.grow(np.arange(len(train)))
        return DecisionTree(root, train.feature_names, label_set, "rep", config)
    grow_rows, prune_rows = grow_prune_split(y, label_set, config.rep_prune_fraction, config.seed)
    root = grower.grow(grow_rows)
    if prune_rows.size:
        root, _ = reduced_error_prune(root, train.X[prune_rows], y[prune_rows], on_step)
    return DecisionTree(root, train.feature_names, label_set, "rep", config)


def predict(tree, v):
    """Classify one feature vector; returns ``(label, {label: probability})``."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != len(tree.feature_names):
        raise SchemaMismatch(
            f"tree expects {len(tree.feature_names)} features, got {v.shape}")
    counts = tree.leaf_counts(v[None, :])[0]
    total = counts.sum()
    code = int(np.argmax(counts))
    return tree.label_set[code], {c: counts[i] / total for i, c in enumerate(tree.label_set)}
