"""Filter attribute evaluators and the top-N ranker.

* InfoGain: each attribute is discretized with the Fayyad-Irani MDL
  criterion, then scored by the class-entropy reduction over its bins.
* ReliefF: multiclass ReliefF with Manhattan distance on range-normalized
  attributes, ``k`` nearest hits and ``k`` nearest misses per other class,
  misses weighted by class prior.
"""

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import IP_GROUP_FEATURES, v_number
from .errors import BadN, EmptyDataset, LengthMismatch
from .trees import _scan, entropy


@dataclass(frozen=True)
class FeatureScore:
    feature_name: str
    score: float


@dataclass(frozen=True)
class Ranking:
    evaluator: str
    scores: tuple

    @classmethod
    def from_scores(cls, evaluator, names, values):
        """Sort descending by score; equal scores keep the original feature order."""
        order = sorted(range(len(names)), key=lambda i: (-values[i], i))
        return cls(evaluator, tuple(FeatureScore(names[i], float(values[i])) for i in order))

    def names(self):
        return [s.feature_name for s in self.scores]

    def score_of(self, name):
        for s in self.scores:
            if s.feature_name == name:
                return s.score
        raise KeyError(name)

    def render(self):
        lines = [f"Ranked attributes ({self.evaluator}):",
                 f"{'rank':>4}  {'var':<4} {'feature':<16} {'score':>12}"]
        for i, s in enumerate(self.scores, start=1):
            lines.append(f"{i:>4}  {_vname(s.feature_name):<4} {s.feature_name:<16} {s.score:>12.6f}")
        return "\n".join(lines)

    def write_csv(self, stream):
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["rank", "feature", "var", "score"])
        for i, s in enumerate(self.scores, start=1):
            writer.writerow([i, s.feature_name, _vname(s.feature_name), repr(s.score)])


def _vname(name):
    return v_number(name) if name in IP_GROUP_FEATURES else "-"


def top_n(ranking, n):
    if isinstance(n, bool) or not isinstance(n, int) or not 1 <= n <= len(ranking.scores):
        raise BadN(f"n must be between 1 and {len(ranking.scores)}, got {n!r}")
    return ranking.names()[:n]


def _codes(labels):
    label_set = sorted(set(labels))
    index = {c: i for i, c in enumerate(label_set)}
    return label_set, np.array([index[c] for c in labels], dtype=np.intp)


def mdl_accepts(gain, parent, left, right):
    """Fayyad-Irani stopping rule for a binary cut with the given class counts."""
    n = sum(parent)
    k = sum(1 for c in parent if c > 0)
    k1 = sum(1 for c in left if c > 0)
    k2 = sum(1 for c in right if c > 0)
    delta = math.log2(3 ** k - 2) - (k * entropy(parent) - k1 * entropy(left) - k2 * entropy(right))
    return gain > (math.log2(n - 1) + delta) / n


def mdl_discretize(values, labels):
    """Recursive entropy-minimizing cuts accepted by the MDL criterion, sorted ascending."""
    if len(values) != len(labels):
        raise LengthMismatch(f"{len(values)} values vs {len(labels)} labels")
    if len(values) == 0:
        raise LengthMismatch("no values to discretize")
    values = np.asarray(values, dtype=np.float64)
    label_set, y = _codes(labels)
    order = np.argsort(values, kind="stable")
    v, y = values[order], y[order]
    cuts = []

    def split(lo, hi):
        if hi - lo < 2:
            return
        found = _scan(v[lo:hi, None], y[lo:hi], len(label_set), 1, "gain")[0]
        if found is None:
            return
        cut, gain, lc, rc = found
        parent = [a + b for a, b in zip(lc, rc)]
        if not mdl_accepts(gain, parent, lc, rc):
            return
        mid = lo + sum(lc)
        split(lo, mid)
        cuts.append(cut)
        split(mid, hi)

    split(0, len(v))
    return cuts


def binned_gain(values, codes, cuts, n_classes):
    """Class-entropy reduction from binning ``values`` at ``cuts`` (``value <= cut`` goes low)."""
    n = len(values)
    h_class = entropy(np.bincount(codes, minlength=n_classes).tolist())
    bins = np.searchsorted(np.asarray(cuts, dtype=np.float64), values, side="left")
    conditional = 0.0
    for b in range(len(cuts) + 1):
        members = codes[bins == b]
        if members.size:
            conditional += (members.size / n) * entropy(np.bincount(members, minlength=n_classes).tolist())
    return h_class - conditional


def info_gain_scores(data):
    if len(data) == 0 or not data.labeled:
        raise EmptyDataset("info gain needs a non-empty labeled dataset")
    label_set, codes = data.encoded()
    scores = []
    for j in range(len(data.feature_names)):
        column = data.X[:, j]
        cuts = mdl_discretize(column, data.labels)
        scores.append(binned_gain(column, codes, cuts, len(label_set)) if cuts else 0.0)
    return Ranking.from_scores("infogain", data.feature_names, scores)


def _canonical_order(X, y):
    # Sort rows by (class, feature values) so results do not depend on file order.
    keys = [X[:, j] for j in range(X.shape[1] - 1, -1, -1)] + [y]
    return np.lexsort(keys)


def _relieff_contrib(X, span, y, priors, members, k, i):
    """Weight change (before division by the sample count) contributed by sample ``i``."""
    # diff(a, b) = |a - b| / range, computed as written so exact distance ties survive
    diffs = np.abs(X - X[i]) / span
    dist = diffs[:, 0].copy()
    for j in range(1, diffs.shape[1]):
        dist += diffs[:, j]
    contrib = np.zeros(X.shape[1])
    own = y[i]
    miss_scale = 1.0 - priors[own]
    for c, rows in enumerate(members):
        if c == own:
            rows = rows[rows != i]
        if rows.size == 0:
            continue
        nearest = rows[np.argsort(dist[rows], kind="stable")[:k]]
        diff = diffs[nearest].mean(axis=0)
        if c == own:
            contrib -= diff
        else:
            contrib += (priors[c] / miss_scale) * diff
    return contrib


def relieff_scores(data, k_neighbors=10, sample_size=None, seed=1, n_jobs=1):
    """ReliefF attribute weights.

    ``sample_size=None`` uses every instance (and ignores ``seed``).
    Distance ties between candidate neighbors go to the earlier row in
    canonical (class, values) order. Classes with fewer than ``k_neighbors``
    candidates contribute all of them.
    """
    if len(data) == 0 or not data.labeled:
        raise EmptyDataset("ReliefF needs a non-empty labeled dataset")
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be >= 1")
    label_set, y = data.encoded()
    perm = _canonical_order(data.X, y)
    X, y = data.X[perm], y[perm]
    span = X.max(axis=0) - X.min(axis=0)
    # constant columns: every diff is 0 / inf = 0
    span = np.where(span > 0, span, np.inf)
    n = X.shape[0]
    counts = np.bincount(y, minlength=len(label_set))
    priors = counts / n
    members = [np.flatnonzero(y == c) for c in range(len(label_set))]

    if sample_size is None or sample_size >= n:
        samples = np.arange(n)
    else:
        samples = np.sort(np.random.default_rng(seed).choice(n, size=sample_size, replace=False))

    def job(i):
        return _relieff_contrib(X, span, y, priors, members, k_neighbors, i)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(job, samples))
    else:
        parts = [job(i) for i in samples]
    weights = np.zeros(X.shape[1])
    for part in parts:
        weights += part
    weights /= len(samples)
    return Ranking.from_scores("relieff", data.feature_names, weights.tolist())
