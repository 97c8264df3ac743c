"""Confusion matrices, one-vs-rest metrics and stratified cross-validation."""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import stratified_folds
from .errors import EmptyInput, EmptyMatrix, InvalidConfig, MissingSupport, UnknownLabel
from .forest import ForestConfig, train_forest
from .trees import TreeConfig, grow_c45, grow_rep

LEARNER_KINDS = ("c45", "rep", "forest")
REPORT_COLUMNS = ("class", "tp_rate", "fp_rate", "precision", "recall", "f_measure", "support")


@dataclass(frozen=True)
class ConfusionMatrix:
    """``counts[i][j]`` = rows of actual class ``labels[i]`` predicted as ``labels[j]``."""

    labels: tuple
    counts: np.ndarray = field(compare=False)

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.counts, other.counts)

    @property
    def total(self):
        return int(self.counts.sum())

    def support(self):
        return {c: int(self.counts[i].sum()) for i, c in enumerate(self.labels)}


def confusion(pairs, labels=None):
    """Tally ``(actual, predicted)`` pairs; labels default to the sorted union seen."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("no (actual, predicted) pairs")
    seen = {a for a, _ in pairs} | {p for _, p in pairs}
    if labels is None:
        labels = sorted(seen)
    else:
        labels = list(labels)
        missing = seen - set(labels)
        if missing:
            raise UnknownLabel(f"labels not in the label list: {sorted(missing)}")
    index = {c: i for i, c in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for a, p in pairs:
        counts[index[a], index[p]] += 1
    counts.setflags(write=False)
    return ConfusionMatrix(tuple(labels), counts)


@dataclass(frozen=True)
class ClassMetrics:
    label: str
    tp: int
    fp: int
    fn: int
    tn: int
    tp_rate: float
    fp_rate: float
    precision: float
    recall: float
    f_measure: float


def _ratio(num, den):
    return num / den if den else 0.0


def metrics_from_counts(label, tp, fp, fn, tn):
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return ClassMetrics(label, tp, fp, fn, tn, recall, _ratio(fp, fp + tn), precision, recall, f)


def class_metrics(m, label):
    """One-vs-rest counts and rates for ``label``.

    Any rate whose denominator is zero is reported as 0.
    """
    if label not in m.labels:
        raise UnknownLabel(f"{label!r} is not in the matrix")
    i = m.labels.index(label)
    tp = int(m.counts[i, i])
    fn = int(m.counts[i].sum()) - tp
    fp = int(m.counts[:, i].sum()) - tp
    tn = m.total - tp - fn - fp
    return metrics_from_counts(label, tp, fp, fn, tn)


_RATES = ("tp_rate", "fp_rate", "precision", "recall", "f_measure")


def weighted_metrics(per_class, supports, label="weighted"):
    """Support-weighted mean of every rate; counts are summed."""
    total = 0
    for cm in per_class:
        if cm.label not in supports:
            raise MissingSupport(f"no support given for {cm.label!r}")
        total += supports[cm.label]
    if total <= 0:
        raise MissingSupport("supports sum to zero")
    rates = {name: sum(supports[cm.label] * getattr(cm, name) for cm in per_class) / total
             for name in _RATES}
    sums = {name: sum(getattr(cm, name) for cm in per_class) for name in ("tp", "fp", "fn", "tn")}
    return ClassMetrics(label, **sums, **rates)


def accuracy(m):
    if m.total == 0:
        raise EmptyMatrix("matrix has no entries")
    return float(np.trace(m.counts)) / m.total


@dataclass
class EvalReport:
    matrix: ConfusionMatrix
    per_class: list
    weighted: ClassMetrics
    accuracy: float
    fold_count: int = 0
    seed: int = 0
    model: str = ""

    @classmethod
    def from_matrix(cls, m, fold_count=0, seed=0, model=""):
        per_class = [class_metrics(m, c) for c in m.labels]
        weighted = weighted_metrics(per_class, m.support())
        return cls(m, per_class, weighted, accuracy(m), fold_count, seed, model)

    def rows(self):
        """``(class, tp_rate, fp_rate, precision, recall, f_measure, support)`` per class, then weighted."""
        support = self.matrix.support()
        out = [(cm.label, cm.tp_rate, cm.fp_rate, cm.precision, cm.recall, cm.f_measure,
                support[cm.label]) for cm in self.per_class]
        w = self.weighted
        out.append(("weighted", w.tp_rate, w.fp_rate, w.precision, w.recall, w.f_measure,
                    self.matrix.total))
        return out

    def write_csv(self, stream):
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in self.rows():
            writer.writerow([row[0], *(f"{v:.6f}" for v in row[1:6]), row[6]])

    def render(self):
        head = []
        if self.model:
            head.append(f"Model: {self.model}")
        if self.fold_count:
            head.append(f"Validation: stratified {self.fold_count}-fold cross-validation, seed {self.seed}")
        head.append(f"Instances: {self.matrix.total}   "
                    f"Correct: {int(np.trace(self.matrix.counts))}   Accuracy: {100 * self.accuracy:.4f} %")
        width = max(12, *(len(c) for c in self.matrix.labels))
        lines = head + ["", "Detailed accuracy by class:",
                        f"{'':<{width}} {'TP Rate':>8} {'FP Rate':>8} {'Precision':>9} "
                        f"{'Recall':>8} {'F-Measure':>9} {'Support':>8}"]
        for label, tpr, fpr, p, r, f, s in self.rows():
            name = "Weighted Avg." if label == "weighted" else label
            lines.append(f"{name:<{width}} {tpr:>8.3f} {fpr:>8.3f} {p:>9.3f} {r:>8.3f} {f:>9.3f} {s:>8d}")
        lines += ["", "Confusion matrix (rows = actual, columns = predicted):"]
        labels = self.matrix.labels
        cell = max(6, *(len(c) for c in labels))
        lines.append(" " * (width + 1) + " ".join(f"{c:>{cell}}" for c in labels))
        for i, c in enumerate(labels):
            lines.append(f"{c:<{width}} " + " ".join(f"{v:>{cell}d}" for v in self.matrix.counts[i]))
        return "\n".join(lines)


@dataclass(frozen=True)
class Learner:
    """A learner kind (``c45``, ``rep`` or ``forest``) with its configuration."""

    kind: str
    config: object = None

    def __post_init__(self):
        if self.kind not in LEARNER_KINDS:
            raise InvalidConfig(f"unknown learner {self.kind!r}; expected one of {LEARNER_KINDS}")
        if self.config is None:
            object.__setattr__(self, "config", ForestConfig() if self.kind == "forest" else TreeConfig())

    def fit(self, data):
        if self.kind == "c45":
            return grow_c45(data, self.config)
        if self.kind == "rep":
            return grow_rep(data, self.config)
        return train_forest(data, self.config)

    def describe(self):
        c = self.config
        if self.kind == "forest":
            return (f"RandomForest(n_trees={c.n_trees}, features_per_split="
                    f"{c.features_per_split or 'log2(d)+1'}, seed={c.seed})")
        if self.kind == "rep":
            return (f"REPTree(min_leaf={c.min_leaf}, prune_fraction={c.rep_prune_fraction:.4g}, "
                    f"max_depth={c.max_depth}, seed={c.seed}, prune={c.prune})")
        return (f"C45(min_leaf={c.min_leaf}, confidence={c.confidence}, "
                f"max_depth={c.max_depth}, prune={c.prune})")


def cross_validate(learner, data, k=10, seed=1, n_jobs=1):
    """Stratified k-fold CV with all held-out predictions pooled into one matrix."""
    plan = stratified_folds(data, k, seed)
    labels = data.label_set()
    predicted = [None] * len(data)

    def run(fold):
        test = plan.test_indices(fold)
        model = learner.fit(data.take(plan.train_indices(fold)))
        return test, model.predict_labels(data.X[test])

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run, range(k)))
    else:
        results = [run(f) for f in range(k)]
    for test, labels_out in results:
        for i, p in zip(test, labels_out):
            predicted[i] = p
    m = confusion(zip(data.labels, predicted), labels)
    return EvalReport.from_matrix(m, k, seed, learner.describe())
