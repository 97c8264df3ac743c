"""The classifier x feature-plan experiment grid.

Plans are ``all`` plus the top-5 / top-3 attributes of each evaluator,
ranked once on the full dataset. Every (plan, classifier) cell is scored by
stratified cross-validation on the projected dataset.
"""

import csv
import os
import time
from dataclasses import dataclass, field, replace

from .dataset import IP_GROUP_FEATURES, project, v_number
from .evaluate import Learner, cross_validate
from .featsel import info_gain_scores, relieff_scores, top_n
from .forest import ForestConfig
from .trees import TreeConfig
from .errors import InvalidConfig

CLASSIFIERS = ("forest", "c45", "rep")
PLANS = ("all", "infogain-top5", "infogain-top3", "relieff-top5", "relieff-top3")
DISPLAY = {"forest": "RandomForest", "c45": "J48", "rep": "REPTree"}


@dataclass(frozen=True)
class ExperimentSpec:
    data_path: str = ""
    classifiers: tuple = CLASSIFIERS
    plans: tuple = PLANS
    k: int = 10
    seed: int = 1
    out_dir: str = ""
    n_trees: int = 100
    k_neighbors: int = 10
    n_jobs: int = 1

    def __post_init__(self):
        if not self.classifiers or not self.plans:
            raise InvalidConfig("need at least one classifier and one feature plan")
        bad = [c for c in self.classifiers if c not in CLASSIFIERS]
        bad += [p for p in self.plans if p not in PLANS]
        if bad:
            raise InvalidConfig(f"unknown classifiers/plans: {bad}")
        # canonical order regardless of how they were requested
        object.__setattr__(self, "classifiers", tuple(c for c in CLASSIFIERS if c in self.classifiers))
        object.__setattr__(self, "plans", tuple(p for p in PLANS if p in self.plans))


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rankings: dict = field(default_factory=dict)
    subsets: dict = field(default_factory=dict)
    reports: dict = field(default_factory=dict)
    seconds: float = 0.0

    def accuracy(self, plan, classifier):
        return self.reports[(plan, classifier)].accuracy

    def summary_rows(self):
        return [(p, c, self.accuracy(p, c)) for p in self.spec.plans for c in self.spec.classifiers]

    def render_summary(self):
        cols = self.spec.classifiers
        lines = ["Classifier accuracy (%), stratified "
                 f"{self.spec.k}-fold CV, seed {self.spec.seed}",
                 f"{'plan':<15}" + "".join(f"{DISPLAY[c]:>14}" for c in cols)]
        for p in self.spec.plans:
            lines.append(f"{p:<15}" + "".join(f"{100 * self.accuracy(p, c):>14.2f}" for c in cols))
        lines.append("")
        for p in self.spec.plans:
            lines.append(f"{p:<15} {_vline(self.subsets[p])}")
        return "\n".join(lines)


def _vline(names):
    if all(n in IP_GROUP_FEATURES for n in names):
        return ",".join(sorted((v_number(n) for n in names), key=lambda v: int(v[1:])))
    return ",".join(names)


def learner_for(kind, spec):
    if kind == "forest":
        return Learner("forest", ForestConfig(n_trees=spec.n_trees, seed=spec.seed))
    return Learner(kind, TreeConfig(seed=spec.seed))


def feature_subsets(data, plans, k_neighbors=10, seed=1):
    """Map each plan to its attribute list; also return the rankings used."""
    rankings = {}
    if any(p.startswith("infogain") for p in plans):
        rankings["infogain"] = info_gain_scores(data)
    if any(p.startswith("relieff") for p in plans):
        rankings["relieff"] = relieff_scores(data, k_neighbors=k_neighbors, seed=seed)
    subsets = {}
    for plan in plans:
        if plan == "all":
            subsets[plan] = list(data.feature_names)
        else:
            evaluator, top = plan.split("-top")
            subsets[plan] = top_n(rankings[evaluator], min(int(top), len(data.feature_names)))
    return subsets, rankings


def run_grid(data, spec):
    start = time.perf_counter()
    subsets, rankings = feature_subsets(data, spec.plans, spec.k_neighbors, spec.seed)
    result = ExperimentResult(spec, rankings, subsets)
    for plan in spec.plans:
        projected = project(data, subsets[plan])
        for kind in spec.classifiers:
            result.reports[(plan, kind)] = cross_validate(
                learner_for(kind, spec), projected, spec.k, spec.seed, spec.n_jobs)
    result.seconds = time.perf_counter() - start
    return result


def write_outputs(result, out_dir):
    """Write reports, figure data and the accuracy summary; return the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def path(name):
        p = os.path.join(out_dir, name)
        written.append(p)
        return p

    for evaluator, ranking in result.rankings.items():
        with open(path(f"ranking_{evaluator}.csv"), "w", newline="", encoding="utf-8") as fh:
            ranking.write_csv(fh)
    for (plan, kind), report in result.reports.items():
        with open(path(f"report_{plan}_{kind}.txt"), "w", encoding="utf-8") as fh:
            fh.write(f"Feature plan: {plan} ({_vline(result.subsets[plan])})\n")
            fh.write(report.render() + "\n")
        with open(path(f"report_{plan}_{kind}.csv"), "w", newline="", encoding="utf-8") as fh:
            report.write_csv(fh)
    # per-class F-measure by classifier: one file per plan (figure data)
    for plan in result.spec.plans:
        labels = result.reports[(plan, result.spec.classifiers[0])].matrix.labels
        with open(path(f"fmeasure_{plan}.csv"), "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["class", *result.spec.classifiers])
            for i, label in enumerate(labels):
                writer.writerow([label, *(f"{result.reports[(plan, c)].per_class[i].f_measure:.6f}"
                                          for c in result.spec.classifiers)])
    with open(path("summary.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["plan", "classifier", "accuracy"])
        for plan, kind, acc in result.summary_rows():
            writer.writerow([plan, kind, f"{acc:.6f}"])
    with open(path("summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(result.render_summary() + "\n")
    return written


def with_overrides(spec, **changes):
    return replace(spec, **{k: v for k, v in changes.items() if v is not None})
