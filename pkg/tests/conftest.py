import numpy as np
import pytest

from mibdetect.dataset import Dataset, MibSchema
from mibdetect.synth import default_scenario, generate

_criteria = []


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    if "acceptance" not in report.keywords:
        return
    outcome = "PASS" if report.outcome == "passed" else (
        "SKIP" if report.outcome == "skipped" else "FAIL")
    _criteria.append((report.nodeid, outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _criteria:
        terminalreporter.write_line(f"{outcome}  {nodeid.split('::', 1)[-1]}")


@pytest.fixture(scope="session")
def default_data():
    return generate(default_scenario())


def make_dataset(X, labels, names=None):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    names = names or tuple(f"f{i}" for i in range(X.shape[1]))
    return Dataset(MibSchema(tuple(names)), X, labels)


def random_dataset(rng, n_rows, n_features, n_classes, n_values=None):
    """Random labeled data; ``n_values`` limits distinct values per column to force ties."""
    if n_values:
        X = rng.integers(0, n_values, size=(n_rows, n_features)).astype(float)
    else:
        X = rng.random((n_rows, n_features)) * 100
    labels = [f"c{int(c)}" for c in rng.integers(0, n_classes, size=n_rows)]
    return make_dataset(X, labels)


@pytest.fixture(scope="session")
def default_cv(default_data):
    """10-fold CV reports of the three learners on the default scenario (seed 42)."""
    from mibdetect.evaluate import Learner, cross_validate
    from mibdetect.forest import ForestConfig
    from mibdetect.trees import TreeConfig
    learners = {"forest": Learner("forest", ForestConfig(seed=42)),
                "c45": Learner("c45", TreeConfig(seed=42)),
                "rep": Learner("rep", TreeConfig(seed=42))}
    return {k: cross_validate(l, default_data, 10, 42) for k, l in learners.items()}
