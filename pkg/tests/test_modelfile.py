import json

import numpy as np
import pytest

from conftest import random_dataset
from mibdetect.errors import ModelFormatError
from mibdetect.forest import ForestConfig, oob_error, train_forest
from mibdetect.modelfile import load_model, model_from_dict, model_to_dict, save_model
from mibdetect.trees import TreeConfig, grow_c45, grow_rep


def probes(data, rng):
    lo, hi = data.X.min(axis=0), data.X.max(axis=0)
    return np.vstack([data.X, rng.uniform(lo, hi, size=(50, data.X.shape[1]))])


@pytest.mark.parametrize("kind", ["c45", "rep", "forest"])
def test_round_trip_predicts_identically(tmp_path, kind):
    rng = np.random.default_rng(4)
    data = random_dataset(rng, 60, 3, 3)
    if kind == "forest":
        model = train_forest(data, ForestConfig(n_trees=7, seed=3))
    else:
        model = (grow_c45 if kind == "c45" else grow_rep)(data, TreeConfig(seed=2))
    path = tmp_path / "m.json"
    save_model(model, path)
    again = load_model(path)
    X = probes(data, rng)
    assert np.array_equal(model.predict_proba(X), again.predict_proba(X))
    assert model_to_dict(again) == model_to_dict(model)
    if kind == "forest":
        assert oob_error(again, data) == oob_error(model, data)
    else:
        assert again.structure() == model.structure()


def test_document_layout(tmp_path):
    rng = np.random.default_rng(0)
    data = random_dataset(rng, 20, 2, 2)
    save_model(grow_c45(data), tmp_path / "t.json")
    doc = json.loads((tmp_path / "t.json").read_text())
    assert doc["format_version"] == 1
    assert doc["model_kind"] == "c45"
    assert doc["features"] == ["f0", "f1"]
    assert set(doc) == {"format_version", "model_kind", "features", "label_set", "config", "payload"}


def test_bad_documents(tmp_path):
    rng = np.random.default_rng(0)
    doc = model_to_dict(grow_c45(random_dataset(rng, 20, 2, 2)))
    for broken in ({**doc, "format_version": 2}, {**doc, "model_kind": "svm"},
                   {k: v for k, v in doc.items() if k != "payload"}):
        with pytest.raises(ModelFormatError):
            model_from_dict(broken)
    path = tmp_path / "junk.json"
    path.write_text("{not json")
    with pytest.raises(ModelFormatError):
        load_model(path)
