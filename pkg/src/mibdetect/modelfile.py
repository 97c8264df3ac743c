"""Versioned JSON model files for trained trees and forests.

Layout::

    {"format_version": 1, "model_kind": "c45" | "rep" | "forest",
     "features": [...], "label_set": [...], "config": {...}, "payload": {...}}

A tree payload is ``{"tree": node}``, where a node is either
``{"counts": [...]}`` or ``{"feature", "threshold", "counts", "left", "right"}``.
A forest payload holds ``tree_seeds``, ``trees``, the in-bag masks as
hex-packed bitmaps, and a digest of the training data. Thresholds are
written with full float precision, so a reloaded model predicts identically.
"""

import json

import numpy as np

from .errors import ModelFormatError
from .forest import ForestConfig, RandomForest
from .trees import DecisionTree, TreeConfig

FORMAT_VERSION = 1


def _pack_mask(mask):
    return np.packbits(np.asarray(mask, dtype=np.uint8)).tobytes().hex()


def _unpack_mask(text, n_rows):
    bits = np.unpackbits(np.frombuffer(bytes.fromhex(text), dtype=np.uint8))
    return bits[:n_rows].astype(bool)


def model_to_dict(model):
    doc = {"format_version": FORMAT_VERSION,
           "features": list(model.feature_names),
           "label_set": list(model.label_set)}
    if isinstance(model, RandomForest):
        n_rows = int(model.oob_masks[0].size) if model.oob_masks else 0
        doc["model_kind"] = "forest"
        doc["config"] = model.config.to_dict()
        doc["payload"] = {
            "tree_seeds": [int(s) for s in model.tree_seeds],
            "trees": [t.to_dict() for t in model.trees],
            "n_train_rows": n_rows,
            "in_bag": [_pack_mask(m) for m in model.oob_masks],
            "train_digest": model.train_digest,
        }
    elif isinstance(model, DecisionTree):
        doc["model_kind"] = model.kind
        doc["config"] = model.config.to_dict() if model.config is not None else {}
        doc["payload"] = {"tree": model.to_dict()}
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return doc


def model_from_dict(doc):
    try:
        version = doc["format_version"]
        if version != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported model format_version {version}")
        kind = doc["model_kind"]
        features = tuple(doc["features"])
        label_set = tuple(doc["label_set"])
        payload = doc["payload"]
        if kind == "forest":
            config = ForestConfig.from_dict(doc["config"])
            trees = [DecisionTree.from_dict(t, features, label_set, "c45", config.base)
                     for t in payload["trees"]]
            n_rows = payload["n_train_rows"]
            masks = [_unpack_mask(m, n_rows) for m in payload["in_bag"]]
            return RandomForest(trees, masks, label_set, features, config,
                                payload["tree_seeds"], payload.get("train_digest"))
        if kind in ("c45", "rep"):
            config = TreeConfig(**doc["config"]) if doc.get("config") else None
            return DecisionTree.from_dict(payload["tree"], features, label_set, kind, config)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model file: {exc!r}") from None
    raise ModelFormatError(f"unknown model_kind {kind!r}")


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not valid JSON ({exc})") from None
    return model_from_dict(doc)
