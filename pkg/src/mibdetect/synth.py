"""Seeded generator of labeled IP-group datasets with injected attack signatures.

This is a stand-in for the unpublished SNMP-MIB capture: counters follow a
multiplicative Gaussian model around a baseline, with one multiplier pattern
per attack class. It has no packet-level or temporal realism.
"""

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .dataset import IP_GROUP, Dataset
from .errors import InvalidConfig

N_FEATURES = IP_GROUP.n_features


def _vector(values, what, positive=False):
    try:
        arr = tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise InvalidConfig(f"{what} must be a list of numbers") from None
    if len(arr) != N_FEATURES:
        raise InvalidConfig(f"{what} needs {N_FEATURES} entries, got {len(arr)}")
    for v in arr:
        if not math.isfinite(v) or v < 0 or (positive and v == 0):
            bound = "> 0" if positive else ">= 0"
            raise InvalidConfig(f"{what} entries must be finite and {bound}, got {v}")
    return arr


@dataclass(frozen=True)
class AttackProfile:
    label: str
    mean_shift: tuple
    noise_scale: tuple

    def __post_init__(self):
        label = str(self.label).strip().lower()
        if not label:
            raise InvalidConfig("profile label is empty")
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "mean_shift", _vector(self.mean_shift, f"{label}.mean_shift"))
        object.__setattr__(self, "noise_scale", _vector(self.noise_scale, f"{label}.noise_scale"))


@dataclass(frozen=True)
class ScenarioConfig:
    baseline: tuple
    profiles: tuple
    rows_per_class: int
    seed: int
    description: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "baseline", _vector(self.baseline, "baseline", positive=True))
        profiles = tuple(p if isinstance(p, AttackProfile) else AttackProfile(**p)
                         for p in self.profiles)
        object.__setattr__(self, "profiles", profiles)
        if not profiles:
            raise InvalidConfig("scenario has no profiles")
        labels = [p.label for p in profiles]
        if len(set(labels)) != len(labels):
            raise InvalidConfig(f"duplicate profile labels: {labels}")
        normal = [p for p in profiles if p.label == "normal"]
        if not normal or any(s != 1.0 for s in normal[0].mean_shift):
            raise InvalidConfig("scenario needs a 'normal' profile with all-ones mean_shift")
        if isinstance(self.rows_per_class, bool) or not isinstance(self.rows_per_class, int) \
                or self.rows_per_class < 1:
            raise InvalidConfig("rows_per_class must be a positive integer")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise InvalidConfig("seed must be an integer")

    def with_seed(self, seed):
        return ScenarioConfig(self.baseline, self.profiles, self.rows_per_class, seed, self.description)

    def with_rows(self, rows_per_class):
        return ScenarioConfig(self.baseline, self.profiles, rows_per_class, self.seed, self.description)

    def with_noise(self, noise):
        profiles = tuple(AttackProfile(p.label, p.mean_shift, (noise,) * N_FEATURES)
                         for p in self.profiles)
        return ScenarioConfig(self.baseline, profiles, self.rows_per_class, self.seed, self.description)

    def class_means(self):
        """Configured (noise-free) mean vector of each class, keyed by label."""
        base = np.array(self.baseline)
        return {p.label: base * np.array(p.mean_shift) for p in self.profiles}

    def to_dict(self):
        return {
            "description": self.description,
            "features": list(IP_GROUP.feature_names),
            "baseline": list(self.baseline),
            "rows_per_class": self.rows_per_class,
            "seed": self.seed,
            "profiles": [{"label": p.label, "mean_shift": list(p.mean_shift),
                          "noise_scale": list(p.noise_scale)} for p in self.profiles],
        }

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise InvalidConfig("scenario document must be a JSON object")
        features = doc.get("features")
        if features is not None and tuple(features) != IP_GROUP.feature_names:
            raise InvalidConfig("scenario features must be the IP-group variables in Table order")
        try:
            profiles = [AttackProfile(p["label"], p["mean_shift"], p["noise_scale"])
                        for p in doc["profiles"]]
            return cls(doc["baseline"], profiles, doc["rows_per_class"], doc["seed"],
                       doc.get("description", ""))
        except (KeyError, TypeError) as exc:
            raise InvalidConfig(f"malformed scenario document: {exc}") from None


def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path}: {exc}") from None
    return ScenarioConfig.from_dict(doc)


def save_scenario(config, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")


def default_scenario():
    """Seven-class scenario (normal plus six DoS attacks), 200 rows/class, 5% noise, seed 42.

    The constants live in ``data/default_scenario.json``.
    """
    text = resources.files("mibdetect").joinpath("data/default_scenario.json").read_text("utf-8")
    return ScenarioConfig.from_dict(json.loads(text))


def generate(config):
    if not isinstance(config, ScenarioConfig):
        raise InvalidConfig("generate expects a ScenarioConfig")
    rng = np.random.default_rng(config.seed)
    base = np.array(config.baseline)
    n = config.rows_per_class
    blocks, labels = [], []
    for profile in config.profiles:
        g = rng.standard_normal((n, N_FEATURES))
        mean = base * np.array(profile.mean_shift)
        cells = mean * (1.0 + np.array(profile.noise_scale) * g)
        blocks.append(np.maximum(cells, 0.0))
        labels.extend([profile.label] * n)
    return Dataset(IP_GROUP, np.vstack(blocks), labels)
