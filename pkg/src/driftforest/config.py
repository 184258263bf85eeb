"""Stream and model config documents.

Both are JSON objects. Nested objects and dotted keys are equivalent:
``{"drift": {"mode": "sudden"}}`` and ``{"drift.mode": "sudden"}`` load the
same way.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .adf import AdaptiveDeepForest, AdfConfig
from .forest import AdaptiveRandomForest
from .stream import (
    DriftConfigError,
    GaussianMixtureGenerator,
    StreamSpec,
    load_csv_stream,
    make_class_shift_stream,
    make_gradual_sigmoid_drift,
    make_incremental_drift,
    make_sudden_drift,
)
from .tree import HoeffdingTree

__all__ = [
    "ConfigError",
    "LEARNERS",
    "load_document",
    "infer_csv_spec",
    "BuiltStream",
    "build_stream",
    "build_learner",
    "learner_config_echo",
]

LEARNERS = ("adf", "carf", "arf", "hoeffding")

_FOREST_KEYS = {"lambda": "lambda_", "lambda_": "lambda_", "warning_delta": "warning_delta",
                "drift_delta": "drift_delta", "subspace_size": "subspace_size"}
_TREE_KEYS = ("grace_period", "split_confidence", "tie_threshold")


class ConfigError(ValueError):
    """Invalid or inconsistent configuration document."""


def _nest(doc: dict) -> dict:
    out: dict = {}
    for key, value in doc.items():
        if isinstance(value, dict):
            value = _nest(value)
        parts = key.split(".")
        cur = out
        for p in parts[:-1]:
            cur = cur.setdefault(p, {})
        if isinstance(value, dict) and isinstance(cur.get(parts[-1]), dict):
            cur[parts[-1]].update(value)
        else:
            cur[parts[-1]] = value
    return out


def load_document(path) -> dict:
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    doc = _nest(doc)
    doc.setdefault("_base", str(path.parent))
    return doc


def infer_csv_spec(path, header: bool = False, class_count: int | None = None) -> StreamSpec:
    """Vector spec from the first data row and the largest label in a CSV file."""
    n_cols = None
    max_label = -1
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh), start=1):
            if header and i == 1 or not row:
                continue
            n_cols = n_cols or len(row)
            try:
                max_label = max(max_label, int(row[-1]))
            except ValueError:
                raise ConfigError(f"{path}: row {i}: label is not an integer: {row[-1]!r}") from None
    if n_cols is None or n_cols < 2:
        raise ConfigError(f"{path}: no data rows")
    c = class_count if class_count is not None else max(max_label + 1, 2)
    return StreamSpec(class_count=c, dims=1, size=n_cols - 1)


@dataclass
class BuiltStream:
    name: str
    spec: StreamSpec
    instances: list
    drift: dict


def _generator(src: dict, seed: int, side) -> GaussianMixtureGenerator:
    kind = src.get("generator", "gaussian_mixture")
    if kind != "gaussian_mixture":
        raise ConfigError(f"unknown generator {kind!r}")
    try:
        return GaussianMixtureGenerator(src["means"], src["stds"], src.get("priors"), seed=seed, side=side)
    except KeyError as exc:
        raise ConfigError(f"generator is missing {exc.args[0]!r}") from None


def build_stream(doc: dict, seed: int | None = None) -> BuiltStream:
    """Materialise the stream a config document describes."""
    doc = _nest(doc)
    try:
        c = int(doc["class_count"])
        dims = int(doc.get("dims", 1))
        size = int(doc["shape"])
    except KeyError as exc:
        raise ConfigError(f"stream config is missing {exc.args[0]!r}") from None
    seed = int(doc.get("seed", 0)) if seed is None else seed
    spec = StreamSpec(class_count=c, dims=dims, size=size, n_instances=doc.get("n_instances"), seed=seed)
    drift = dict(doc.get("drift", {}))
    mode = drift.get("mode", "none")
    if mode == "sigmoid":
        mode = "gradual_sigmoid"
    width_frac = float(drift.get("width_frac", 0.1))
    source = doc.get("source")
    base = Path(doc.get("_base", "."))
    info = {"mode": mode}

    if isinstance(source, str):
        path = source if Path(source).is_absolute() else base / source
        spec.source = str(path)
        data = load_csv_stream(path, spec, header=bool(doc.get("header", False)))
        name = doc.get("name", Path(source).stem)
        if mode == "none":
            return BuiltStream(name, spec, data, info)
        if mode == "incremental":
            raise DriftConfigError("incremental drift needs a generator source, not a replayed file")
        if drift.get("shift", True):
            doubled = make_class_shift_stream(data, seed=seed, class_count=c)
        else:
            rng = np.random.default_rng(seed)
            doubled = [data[i] for i in rng.permutation(len(data))]
            doubled += [data[i] for i in np.random.default_rng(seed + 1).permutation(len(data))]
        half = len(data)
        a, b = doubled[:half], doubled[half:]
        total = len(doubled)
    elif isinstance(source, dict):
        name = doc.get("name", "gaussian")
        spec.source = source
        n = int(source.get("n_instances", doc.get("n_instances") or 0))
        if n <= 0:
            raise ConfigError("generator source needs n_instances > 0")
        g0 = _generator(source, seed, spec.side)
        if g0.n_classes != c or g0.n_features != spec.n_features:
            raise ConfigError("generator means do not match class_count/shape")
        if mode == "none":
            return BuiltStream(name, spec, g0.take(n), info)
        target = drift.get("target")
        if target is None:
            target = dict(source, means=np.roll(np.asarray(source["means"]), 1, axis=0).tolist(),
                          stds=np.roll(np.asarray(source["stds"]), 1, axis=0).tolist())
        g1 = _generator(target, seed + 1, spec.side)
        total = n
        half = n // 2
        a, b = g0, g1
    else:
        raise ConfigError("stream config needs a 'source' (CSV path or generator object)")

    center = drift.get("center")
    center = half if center is None else int(center)
    width = max(1, int(width_frac * total))
    info.update(center=center, width=width, total=total)
    if mode == "sudden":
        if isinstance(a, GaussianMixtureGenerator):
            a, b = a.take(center), b.take(total - center)
        out = list(make_sudden_drift(a, b, center))
    elif mode == "gradual_sigmoid":
        out = list(make_gradual_sigmoid_drift(a, b, center, width, seed=seed, length=total))
    elif mode == "incremental":
        start = center - width // 2
        out = list(make_incremental_drift(a, b, start, start + width, total, seed=seed))
    else:
        raise DriftConfigError(f"unknown drift mode {mode!r}")
    return BuiltStream(name, spec, out, info)


def _forest_kwargs(doc: dict) -> dict:
    kw = {}
    for key, value in dict(doc.get("forest", {})).items():
        if key not in _FOREST_KEYS:
            raise ConfigError(f"unknown forest option {key!r}")
        kw[_FOREST_KEYS[key]] = value
    for key, value in dict(doc.get("tree", {})).items():
        if key not in _TREE_KEYS:
            raise ConfigError(f"unknown tree option {key!r}")
        kw[key] = value
    return kw


def build_learner(kind: str, doc: dict, spec: StreamSpec, seed: int | None = None):
    """Instantiate a learner of ``kind`` for streams shaped like ``spec``."""
    if kind not in LEARNERS:
        raise ConfigError(f"unknown learner {kind!r}; choose from {', '.join(LEARNERS)}")
    doc = _nest(doc)
    seed = int(doc.get("seed", 0)) if seed is None else seed
    c = spec.class_count
    if kind in ("adf", "carf"):
        overrides = {"seed": seed, "forest": _forest_kwargs(doc), "carf": kind == "carf" or bool(doc.get("carf"))}
        for key, attr in (("depth", "depth"), ("trees", "n_trees"), ("append_original_inner", "append_original_inner")):
            if key in doc:
                overrides[attr] = doc[key]
        if "forests" in doc:
            overrides["n_input_forests"] = overrides["n_cascade_forests"] = int(doc["forests"])
        for key in ("input_forests", "cascade_forests"):
            if key in doc:
                overrides[f"n_{key}"] = int(doc[key])
        try:
            cfg = AdfConfig.for_stream(c, spec.dims, spec.size, **overrides)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        return AdaptiveDeepForest(cfg)
    if kind == "arf":
        return AdaptiveRandomForest(
            spec.n_features, c, n_trees=int(doc.get("trees", 10)), seed=seed, **_forest_kwargs(doc)
        )
    tree_kw = {k: v for k, v in dict(doc.get("tree", {})).items() if k in _TREE_KEYS}
    return HoeffdingTree(spec.n_features, c, seed=seed, **tree_kw)


def learner_config_echo(learner) -> dict:
    if isinstance(learner, AdaptiveDeepForest):
        return learner.config.to_dict()
    if isinstance(learner, AdaptiveRandomForest):
        return {
            "n_trees": learner.n_trees, "lambda": learner.lambda_, "warning_delta": learner.warning_delta,
            "drift_delta": learner.drift_delta, "subspace_size": learner.subspace_size,
            "grace_period": learner.grace_period, "split_confidence": learner.split_confidence,
            "tie_threshold": learner.tie_threshold, "seed": learner.seed,
        }
    return {
        "grace_period": learner.grace_period, "split_confidence": learner.split_confidence,
        "tie_threshold": learner.tie_threshold, "subspace_size": learner.subspace_size, "seed": learner.seed,
    }
