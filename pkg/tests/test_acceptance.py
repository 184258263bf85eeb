"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

The slow learner comparisons (criteria 6 and 11) share their runs through a
module fixture and write their metric series to ``acceptance_output/`` (or
``$DRIFTFOREST_ACCEPTANCE_OUT``) for inspection.
"""

import json
import math
import os
import random
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import digits_instances, threshold_stream
from driftforest import cli
from driftforest.adf import (
    AdaptiveDeepForest,
    AdfConfig,
    aggregate_output,
    cascade_input_size,
    n_subinstances,
    representation_size,
    scan,
    select_depth,
    window_size,
)
from driftforest.adwin import Adwin
from driftforest.evaluation import kappa, run_prequential, windowed_series, write_series_csv
from driftforest.forest import AdaptiveRandomForest
from driftforest.stream import GaussianMixtureGenerator, make_class_shift_stream, make_gradual_sigmoid_drift
from driftforest.tree import HoeffdingTree, hoeffding_bound
from oracles import kappa_oracle, replay_with_oracle, weighted_average_oracle

OUT_DIR = Path(os.environ.get("DRIFTFOREST_ACCEPTANCE_OUT", Path(__file__).resolve().parent.parent / "acceptance_output"))


# ---------------------------------------------------------------- criterion 1


def test_criterion_01_representation_sizes(record_criterion):
    t0 = time.perf_counter()
    # 32x32 image, c=10, d=3, n=20: sizes from the running model, not only the formula
    cfg = AdfConfig(10, 2, 32, depth=3, n_input_forests=20, n_cascade_forests=1, n_trees=1)
    reps, _, _ = AdaptiveDeepForest(cfg).input_layer_transform(np.zeros(1024))
    image_sizes = [len(r) for r in reps]
    formula_sizes = [representation_size(2, 3, i, 10, 20) for i in (1, 2, 3)]

    # 1024-long vector, c=10, d=5, m=n=20, original appended: the inner-sublayer input
    # built from a representation slice of 6400 values
    text_sizes = [representation_size(1, 5, i, 10, 20) for i in range(1, 6)]
    inner = cascade_input_size(2, 10, 20, 6400, 1024, True)
    text_cfg = AdfConfig(10, 1, 1024, depth=5, n_input_forests=20, n_cascade_forests=20, n_trees=1,
                         append_original_inner=True)
    text_model = AdaptiveDeepForest(text_cfg)
    model_inputs = [text_model.cascade[i][0].n_features for i in range(5)]
    expected_inputs = [cascade_input_size(i, 10, 20, text_sizes[i - 1], 1024, True) for i in range(1, 6)]
    elapsed = time.perf_counter() - t0

    passed = (
        image_sizes == formula_sizes == [12800, 3200, 800]
        and 6400 in text_sizes
        and inner == 7624
        and model_inputs == expected_inputs
        and elapsed < 1.0
    )
    record_criterion(
        "criterion 1", passed,
        f"R={image_sizes}, x_in(R_i=6400, inner)={inner}, model x_in={model_inputs}, {elapsed:.2f}s",
    )
    assert passed


# ---------------------------------------------------------------- criterion 2


def test_criterion_02_scan_tiling(record_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    failures = []
    for case in range(100):
        dims = int(rng.integers(1, 3))
        log_size = int(rng.integers(1, 11 if dims == 1 else 6))
        size = 2**log_size
        depth = int(rng.integers(1, log_size + 1))
        x = rng.random(size**dims)
        for i, windows in enumerate(scan(x, depth, dims=dims, size=size), start=1):
            s = window_size(size, depth, i)
            if len(windows) != 2 ** (dims * (depth - i + 1)) or len(windows) != n_subinstances(dims, depth, i):
                failures.append((case, i, "count"))
            if dims == 1:
                rebuilt = windows.reshape(-1)
            else:
                per = size // s
                rebuilt = windows.reshape(per, per, s, s).transpose(0, 2, 1, 3).reshape(-1)
            if not np.array_equal(rebuilt, x):
                failures.append((case, i, "tiling"))
    elapsed = time.perf_counter() - t0
    passed = not failures and elapsed < 10.0
    record_criterion("criterion 2", passed, f"100 configs, failures={failures[:3]}, {elapsed:.2f}s")
    assert passed


# ---------------------------------------------------------------- criterion 3


def test_criterion_03_adwin(record_criterion):
    t0 = time.perf_counter()
    false_alarms = 0
    for seed in range(100):
        value = random.Random(seed).random()
        w = Adwin(0.002)
        false_alarms += sum(w.add(value) for _ in range(10_000))

    detected_in_time = 0
    confirmed = True
    for seed in range(100):
        rng = random.Random(1000 + seed)
        values = [1.0 if rng.random() < 0.9 else 0.0 for _ in range(1000)]
        values += [1.0 if rng.random() < 0.1 else 0.0 for _ in range(1000)]
        try:
            detections = replay_with_oracle(values, 0.002)
        except AssertionError:
            confirmed = False
            continue
        post = [t for t in detections if t >= 1000]
        detected_in_time += bool(post) and post[0] - 1000 < 300
    elapsed = time.perf_counter() - t0
    passed = false_alarms == 0 and detected_in_time >= 95 and confirmed and elapsed < 30.0
    record_criterion(
        "criterion 3", passed,
        f"constant-stream detections={false_alarms}, switch found within 300 on {detected_in_time}/100, "
        f"oracle-confirmed={confirmed}, {elapsed:.1f}s",
    )
    assert passed


# ---------------------------------------------------------------- criterion 4


def test_criterion_04_hoeffding_tree(record_criterion):
    t0 = time.perf_counter()
    X, y = threshold_stream(10_000, seed=7)
    tree = HoeffdingTree(3, 2)
    hits = []
    for x, label in zip(X.tolist(), y.tolist()):
        p = tree.predict_proba(x)
        hits.append(p.index(max(p)) == label)
        tree.train(x, label)
    acc = float(np.mean(hits[-1000:]))
    eps = hoeffding_bound(1.0, 1e-7, 200)
    elapsed = time.perf_counter() - t0
    passed = acc >= 0.95 and abs(eps - 0.20074) <= 1e-5 and elapsed < 10.0
    record_criterion("criterion 4", passed, f"last-1000 accuracy={acc:.4f}, bound={eps:.6f}, {elapsed:.1f}s")
    assert passed


# ---------------------------------------------------------------- criterion 5


def _recovery_run(seed, drift_at=10_000, horizon=3_000):
    gen = GaussianMixtureGenerator([[0.0] * 4, [2.0] * 4], [[1.0] * 4] * 2, seed=seed)
    forest = AdaptiveRandomForest(4, 2, n_trees=10, seed=seed)
    hits = []
    for t in range(drift_at + horizon):
        inst = gen.sample()
        label = inst.label if t < drift_at else 1 - inst.label
        x = inst.features.tolist()
        proba, votes = forest.predict_with_votes(x)
        hits.append(1.0 if proba.index(max(proba)) == label else 0.0)
        forest.train(x, label, votes)
    series = windowed_series(hits)
    plateau = float(np.mean(series[drift_at - 1000:drift_at]))
    post = np.asarray(series[drift_at:])
    low = int(np.argmin(post))
    target = 0.9 * plateau
    above = np.nonzero(post[low:] >= target)[0]
    recovered_at = low + int(above[0]) if above.size else None
    ok = recovered_at is not None and post[-1] >= target
    return ok, plateau, float(post[low]), recovered_at, float(post[-1])


def test_criterion_05_arf_recovery(record_criterion):
    t0 = time.perf_counter()
    runs = [_recovery_run(seed) for seed in range(10)]
    elapsed = time.perf_counter() - t0
    n_ok = sum(r[0] for r in runs)
    for seed, (ok, plateau, low, rec, end) in enumerate(runs):
        print(f"  seed {seed}: plateau={plateau:.3f} min={low:.3f} recovered_after={rec} end={end:.3f} ok={ok}")
    passed = n_ok >= 8 and elapsed < 120.0
    record_criterion("criterion 5", passed, f"recovered on {n_ok}/10 seeds within 3000 instances, {elapsed:.1f}s")
    assert passed


# ------------------------------------------------------- criteria 6 and 11


def image_drift_stream(seed=0, copies=3):
    """8x8 digits tiled to ~5.4k, doubled with shifted classes, sigmoid drift of width 10%."""
    base = digits_instances() * copies
    doubled = make_class_shift_stream(base, seed=seed, class_count=10)
    half = len(base)
    width = int(0.1 * len(doubled))
    return list(make_gradual_sigmoid_drift(doubled[:half], doubled[half:], half, width, seed=seed,
                                           length=len(doubled)))


def _run(name, learner, stream):
    result = run_prequential(learner, stream, 10, emit_every=100)
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    write_series_csv(OUT_DIR / f"{name}_series.csv", result.records)
    n = result.n
    return {
        "kappa": result.kappa(),
        "accuracy": result.accuracy(),
        "ms_per_instance": (result.update_ms + result.predict_ms) / n,
        "update_ms": result.update_ms,
        "predict_ms": result.predict_ms,
        "instances": n,
    }


class ImageRuns:
    def __init__(self):
        self.stream = image_drift_stream()
        self.results = {}
        self.elapsed = {}

    def get(self, name):
        if name not in self.results:
            t0 = time.perf_counter()
            self.results[name] = _run(name, self._learner(name), self.stream)
            self.elapsed[name] = time.perf_counter() - t0
            with open(OUT_DIR / "image_stream_results.json", "w") as fh:
                json.dump(self.results, fh, indent=2, sort_keys=True)
        return self.results[name]

    @staticmethod
    def _learner(name):
        if name == "arf_T40":
            return AdaptiveRandomForest(64, 10, n_trees=40, seed=1)
        trees = {"adf_T10_F2": 10, "adf_T20_F2": 20, "adf_T10_F1": 10, "carf_T10_F2": 10}[name]
        forests = 1 if name.endswith("F1") else 2
        cfg = AdfConfig(10, 2, 8, depth=2, n_input_forests=forests, n_cascade_forests=forests, n_trees=trees,
                        carf=name.startswith("carf"), seed=1)
        return AdaptiveDeepForest(cfg)


@pytest.fixture(scope="module")
def image_runs():
    return ImageRuns()


def test_criterion_06_adf_vs_arf(image_runs, record_criterion):
    stream = image_runs.stream
    assert 10_000 <= len(stream) <= 11_000
    adf = image_runs.get("adf_T10_F2")
    arf = image_runs.get("arf_T40")
    carf = image_runs.get("carf_T10_F2")
    elapsed = sum(image_runs.elapsed[k] for k in ("adf_T10_F2", "arf_T40", "carf_T10_F2"))
    passed = adf["kappa"] >= arf["kappa"] - 0.02 and adf["kappa"] >= carf["kappa"] - 0.02 and elapsed < 900
    record_criterion(
        "criterion 6", passed,
        f"kappa ADF={adf['kappa']:.4f} ARF(T=40)={arf['kappa']:.4f} CARF={carf['kappa']:.4f} "
        f"on {len(stream)} instances, {elapsed:.0f}s, series in {OUT_DIR}",
    )
    assert passed


def test_criterion_11_scaling_trend(image_runs, record_criterion):
    base = image_runs.get("adf_T10_F2")
    more_trees = image_runs.get("adf_T20_F2")
    fewer_forests = image_runs.get("adf_T10_F1")
    elapsed = sum(image_runs.elapsed.get(k, 0.0) for k in ("adf_T10_F2", "adf_T20_F2", "adf_T10_F1"))
    passed = (
        more_trees["ms_per_instance"] > base["ms_per_instance"]
        and base["ms_per_instance"] > fewer_forests["ms_per_instance"]
        and more_trees["kappa"] >= base["kappa"] - 0.03
        and elapsed < 1200
    )
    record_criterion(
        "criterion 11", passed,
        f"ms/instance T10F1={fewer_forests['ms_per_instance']:.2f} T10F2={base['ms_per_instance']:.2f} "
        f"T20F2={more_trees['ms_per_instance']:.2f}; kappa T10={base['kappa']:.4f} T20={more_trees['kappa']:.4f}, "
        f"{elapsed:.0f}s",
    )
    assert passed


# ---------------------------------------------------------------- criterion 7


def test_criterion_07_depth_selection(record_criterion):
    t0 = time.perf_counter()
    stream = digits_instances()[:1200]
    model = AdaptiveDeepForest(AdfConfig(10, 2, 8, depth=3, n_trees=3, seed=5))
    alphas, chosen = [], []
    for inst in stream:
        fp = model.train(inst.features, inst.label)
        alphas.append(fp.alphas)
        chosen.append(fp.best)
    argmax_ok = all(c == int(np.argmax(a)) for a, c in zip(alphas, chosen))
    transforms = [lambda a: math.exp(5.0 * a), lambda a: a**3 - 2.0, lambda a: math.log(a + 0.5)]
    invariant = all(
        [select_depth([f(v) for v in a]) for a in alphas] == chosen for f in transforms
    )
    distinct = sorted(set(chosen))
    elapsed = time.perf_counter() - t0
    passed = argmax_ok and invariant and elapsed < 60
    record_criterion(
        "criterion 7", passed,
        f"argmax match={argmax_ok}, monotone-transform invariant={invariant}, sublayers chosen={distinct}, "
        f"{elapsed:.1f}s",
    )
    assert passed


# ---------------------------------------------------------------- criterion 8


def test_criterion_08_aggregation_oracle(record_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(1000):
        m = int(rng.integers(1, 6))
        c = int(rng.integers(2, 7))
        y = rng.dirichlet(np.ones(c), size=m).reshape(-1).tolist()
        betas = np.maximum(rng.random(m), 0.01).tolist()
        got = aggregate_output(y, betas, c)
        worst = max(worst, float(np.max(np.abs(got - weighted_average_oracle(y, betas, c)))))
    elapsed = time.perf_counter() - t0
    passed = worst <= 1e-12 and elapsed < 5
    record_criterion("criterion 8", passed, f"max abs deviation={worst:.2e} over 1000 cases, {elapsed:.2f}s")
    assert passed


# ---------------------------------------------------------------- criterion 9


def test_criterion_09_kappa_oracle(record_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(1000):
        c = int(rng.integers(2, 8))
        cm = rng.integers(0, 100, size=(c, c))
        cm[rng.integers(c), rng.integers(c)] += 1
        worst = max(worst, abs(kappa(cm) - kappa_oracle(cm)))
    hand = kappa(np.array([[40, 10], [20, 30]]))
    elapsed = time.perf_counter() - t0
    passed = worst <= 1e-12 and hand == 0.4 and elapsed < 5
    record_criterion("criterion 9", passed, f"max abs deviation={worst:.2e}, hand case={hand!r}, {elapsed:.2f}s")
    assert passed


# --------------------------------------------------------------- criterion 10


def test_criterion_10_determinism(tmp_path, record_criterion):
    t0 = time.perf_counter()
    stream = tmp_path / "stream.json"
    stream.write_text(json.dumps({
        "source": {"generator": "gaussian_mixture", "means": [[0, 0, 0, 0], [2, 2, 2, 2], [0, 3, 0, 3]],
                   "stds": [[1] * 4] * 3, "n_instances": 1500},
        "class_count": 3, "dims": 1, "shape": 4, "seed": 2, "name": "g3",
        "drift": {"mode": "sigmoid", "width_frac": 0.1},
    }))
    model = tmp_path / "model.json"
    model.write_text(json.dumps({"trees": 5, "seed": 3}))

    def run(out, learner="adf"):
        code = cli.main(["run", "--stream", str(stream), "--model", str(model), "--learner", learner,
                         "--out", str(tmp_path / out), "--no-timing"])
        assert code == 0
        return (tmp_path / out / "summary.csv").read_bytes()

    runs_equal = run("r1") == run("r2")

    manifests = []
    for kind in ("adf", "carf", "arf", "hoeffding"):
        path = tmp_path / f"{kind}.json"
        path.write_text(json.dumps({"stream": "stream.json", "model": "model.json", "learner": kind, "name": kind}))
        manifests.append(str(path))
    codes = [cli.main(["bench", *manifests, "--out", str(tmp_path / out), "--jobs", "4", "--no-timing"])
             for out in ("b1", "b2")]
    codes.append(cli.main(["bench", *manifests, "--out", str(tmp_path / "b3"), "--jobs", "1", "--no-timing"]))
    summaries = [(tmp_path / out / "summary.csv").read_bytes() for out in ("b1", "b2", "b3")]
    bench_equal = codes == [0, 0, 0] and summaries[0] == summaries[1] == summaries[2]
    per_job = all(
        (tmp_path / "b1" / k / "summary.csv").read_bytes() == (tmp_path / "b2" / k / "summary.csv").read_bytes()
        for k in ("adf", "carf", "arf", "hoeffding")
    )
    elapsed = time.perf_counter() - t0
    passed = runs_equal and bench_equal and per_job and elapsed < 300
    record_criterion(
        "criterion 10", passed,
        f"run twice identical={runs_equal}, bench --jobs 4 twice (and --jobs 1) identical={bench_equal and per_job}, "
        f"{elapsed:.1f}s",
    )
    assert passed
