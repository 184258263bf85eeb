"""driftforest command line: drift-gen, run, bench and report.

Exit codes: 0 success, 1 usage error, 2 data/config error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .adf import AdaptiveDeepForest
from .config import (
    LEARNERS,
    ConfigError,
    build_learner,
    build_stream,
    infer_csv_spec,
    learner_config_echo,
    load_document,
)
from .evaluation import run_prequential, write_series_csv
from .ranking import average_ranks, bonferroni_dunn
from .stream import (
    DriftConfigError,
    StreamFormatError,
    load_csv_stream,
    make_class_shift_stream,
    make_gradual_sigmoid_drift,
    make_sudden_drift,
    write_csv_stream,
)

log = logging.getLogger("driftforest")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
SEED_ENV = "DRIFTFOREST_SEED"
SUMMARY_HEADER = ["algo", "stream", "acc", "kappa", "total_update_ms", "total_predict_ms"]


class UsageError(Exception):
    pass


class InvariantError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _seed(arg) -> int | None:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return None
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None


# ---------------------------------------------------------------------------
# drift-gen


def cmd_drift_gen(args) -> int:
    seed = _seed(args.seed)
    seed = 0 if seed is None else seed
    spec_a = infer_csv_spec(args.inputs[0], args.header, args.classes)
    data_a = load_csv_stream(args.inputs[0], spec_a, header=args.header)
    if len(args.inputs) == 2:
        spec_b = infer_csv_spec(args.inputs[1], args.header, args.classes)
        if spec_b.size != spec_a.size:
            raise DriftConfigError("input streams have different feature counts")
        spec_a.class_count = spec_b.class_count = max(spec_a.class_count, spec_b.class_count)
        a, b = data_a, load_csv_stream(args.inputs[1], spec_b, header=args.header)
    else:
        if not args.double:
            raise UsageError("a single input needs --double (or pass a second input stream)")
        if args.shift:
            doubled = make_class_shift_stream(data_a, seed=seed, class_count=spec_a.class_count)
        else:
            doubled = [data_a[i] for i in np.random.default_rng(seed).permutation(len(data_a))]
            doubled += [data_a[i] for i in np.random.default_rng(seed + 1).permutation(len(data_a))]
        a, b = doubled[: len(data_a)], doubled[len(data_a):]
    total = len(a) + len(b)
    manifest = {"inputs": [str(p) for p in args.inputs], "mode": args.mode, "seed": seed,
                "double": args.double, "shift": args.shift, "source_rows": [len(a), len(b)]}
    if args.mode == "sudden":
        at = len(a) if args.at is None else args.at
        out = list(make_sudden_drift(a, b, at))
        manifest["t0"] = at
    else:
        t0 = len(a) if args.center is None else args.center
        w = max(1, int(args.width_frac * total))
        out = list(make_gradual_sigmoid_drift(a, b, t0, w, seed=seed, length=total))
        manifest.update(t0=t0, w=w, width_frac=args.width_frac)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    manifest["rows"] = write_csv_stream(out_path, out)
    with open(str(out_path) + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {manifest['rows']} rows to {out_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# run / bench


def execute_run(manifest: dict) -> dict:
    """Run one prequential job and write its files; returns the summary row."""
    stream_doc = load_document(manifest["stream"])
    model_doc = load_document(manifest["model"]) if manifest.get("model") else {}
    kind = manifest["learner"]
    built = build_stream(stream_doc)
    learner = build_learner(kind, model_doc, built.spec, seed=manifest.get("seed"))
    timing = manifest.get("timing", True)
    result = run_prequential(
        learner, built.instances, built.spec.class_count,
        emit_every=int(manifest.get("emit_every", 100)), timing=timing,
    )
    cm = result.confusion
    if cm.total != len(built.instances) or result.records[-1].cum_acc != cm.correct / cm.total:
        raise InvariantError("prequential totals disagree with the confusion matrix")
    algo = manifest.get("algo") or kind
    out = Path(manifest["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_series_csv(out / "series.csv", result.records)
    row = [algo, built.name, f"{result.accuracy():.6f}", f"{result.kappa():.6f}",
           f"{result.update_ms:.3f}", f"{result.predict_ms:.3f}"]
    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        writer.writerow(row)
    report = {
        "algo": algo,
        "learner": kind,
        "stream": {"name": built.name, "class_count": built.spec.class_count, "dims": built.spec.dims,
                   "shape": built.spec.size, "instances": len(built.instances), "drift": built.drift},
        "config": learner_config_echo(learner),
        "totals": {"instances": cm.total, "accuracy": result.accuracy(), "kappa": result.kappa(),
                   "update_ms": result.update_ms, "predict_ms": result.predict_ms},
        "confusion": cm.counts.tolist(),
    }
    if isinstance(learner, AdaptiveDeepForest):
        report["depth_report"] = learner.depth_report()
        report["weights"] = learner.weights()
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return dict(zip(SUMMARY_HEADER, row))


def cmd_run(args) -> int:
    manifest = {
        "stream": args.stream, "model": args.model, "learner": args.learner, "out": args.out,
        "emit_every": args.emit_every, "seed": _seed(args.seed), "timing": not args.no_timing,
    }
    row = execute_run(manifest)
    print(",".join(str(row[k]) for k in SUMMARY_HEADER))
    return EXIT_OK


def _load_manifest(path, out_root: Path, seed, timing) -> dict:
    doc = load_document(path)
    base = Path(doc.pop("_base"))
    for key in ("stream", "model"):
        if doc.get(key) and not Path(doc[key]).is_absolute():
            doc[key] = str(base / doc[key])
    if doc.get("learner") not in LEARNERS:
        raise ConfigError(f"{path}: learner must be one of {', '.join(LEARNERS)}")
    if "stream" not in doc:
        raise ConfigError(f"{path}: manifest needs a 'stream'")
    name = doc.get("name") or Path(path).stem
    doc["out"] = str(out_root / name)
    if seed is not None:
        doc["seed"] = seed
    doc["timing"] = timing and doc.get("timing", True)
    return doc


def cmd_bench(args) -> int:
    out_root = Path(args.out)
    seed = _seed(args.seed)
    manifests = [_load_manifest(p, out_root, seed, not args.no_timing) for p in args.manifests]
    names = [m["out"] for m in manifests]
    if len(set(names)) != len(names):
        raise ConfigError("manifest names must be unique within a bench")
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(execute_run, manifests))
    else:
        rows = [execute_run(m) for m in manifests]
    out_root.mkdir(parents=True, exist_ok=True)
    with open(out_root / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for row in rows:
            writer.writerow([row[k] for k in SUMMARY_HEADER])
    print(f"wrote {len(rows)} summaries to {out_root / 'summary.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report


def read_summaries(paths) -> list[dict]:
    rows = []
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = set(SUMMARY_HEADER) - set(reader.fieldnames or [])
            if missing:
                raise ConfigError(f"{path}: missing columns {sorted(missing)}")
            rows.extend(reader)
    return rows


def cmd_report(args) -> int:
    rows = read_summaries(args.summaries)
    algos = list(dict.fromkeys(r["algo"] for r in rows))
    streams = list(dict.fromkeys(r["stream"] for r in rows))
    if len(algos) < 2:
        raise ConfigError("report needs at least two algorithms")
    scores = np.full((len(algos), len(streams)), np.nan)
    for r in rows:
        scores[algos.index(r["algo"]), streams.index(r["stream"])] = float(r[args.metric])
    missing = [(algos[i], streams[j]) for i, j in np.argwhere(np.isnan(scores))]
    if missing:
        raise ConfigError("incomplete score matrix, missing (algo, stream): "
                          + ", ".join(f"({a}, {s})" for a, s in missing))
    summary = average_ranks(scores, algos, higher_is_better=True)
    lines = [f"{'algo':<16} {'avg_rank':>8}"]
    lines += [f"{a:<16} {r:8.4f}" for a, r in zip(algos, summary.ranks)]
    table = [["algo", "avg_rank", "z_vs_control", "significant"]]
    if len(streams) >= 2:
        bd = bonferroni_dunn(summary, alpha=args.alpha, control=args.control)
        lines.append(f"control={bd.control} alpha={bd.alpha} critical_value={bd.critical_value:.6f} "
                     f"CD={bd.critical_difference:.6f}")
        for a in algos:
            if a == bd.control:
                table.append([a, f"{summary.rank_of(a):.4f}", "", ""])
                continue
            verdict = "significant" if bd.significant[a] else "not significant"
            lines.append(f"  {a} vs {bd.control}: z={bd.z[a]:+.4f} {verdict}")
            table.append([a, f"{summary.rank_of(a):.4f}", f"{bd.z[a]:.6f}", str(bd.significant[a]).lower()])
    else:
        lines.append("Bonferroni-Dunn test skipped: needs at least two streams")
        table += [[a, f"{summary.rank_of(a):.4f}", "", ""] for a in algos]
    print("\n".join(lines))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(table)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="driftforest", description="Adaptive deep forest stream benchmarks")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("drift-gen", help="synthesise a drifting stream CSV")
    p.add_argument("inputs", nargs="+", help="one CSV (with --double) or two CSVs (concept A, concept B)")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["sigmoid", "sudden"], default="sigmoid")
    p.add_argument("--at", type=int, help="change index for --mode sudden")
    p.add_argument("--center", type=int, help="sigmoid centre (default: end of concept A)")
    p.add_argument("--width-frac", type=float, default=0.1, help="sigmoid width as a fraction of the output")
    p.add_argument("--double", action="store_true", help="build both concepts from a single input")
    p.add_argument("--shift", action="store_true", help="rotate labels by one in the second concept")
    p.add_argument("--header", action="store_true", help="skip the first line of each input")
    p.add_argument("--classes", type=int, help="class count (default: largest label + 1)")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_drift_gen)

    p = sub.add_parser("run", help="prequential run of one learner on one stream")
    p.add_argument("--stream", required=True)
    p.add_argument("--model")
    p.add_argument("--learner", choices=LEARNERS, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--emit-every", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--no-timing", action="store_true", help="write zero times (byte-reproducible output)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="run several manifests into one output directory")
    p.add_argument("manifests", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--no-timing", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="average ranks and Bonferroni-Dunn test over summary CSVs")
    p.add_argument("summaries", nargs="+")
    p.add_argument("--metric", choices=["acc", "kappa"], default="kappa")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--control")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"driftforest: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvariantError, AssertionError) as exc:
        print(f"driftforest: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (ConfigError, StreamFormatError, DriftConfigError, OSError, KeyError, ValueError) as exc:
        print(f"driftforest: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
