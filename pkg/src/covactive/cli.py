"""Command-line entry point: ``run``, ``coverage``, ``report`` and ``generate-data``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .coverage import DEFAULT_MAX_LEVEL, combinatorial_coverage, coverage_density, sdcc
from .dataset import SplitSpec
from .harness import DataSource, ExperimentConfig, emit_outputs, read_outputs, run_experiment
from .models import parse_model
from .presets import get_preset
from .strategies import STRATEGIES

__all__ = ["main", "build_parser", "config_from_dict", "coverage_report"]


class CLIError(Exception):
    """A user-facing error; printed without a traceback."""


def _split_tokens(text):
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def _delimiter(text):
    if text is None:
        return ","
    if text.lower() in ("whitespace", "ws", "none"):
        return None
    return {"\\t": "\t", "tab": "\t"}.get(text, text)


def _source_from_preset(name, data_dir):
    preset = get_preset(name)
    path = Path(data_dir) / preset.filename
    test = Path(data_dir) / preset.test_filename if preset.test_filename else None
    for p in (path, test):
        if p is not None and not p.exists():
            hint = (" (run `covactive generate-data` to create it)" if preset.generated
                    else " (download it from the UCI repository)")
            raise CLIError(f"preset {preset.name!r} needs {p}{hint}")
    source = DataSource(str(path), test_path=str(test) if test else None, header=preset.header,
                        names=preset.feature_names, class_column=preset.class_column,
                        drop_columns=preset.drop_columns, delimiter=preset.delimiter,
                        name=preset.name)
    return preset, source


def config_from_dict(entry, defaults=None):
    """One :class:`ExperimentConfig` from a JSON-style mapping.

    Keys: ``preset`` or ``path`` (+ ``test``, ``header``, ``class_column``,
    ``drop_columns``, ``delimiter``, ``names``, ``name``), ``data_dir``,
    ``strategies``, ``batch_size``, ``batch_count``, ``repetitions``,
    ``seed``, ``models``, ``sampling_model``, ``committee``, ``T``,
    ``test_fraction``, ``initial_fraction``, ``resplit_each_repetition``,
    ``track_sdcc``. Missing keys fall back to *defaults*, then to presets.
    """
    merged = dict(defaults or {})
    merged.update({k: v for k, v in entry.items() if v is not None})
    unknown = set(merged) - _CONFIG_KEYS
    if unknown:
        raise CLIError(f"unknown config keys: {sorted(unknown)}")
    preset = None
    if merged.get("preset"):
        preset, source = _source_from_preset(merged["preset"], merged.get("data_dir", "data"))
    elif merged.get("path"):
        source = DataSource(
            merged["path"], test_path=merged.get("test"), header=bool(merged.get("header", False)),
            names=merged.get("names"), class_column=int(merged.get("class_column", -1)),
            drop_columns=tuple(merged.get("drop_columns", ())),
            delimiter=_delimiter(merged.get("delimiter")), name=merged.get("name"))
    else:
        raise CLIError("each dataset needs either 'preset' or 'path'")
    split = SplitSpec(float(merged.get("test_fraction", 0.10)),
                      float(merged.get("initial_fraction", 0.025)),
                      int(merged.get("seed", 0)),
                      pre_split_test=source.test_path is not None)
    batch_size = merged.get("batch_size", preset.batch_size if preset else 100)
    batch_count = merged.get("batch_count", preset.batch_count if preset else None)
    strategies = merged.get("strategies", list(STRATEGIES))
    if isinstance(strategies, str):
        strategies = _split_tokens(strategies)
    models = merged.get("models", ["rf5", "dt", "svm"])
    if isinstance(models, str):
        models = _split_tokens(models)
    committee = merged.get("committee", ["rf5", "knn", "lr"])
    if isinstance(committee, str):
        committee = _split_tokens(committee)
    return ExperimentConfig(
        source=source, split=split, strategies=strategies,
        batch_size=int(batch_size),
        batch_count=None if batch_count is None else int(batch_count),
        repetitions=int(merged.get("repetitions", 3)),
        sampling_model=parse_model(merged.get("sampling_model", "rf5")),
        models=[parse_model(m) for m in models],
        committee=[parse_model(m) for m in committee],
        max_level=int(merged.get("T", DEFAULT_MAX_LEVEL)),
        seed=int(merged.get("seed", 0)),
        resplit_each_repetition=bool(merged.get("resplit_each_repetition", False)),
        track_sdcc=bool(merged.get("track_sdcc", True)),
        dataset_name=source.name,
    )


_CONFIG_KEYS = {
    "preset", "path", "test", "header", "class_column", "drop_columns", "delimiter", "names",
    "name", "data_dir", "strategies", "batch_size", "batch_count", "repetitions", "seed",
    "models", "sampling_model", "committee", "T", "test_fraction", "initial_fraction",
    "resplit_each_repetition", "track_sdcc", "out", "datasets",
}


def _configs_from_file(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CLIError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CLIError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise CLIError(f"{path}: top level must be an object")
    datasets = doc.get("datasets")
    shared = {k: v for k, v in doc.items() if k not in ("datasets", "out")}
    if datasets is None:
        return [config_from_dict(shared)], doc.get("out")
    if not datasets:
        raise CLIError(f"{path}: 'datasets' is empty")
    return [config_from_dict(d, shared) for d in datasets], doc.get("out")


def _cmd_run(args):
    if args.config:
        configs, out = _configs_from_file(args.config)
        out = args.out or out
    else:
        if bool(args.preset) == bool(args.dataset):
            raise CLIError("give exactly one of --preset or --dataset (or use --config)")
        entry = {
            "preset": args.preset, "path": args.dataset, "test": args.test,
            "header": args.header, "class_column": args.class_column,
            "delimiter": args.delimiter, "data_dir": args.data_dir,
            "strategies": args.strategies, "batch_size": args.batch_size,
            "batch_count": args.batches, "repetitions": args.reps, "seed": args.seed,
            "models": args.models, "sampling_model": args.sampling_model, "T": args.T,
        }
        configs, out = [config_from_dict(entry)], args.out
    if not out:
        raise CLIError("no output directory (--out)")
    results = [run_experiment(cfg) for cfg in configs]
    paths = emit_outputs(results, out)
    for p in paths.values():
        print(p)
    return 0


def _read_table(path, delimiter, header):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            if delimiter is None:
                recs = [line.split() for line in fh]
            else:
                recs = list(csv.reader(fh, delimiter=delimiter, skipinitialspace=True))
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc}") from exc
    recs = [[c.strip() for c in r] for r in recs if r and any(c.strip() for c in r)]
    if header and recs:
        recs = recs[1:]
    return recs


def coverage_report(labeled, unlabeled, levels, max_level=DEFAULT_MAX_LEVEL, exact=False):
    """SDCC, CC and densities for two token tables sharing one value universe.

    *labeled* and *unlabeled* are lists of equally long token rows (features
    only). Returns a JSON-serialisable dict.
    """
    if not unlabeled:
        raise CLIError("the unlabeled table has no rows")
    width = len(unlabeled[0])
    for name, table in (("labeled", labeled), ("unlabeled", unlabeled)):
        for i, r in enumerate(table):
            if len(r) != width:
                raise CLIError(f"{name} row {i + 1}: expected {width} features, found {len(r)}")
    maps = [dict() for _ in range(width)]

    def encode(table):
        out = np.empty((len(table), width), dtype=np.int64)
        for i, r in enumerate(table):
            for j, tok in enumerate(r):
                out[i, j] = maps[j].setdefault(tok, len(maps[j]))
        return out

    L = encode(labeled).reshape(-1, width)
    U = encode(unlabeled)
    cards = [len(m) for m in maps]
    T = min(max_level, width)
    levels = [t for t in (levels or range(1, T + 1))]
    for t in levels:
        if not 1 <= t <= width:
            raise CLIError(f"level {t} outside 1..{width}")
    dens = coverage_density(L, U, T)
    both = np.vstack([L, U])
    report = {
        "n_features": width,
        "n_labeled": int(L.shape[0]),
        "n_unlabeled": int(U.shape[0]),
        "cardinalities": cards,
        "T": T,
        "sdcc": {str(t): sdcc(U, L, t) for t in levels},
        "cc": {
            "labeled": {str(t): combinatorial_coverage(L, t, cards) for t in levels},
            "unlabeled": {str(t): combinatorial_coverage(U, t, cards) for t in levels},
            "all": {str(t): combinatorial_coverage(both, t, cards) for t in levels},
        },
        "density": dens.tolist(),
    }
    if exact:
        report["density_exact"] = [str(Fraction(float(d)).limit_denominator(720)) for d in dens]
    return report


def _cmd_coverage(args):
    delim = _delimiter(args.delimiter)
    L = _read_table(args.labeled, delim, args.header)
    U = _read_table(args.unlabeled, delim, args.header)
    if not args.no_labels:
        def strip(table):
            return [[c for j, c in enumerate(r) if j != args.label_column % len(r)] for r in table]
        L, U = strip(L), strip(U)
    levels = [int(t) for t in _split_tokens(args.t)] if args.t else None
    report = coverage_report(L, U, levels, args.T, exact=args.exact)
    text = json.dumps(report, indent=2)
    if args.out:
        try:
            Path(args.out).write_text(text + "\n")
        except OSError as exc:
            raise CLIError(f"cannot write {args.out}: {exc}") from exc
    else:
        print(text)
    return 0


def _cmd_report(args):
    summary = read_outputs(args.input)
    out = Path(args.out) if args.out else Path(args.input) / "summary.json"
    try:
        out.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise CLIError(f"cannot write {out}: {exc}") from exc
    print(out)
    return 0


def _cmd_generate(args):
    from .benchmarks import GENERATED_FILES, generate_all
    names = _split_tokens(args.only) or None
    if names:
        bad = set(names) - set(GENERATED_FILES)
        if bad:
            raise CLIError(f"cannot generate {sorted(bad)}; available: {sorted(GENERATED_FILES)}")
    for name, path in generate_all(args.out, names).items():
        print(f"{name}: {path}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="covactive",
                                description="Coverage-guided batch active learning experiments.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an active-learning experiment")
    r.add_argument("--config", help="JSON experiment file")
    r.add_argument("--preset", help="named benchmark (tic-tac-toe, balance-scale, car, chess, nursery, monk)")
    r.add_argument("--data-dir", default="data", help="directory holding preset files")
    r.add_argument("--dataset", help="categorical CSV file")
    r.add_argument("--test", help="pre-split test CSV")
    r.add_argument("--header", action="store_true", default=None, help="first line is a header")
    r.add_argument("--class-column", type=int, default=None, help="class column position (default -1)")
    r.add_argument("--delimiter", default=None, help="field separator, or 'whitespace'")
    r.add_argument("--strategies", help="comma-separated strategy tokens")
    r.add_argument("--batch-size", type=int)
    r.add_argument("--batches", type=int)
    r.add_argument("--reps", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--models", help="comma-separated model tokens (rf5, rf, dt, svm, knn, lr)")
    r.add_argument("--sampling-model", help="model token used for sampling (default rf5)")
    r.add_argument("--T", type=int, help="maximum interaction level (default 6)")
    r.add_argument("--out", help="output directory")
    r.set_defaults(func=_cmd_run)

    c = sub.add_parser("coverage", help="coverage report for a labeled/unlabeled pair")
    c.add_argument("labeled", help="CSV of labeled rows (may be empty)")
    c.add_argument("unlabeled", help="CSV of unlabeled rows")
    c.add_argument("--t", help="comma-separated SDCC/CC levels (default 1..T)")
    c.add_argument("--T", type=int, default=DEFAULT_MAX_LEVEL, help="density max level")
    c.add_argument("--no-labels", action="store_true", help="files hold features only")
    c.add_argument("--label-column", type=int, default=-1)
    c.add_argument("--header", action="store_true")
    c.add_argument("--delimiter", default=None)
    c.add_argument("--exact", action="store_true", help="also emit densities as fractions")
    c.add_argument("--out", help="write JSON here instead of stdout")
    c.set_defaults(func=_cmd_coverage)

    rep = sub.add_parser("report", help="rebuild summary.json from learning_curves.csv")
    rep.add_argument("--in", dest="input", required=True)
    rep.add_argument("--out")
    rep.set_defaults(func=_cmd_report)

    g = sub.add_parser("generate-data", help="write the exactly generated benchmark files")
    g.add_argument("--out", default="data")
    g.add_argument("--only", help="comma-separated subset (tic-tac-toe, balance-scale, chess)")
    g.set_defaults(func=_cmd_generate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CLIError, ValueError, TypeError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
