"""Batch active-learning experiments, model transfer, and summary tables.

Protocol for one dataset
------------------------
The dataset is split once (``SplitSpec``); every repetition and every
strategy starts from that same partition unless
``resplit_each_repetition`` is set. Repetition ``r`` owns the generator
``default_rng(seed + r)``, re-created for each strategy so all strategies
see identical random streams. Per step the generator yields, in order:
one model seed (model *j* is trained with ``seed + j``), then any
strategy draws (random scores or the degenerate-score fallback).

Batch 0 trains every model on the initial pool. Each later batch

1. scores the unlabeled pool with the sampling model fitted on the current
   labeled pool (coverage density is recomputed from an incrementally grown
   labeled inventory),
2. labels the ``batch_size`` best candidates,
3. retrains the sampling model and every transfer model on the enlarged
   pool and records test macro-F1, sampling bias and SDCC.
"""
from __future__ import annotations

import csv
import json
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .coverage import DEFAULT_MAX_LEVEL, CoverageDensity, sdcc
from .dataset import Dataset, SplitSpec, load_dataset, split_pools
from .metrics import macro_f1, min_max_normalize, sampling_bias, trapezoid_auc
from .models import ModelSpec, parse_model, train
from .strategies import (COVERAGE_STRATEGIES, QueryContext, categorical_similarity_sums,
                         normalize_strategy, query)

__all__ = [
    "DataSource",
    "ExperimentConfig",
    "RunRecord",
    "ExperimentResult",
    "run_experiment",
    "summarize",
    "emit_outputs",
    "read_outputs",
    "CURVE_COLUMNS",
    "BIAS_COLUMNS",
]

log = logging.getLogger(__name__)

CURVE_COLUMNS = ["dataset", "strategy", "model", "repetition", "batch", "n_labeled", "f1"]
BIAS_COLUMNS = ["dataset", "strategy", "repetition", "batch", "bias"]
SDCC_COLUMNS = ["dataset", "strategy", "repetition", "batch", "level", "sdcc_unlabeled", "sdcc_query_pool"]


@dataclass
class DataSource:
    """Where and how to read one dataset."""

    path: str
    test_path: Optional[str] = None
    header: bool = False
    names: Optional[Sequence[str]] = None
    class_column: int = -1
    drop_columns: Sequence[int] = ()
    delimiter: Optional[str] = ","
    name: Optional[str] = None

    def load(self) -> Dataset:
        return load_dataset(
            self.path, header=self.header, names=self.names,
            class_column=self.class_column, drop_columns=self.drop_columns,
            delimiter=self.delimiter, test_path=self.test_path, name=self.name)

    def to_dict(self):
        d = dict(self.__dict__)
        d["names"] = list(self.names) if self.names is not None else None
        d["drop_columns"] = list(self.drop_columns)
        return d


def _default_models():
    return [parse_model("rf5"), parse_model("dt"), parse_model("svm")]


def _default_committee():
    return [parse_model("rf5"), parse_model("knn"), parse_model("lr")]


@dataclass
class ExperimentConfig:
    """Settings for one dataset.

    ``models`` lists every evaluated model; the sampling model is always
    evaluated and is inserted first when missing.
    """

    source: Optional[DataSource] = None
    split: SplitSpec = field(default_factory=SplitSpec)
    strategies: Sequence[str] = ("random", "uncertainty", "qbc", "info_density",
                                 "cds", "icds", "uswcd")
    batch_size: int = 100
    batch_count: Optional[int] = None
    repetitions: int = 3
    sampling_model: ModelSpec = field(default_factory=lambda: parse_model("rf5"))
    models: Sequence[ModelSpec] = field(default_factory=_default_models)
    committee: Sequence[ModelSpec] = field(default_factory=_default_committee)
    max_level: int = DEFAULT_MAX_LEVEL
    seed: int = 0
    resplit_each_repetition: bool = False
    track_sdcc: bool = True
    dataset_name: Optional[str] = None

    def __post_init__(self):
        if not self.strategies:
            raise ValueError("at least one strategy is required")
        self.strategies = [normalize_strategy(s) for s in self.strategies]
        if len(set(self.strategies)) != len(self.strategies):
            raise ValueError("duplicate strategies")
        self.sampling_model = parse_model(self.sampling_model)
        models = [parse_model(m) for m in self.models]
        if self.sampling_model.label not in [m.label for m in models]:
            models.insert(0, self.sampling_model)
        if len({m.label for m in models}) != len(models):
            raise ValueError("model labels must be unique")
        self.models = models
        self.committee = [parse_model(m) for m in self.committee]
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.batch_count is not None and self.batch_count < 1:
            raise ValueError("batch_count must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.max_level < 1:
            raise ValueError("max_level must be >= 1")

    def to_dict(self):
        return {
            "dataset": self.dataset_name,
            "source": self.source.to_dict() if self.source else None,
            "split": dict(self.split.__dict__),
            "strategies": list(self.strategies),
            "batch_size": self.batch_size,
            "batch_count": self.batch_count,
            "repetitions": self.repetitions,
            "sampling_model": self.sampling_model.to_dict(),
            "models": [m.to_dict() for m in self.models],
            "committee": [m.to_dict() for m in self.committee],
            "max_level": self.max_level,
            "seed": self.seed,
            "resplit_each_repetition": self.resplit_each_repetition,
            "track_sdcc": self.track_sdcc,
        }


@dataclass
class RunRecord:
    """One (strategy, repetition) trajectory."""

    strategy: str
    repetition: int
    n_labeled: List[int] = field(default_factory=list)
    f1: Dict[str, List[float]] = field(default_factory=dict)
    bias: List[float] = field(default_factory=list)
    sdcc_unlabeled: List[List[float]] = field(default_factory=list)
    sdcc_query_pool: List[List[float]] = field(default_factory=list)
    selected: List[List[int]] = field(default_factory=list)
    fallbacks: List[Optional[str]] = field(default_factory=list)
    disjoint: bool = True
    initial: List[int] = field(default_factory=list)
    test: List[int] = field(default_factory=list)

    @property
    def queried(self):
        return [n - self.n_labeled[0] for n in self.n_labeled]


@dataclass
class ExperimentResult:
    dataset: str
    config: ExperimentConfig
    runs: List[RunRecord]
    n_classes: int
    original_model: str

    @property
    def strategies(self):
        return list(self.config.strategies)

    @property
    def models(self):
        return [m.label for m in self.config.models]

    def _runs(self, strategy):
        return sorted((r for r in self.runs if r.strategy == strategy), key=lambda r: r.repetition)

    def curves(self, strategy, model):
        """``(queried, F1 matrix of shape (repetitions, points))``, truncated to the shortest run."""
        runs = self._runs(strategy)
        length = min(len(r.f1[model]) for r in runs)
        x = np.asarray(runs[0].queried[:length], dtype=np.float64)
        return x, np.asarray([r.f1[model][:length] for r in runs])

    def mean_curve(self, strategy, model):
        x, Y = self.curves(strategy, model)
        return x, Y.mean(axis=0)

    def auc(self, strategy, model):
        return trapezoid_auc(*self.mean_curve(strategy, model))

    def curve_rows(self):
        for strategy in self.strategies:
            for model in self.models:
                for run in self._runs(strategy):
                    for b, (n, f) in enumerate(zip(run.n_labeled, run.f1[model])):
                        yield [self.dataset, strategy, model, run.repetition, b, n, f]

    def bias_rows(self):
        for strategy in self.strategies:
            for run in self._runs(strategy):
                for b, v in enumerate(run.bias):
                    yield [self.dataset, strategy, run.repetition, b, v]

    def sdcc_rows(self):
        for strategy in self.strategies:
            for run in self._runs(strategy):
                for b, (su, sq) in enumerate(zip(run.sdcc_unlabeled, run.sdcc_query_pool)):
                    for t, (a, c) in enumerate(zip(su, sq), start=1):
                        yield [self.dataset, strategy, run.repetition, b, t, a, c]


# --- running -----------------------------------------------------------------

def _resolve_batches(config, pools):
    n_query = pools.unlabeled.size
    count = config.batch_count
    if count is None:
        count = n_query // config.batch_size
        if count < 1:
            count = 1
    if count * config.batch_size > n_query:
        warnings.warn(
            f"{count} batches of {config.batch_size} exceed the {n_query}-row query pool; "
            "curves will be truncated at pool exhaustion", RuntimeWarning, stacklevel=3)
    return count


class _Trajectory:
    """State of one (strategy, repetition) run."""

    def __init__(self, dataset, config, pools, strategy, repetition, similarity):
        self.ds = dataset
        self.cfg = config
        self.pools = pools
        self.strategy = strategy
        self.rng = np.random.default_rng(config.seed + repetition)
        self.similarity = similarity
        self.query_pool = pools.unlabeled.copy()
        self.levels = min(config.max_level, dataset.n_features)
        self.record = RunRecord(strategy, repetition,
                                initial=pools.labeled.tolist(), test=pools.test.tolist())
        self.record.f1 = {m.label: [] for m in config.models}
        self.density = None
        if strategy in COVERAGE_STRATEGIES:
            self.density = CoverageDensity(max_level=config.max_level,
                                           n_values=dataset.cardinalities)
            self.density.fit(dataset.rows[pools.labeled])
        self.fitted = {}

    def _fit(self, spec, seed):
        X = self.ds.rows[self.pools.labeled]
        y = self.ds.labels[self.pools.labeled]
        return train(spec.with_seed(seed), X, y, self.ds.cardinalities, self.ds.n_classes)

    def evaluate(self):
        step_seed = int(self.rng.integers(0, 2 ** 31 - 1))
        Xt = self.ds.rows[self.pools.test]
        yt = self.ds.labels[self.pools.test]
        self.fitted = {}
        for j, spec in enumerate(self.cfg.models):
            model = self._fit(spec, step_seed + j)
            self.fitted[spec.label] = model
            if Xt.shape[0]:
                f1 = macro_f1(model.predict(Xt), yt, self.ds.n_classes)
            else:
                f1 = float("nan")
            self.record.f1[spec.label].append(f1)
        if self.cfg.sampling_model.label not in self.fitted:
            self.fitted[self.cfg.sampling_model.label] = self._fit(
                self.cfg.sampling_model, step_seed + len(self.cfg.models))
        self._committee_seed = step_seed + len(self.cfg.models) + 1
        rec = self.record
        rec.n_labeled.append(int(self.pools.labeled.size))
        rec.bias.append(sampling_bias(self.ds.labels[self.pools.labeled], self.ds.n_classes)
                        if self.ds.n_classes >= 2 else 0.0)
        rec.disjoint = rec.disjoint and self.pools.is_disjoint(self.ds.n_rows)
        if self.cfg.track_sdcc:
            L = self.ds.rows[self.pools.labeled]
            Q = self.ds.rows[self.query_pool]
            U = self.ds.rows[self.pools.unlabeled]
            levels = range(1, self.levels + 1)
            rec.sdcc_query_pool.append([sdcc(Q, L, t) for t in levels])
            rec.sdcc_unlabeled.append(
                [sdcc(U, L, t) for t in levels] if U.shape[0] else [0.0] * self.levels)

    def step(self):
        pools = self.pools
        cand = self.ds.rows[pools.unlabeled]
        ctx = QueryContext(candidates=cand, batch_size=self.cfg.batch_size, rng=self.rng)
        sampler = self.fitted[self.cfg.sampling_model.label]
        if self.strategy in ("uncertainty", "info_density", "uswcd"):
            ctx.model = sampler
        if self.strategy == "qbc":
            committee = []
            for j, spec in enumerate(self.cfg.committee):
                reuse = self.fitted.get(spec.label)
                if reuse is not None and reuse.spec.family == spec.family \
                        and reuse.spec.hyperparameters == spec.hyperparameters:
                    committee.append(reuse)
                else:
                    committee.append(self._fit(spec, self._committee_seed + j))
            ctx.committee = committee
        if self.strategy in ("info_density", "icds"):
            ctx.similarity = self.similarity[pools.unlabeled]
        if self.density is not None:
            ctx.density = self.density.score_samples(cand)
        positions, _, fallback = query(self.strategy, ctx)
        moved = pools.label(positions)
        if self.density is not None:
            self.density.partial_fit(self.ds.rows[moved])
        self.record.selected.append(moved.tolist())
        self.record.fallbacks.append(fallback)


def run_experiment(config: ExperimentConfig, dataset: Optional[Dataset] = None) -> ExperimentResult:
    """Run every strategy for every repetition on one dataset."""
    if dataset is None:
        if config.source is None:
            raise ValueError("config has no data source and no dataset was given")
        dataset = config.source.load()
    name = config.dataset_name or dataset.name or "dataset"
    config.dataset_name = name

    def pools_for(rep):
        seed = config.split.seed + (rep if config.resplit_each_repetition else 0)
        spec = SplitSpec(config.split.test_fraction, config.split.initial_fraction,
                         seed, config.split.pre_split_test)
        return split_pools(dataset, spec)

    base = pools_for(0)
    batches = _resolve_batches(config, base)
    reference = np.concatenate([base.labeled, base.unlabeled])
    similarity = np.zeros(dataset.n_rows)
    similarity_needed = any(s in ("info_density", "icds") for s in config.strategies)

    runs = []
    for rep in range(config.repetitions):
        rep_pools = pools_for(rep) if config.resplit_each_repetition else base
        if similarity_needed:
            reference = np.concatenate([rep_pools.labeled, rep_pools.unlabeled])
            similarity = np.zeros(dataset.n_rows)
            similarity[reference] = categorical_similarity_sums(
                dataset.rows[reference], dataset.rows[reference], dataset.cardinalities)
        for strategy in config.strategies:
            traj = _Trajectory(dataset, config, rep_pools.copy(), strategy, rep, similarity)
            traj.evaluate()
            for b in range(batches):
                if traj.pools.unlabeled.size == 0:
                    warnings.warn(f"{name}/{strategy}/rep{rep}: query pool exhausted after "
                                  f"{b} batches", RuntimeWarning, stacklevel=2)
                    break
                traj.step()
                traj.evaluate()
            log.info("%s %s rep=%d final f1=%s", name, strategy, rep,
                     {k: round(v[-1], 4) for k, v in traj.record.f1.items()})
            runs.append(traj.record)
    return ExperimentResult(name, config, runs, dataset.n_classes, config.sampling_model.label)


# --- summary -----------------------------------------------------------------

def _curve_table(curve_rows):
    """``{(dataset, strategy, model): {repetition: [(batch, n_labeled, f1), ...]}}``"""
    table = {}
    for ds, strat, model, rep, batch, n, f1 in curve_rows:
        table.setdefault((ds, strat, model), {}).setdefault(int(rep), []).append(
            (int(batch), int(n), float(f1)))
    return table


def _mean_curve(reps):
    series = [sorted(points) for _, points in sorted(reps.items())]
    length = min(len(s) for s in series)
    n0 = series[0][0][1]
    x = np.asarray([p[1] - n0 for p in series[0][:length]], dtype=np.float64)
    Y = np.asarray([[p[2] for p in s[:length]] for s in series])
    return x, Y


def _pct(a, ref):
    return 100.0 * (a - ref) / ref if ref else float("nan")


def summarize(curve_rows, bias_rows=(), original_model="rf5", transfer_threshold=0.05):
    """Aggregate learning curves into comparison tables.

    Parameters
    ----------
    curve_rows : iterable of ``CURVE_COLUMNS`` rows (possibly several datasets).
    bias_rows : iterable of ``BIAS_COLUMNS`` rows.
    original_model : label of the model used for sampling.
    transfer_threshold : minimum relative gain of a transfer model's final
        F1 over the original model's (both under random sampling) for the
        dataset/model cell to enter ``pct_diff_from_random``.
    """
    table = _curve_table(curve_rows)
    if not table:
        raise ValueError("no learning-curve rows to summarise")
    datasets = sorted({k[0] for k in table})
    strategies = sorted({k[1] for k in table}, key=lambda s: (STRATEGY_ORDER.get(s, 99), s))
    models = sorted({k[2] for k in table}, key=lambda m: (m != original_model, m))

    auc, auc_runs, final_f1 = {}, {}, {}
    for (ds, strat, model), reps in sorted(table.items()):
        x, Y = _mean_curve(reps)
        auc.setdefault(ds, {}).setdefault(model, {})[strat] = trapezoid_auc(x, Y.mean(axis=0))
        auc_runs.setdefault(ds, {}).setdefault(model, {})[strat] = float(
            np.mean([trapezoid_auc(x, row) for row in Y]))
        final_f1.setdefault(ds, {}).setdefault(model, {})[strat] = float(Y[:, -1].mean())

    pct_best = {}
    for ds in datasets:
        cell = auc[ds].get(original_model)
        if not cell:
            continue
        best = max(cell.values())
        pct_best[ds] = {s: _pct(v, best) for s, v in cell.items()}

    gains, pct_random = {}, {}
    for ds in datasets:
        base_final = final_f1[ds].get(original_model, {}).get("random")
        for model in models:
            if model == original_model or "random" not in auc[ds].get(model, {}):
                continue
            new_final = final_f1[ds][model]["random"]
            gain = (new_final - base_final) / base_final if base_final else float("nan")
            gated = bool(np.isfinite(gain) and gain >= transfer_threshold)
            gains.setdefault(ds, {})[model] = {
                "original_final_f1": base_final, "transfer_final_f1": new_final,
                "relative_gain": gain, "gated": gated}
            if gated:
                ref = auc[ds][model]["random"]
                pct_random.setdefault(ds, {})[model] = {
                    s: _pct(v, ref) for s, v in auc[ds][model].items()}

    normalized, median_norm = {}, {}
    for model in models:
        per_strategy = {s: [] for s in strategies}
        for ds in datasets:
            cell = auc[ds].get(model)
            if not cell or len(cell) < 2:
                continue
            names = sorted(cell, key=lambda s: (STRATEGY_ORDER.get(s, 99), s))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                vals = min_max_normalize([cell[s] for s in names])
            normalized.setdefault(ds, {})[model] = dict(zip(names, vals.tolist()))
            for s, v in zip(names, vals):
                per_strategy[s].append(float(v))
        median_norm[model] = {s: float(np.median(v)) for s, v in per_strategy.items() if v}

    bias = {}
    bias_table = {}
    for ds, strat, rep, batch, value in bias_rows:
        bias_table.setdefault((ds, strat, int(batch)), []).append(float(value))
    for (ds, strat, batch), vals in sorted(bias_table.items()):
        entry = bias.setdefault(strat, {"values": [], "final": {}})
        entry["values"].append(float(np.mean(vals)))
        last = entry["final"].get(ds)
        if last is None or batch >= last[0]:
            entry["final"][ds] = (batch, float(np.mean(vals)))
    for strat, entry in bias.items():
        entry["median"] = float(np.median(entry["values"]))
        entry["final"] = {ds: v for ds, (_, v) in sorted(entry["final"].items())}

    return {
        "original_model": original_model,
        "datasets": datasets,
        "strategies": strategies,
        "models": models,
        "auc": auc,
        "auc_mean_of_runs": auc_runs,
        "final_f1": final_f1,
        "pct_diff_from_best": pct_best,
        "transfer_gain": gains,
        "pct_diff_from_random": pct_random,
        "normalized_auc": normalized,
        "median_normalized_auc": median_norm,
        "sampling_bias": bias,
    }


STRATEGY_ORDER = {s: i for i, s in enumerate(
    ("random", "uncertainty", "qbc", "info_density", "cds", "icds", "uswcd"))}


# --- files -------------------------------------------------------------------

def _write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def emit_outputs(results: Sequence[ExperimentResult], out_dir, report=None):
    """Write learning curves, sampling bias, SDCC traces, summary and config.

    Returns the paths written.
    """
    results = list(results)
    if not results:
        raise ValueError("no results to write")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    curve_rows = [r for res in results for r in res.curve_rows()]
    bias_rows = [r for res in results for r in res.bias_rows()]
    if report is None:
        report = summarize(curve_rows, bias_rows, original_model=results[0].original_model)
    paths = {
        "learning_curves": out / "learning_curves.csv",
        "sampling_bias": out / "sampling_bias.csv",
        "sdcc": out / "sdcc.csv",
        "summary": out / "summary.json",
        "config": out / "config.json",
    }
    _write_csv(paths["learning_curves"], CURVE_COLUMNS, curve_rows)
    _write_csv(paths["sampling_bias"], BIAS_COLUMNS, bias_rows)
    _write_csv(paths["sdcc"], SDCC_COLUMNS, [r for res in results for r in res.sdcc_rows()])
    paths["summary"].write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    configs = {
        "original_model": results[0].original_model,
        "experiments": [res.config.to_dict() for res in results],
    }
    paths["config"].write_text(json.dumps(configs, indent=2, sort_keys=True) + "\n")
    return paths


def read_outputs(in_dir):
    """Rebuild a summary from ``learning_curves.csv`` (and ``sampling_bias.csv`` when present)."""
    d = Path(in_dir)
    curves = d / "learning_curves.csv"
    if not curves.exists():
        raise FileNotFoundError(f"{curves} not found")
    with open(curves, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        curve_rows = [[r["dataset"], r["strategy"], r["model"], int(r["repetition"]),
                       int(r["batch"]), int(r["n_labeled"]), float(r["f1"])] for r in reader]
    bias_rows = []
    if (d / "sampling_bias.csv").exists():
        with open(d / "sampling_bias.csv", newline="", encoding="utf-8") as fh:
            bias_rows = [[r["dataset"], r["strategy"], int(r["repetition"]), int(r["batch"]),
                          float(r["bias"])] for r in csv.DictReader(fh)]
    original = "rf5"
    if (d / "config.json").exists():
        original = json.loads((d / "config.json").read_text()).get("original_model", original)
    return summarize(curve_rows, bias_rows, original_model=original)
