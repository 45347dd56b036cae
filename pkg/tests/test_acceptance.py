"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -s`` (or ``python
tests/test_acceptance.py``); the lines are also repeated in the pytest
terminal summary. Tolerances are pinned here, next to each check.
"""
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from covactive.coverage import CoverageDensity, coverage_density, sdcc
from covactive.dataset import SplitSpec, load_dataset, split_pools
from covactive.harness import ExperimentConfig, emit_outputs, run_experiment, summarize
from covactive.metrics import macro_f1, precision_recall_f1, sampling_bias, trapezoid_auc
from covactive.models import parse_model, train
from covactive.presets import get_preset
from covactive.strategies import QueryContext, query, select_batch
from oracles import density_oracle_np, random_table, sdcc_oracle

DATA = Path(__file__).resolve().parents[1] / "data"

EXACT_TOL = 1e-12
BIAS_TOL = 1e-4
CORPUS_SIZE = 200
ORACLE_BUDGET_S = 60.0
LOOP_BUDGET_S = 15 * 60.0
F1_GAP = 0.05
CHESS_BUDGET_S = 5.0

RESULTS = []


def report(criterion, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def note(criterion, detail):
    line = f"[INFO] criterion {criterion}: {detail}"
    RESULTS.append(line)
    print(line)


def _corpus():
    rng = np.random.default_rng(2024)
    return [random_table(rng) for _ in range(CORPUS_SIZE)]


@pytest.fixture(scope="module")
def corpus():
    return _corpus()


def _load(name):
    p = get_preset(name)
    path = DATA / p.filename
    if not path.exists():
        return None
    test = DATA / p.test_filename if p.test_filename else None
    return load_dataset(path, test_path=test, **p.load_options())


def test_c1_density_matches_brute_force(corpus):
    worst, spent = 0.0, 0.0
    for _, L, U in corpus:
        T = min(6, U.shape[1])
        ref = np.array([float(x) for x in density_oracle_np(L, U, T)])
        start = time.perf_counter()
        got = coverage_density(L, U, T)
        spent += time.perf_counter() - start
        worst = max(worst, float(np.max(np.abs(got - ref))))
    report(1, worst <= EXACT_TOL and spent < ORACLE_BUDGET_S,
           f"max |delta| = {worst:.1e} (<= {EXACT_TOL}) over {CORPUS_SIZE} datasets; "
           f"implementation time {spent:.2f}s (< {ORACLE_BUDGET_S:.0f}s)")


def test_c2_sdcc_matches_oracle_and_identities(corpus):
    worst = 0.0
    identities = True
    for _, L, U in corpus:
        empty = np.empty((0, U.shape[1]), dtype=np.int64)
        for t in range(1, min(6, U.shape[1]) + 1):
            ref = float(sdcc_oracle(U, L, t))
            worst = max(worst, abs(sdcc(U, L, t) - ref))
            identities &= sdcc(U, U, t) == 0.0 and sdcc(U, empty, t) == 1.0
    report("2a", worst <= EXACT_TOL and identities,
           f"sdcc vs set-enumeration oracle max |delta| = {worst:.1e}; "
           f"sdcc(U,U)=0 and sdcc(U,empty)=1 at every level: {identities}")


def test_c2_sdcc_non_increasing_when_rows_move_to_labeled(corpus):
    """Literal monotonicity: move rows one at a time from U into L and track sdcc(U', L')."""
    rng = np.random.default_rng(7)
    violations, checked, example = 0, 0, None
    for _, L, U in corpus[:60]:
        k = U.shape[1]
        levels = range(1, min(6, k) + 1)
        L, U = L.copy(), U.copy()
        prev = [sdcc(U, L, t) for t in levels]
        while U.shape[0] > 1:
            i = int(rng.integers(U.shape[0]))
            L = np.vstack([L, U[i:i + 1]])
            U = np.delete(U, i, axis=0)
            cur = [sdcc(U, L, t) for t in levels]
            checked += 1
            if any(c > p + EXACT_TOL for c, p in zip(cur, prev)):
                violations += 1
                if example is None:
                    example = (prev, cur)
            prev = cur
    # the smallest instance: one feature, L={a}, U={a,b}; moving a gives 1/2 -> 1
    tiny = (sdcc(np.array([[0], [1]]), np.array([[0]]), 1), sdcc(np.array([[1]]), np.array([[0], [0]]), 1))
    report("2b", violations == 0,
           f"{violations} of {checked} U->L moves raised sdcc(U',L') at some level "
           f"(e.g. one feature, L={{a}}, U={{a,b}}, move a: {tiny[0]} -> {tiny[1]})")


def test_c3_micro_case():
    L = np.array([[0, 0, 0]])
    U = np.array([[0, 0, 1], [1, 1, 1]])
    d = coverage_density(L, U, 3)
    s = sdcc(U, L, 1)
    ok = (abs(d[0] - 7 / 3) <= EXACT_TOL and abs(d[1] - 29 / 6) <= EXACT_TOL
          and Fraction(s).limit_denominator(1000) == Fraction(3, 5) and abs(s - 0.6) <= EXACT_TOL)
    report(3, ok, f"densities ({d[0]:.12f}, {d[1]:.12f}) vs (7/3, 29/6); SDCC^1 = {s}")


def test_c4_metrics():
    checks = {
        "auc constant": trapezoid_auc(np.arange(0, 801, 100), np.ones(9)) - 800,
        "auc linear": trapezoid_auc([(0, 0), (100, 1)]) - 50,
        "auc triangle": trapezoid_auc([(0, 0), (1, 1), (2, 0)]) - 1,
        "bias balanced": sampling_bias([0, 1, 0, 1], 2) - 0.0,
        "bias single class": sampling_bias([1, 1, 1], 2) - 1.0,
        "f1 perfect": macro_f1([0, 1, 1], [0, 1, 1]) - 1.0,
        "f1 binary": precision_recall_f1([1, 1, 0, 0], [1, 0, 1, 0]).f1[1] - 0.5,
        "f1 constant": macro_f1([0, 0, 0, 0], [0, 0, 1, 1]) - 1 / 3,
    }
    exact = all(abs(v) <= EXACT_TOL for v in checks.values())
    bias31 = sampling_bias([0, 0, 0, 1], 2)
    ok = exact and abs(bias31 - 0.1887) <= BIAS_TOL
    report(4, ok, f"{len(checks)} closed forms within {EXACT_TOL}: {exact}; "
                  f"bias(3,1) = {bias31:.6f} (0.1887 +/- {BIAS_TOL})")


class _Proba:
    def __init__(self, p):
        self.p = p

    def predict_proba(self, X):
        return self.p


def test_c5_strategy_properties():
    rng = np.random.default_rng(99)
    same = 0
    for _ in range(100):
        n = int(rng.integers(2, 80))
        p = rng.dirichlet(np.ones(int(rng.integers(2, 5))), size=n)
        b = int(rng.integers(1, n + 1))
        ctx = QueryContext(np.zeros((n, 3), dtype=int), b, model=_Proba(p),
                           density=np.full(n, float(rng.uniform(0.01, 20))))
        same += set(query("uswcd", ctx)[0].tolist()) == set(query("uncertainty", ctx)[0].tolist())

    sel_ok = True
    for _ in range(200):
        s = rng.integers(-3, 4, size=int(rng.integers(1, 40))).astype(float)
        b = int(rng.integers(1, 50))
        picked = select_batch(s, b)
        sel_ok &= picked.size == min(b, s.size)
        sel_ok &= np.array_equal(picked, select_batch(np.tanh(s) * 5 + 2, b))
        order = sorted(range(s.size), key=lambda i: (-s[i], i))[:b]
        sel_ok &= picked.tolist() == order

    mass_ok, batches = True, 0
    for _ in range(60):
        k = int(rng.integers(1, 6))
        card = int(rng.integers(2, 4))
        L = rng.integers(0, card, size=(int(rng.integers(0, 3)), k))
        U = rng.integers(0, card, size=(int(rng.integers(5, 40)), k))
        b = int(rng.integers(1, 6))
        d = coverage_density(L, U, 6)
        while U.shape[0] and d.sum() > 0:
            picked = query("cds", QueryContext(U, b, rng=rng, density=d))[0]
            L, U = np.vstack([L, U[picked]]), np.delete(U, picked, axis=0)
            new = coverage_density(L, U, 6) if U.shape[0] else np.zeros(0)
            mass_ok &= new.sum() < d.sum()
            batches += 1
            d = new
    report(5, same == 100 and sel_ok and mass_ok,
           f"uswcd==uncertainty selections {same}/100; select_batch budget/tie-break/"
           f"monotone checks {sel_ok}; missing mass strictly fell in all {batches} cds batches: {mass_ok}")


ALL = ["random", "uncertainty", "qbc", "info_density", "cds", "icds", "uswcd"]


def _preset_config(name, seed=0):
    p = get_preset(name)
    return ExperimentConfig(strategies=ALL, batch_size=p.batch_size, batch_count=p.batch_count,
                            repetitions=3, models=["rf5", "dt", "svm"], seed=seed,
                            split=SplitSpec(seed=seed), dataset_name=p.name)


@pytest.fixture(scope="module")
def loop_runs(tmp_path_factory):
    out = {}
    start = time.perf_counter()
    for name in ("tic-tac-toe", "balance-scale"):
        ds = _load(name)
        assert ds is not None, f"missing data file for {name}; run `covactive generate-data`"
        out[name] = (ds, run_experiment(_preset_config(name), ds))
    elapsed = time.perf_counter() - start
    return out, elapsed


def test_c6_loop_invariants(loop_runs, tmp_path):
    runs, elapsed = loop_runs
    disjoint = lengths = True
    for name, (ds, res) in runs.items():
        want = get_preset(name).batch_count + 1
        for r in res.runs:
            disjoint &= r.disjoint
            lengths &= all(len(v) == want for v in r.f1.values()) and len(r.n_labeled) == want
    again = {name: run_experiment(_preset_config(name), ds) for name, (ds, _) in runs.items()}
    first = emit_outputs([res for _, res in runs.values()], tmp_path / "first")
    second = emit_outputs(list(again.values()), tmp_path / "second")
    identical = all(first[k].read_bytes() == second[k].read_bytes() for k in first)
    report("6a", disjoint and lengths and identical and elapsed < LOOP_BUDGET_S,
           f"tic-tac-toe + balance-scale, 3 reps x 7 strategies x 3 models: pools disjoint "
           f"{disjoint}; curve lengths = batches+1 {lengths}; bitwise-identical rerun {identical}; "
           f"full run {elapsed:.0f}s (< {LOOP_BUDGET_S:.0f}s)")


def test_c6_sdcc_non_increasing_for_coverage_strategies(loop_runs):
    runs, _ = loop_runs
    breaks, pool_ok, traces = [], True, 0
    for name, (_, res) in runs.items():
        for r in res.runs:
            if r.strategy not in ("cds", "icds", "uswcd"):
                continue
            traces += 1
            lit = np.diff(np.array(r.sdcc_unlabeled), axis=0)
            if np.any(lit > EXACT_TOL):
                b, t = np.argwhere(lit > EXACT_TOL)[0]
                breaks.append(f"{name}/{r.strategy}/rep{r.repetition} level {t + 1} "
                              f"batch {b}->{b + 1}: {r.sdcc_unlabeled[b][t]:.8f}->"
                              f"{r.sdcc_unlabeled[b + 1][t]:.8f}")
            pool_ok &= not np.any(np.diff(np.array(r.sdcc_query_pool), axis=0) > EXACT_TOL)
    note("6b", f"SDCC(initial query pool, labeled) non-increasing in all {traces} traces: {pool_ok}")
    report("6b", not breaks,
           f"SDCC(unlabeled, labeled) non-increasing in {traces - len(breaks)}/{traces} coverage-"
           f"strategy traces{'; first break ' + breaks[0] if breaks else ''}")


def test_c7_learning_curve_sanity(loop_runs):
    runs, _ = loop_runs
    ds, res = runs["tic-tac-toe"]
    pools = split_pools(ds, SplitSpec(seed=0))
    idx = np.concatenate([pools.labeled, pools.unlabeled])
    full = np.mean([
        macro_f1(train(parse_model("rf5").with_seed(s), ds.rows[idx], ds.labels[idx],
                       ds.cardinalities, ds.n_classes).predict(ds.rows[pools.test]),
                 ds.labels[pools.test], ds.n_classes)
        for s in range(3)])
    lines, ok = [], True
    for strategy in ALL:
        _, y = res.mean_curve(strategy, "rf5")
        close = abs(y[-1] - full) <= F1_GAP
        beats = y[-1] > y[0]
        ok &= close and beats
        lines.append(f"{strategy} {y[0]:.3f}->{y[-1]:.3f}")
    report(7, ok, f"full-pool rf5 F1 {full:.3f} (+/- {F1_GAP}); " + ", ".join(lines))


def test_c8_uswcd_rank_on_transfer_tree(loop_runs):
    runs, _ = loop_runs
    results = [res for _, res in runs.values()]
    car = _load("car")
    if car is not None:
        results.append(run_experiment(_preset_config("car"), car))
    rows = [r for res in results for r in res.curve_rows()]
    med = summarize(rows)["median_normalized_auc"]["dt"]
    ranking = sorted(med, key=lambda s: -med[s])
    rank = ranking.index("uswcd") + 1
    names = ", ".join(res.dataset for res in results)
    note(8, f"non-gating: uswcd median normalized AUC on dt = {med['uswcd']:.3f}, rank {rank}/7 "
            f"(top 2: {'yes' if rank <= 2 else 'no'}) over {names}"
            f"{'' if car is not None else ' (car.data absent)'}; order: {', '.join(ranking)}")


def test_c9_chess_density_pass():
    ds = _load("chess")
    assert ds is not None, "missing krkopt.data; run `covactive generate-data`"
    pools = split_pools(ds, SplitSpec(seed=0))
    L, U = ds.rows[pools.labeled], ds.rows[pools.unlabeled]
    start = time.perf_counter()
    dens = CoverageDensity(max_level=6, n_values=ds.cardinalities).fit(L).score_samples(U)
    elapsed = time.perf_counter() - start
    report(9, elapsed < CHESS_BUDGET_S and dens.shape == (U.shape[0],),
           f"{U.shape[0]} query rows, {L.shape[0]} labeled, k={ds.n_features}, T=6: "
           f"{elapsed:.2f}s (< {CHESS_BUDGET_S:.0f}s)")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-s", "-q"]))
