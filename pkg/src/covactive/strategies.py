"""Query strategies: score the unlabeled pool and pick a batch.

Strategy tokens
---------------
``random``        uniform draws
``uncertainty``   entropy of the sampling model
``qbc``           mean entropy over a committee
``info_density``  entropy times mean cosine similarity to the reference rows
``cds``           coverage density
``icds``          coverage density times mean cosine similarity
``uswcd``         entropy times coverage density
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

__all__ = [
    "STRATEGIES",
    "COVERAGE_STRATEGIES",
    "STRATEGY_NAMES",
    "QueryContext",
    "entropy",
    "entropies",
    "cosine_similarity",
    "similarity_sums",
    "categorical_similarity_sums",
    "score_candidates",
    "select_batch",
    "query",
    "normalize_strategy",
]

STRATEGIES = ("random", "uncertainty", "qbc", "info_density", "cds", "icds", "uswcd")
COVERAGE_STRATEGIES = ("cds", "icds", "uswcd")
STRATEGY_NAMES = {
    "random": "Random Sampling",
    "uncertainty": "Uncertainty Sampling",
    "qbc": "Query by Committee",
    "info_density": "Information Density Sampling",
    "cds": "Coverage Density Sampling",
    "icds": "Informative Coverage Density Sampling",
    "uswcd": "USWCD",
}
_ALIASES = {
    "random_sampling": "random",
    "uncertainty_sampling": "uncertainty",
    "query_by_committee": "qbc",
    "information_density": "info_density",
    "coverage_density": "cds",
    "informative_coverage_density": "icds",
}


def normalize_strategy(name):
    key = str(name).strip().lower().replace("-", "_")
    key = _ALIASES.get(key, key)
    if key not in STRATEGIES:
        raise ValueError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGIES)}")
    return key


def entropy(dist):
    """Natural-log entropy of one class distribution (``0 log 0 = 0``)."""
    p = np.asarray(dist, dtype=np.float64)
    p = p[p > 0]
    return float(-(p * np.log(p)).sum()) if p.size else 0.0


def entropies(proba):
    """Row-wise :func:`entropy` of a probability matrix."""
    P = np.asarray(proba, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log(np.where(P > 0, P, 1.0)), 0.0)
    return np.maximum(-terms.sum(axis=1), 0.0)


def cosine_similarity(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("vectors differ in dimension")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("cosine similarity of a zero vector")
    return float(a @ b / (na * nb))


def similarity_sums(candidates, reference):
    """``sum_x cos(x, c)`` over reference rows *x* for each candidate *c* (dense vectors)."""
    C = np.asarray(candidates, dtype=np.float64)
    R = np.asarray(reference, dtype=np.float64)
    cn = np.linalg.norm(C, axis=1)
    rn = np.linalg.norm(R, axis=1)
    if np.any(cn == 0) or np.any(rn == 0):
        raise ValueError("cosine similarity of a zero vector")
    return (C / cn[:, None]) @ (R / rn[:, None]).sum(axis=0)


def categorical_similarity_sums(candidates, reference, cardinalities):
    """:func:`similarity_sums` of the one-hot encodings, from value frequencies.

    For one-hot rows the cosine is the fraction of features on which the two
    rows agree, so the sum over the reference set is
    ``sum_f freq_f[c_f] / k``.
    """
    C = np.asarray(candidates, dtype=np.int64)
    R = np.asarray(reference, dtype=np.int64)
    k = C.shape[1]
    total = np.zeros(C.shape[0])
    for f, card in enumerate(cardinalities):
        freq = np.bincount(R[:, f], minlength=int(card) + 1).astype(np.float64)
        col = np.minimum(C[:, f], freq.size - 1)
        total += np.where(C[:, f] < freq.size, freq[col], 0.0)
    return total / k


@dataclass
class QueryContext:
    """Everything a strategy may need for one batch.

    ``candidates`` are the unlabeled rows in pool order; ``density`` and
    ``similarity`` are aligned with them. ``similarity`` holds the summed
    cosine similarity of each candidate to the reference set, before the
    ``1/U`` factor.
    """

    candidates: np.ndarray
    batch_size: int
    rng: Optional[np.random.Generator] = None
    density: Optional[np.ndarray] = None
    model: Optional[object] = None
    committee: List[object] = field(default_factory=list)
    similarity: Optional[np.ndarray] = None

    @property
    def n_unlabeled(self):
        return int(np.asarray(self.candidates).shape[0])


def _require(ctx, strategy, attr, what):
    val = getattr(ctx, attr)
    if val is None or (isinstance(val, list) and not val):
        raise ValueError(f"strategy {strategy!r} requires {what}")
    return val


def _model_entropy(model, candidates):
    return entropies(model.predict_proba(candidates))


def score_candidates(strategy, ctx: QueryContext):
    """Informativeness of every unlabeled candidate under *strategy*."""
    strategy = normalize_strategy(strategy)
    n = ctx.n_unlabeled
    if strategy == "random":
        rng = _require(ctx, strategy, "rng", "a random generator")
        return rng.random(n)
    if strategy == "uncertainty":
        model = _require(ctx, strategy, "model", "a fitted sampling model")
        return _model_entropy(model, ctx.candidates)
    if strategy == "qbc":
        committee = _require(ctx, strategy, "committee", "a committee of fitted models")
        return np.mean([_model_entropy(m, ctx.candidates) for m in committee], axis=0)
    if strategy == "info_density":
        model = _require(ctx, strategy, "model", "a fitted sampling model")
        sim = _require(ctx, strategy, "similarity", "similarity sums")
        return _model_entropy(model, ctx.candidates) * np.asarray(sim) / n
    density = np.asarray(_require(ctx, strategy, "density", "coverage densities"), dtype=np.float64)
    if density.shape != (n,):
        raise ValueError("density vector is not aligned with the candidates")
    if strategy == "cds":
        return density.copy()
    if strategy == "icds":
        sim = _require(ctx, strategy, "similarity", "similarity sums")
        return density * np.asarray(sim) / n
    model = _require(ctx, strategy, "model", "a fitted sampling model")
    return _model_entropy(model, ctx.candidates) * density


def select_batch(scores, b):
    """Pool positions of the ``min(b, n)`` highest scores.

    Ties go to the lower position; the result is in selection order.
    """
    if b < 1:
        raise ValueError("budget must be >= 1")
    s = np.asarray(scores, dtype=np.float64)
    if s.size == 0:
        return np.empty(0, dtype=np.int64)
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    order = np.lexsort((np.arange(s.size), -s))
    return order[: min(int(b), s.size)].astype(np.int64)


def query(strategy, ctx: QueryContext):
    """Score, apply the degenerate-score fallback, and select a batch.

    When every score is zero the ranking carries no information:
    ``uswcd`` falls back to coverage density, and every other strategy
    (or ``uswcd`` with zero density too) to seeded uniform draws.

    Returns ``(positions, scores_used, fallback)`` where ``fallback`` is
    ``None`` or the name of the ordering that was substituted.
    """
    strategy = normalize_strategy(strategy)
    scores = score_candidates(strategy, ctx)
    fallback = None
    if scores.size and strategy != "random" and not np.any(scores > 0):
        if strategy == "uswcd" and np.any(np.asarray(ctx.density) > 0):
            scores, fallback = np.asarray(ctx.density, dtype=np.float64), "cds"
        else:
            rng = _require(ctx, strategy, "rng", "a random generator for the fallback")
            scores, fallback = rng.random(scores.size), "random"
    return select_batch(scores, ctx.batch_size), scores, fallback
