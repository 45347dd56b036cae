"""t-way interaction inventories, combinatorial coverage, SDCC and coverage density.

An interaction at level *t* is a sorted tuple of ``(feature, value)`` pairs
over *t* distinct features. Two code paths exist:

* a small pure-Python API (:func:`enumerate_interactions`,
  :func:`build_inventory`) that materialises interaction tuples, and
* a vectorised path used by :func:`sdcc`, :func:`combinatorial_coverage`
  and :class:`CoverageDensity`, which packs each interaction into one
  integer code per feature subset (mixed radix) and tests membership with
  sorted searches.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import FrozenSet, Tuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

__all__ = [
    "Interaction",
    "InteractionInventory",
    "enumerate_interactions",
    "build_inventory",
    "combinatorial_coverage",
    "sdcc",
    "sdcc_profile",
    "coverage_density",
    "CoverageDensity",
    "DEFAULT_MAX_LEVEL",
]

DEFAULT_MAX_LEVEL = 6

Interaction = Tuple[Tuple[int, int], ...]

_CODE_LIMIT = 2 ** 62


@dataclass(frozen=True)
class InteractionInventory:
    """Distinct level-*t* interactions found in ``source_count`` rows."""

    level: int
    interactions: FrozenSet[Interaction]
    source_count: int

    def __len__(self):
        return len(self.interactions)

    def __contains__(self, item):
        return item in self.interactions

    def __iter__(self):
        return iter(sorted(self.interactions))


def _as_rows(rows, n_features=None):
    arr = np.asarray(rows, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr.reshape(0, n_features or 0) if arr.size == 0 else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError("rows must be a 2-D array of value indices")
    if arr.size and arr.min() < 0:
        raise ValueError("value indices must be non-negative")
    return arr


def _check_level(t, k):
    if not isinstance(t, (int, np.integer)) or t < 1 or t > k:
        raise ValueError(f"interaction level must satisfy 1 <= t <= {k}, got {t}")
    return int(t)


def enumerate_interactions(row, t):
    """All C(k, t) interactions carried by a single row."""
    row = [int(v) for v in row]
    t = _check_level(t, len(row))
    return {tuple((f, row[f]) for f in subset)
            for subset in itertools.combinations(range(len(row)), t)}


def build_inventory(rows, t, n_features=None):
    """Deduplicated union of :func:`enumerate_interactions` over *rows*."""
    arr = _as_rows(rows, n_features)
    t = _check_level(t, arr.shape[1])
    found = set()
    for row in arr.tolist():
        found.update(enumerate_interactions(row, t))
    return InteractionInventory(level=t, interactions=frozenset(found), source_count=arr.shape[0])


# --- vectorised interaction codes -------------------------------------------

def _subset_strides(radix, subset):
    strides = []
    acc = 1
    for f in subset:
        strides.append(acc)
        acc *= int(radix[f])
    if acc >= _CODE_LIMIT:
        raise ValueError(
            f"interaction code space for features {subset} exceeds 62 bits; "
            "lower the interaction level")
    return np.asarray(strides, dtype=np.int64)


def _codes(rows, subset, radix):
    if rows.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    return rows[:, list(subset)] @ _subset_strides(radix, subset)


def _shared_radix(*arrays):
    k = max(a.shape[1] for a in arrays)
    radix = np.ones(k, dtype=np.int64)
    for a in arrays:
        if a.shape[0]:
            radix = np.maximum(radix, a.max(axis=0) + 1)
    return radix


def _level_sets(u, l, t):
    """Per-subset distinct codes of *u* and whether each is absent from *l*."""
    radix = _shared_radix(u, l)
    total = missing = 0
    for subset in itertools.combinations(range(u.shape[1]), t):
        cu = np.unique(_codes(u, subset, radix))
        cl = np.unique(_codes(l, subset, radix))
        total += cu.size
        missing += cu.size - np.isin(cu, cl, assume_unique=True).sum()
    return int(missing), int(total)


def _elementary_symmetric(values, t):
    e = [1] + [0] * t
    for v in values:
        for j in range(t, 0, -1):
            e[j] += e[j - 1] * v
    return e[t]


def combinatorial_coverage(rows, t, cardinalities):
    """Fraction of all possible level-*t* interactions that appear in *rows*.

    The denominator sums, over every *t*-subset of features, the product of
    their cardinalities and is computed with exact integers.
    """
    cards = [int(c) for c in cardinalities]
    if not cards:
        raise ValueError("empty value universe")
    if min(cards) < 1:
        raise ValueError("every cardinality must be >= 1")
    t = _check_level(t, len(cards))
    arr = _as_rows(rows, len(cards))
    if arr.shape[0] and arr.shape[1] != len(cards):
        raise ValueError("rows and cardinalities disagree on the feature count")
    if arr.shape[0] and np.any(arr >= np.asarray(cards)):
        raise ValueError("row value outside the declared universe")
    possible = _elementary_symmetric(cards, t)
    if arr.shape[0] == 0:
        return 0.0
    radix = np.asarray(cards, dtype=np.int64)
    present = sum(np.unique(_codes(arr, s, radix)).size
                  for s in itertools.combinations(range(len(cards)), t))
    return present / possible


def sdcc(u_rows, l_rows, t):
    """Set-difference combinatorial coverage ``|U_t minus L_t| / |U_t|``.

    ``U_t`` and ``L_t`` are the distinct level-*t* interactions of each row
    collection, so duplicates in either argument do not matter.
    """
    u = _as_rows(u_rows)
    if u.shape[0] == 0:
        raise ValueError("sdcc is undefined for an empty first row collection")
    l = _as_rows(l_rows, u.shape[1])
    if l.shape[0] and l.shape[1] != u.shape[1]:
        raise ValueError("row collections disagree on the feature count")
    t = _check_level(t, u.shape[1])
    missing, total = _level_sets(u, l, t)
    return missing / total


def sdcc_profile(u_rows, l_rows, max_level=DEFAULT_MAX_LEVEL):
    """``[sdcc(u, l, t) for t in 1..min(max_level, k)]``."""
    u = _as_rows(u_rows)
    if u.shape[0] == 0:
        raise ValueError("sdcc is undefined for an empty first row collection")
    top = min(int(max_level), u.shape[1])
    return [sdcc(u, l_rows, t) for t in range(1, top + 1)]


class CoverageDensity(TransformerMixin, BaseEstimator):
    """Weighted count of each row's interactions missing from a labeled set.

    ``fit`` inventories the labeled rows at every level ``t = 1..T`` with
    ``T = min(max_level, n_features)``; ``partial_fit`` extends that
    inventory with newly labeled rows. For a query row, ``transform``
    returns the number of its level-*t* interactions absent from the
    inventory (one column per level) and ``score_samples`` the density
    ``sum_t missing_t / t``.

    Parameters
    ----------
    max_level : int, default=6
        Highest interaction level *T*; clamped to the feature count.
    n_values : sequence of int, optional
        Per-feature cardinalities. Query values at or above them are
        treated as unseen and always count as missing. Inferred from the
        labeled rows when omitted.
    """

    def __init__(self, max_level=DEFAULT_MAX_LEVEL, n_values=None):
        self.max_level = max_level
        self.n_values = n_values

    def _validate(self, X):
        X = _as_rows(X)
        if hasattr(self, "n_features_in_") and X.shape[0] and X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X

    def fit(self, X, y=None):
        X = _as_rows(X)
        if self.max_level < 1:
            raise ValueError("max_level must be >= 1")
        k = X.shape[1] or (len(self.n_values) if self.n_values is not None else 0)
        if k == 0:
            raise ValueError("cannot infer the feature count from empty input")
        self.n_features_in_ = k
        self.levels_ = min(int(self.max_level), k)
        self.subsets_ = [list(itertools.combinations(range(k), t))
                         for t in range(1, self.levels_ + 1)]
        self._fit_rows = X.reshape(-1, k).copy()
        self._rebuild()
        return self

    def _rebuild(self):
        k = self.n_features_in_
        if self.n_values is not None:
            card = np.asarray(self.n_values, dtype=np.int64)
            if card.shape != (k,):
                raise ValueError("n_values must give one cardinality per feature")
        elif self._fit_rows.shape[0]:
            card = self._fit_rows.max(axis=0) + 1
        else:
            card = np.ones(k, dtype=np.int64)
        # one spare slot per feature for unseen values
        self.radix_ = np.maximum(card, self._fit_rows.max(axis=0) + 1 if self._fit_rows.shape[0] else 1) + 1
        self.inventory_ = {}
        for level_subsets in self.subsets_:
            for s in level_subsets:
                self.inventory_[s] = np.unique(_codes(self._fit_rows, s, self.radix_))
        self.n_labeled_ = self._fit_rows.shape[0]

    def partial_fit(self, X, y=None):
        """Add rows to the labeled inventory (fits from scratch if unfitted)."""
        if not hasattr(self, "inventory_"):
            return self.fit(X)
        X = self._validate(X)
        if X.shape[0] == 0:
            return self
        self._fit_rows = np.concatenate([self._fit_rows, X.reshape(-1, self.n_features_in_)])
        if np.any(X.max(axis=0) + 1 >= self.radix_):
            self._rebuild()
            return self
        for level_subsets in self.subsets_:
            for s in level_subsets:
                self.inventory_[s] = np.union1d(self.inventory_[s], _codes(X, s, self.radix_))
        self.n_labeled_ = self._fit_rows.shape[0]
        return self

    def transform(self, X):
        """Missing-interaction counts, shape ``(n_rows, levels_)``."""
        check_is_fitted(self, "inventory_")
        X = self._validate(X)
        n = X.shape[0]
        out = np.zeros((n, self.levels_), dtype=np.int64)
        if n == 0:
            return out
        X = np.minimum(X, self.radix_ - 1)
        for t, level_subsets in enumerate(self.subsets_):
            col = out[:, t]
            for s in level_subsets:
                inv = self.inventory_[s]
                codes = _codes(X, s, self.radix_)
                if inv.size == 0:
                    col += 1
                    continue
                pos = np.searchsorted(inv, codes)
                pos[pos == inv.size] = 0
                col += inv[pos] != codes
        return out

    def score_samples(self, X):
        """Coverage density ``sum_t missing_t / t`` per row."""
        counts = self.transform(X)
        density = np.zeros(counts.shape[0], dtype=np.float64)
        for t in range(counts.shape[1]):
            density += counts[:, t] / (t + 1)
        return density


def coverage_density(l_rows, u_rows, max_level=DEFAULT_MAX_LEVEL):
    """Coverage density of every row of *u_rows* against the labeled *l_rows*."""
    u = _as_rows(u_rows)
    if u.shape[0] == 0:
        raise ValueError("coverage density needs at least one unlabeled row")
    l = _as_rows(l_rows, u.shape[1])
    if l.shape[0] and l.shape[1] != u.shape[1]:
        raise ValueError("row collections disagree on the feature count")
    radix = _shared_radix(u, l)
    est = CoverageDensity(max_level=max_level, n_values=radix).fit(l.reshape(-1, u.shape[1]))
    return est.score_samples(u)
