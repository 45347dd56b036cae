"""Categorical dataset ingestion, pool splitting and one-hot encoding."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "Dataset",
    "DatasetError",
    "PoolState",
    "SplitSpec",
    "load_dataset",
    "split_pools",
    "one_hot_encode",
]


class DatasetError(ValueError):
    """Raised for malformed dataset files or impossible splits."""


@dataclass(frozen=True)
class Dataset:
    """Categorical rows with per-feature value universes.

    ``rows[i, f]`` is the index of row *i*'s token for feature *f* in
    ``value_names[f]``; indices follow first-appearance order in the file.
    ``n_train`` is set for pre-split data: rows at or past it come from the
    external test file.
    """

    rows: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    value_names: tuple
    class_names: tuple
    name: str = ""
    n_train: Optional[int] = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if rows.ndim != 2:
            raise DatasetError("rows must be a 2-D array")
        if labels.shape != (rows.shape[0],):
            raise DatasetError("one label per row is required")
        if len(self.feature_names) != rows.shape[1] or len(self.value_names) != rows.shape[1]:
            raise DatasetError("feature_names/value_names do not match the feature count")
        for f, values in enumerate(self.value_names):
            if len(values) < 1:
                raise DatasetError(f"feature {f} has an empty value universe")
            col = rows[:, f]
            if col.size and (col.min() < 0 or col.max() >= len(values)):
                raise DatasetError(f"feature {f} has an out-of-range value index")
        if labels.size and (labels.min() < 0 or labels.max() >= len(self.class_names)):
            raise DatasetError("label index out of range")
        rows.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)

    @property
    def n_rows(self):
        return self.rows.shape[0]

    @property
    def n_features(self):
        return self.rows.shape[1]

    @property
    def n_classes(self):
        return len(self.class_names)

    @property
    def cardinalities(self):
        return tuple(len(v) for v in self.value_names)

    def __len__(self):
        return self.n_rows

    def encode(self, tokens):
        """Map one row of feature tokens to value indices.

        Tokens outside a feature's universe map to the reserved unseen
        index, which equals that feature's cardinality.
        """
        if len(tokens) != self.n_features:
            raise DatasetError(f"expected {self.n_features} tokens, got {len(tokens)}")
        out = []
        for f, tok in enumerate(tokens):
            values = self.value_names[f]
            try:
                out.append(values.index(tok))
            except ValueError:
                out.append(len(values))
        return np.asarray(out, dtype=np.int64)

    def token_rows(self):
        """Rows back as token lists, class token in the last position."""
        return [
            [self.value_names[f][v] for f, v in enumerate(row)] + [self.class_names[y]]
            for row, y in zip(self.rows.tolist(), self.labels.tolist())
        ]

    def class_counts(self, indices=None):
        labels = self.labels if indices is None else self.labels[np.asarray(indices, dtype=np.int64)]
        return np.bincount(labels, minlength=self.n_classes)


def _read_records(path, delimiter, skipinitialspace):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    with path.open("r", encoding="utf-8", newline="") as fh:
        if delimiter is None:
            lines = [(n, line.split()) for n, line in enumerate(fh, start=1)]
        else:
            reader = csv.reader(fh, delimiter=delimiter, skipinitialspace=skipinitialspace)
            lines = [(reader.line_num, rec) for rec in reader]
    records = []
    for lineno, rec in lines:
        rec = [tok.strip() for tok in rec]
        if not rec or all(tok == "" for tok in rec):
            continue
        records.append((lineno, rec))
    return records


def load_dataset(
    path,
    *,
    header: bool = False,
    names: Optional[Sequence[str]] = None,
    class_column: int = -1,
    drop_columns: Sequence[int] = (),
    delimiter: Optional[str] = ",",
    skipinitialspace: bool = True,
    test_path=None,
    name: Optional[str] = None,
) -> Dataset:
    """Read a categorical CSV file into a :class:`Dataset`.

    Parameters
    ----------
    path : path-like
        One datapoint per line.
    header : bool
        Consume the first line as column names.
    names : sequence of str, optional
        Feature names (overrides the header). Must exclude the class column
        and dropped columns.
    class_column : int
        Position of the class token; negative values count from the end.
    drop_columns : sequence of int
        Column positions ignored entirely (e.g. row identifiers).
    delimiter : str or None
        ``None`` splits on runs of whitespace.
    test_path : path-like, optional
        Pre-split test file with the same layout. Its rows are appended
        after the training rows and share the value universes;
        ``Dataset.n_train`` marks the boundary.
    """
    parts = [(Path(path), _read_records(path, delimiter, skipinitialspace))]
    if test_path is not None:
        parts.append((Path(test_path), _read_records(test_path, delimiter, skipinitialspace)))

    header_names = None
    width = None
    body = []
    for part_no, (src, records) in enumerate(parts):
        if header and records:
            head = records.pop(0)[1]
            if part_no == 0:
                header_names = head
        if part_no == 0 and not records:
            raise DatasetError(f"{src}: no data rows")
        for lineno, rec in records:
            if width is None:
                width = len(rec)
            elif len(rec) != width:
                raise DatasetError(
                    f"{src}:{lineno}: expected {width} fields, found {len(rec)}")
            body.append(rec)
        if part_no == 0:
            n_train = len(body)

    if width < 2:
        raise DatasetError(f"{path}: need at least one feature and a class column")
    cls_pos = class_column % width
    dropped = {c % width for c in drop_columns}
    if cls_pos in dropped:
        raise DatasetError("class column cannot be dropped")
    feat_pos = [c for c in range(width) if c != cls_pos and c not in dropped]
    if not feat_pos:
        raise DatasetError("no feature columns remain")

    if names is not None:
        feature_names = tuple(str(n) for n in names)
        if len(feature_names) != len(feat_pos):
            raise DatasetError(
                f"{len(feature_names)} names given for {len(feat_pos)} feature columns")
    elif header_names is not None and len(header_names) == width:
        feature_names = tuple(header_names[c] for c in feat_pos)
    else:
        feature_names = tuple(f"x{i}" for i in range(len(feat_pos)))

    value_maps = [dict() for _ in feat_pos]
    class_map = {}
    rows = np.empty((len(body), len(feat_pos)), dtype=np.int64)
    labels = np.empty(len(body), dtype=np.int64)
    for i, rec in enumerate(body):
        for j, c in enumerate(feat_pos):
            rows[i, j] = value_maps[j].setdefault(rec[c], len(value_maps[j]))
        labels[i] = class_map.setdefault(rec[cls_pos], len(class_map))

    if len(class_map) < 2:
        warnings.warn(f"{path}: dataset has a single class", UserWarning, stacklevel=2)

    return Dataset(
        rows=rows,
        labels=labels,
        feature_names=feature_names,
        value_names=tuple(tuple(m) for m in value_maps),
        class_names=tuple(class_map),
        name=name if name is not None else Path(path).stem,
        n_train=n_train if test_path is not None else None,
    )


@dataclass(frozen=True)
class SplitSpec:
    """Fractions for the test / initial-label split.

    ``initial_fraction`` applies to what remains after the test rows are
    removed. With ``pre_split_test`` the dataset's external test rows are
    used and ``test_fraction`` is ignored.
    """

    test_fraction: float = 0.10
    initial_fraction: float = 0.025
    seed: int = 0
    pre_split_test: bool = False

    def __post_init__(self):
        for nm in ("test_fraction", "initial_fraction"):
            v = getattr(self, nm)
            if not 0.0 <= v < 1.0:
                raise DatasetError(f"{nm} must lie in [0, 1), got {v}")


@dataclass
class PoolState:
    """Disjoint labeled / unlabeled / test index sets over one dataset.

    ``unlabeled`` keeps its order as rows are removed; newly labeled rows
    are appended to ``labeled`` in selection order.
    """

    labeled: np.ndarray
    unlabeled: np.ndarray
    test: np.ndarray
    history: list = field(default_factory=list)

    def __post_init__(self):
        self.labeled = np.asarray(self.labeled, dtype=np.int64)
        self.unlabeled = np.asarray(self.unlabeled, dtype=np.int64)
        self.test = np.asarray(self.test, dtype=np.int64)

    def copy(self):
        return PoolState(self.labeled.copy(), self.unlabeled.copy(), self.test.copy(),
                         list(self.history))

    def label(self, positions):
        """Move the unlabeled rows at *positions* into the labeled pool.

        Returns the dataset indices that were moved.
        """
        positions = np.asarray(positions, dtype=np.int64)
        if positions.size == 0:
            return positions
        if len(np.unique(positions)) != positions.size:
            raise ValueError("duplicate positions in selection")
        if positions.min() < 0 or positions.max() >= self.unlabeled.size:
            raise IndexError("selection outside the unlabeled pool")
        moved = self.unlabeled[positions]
        keep = np.ones(self.unlabeled.size, dtype=bool)
        keep[positions] = False
        self.unlabeled = self.unlabeled[keep]
        self.labeled = np.concatenate([self.labeled, moved])
        self.history.append(moved)
        return moved

    def is_disjoint(self, n_rows=None):
        allidx = np.concatenate([self.labeled, self.unlabeled, self.test])
        if np.unique(allidx).size != allidx.size:
            return False
        if n_rows is not None and allidx.size and (allidx.min() < 0 or allidx.max() >= n_rows):
            return False
        return True


def split_pools(dataset: Dataset, spec: SplitSpec) -> PoolState:
    """Seeded test / initial / query split with floor rounding at both stages.

    One uniform permutation is drawn from ``default_rng(spec.seed)``; the
    first ``floor(test_fraction * N)`` entries become the test set and the
    next ``floor(initial_fraction * remainder)`` the initial labeled pool.
    Each pool is returned sorted by dataset index.
    """
    n = dataset.n_rows
    if n == 0:
        raise DatasetError("cannot split an empty dataset")
    rng = np.random.default_rng(spec.seed)
    if spec.pre_split_test:
        if dataset.n_train is None:
            raise DatasetError("pre_split_test requires a dataset loaded with test_path")
        test = np.arange(dataset.n_train, n)
        rest = rng.permutation(dataset.n_train)
    else:
        perm = rng.permutation(n)
        n_test = math.floor(spec.test_fraction * n)
        test, rest = perm[:n_test], perm[n_test:]
    n_init = math.floor(spec.initial_fraction * rest.size)
    labeled, unlabeled = rest[:n_init], rest[n_init:]
    if labeled.size == 0:
        raise DatasetError(
            f"initial_fraction={spec.initial_fraction} leaves no labeled rows out of {rest.size}")
    if unlabeled.size == 0:
        raise DatasetError("split leaves an empty unlabeled pool")
    return PoolState(np.sort(labeled), np.sort(unlabeled), np.sort(test))


def one_hot_encode(dataset_or_rows, cardinalities=None) -> np.ndarray:
    """Feature-major one-hot encoding, one block of width ``cardinality(f)`` per feature.

    Accepts a :class:`Dataset` or an integer row matrix plus cardinalities.
    Unseen indices (``>= cardinality``) leave their block all zero.
    """
    if isinstance(dataset_or_rows, Dataset):
        rows = dataset_or_rows.rows
        cards = dataset_or_rows.cardinalities
    else:
        rows = np.asarray(dataset_or_rows, dtype=np.int64)
        if rows.ndim == 1:
            rows = rows[None, :]
        if cardinalities is None:
            raise ValueError("cardinalities are required for raw rows")
        cards = tuple(int(c) for c in cardinalities)
    offsets = np.concatenate([[0], np.cumsum(cards)])
    out = np.zeros((rows.shape[0], int(offsets[-1])), dtype=np.float64)
    for f, card in enumerate(cards):
        col = rows[:, f]
        ok = (col >= 0) & (col < card)
        out[np.flatnonzero(ok), offsets[f] + col[ok]] = 1.0
    return out
