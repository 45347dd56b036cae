"""Level-wise builder for multiway Gini trees on categorical features.

All trees of an ensemble grow together: every sample/tree pair with a
non-zero weight is one "slot", and each level is processed with a handful
of ``bincount`` calls over (node, value, class) keys. Trees are stored in
one flat node table.
"""
import numpy as np

# Above this many (node, value, class) cells we compress keys with
# np.unique instead of allocating a dense bincount.
_DENSE_LIMIT = 4_000_000


class TreeArrays:
    """Flat storage for one or more trees.

    ``feature[n]`` is -1 for leaves. For split nodes ``child[offset[n] + v]``
    is the child for value ``v``; slot ``offset[n] + radix[f]`` (and any
    value without training rows) holds -1 so prediction stops at ``n`` and
    uses its class distribution.
    """

    def __init__(self, feature, offset, child, value, roots, radix):
        self.feature = feature
        self.offset = offset
        self.child = child
        self.value = value
        self.roots = roots
        self.radix = radix

    @property
    def n_nodes(self):
        return self.feature.size

    def apply(self, X):
        """Node reached by each row in each tree, shape ``(n_trees, n_rows)``."""
        X = np.asarray(X, dtype=np.int64)
        n = X.shape[0]
        cur = np.repeat(self.roots[:, None], n, axis=1)
        cols = np.broadcast_to(np.arange(n), cur.shape)
        cap = self.radix[np.maximum(self.feature, 0)]
        while True:
            f = self.feature[cur]
            active = f >= 0
            if not active.any():
                break
            ff = np.where(active, f, 0)
            v = X[cols, ff]
            v = np.minimum(v, cap[cur])
            nxt = self.child[np.where(active, self.offset[cur] + v, 0)]
            nxt = np.where(active & (nxt >= 0), nxt, cur)
            if np.array_equal(nxt, cur):
                break
            cur = nxt
        return cur

    def proba(self, X):
        """Mean leaf class distribution over trees."""
        nodes = self.apply(X)
        return self.value[nodes].mean(axis=0)


def _keyed_counts(keys, weights, size):
    if size <= _DENSE_LIMIT:
        return np.bincount(keys, weights=weights, minlength=size), None
    uniq, inv = np.unique(keys, return_inverse=True)
    return np.bincount(inv, weights=weights, minlength=uniq.size), uniq


def build_trees(X, y, weights, n_classes, radix, max_depth, max_features, rng):
    """Grow ``weights.shape[0]`` trees.

    Parameters
    ----------
    X : (n, k) int array of value indices, each below ``radix``.
    y : (n,) int array of class indices below ``n_classes``.
    weights : (n_trees, n) non-negative integer sample multiplicities.
    max_depth : int or None.
    max_features : int, number of non-constant features drawn per node
        (``k`` means all, with no randomness consumed).
    rng : numpy Generator for feature sampling.
    """
    X = np.asarray(X, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    n, k = X.shape
    K = int(n_classes)
    radix = np.asarray(radix, dtype=np.int64)
    n_trees = weights.shape[0]
    depth_cap = np.inf if max_depth is None else int(max_depth)

    tree_idx, sample_idx = np.nonzero(weights)
    w = weights[tree_idx, sample_idx].astype(np.float64)
    sx = X[sample_idx]
    sy = y[sample_idx]

    feature, offset, value = [], [], []
    child_chunks = []
    n_child_slots = 0

    # root of each tree; empty trees (no weight) become a uniform leaf
    node_of = tree_idx.copy()
    level_nodes = np.arange(n_trees)
    next_id = n_trees
    roots = np.arange(n_trees)
    feature.extend([-1] * n_trees)
    offset.extend([0] * n_trees)
    value.extend([None] * n_trees)

    depth = 0
    while level_nodes.size:
        M = level_nodes.size
        local = np.searchsorted(level_nodes, node_of)
        counts = np.bincount(local * K + sy, weights=w, minlength=M * K).reshape(M, K)
        totals = counts.sum(axis=1)
        for i, node in enumerate(level_nodes):
            value[node] = (counts[i] / totals[i]) if totals[i] > 0 else np.full(K, 1.0 / K)

        pure = (counts > 0).sum(axis=1) <= 1
        can_split = ~pure & (depth < depth_cap)
        if not can_split.any():
            break

        # per-feature purity score sum_v sum_c n_vc^2 / n_v (higher is better)
        score = np.full((M, k), -np.inf)
        varies = np.zeros((M, k), dtype=bool)
        child_counts = []
        for f in range(k):
            card = int(radix[f])
            cells = M * card * K
            raw, uniq = _keyed_counts((local * card + sx[:, f]) * K + sy, w, cells)
            if uniq is None:
                cvk = raw.reshape(M, card, K)
            else:
                cvk = np.zeros((M, card, K))
                cvk.reshape(-1)[uniq] = raw
            nv = cvk.sum(axis=2)
            nonzero = nv > 0
            varies[:, f] = nonzero.sum(axis=1) >= 2
            with np.errstate(divide="ignore", invalid="ignore"):
                s = np.where(nonzero, (cvk ** 2).sum(axis=2) / np.where(nonzero, nv, 1), 0.0)
            score[:, f] = s.sum(axis=1)
            child_counts.append(nonzero)

        candidates = varies & can_split[:, None]
        if max_features < k:
            keys = rng.random((M, k))
            keys = np.where(candidates, keys, np.inf)
            order = np.argsort(keys, axis=1, kind="stable")
            rank = np.empty_like(order)
            np.put_along_axis(rank, order, np.arange(k)[None, :].repeat(M, axis=0), axis=1)
            candidates &= rank < max_features
        score = np.where(candidates, score, -np.inf)
        best = np.argmax(score, axis=1)
        splitting = candidates.any(axis=1)

        new_nodes = []
        remap = np.full((M, int(radix.max()) + 1), -1, dtype=np.int64)
        for i in np.flatnonzero(splitting):
            node = level_nodes[i]
            f = int(best[i])
            card = int(radix[f])
            feature[node] = f
            offset[node] = n_child_slots
            slots = np.full(card + 1, -1, dtype=np.int64)
            for v in np.flatnonzero(child_counts[f][i]):
                slots[v] = next_id
                remap[i, v] = next_id
                new_nodes.append(next_id)
                next_id += 1
            child_chunks.append(slots)
            n_child_slots += card + 1
        feature.extend([-1] * (next_id - len(feature)))
        offset.extend([0] * (next_id - len(offset)))
        value.extend([None] * (next_id - len(value)))

        # route slots to children; slots in leaves drop out
        split_here = splitting[local]
        chosen = best[local]
        vals = sx[np.arange(sx.shape[0]), chosen]
        dest = np.where(split_here, remap[local, np.where(split_here, vals, 0)], -1)
        keep = dest >= 0
        node_of, sx, sy, w = dest[keep], sx[keep], sy[keep], w[keep]
        level_nodes = np.asarray(new_nodes, dtype=np.int64)
        depth += 1

    for i, node in enumerate(level_nodes):
        if value[node] is None:
            value[node] = np.full(K, 1.0 / K)
    value = [v if v is not None else np.full(K, 1.0 / K) for v in value]

    child = np.concatenate(child_chunks) if child_chunks else np.full(1, -1, dtype=np.int64)
    return TreeArrays(
        feature=np.asarray(feature, dtype=np.int64),
        offset=np.asarray(offset, dtype=np.int64),
        child=child,
        value=np.vstack(value),
        roots=roots,
        radix=radix,
    )
