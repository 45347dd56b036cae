"""Generators for the UCI benchmark tables that are fully determined by rules.

Tic-Tac-Toe Endgame, Balance Scale and Chess (King-Rook vs. King) are
exhaustive enumerations of a game or physical rule, so they can be rebuilt
exactly instead of downloaded. Each generator returns raw token rows in the
column layout of the corresponding UCI ``.data`` file (no header line).

Car Evaluation, Nursery and the Monk's problems depend on hand-built
decision tables or random training subsets and must be supplied as files.
"""
from __future__ import annotations

import csv
import itertools
from pathlib import Path

import numpy as np

__all__ = [
    "tic_tac_toe_rows",
    "balance_scale_rows",
    "krk_rows",
    "write_uci_file",
    "generate_all",
    "GENERATED_FILES",
]

_LINES = [
    (0, 1, 2), (3, 4, 5), (6, 7, 8),
    (0, 3, 6), (1, 4, 7), (2, 5, 8),
    (0, 4, 8), (2, 4, 6),
]


def _has_line(board, mark):
    return any(all(board[i] == mark for i in line) for line in _LINES)


def tic_tac_toe_rows():
    """All legal end-of-game boards, x moving first.

    A game ends as soon as someone completes a line or the board is full.
    The class is ``positive`` when x has a line. Rows are ordered like the
    UCI file: positives first, each block sorted with ``x < o < b``.
    """
    finals = set()
    stack = [("b" * 9, "x")]
    seen = set()
    while stack:
        board, turn = stack.pop()
        if (board, turn) in seen:
            continue
        seen.add((board, turn))
        if _has_line(board, "x") or _has_line(board, "o") or "b" not in board:
            finals.add(board)
            continue
        nxt = "o" if turn == "x" else "x"
        for i, cell in enumerate(board):
            if cell == "b":
                stack.append((board[:i] + turn + board[i + 1:], nxt))

    rank = {"x": 0, "o": 1, "b": 2}
    positive = sorted((b for b in finals if _has_line(b, "x")),
                      key=lambda b: [rank[c] for c in b])
    negative = sorted((b for b in finals if not _has_line(b, "x")),
                      key=lambda b: [rank[c] for c in b])
    rows = [list(b) + ["positive"] for b in positive]
    rows += [list(b) + ["negative"] for b in negative]
    return rows


def balance_scale_rows():
    """All 625 weight/distance settings, class first (``L``, ``B``, ``R``)."""
    rows = []
    for lw, ld, rw, rd in itertools.product(range(1, 6), repeat=4):
        left, right = lw * ld, rw * rd
        cls = "L" if left > right else ("R" if right > left else "B")
        rows.append([cls, str(lw), str(ld), str(rw), str(rd)])
    return rows


# --- King-Rook vs. King ------------------------------------------------------

_FILES = "abcdefgh"
_KING_STEPS = [(df, dr) for df in (-1, 0, 1) for dr in (-1, 0, 1) if df or dr]
_ROOK_DIRS = [(1, 0), (-1, 0), (0, 1), (0, -1)]
_DEPTH_NAMES = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen",
]


def _king_moves(sq):
    f, r = sq % 8, sq // 8
    out = []
    for df, dr in _KING_STEPS:
        ff, rr = f + df, r + dr
        if 0 <= ff < 8 and 0 <= rr < 8:
            out.append(rr * 8 + ff)
    return out


def _rook_ray(rook, blockers):
    f, r = rook % 8, rook // 8
    out = []
    for df, dr in _ROOK_DIRS:
        ff, rr = f + df, r + dr
        while 0 <= ff < 8 and 0 <= rr < 8:
            sq = rr * 8 + ff
            out.append(sq)
            if sq in blockers:
                break
            ff += df
            rr += dr
    return out


def _symmetry(sq, k):
    f, r = sq % 8, sq // 8
    for _ in range(k & 3):
        f, r = r, 7 - f
    if k & 4:
        f = 7 - f
    return r * 8 + f


def _krk_depths():
    """Retrograde analysis of KRK with Black to move.

    Returns ``(legal, depth)`` arrays indexed by ``(wk*64 + wr)*64 + bk``;
    depth is the number of White moves to mate under optimal play, -1 for
    draws (stalemate, or the rook falls).
    """
    kmoves = [_king_moves(s) for s in range(64)]
    adjacent = np.zeros((64, 64), dtype=bool)
    for s in range(64):
        adjacent[s, kmoves[s]] = True

    def idx(wk, wr, bk):
        return (wk * 64 + wr) * 64 + bk

    size = 64 ** 3
    legal = np.zeros(size, dtype=bool)
    b_succ, w_succ = {}, {}
    mated, dead = [], []
    for wk in range(64):
        for wr in range(64):
            if wr == wk:
                continue
            for bk in range(64):
                if bk == wk or bk == wr or adjacent[wk, bk]:
                    continue
                p = idx(wk, wr, bk)
                legal[p] = True
                attacked = set(_rook_ray(wr, {wk}))
                # black to move
                succ, drawn = [], False
                for d in kmoves[bk]:
                    if d == wk or adjacent[wk, d]:
                        continue
                    if d == wr:
                        drawn = drawn or not adjacent[wk, wr]
                        continue
                    if d not in attacked:
                        succ.append(idx(wk, wr, d))
                if drawn:
                    dead.append(p)
                elif not succ:
                    (mated if bk in attacked else dead).append(p)
                else:
                    b_succ[p] = succ
                # white to move (only when black is not in check)
                if bk in attacked:
                    continue
                succ = [idx(d, wr, bk) for d in kmoves[wk]
                        if d != wr and not adjacent[bk, d]]
                succ += [idx(wk, d, bk) for d in _rook_ray(wr, {wk, bk})
                         if d != wk and d != bk]
                w_succ[p] = succ

    b_depth = np.full(size, -1, dtype=np.int64)
    w_depth = np.full(size, -1, dtype=np.int64)
    b_depth[mated] = 0
    frontier = set(mated)
    n = 0
    while frontier:
        n += 1
        for p, succ in w_succ.items():
            if w_depth[p] < 0 and any(q in frontier for q in succ):
                w_depth[p] = n
        frontier = set()
        for p, succ in b_succ.items():
            if b_depth[p] < 0 and all(w_depth[q] >= 0 for q in succ):
                b_depth[p] = n
                frontier.add(p)
    return legal, b_depth


def krk_rows():
    """King-Rook vs. King positions with Black to move, one per symmetry class.

    The White king is canonicalised into the a1-d1-d4 triangle; when it sits
    on the diagonal the lexicographically smallest reflection is kept. Rows
    are ``wk_file, wk_rank, wr_file, wr_rank, bk_file, bk_rank, depth``,
    ordered by class (``draw`` first) and then by position.
    """
    legal, depth = _krk_depths()
    reps = {}
    for p in np.flatnonzero(legal):
        wk, rem = divmod(int(p), 4096)
        wr, bk = divmod(rem, 64)
        images = [(_symmetry(wk, k), _symmetry(wr, k), _symmetry(bk, k)) for k in range(8)]
        key = min(images)
        if key in reps:
            continue
        # representative: white king in the triangle, smallest among those
        tri = [im for im in images
               if im[0] % 8 <= 3 and im[0] // 8 <= im[0] % 8]
        reps[key] = (min(tri), int(depth[p]))

    def sq(s):
        return [_FILES[s % 8], str(s // 8 + 1)]

    ordered = sorted(reps.values(), key=lambda item: (item[1] + 1, item[0]))
    rows = []
    for (wk, wr, bk), d in ordered:
        label = "draw" if d < 0 else _DEPTH_NAMES[d]
        rows.append(sq(wk) + sq(wr) + sq(bk) + [label])
    return rows


def write_uci_file(rows, path):
    """Write token rows as a header-less comma-separated file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(rows)
    return path


GENERATED_FILES = {
    "tic-tac-toe": ("tic-tac-toe.data", tic_tac_toe_rows),
    "balance-scale": ("balance-scale.data", balance_scale_rows),
    "chess": ("krkopt.data", krk_rows),
}


def generate_all(directory, names=None):
    """Write every generated benchmark file into *directory*."""
    written = {}
    for name, (filename, make) in GENERATED_FILES.items():
        if names is not None and name not in names:
            continue
        written[name] = write_uci_file(make(), Path(directory) / filename)
    return written
