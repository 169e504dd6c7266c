"""Array index of a ball in the Cayley tree of a free group.

Vertices are numbered in shortlex order (by length, then letter by letter
in the alphabet order a < a^-1 < b < b^-1 < ...).  Letters are stored as
codes ``2*(generator index) + (1 if inverse)`` so that ``code ^ 1`` is the
inverse letter.
"""

import numpy as np

from .errors import ResourceBudgetError


def letter_to_code(x):
    return 2 * (abs(x) - 1) + (1 if x < 0 else 0)


def code_to_letter(c):
    g = c // 2 + 1
    return -g if c & 1 else g


def ball_size(rank, radius):
    if radius < 0:
        return 0
    k2 = 2 * rank
    total, sphere = 1, k2
    for _ in range(radius):
        total += sphere
        sphere *= k2 - 1
    return total


class FreeTreeIndex:
    """Ball of the given radius in the free group of the given rank."""

    def __init__(self, rank, radius, budget=20_000_000):
        size = ball_size(rank, radius)
        if size > budget:
            raise ResourceBudgetError(
                f"tree ball of radius {radius} has {size} vertices (budget {budget})")
        self.rank = rank
        self.radius = radius
        k2 = 2 * rank
        parent = np.full(size, -1, dtype=np.int32)
        last = np.full(size, -1, dtype=np.int32)
        depth = np.zeros(size, dtype=np.int32)
        child = np.full((size, k2), -1, dtype=np.int32)
        starts = [0, 1]
        nxt = 1
        for n in range(1, radius + 1):
            prev = np.arange(starts[n - 1], starts[n])
            pp = np.repeat(prev, k2)
            cc = np.tile(np.arange(k2), len(prev))
            keep = cc != (last[pp] ^ 1)
            pp, cc = pp[keep], cc[keep]
            ids = np.arange(nxt, nxt + len(pp))
            parent[ids] = pp
            last[ids] = cc
            depth[ids] = n
            child[pp, cc] = ids
            nxt += len(pp)
            starts.append(nxt)
        self.size = size
        self.parent = parent
        self.last = last
        self.depth = depth
        self.child = child
        self.starts = starts
        self._codes = {0: np.zeros((1, 0), dtype=np.int32)}

    def sphere_ids(self, n):
        return np.arange(self.starts[n], self.starts[n + 1])

    def move(self, ids, code):
        """Right-multiply vertices by one letter; -1 marks leaving the ball."""
        ids = np.asarray(ids)
        out = np.full(ids.shape, -1, dtype=np.int32)
        ok = ids >= 0
        v = ids[ok]
        out[ok] = np.where(self.last[v] == (code ^ 1), self.parent[v], self.child[v, code])
        return out

    def move_word(self, ids, codes):
        for c in codes:
            ids = self.move(ids, c)
        return ids

    def id_of(self, codes):
        v = 0
        for c in codes:
            if self.last[v] == (c ^ 1):
                v = int(self.parent[v])
            else:
                v = int(self.child[v, c])
                if v < 0:
                    return -1
        return v

    def codes_of(self, v):
        out = []
        while v > 0:
            out.append(int(self.last[v]))
            v = int(self.parent[v])
        return out[::-1]

    def word(self, v):
        return tuple(code_to_letter(c) for c in self.codes_of(v))

    def sphere_codes(self, n):
        """(m, n) matrix of letter codes for the sphere of radius n, in id order."""
        if n not in self._codes:
            prev = self.sphere_codes(n - 1)
            ids = self.sphere_ids(n)
            rows = self.parent[ids] - self.starts[n - 1]
            self._codes[n] = np.hstack([prev[rows], self.last[ids][:, None]])
        return self._codes[n]

    def neighbours(self):
        """(size, 2*rank) array of right neighbours, -1 outside the ball."""
        ids = np.arange(self.size)
        return np.stack([self.move(ids, c) for c in range(2 * self.rank)], axis=1)


def ancestors(index, n=None):
    """(n, radius+1) matrix: ancestor of each vertex at each depth, -1 below."""
    n = index.size if n is None else n
    R = index.radius
    anc = np.full((n, R + 1), -1, dtype=np.int32)
    ids = np.arange(n, dtype=np.int32)
    depth = index.depth[:n]
    cur = ids.copy()
    for t in range(R, -1, -1):
        at = depth >= t
        # move vertices deeper than t up one level at a time
        while True:
            deeper = index.depth[cur] > t
            if not deeper.any():
                break
            cur = np.where(deeper, index.parent[np.maximum(cur, 0)], cur)
        anc[at, t] = cur[at]
    return anc


def distance_matrix(index, n=None):
    """Tree distances among the first n vertices (default: the whole ball)."""
    n = index.size if n is None else n
    anc = ancestors(index, n)
    depth = index.depth[:n].astype(np.int32)
    D = np.empty((n, n), dtype=np.int32)
    step = max(1, 4_000_000 // (n * (index.radius + 1) + 1))
    for s in range(0, n, step):
        blk = anc[s:s + step]
        eq = (blk[:, None, :] == anc[None, :, :]) & (blk[:, None, :] >= 0)
        lcp = eq.sum(axis=2) - 1
        D[s:s + step] = depth[s:s + step, None] + depth[None, :] - 2 * lcp
    return D
