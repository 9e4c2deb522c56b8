"""Compiled BFS kernels over CSR adjacency (indptr, indices)."""

from __future__ import annotations

import os

import numba
import numpy as np
from numba import prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    # probing an outdated TBB first only produces a warning before falling back
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

_ONE = np.uint64(1)


@numba.njit(cache=True)
def bfs(indptr, indices, src, limit):
    """Hop distances from ``src``; unreachable (or beyond ``limit``) = n."""
    n = indptr.shape[0] - 1
    dist = np.full(n, n, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    dist[src] = 0
    queue[0] = src
    head, tail = 0, 1
    while head < tail:
        v = queue[head]
        head += 1
        d = dist[v]
        if d >= limit:
            continue
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if dist[w] == n:
                dist[w] = d + 1
                queue[tail] = w
                tail += 1
    return dist


@numba.njit(parallel=True, cache=True)
def bitset_eccentricities(indptr, indices, sources):
    """Eccentricity of each source by bit-parallel BFS (64 sources per word).

    Returns (ecc, reached_all): ecc[s] is the last level at which source s
    discovered a vertex; reached_all[s] is False if some vertex stayed unseen.
    """
    n = indptr.shape[0] - 1
    ns = sources.shape[0]
    words = (ns + 63) // 64
    visited = np.zeros((n, words), dtype=np.uint64)
    frontier = np.zeros((n, words), dtype=np.uint64)
    nxt = np.zeros((n, words), dtype=np.uint64)
    for s in range(ns):
        v = sources[s]
        bit = _ONE << np.uint64(s & 63)
        visited[v, s >> 6] |= bit
        frontier[v, s >> 6] |= bit
    ecc = np.zeros(ns, dtype=np.int32)
    level = 0
    while True:
        level += 1
        for v in prange(n):
            for w in range(words):
                nxt[v, w] = 0
            for e in range(indptr[v], indptr[v + 1]):
                u = indices[e]
                for w in range(words):
                    nxt[v, w] |= frontier[u, w]
            for w in range(words):
                fresh = nxt[v, w] & ~visited[v, w]
                nxt[v, w] = fresh
                visited[v, w] |= fresh
        newbits = np.zeros(words, dtype=np.uint64)
        for v in range(n):
            for w in range(words):
                newbits[w] |= nxt[v, w]
        anynew = False
        for w in range(words):
            if newbits[w] != 0:
                anynew = True
        if not anynew:
            break
        for s in range(ns):
            if newbits[s >> 6] & (_ONE << np.uint64(s & 63)):
                ecc[s] = level
        frontier, nxt = nxt, frontier
    allbits = np.empty(words, dtype=np.uint64)
    for w in range(words):
        allbits[w] = ~np.uint64(0)
    for v in range(n):
        for w in range(words):
            allbits[w] &= visited[v, w]
    reached = np.empty(ns, dtype=np.bool_)
    for s in range(ns):
        reached[s] = (allbits[s >> 6] & (_ONE << np.uint64(s & 63))) != 0
    return ecc, reached


@numba.njit(parallel=True, cache=True)
def pair_distances_within(indptr, indices, sources, targets_mask, limit):
    """Largest distance from each source to any vertex flagged in ``targets_mask``.

    Distances beyond ``limit`` are reported as ``limit + 1``.
    """
    n = indptr.shape[0] - 1
    ns = sources.shape[0]
    out = np.zeros(ns, dtype=np.int32)
    for i in prange(ns):
        dist = bfs(indptr, indices, sources[i], limit)
        worst = 0
        for v in range(n):
            if targets_mask[v]:
                d = dist[v]
                if d > limit:
                    d = limit + 1
                if d > worst:
                    worst = d
        out[i] = worst
    return out


@numba.njit(parallel=True, cache=True)
def far_pair_counts(indptr, indices, sources, limit):
    """For each source, the number of vertices farther than ``limit``."""
    ns = sources.shape[0]
    out = np.zeros(ns, dtype=np.int64)
    for i in prange(ns):
        dist = bfs(indptr, indices, sources[i], limit)
        c = 0
        for d in dist:
            if d > limit:
                c += 1
        out[i] = c
    return out


@numba.njit(cache=True)
def _girth_from(indptr, indices, src, best, dist, parent, queue):
    n = indptr.shape[0] - 1
    dist[src] = 0
    parent[src] = -1
    queue[0] = src
    head, tail = 0, 1
    while head < tail:
        v = queue[head]
        head += 1
        if 2 * dist[v] + 1 >= best:
            break
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if w == parent[v]:
                continue
            if dist[w] == n:
                dist[w] = dist[v] + 1
                parent[w] = v
                queue[tail] = w
                tail += 1
            else:
                cyc = dist[v] + dist[w] + 1
                if cyc < best:
                    best = cyc
    for i in range(tail):
        dist[queue[i]] = n
    return best


@numba.njit(cache=True)
def girth(indptr, indices):
    """Length of the shortest cycle, or n + 1 if the graph is a forest."""
    n = indptr.shape[0] - 1
    dist = np.full(n, n, dtype=np.int32)
    parent = np.full(n, -1, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    best = n + 1
    for s in range(n):
        best = _girth_from(indptr, indices, s, best, dist, parent, queue)
        if best == 3:
            break
    return best
