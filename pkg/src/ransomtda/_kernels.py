"""Numeric inner-loop kernels with numba and pure-numpy backends.

Every kernel exists twice: a loop-based version compiled with ``numba.njit``
and a vectorized numpy fallback. The active backend is chosen at import time:
set ``RANSOMTDA_NUMBA=0`` to force the numpy path (the numpy path is also
used automatically when numba is not importable). Callers can pass
``backend="numpy"`` / ``backend="numba"`` explicitly, which the test suite
and the benchmark use to compare both paths.

All kernels are deterministic: ties are broken by lowest index in both
backends.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


USE_NUMBA = HAVE_NUMBA and os.environ.get("RANSOMTDA_NUMBA", "1") != "0"

DEFAULT_BACKEND = "numba" if USE_NUMBA else "numpy"


def available_backends() -> tuple[str, ...]:
    return ("numpy", "numba") if HAVE_NUMBA else ("numpy",)


def _resolve(backend: str | None) -> str:
    if backend is None:
        return DEFAULT_BACKEND
    if backend not in ("numpy", "numba"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


def _as_points(points) -> np.ndarray:
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-d array")
    return pts


# ---------------------------------------------------------------------------
# Minimum spanning tree (Prim, dense O(n^2)) -- single-linkage backbone.
# Sorted MST edge weights equal the single-linkage merge distances, and the
# connected components under any distance cutoff are MST-invariant.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _mst_numba(pts):  # pragma: no cover - exercised via dispatch
    n = pts.shape[0]
    d = pts.shape[1]
    heads = np.empty(n - 1, np.int64)
    tails = np.empty(n - 1, np.int64)
    dists = np.empty(n - 1, np.float64)
    in_tree = np.zeros(n, np.bool_)
    best = np.full(n, np.inf)
    src = np.zeros(n, np.int64)
    in_tree[0] = True
    for j in range(1, n):
        acc = 0.0
        for k in range(d):
            t = pts[0, k] - pts[j, k]
            acc += t * t
        best[j] = np.sqrt(acc)
    for step in range(n - 1):
        pick = -1
        pick_d = np.inf
        for j in range(n):
            if not in_tree[j] and best[j] < pick_d:
                pick = j
                pick_d = best[j]
        heads[step] = src[pick]
        tails[step] = pick
        dists[step] = pick_d
        in_tree[pick] = True
        for j in range(n):
            if not in_tree[j]:
                acc = 0.0
                for k in range(d):
                    t = pts[pick, k] - pts[j, k]
                    acc += t * t
                dj = np.sqrt(acc)
                if dj < best[j]:
                    best[j] = dj
                    src[j] = pick
    return heads, tails, dists


def _mst_numpy(pts):
    n = pts.shape[0]
    heads = np.empty(n - 1, np.int64)
    tails = np.empty(n - 1, np.int64)
    dists = np.empty(n - 1, np.float64)
    in_tree = np.zeros(n, np.bool_)
    in_tree[0] = True
    best = np.sqrt(((pts - pts[0]) ** 2).sum(axis=1))
    src = np.zeros(n, np.int64)
    masked = best.copy()
    masked[0] = np.inf
    for step in range(n - 1):
        pick = int(np.argmin(masked))
        heads[step] = src[pick]
        tails[step] = pick
        dists[step] = masked[pick]
        in_tree[pick] = True
        masked[pick] = np.inf
        dj = np.sqrt(((pts - pts[pick]) ** 2).sum(axis=1))
        upd = ~in_tree & (dj < best)
        best[upd] = dj[upd]
        src[upd] = pick
        masked[upd] = dj[upd]
    return heads, tails, dists


def mst_edges(points, backend: str | None = None):
    """Prim MST over Euclidean points: (heads, tails, dists), n-1 edges.

    Edges are in tree-insertion order; sort ``dists`` for the merge sequence.
    """
    pts = _as_points(points)
    n = pts.shape[0]
    if n <= 1:
        e = np.empty(0, np.int64)
        return e, e.copy(), np.empty(0, np.float64)
    if _resolve(backend) == "numba":
        return _mst_numba(pts)
    return _mst_numpy(pts)


# ---------------------------------------------------------------------------
# DBSCAN labels. Neighborhoods use closed balls (d <= eps) and include the
# point itself in the min_pts core test. Noise label is -1. Border points
# join the first cluster that reaches them; scan order is ascending index in
# both backends, so the two paths yield identical labels.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _dbscan_numba(pts, eps, min_pts):  # pragma: no cover - via dispatch
    n = pts.shape[0]
    d = pts.shape[1]
    eps2 = eps * eps
    counts = np.zeros(n, np.int64)
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(d):
                t = pts[i, k] - pts[j, k]
                acc += t * t
            if acc <= eps2:
                counts[i] += 1
    indptr = np.zeros(n + 1, np.int64)
    for i in range(n):
        indptr[i + 1] = indptr[i] + counts[i]
    neigh = np.empty(indptr[n], np.int64)
    fill = indptr[:n].copy()
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(d):
                t = pts[i, k] - pts[j, k]
                acc += t * t
            if acc <= eps2:
                neigh[fill[i]] = j
                fill[i] += 1
    labels = np.full(n, -2, np.int64)
    queue = np.empty(n, np.int64)
    cluster = 0
    for i in range(n):
        if labels[i] != -2:
            continue
        if counts[i] < min_pts:
            labels[i] = -1
            continue
        labels[i] = cluster
        qh = 0
        qt = 0
        queue[qt] = i
        qt += 1
        while qh < qt:
            p = queue[qh]
            qh += 1
            if counts[p] < min_pts:
                continue
            for idx in range(indptr[p], indptr[p + 1]):
                q = neigh[idx]
                if labels[q] == -1:
                    labels[q] = cluster
                elif labels[q] == -2:
                    labels[q] = cluster
                    queue[qt] = q
                    qt += 1
        cluster += 1
    return labels


def _dbscan_numpy(pts, eps, min_pts):
    n = pts.shape[0]
    neigh = []
    chunk = 1024
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        d2 = ((pts[lo:hi, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        for r in range(hi - lo):
            neigh.append(np.flatnonzero(d2[r] <= eps * eps))
    counts = np.array([len(v) for v in neigh])
    labels = np.full(n, -2, np.int64)
    cluster = 0
    for i in range(n):
        if labels[i] != -2:
            continue
        if counts[i] < min_pts:
            labels[i] = -1
            continue
        labels[i] = cluster
        queue = [i]
        qh = 0
        while qh < len(queue):
            p = queue[qh]
            qh += 1
            if counts[p] < min_pts:
                continue
            for q in neigh[p]:
                if labels[q] == -1:
                    labels[q] = cluster
                elif labels[q] == -2:
                    labels[q] = cluster
                    queue.append(q)
        cluster += 1
    return labels


def dbscan_labels(points, eps: float, min_pts: int, backend: str | None = None):
    pts = _as_points(points)
    if pts.shape[0] == 0:
        return np.empty(0, np.int64)
    if _resolve(backend) == "numba":
        return _dbscan_numba(pts, float(eps), int(min_pts))
    return _dbscan_numpy(pts, float(eps), int(min_pts))


# ---------------------------------------------------------------------------
# Lloyd iterations for k-means. Assignment argmin breaks ties by lowest
# centroid index; empty clusters keep their previous centroid.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _lloyd_numba(pts, cent, max_iter):  # pragma: no cover - via dispatch
    n = pts.shape[0]
    d = pts.shape[1]
    k = cent.shape[0]
    labels = np.full(n, -1, np.int64)
    for _ in range(max_iter):
        changed = False
        for i in range(n):
            bj = 0
            bd = np.inf
            for j in range(k):
                acc = 0.0
                for m in range(d):
                    t = pts[i, m] - cent[j, m]
                    acc += t * t
                if acc < bd:
                    bd = acc
                    bj = j
            if labels[i] != bj:
                labels[i] = bj
                changed = True
        if not changed:
            break
        sums = np.zeros((k, d))
        cnt = np.zeros(k, np.int64)
        for i in range(n):
            cnt[labels[i]] += 1
            for m in range(d):
                sums[labels[i], m] += pts[i, m]
        for j in range(k):
            if cnt[j] > 0:
                for m in range(d):
                    cent[j, m] = sums[j, m] / cnt[j]
    inertia = 0.0
    for i in range(n):
        acc = 0.0
        for m in range(d):
            t = pts[i, m] - cent[labels[i], m]
            acc += t * t
        inertia += acc
    return labels, cent, inertia


def _lloyd_numpy(pts, cent, max_iter):
    labels = np.full(pts.shape[0], -1, np.int64)
    for _ in range(max_iter):
        d2 = ((pts[:, None, :] - cent[None, :, :]) ** 2).sum(axis=2)
        new = np.argmin(d2, axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
        for j in range(cent.shape[0]):
            mask = labels == j
            if mask.any():
                cent[j] = pts[mask].mean(axis=0)
    inertia = float(((pts - cent[labels]) ** 2).sum())
    return labels, cent, inertia


def lloyd(points, centroids, max_iter: int = 100, backend: str | None = None):
    """Run Lloyd iterations from the given centroids: (labels, centroids, inertia)."""
    pts = _as_points(points)
    cent = np.ascontiguousarray(centroids, dtype=np.float64).copy()
    if _resolve(backend) == "numba":
        labels, cent, inertia = _lloyd_numba(pts, cent, int(max_iter))
        return labels, cent, float(inertia)
    return _lloyd_numpy(pts, cent, int(max_iter))


# ---------------------------------------------------------------------------
# Multi-source BFS hop counts over a CSR adjacency. dist[v] = -1 when v is
# unreached within max_hops.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _bfs_numba(indptr, indices, sources, max_hops):  # pragma: no cover
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, np.int32)
    cur = np.empty(n, np.int64)
    nxt = np.empty(n, np.int64)
    ccount = 0
    for s in sources:
        if dist[s] < 0:
            dist[s] = 0
            cur[ccount] = s
            ccount += 1
    hop = 0
    while ccount > 0 and hop < max_hops:
        ncount = 0
        for ci in range(ccount):
            v = cur[ci]
            for idx in range(indptr[v], indptr[v + 1]):
                w = indices[idx]
                if dist[w] < 0:
                    dist[w] = hop + 1
                    nxt[ncount] = w
                    ncount += 1
        tmp = cur
        cur = nxt
        nxt = tmp
        ccount = ncount
        hop += 1
    return dist


def _bfs_numpy(indptr, indices, sources, max_hops):
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, np.int32)
    frontier = np.unique(sources)
    dist[frontier] = 0
    hop = 0
    while frontier.size and hop < max_hops:
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            break
        base = np.repeat(starts, counts)
        shift = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        nbrs = np.unique(indices[base + shift])
        frontier = nbrs[dist[nbrs] < 0]
        dist[frontier] = hop + 1
        hop += 1
    return dist


def bfs_hops(indptr, indices, sources, max_hops: int = 2**31 - 1, backend: str | None = None):
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    sources = np.ascontiguousarray(sources, dtype=np.int64)
    if sources.size == 0:
        return np.full(indptr.shape[0] - 1, -1, np.int32)
    if _resolve(backend) == "numba":
        return _bfs_numba(indptr, indices, sources, int(max_hops))
    return _bfs_numpy(indptr, indices, sources, int(max_hops))
