"""Seeded Lloyd's K-means with k-means++ seeding, plus an exact 1-D two-means split."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConstantInput, DegenerateInput, InvalidK

DEFAULT_MAX_ITERS = 300
DEFAULT_TOL = 1e-6
DEFAULT_N_INIT = 10


@dataclass(frozen=True, eq=False)
class KMeansResult:
    """Output of :func:`kmeans`.

    ``assignments`` are 0-based cluster labels. ``history`` is the inertia
    after every assignment step of the winning restart, so it is
    non-increasing and ends with ``inertia``.
    """

    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    iterations: int
    history: tuple[float, ...] = ()

    @property
    def K(self) -> int:
        return self.centroids.shape[0]


def _sq_distances(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    # explicit differences, no |x|^2 - 2xc + |c|^2 expansion: keeps exact zeros and ties
    out = np.empty((X.shape[0], C.shape[0]))
    for k in range(C.shape[0]):
        diff = X - C[k]
        out[:, k] = np.einsum("ij,ij->i", diff, diff)
    return out


def _assign(X, C):
    d2 = _sq_distances(X, C)
    labels = np.argmin(d2, axis=1)  # first minimum = lowest cluster index on ties
    return labels, d2[np.arange(X.shape[0]), labels]


def _plusplus_init(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    N = X.shape[0]
    centers = np.empty((K, X.shape[1]))
    centers[0] = X[rng.integers(N)]
    closest = _sq_distances(X, centers[:1])[:, 0]
    for k in range(1, K):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(N, p=closest / total)
        else:
            # squared distances underflowed; take the first point not yet a center
            fresh = [j for j in range(N) if not np.any(np.all(X[j] == centers[:k], axis=1))]
            if not fresh:
                raise InvalidK("k-means++ ran out of distinct points")
            idx = fresh[0]
        centers[k] = X[idx]
        d = X - centers[k]
        closest = np.minimum(closest, np.einsum("ij,ij->i", d, d))
    return centers


def _repair_empty(X, C, labels, dist):
    K = C.shape[0]
    for _ in range(K + 1):
        counts = np.bincount(labels, minlength=K)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            return C, labels, dist
        far = int(np.argmax(dist))
        C[empty[0]] = X[far]
        labels, dist = _assign(X, C)
    raise DegenerateInput("could not repair empty clusters")


def _means(X, labels, K, old):
    C = old.copy()
    for k in range(K):
        members = X[labels == k]
        if len(members):
            C[k] = members.sum(axis=0) / len(members)
    return C


def _lloyd(X, C, max_iters, tol):
    labels, dist = _assign(X, C)
    C, labels, dist = _repair_empty(X, C, labels, dist)
    inertia = float(dist.sum())
    history = [inertia]
    it = 0
    while it < max_iters:
        it += 1
        C_new = _means(X, labels, C.shape[0], C)
        labels_new, dist_new = _assign(X, C_new)
        C_new, labels_new, dist_new = _repair_empty(X, C_new, labels_new, dist_new)
        new_inertia = float(dist_new.sum())
        if new_inertia > inertia:
            # rounding noise only; keep the previous state
            break
        C, labels, dist = C_new, labels_new, dist_new
        decrease = inertia - new_inertia
        inertia = new_inertia
        history.append(inertia)
        if inertia == 0 or decrease <= tol * (inertia + decrease):
            break
    return labels, C, inertia, it, history


def kmeans(points, K: int, seed: int = 0, max_iters: int = DEFAULT_MAX_ITERS,
           tol: float = DEFAULT_TOL, n_init: int = DEFAULT_N_INIT) -> KMeansResult:
    """Cluster the rows of ``points`` into ``K`` groups.

    Each of ``n_init`` restarts is seeded with k-means++ from a child of
    ``seed`` and refined with Lloyd iterations until the relative inertia
    decrease drops below ``tol``. The restart with the lowest inertia wins
    (earliest restart on ties), so the result is a deterministic function of
    the inputs and ``seed``.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise DegenerateInput("points must be a nonempty 2-D array")
    if not np.all(np.isfinite(X)):
        raise DegenerateInput("points contain non-finite values")
    if K < 1:
        raise InvalidK(f"K must be >= 1, got {K}")
    n_distinct = np.unique(X, axis=0).shape[0]
    if K > n_distinct:
        raise InvalidK(f"K={K} exceeds the number of distinct points ({n_distinct})")

    if K == 1:
        C = (X.sum(axis=0) / X.shape[0])[None, :]
        labels, dist = _assign(X, C)
        inertia = float(dist.sum())
        return KMeansResult(labels, C, inertia, 0, (inertia,))

    best = None
    for child in np.random.SeedSequence(seed).spawn(max(1, n_init)):
        rng = np.random.default_rng(child)
        C0 = _plusplus_init(X, K, rng)
        run = _lloyd(X, C0, max_iters, tol)
        if best is None or run[2] < best[2]:
            best = run
    labels, C, inertia, it, history = best
    return KMeansResult(labels, C, inertia, it, tuple(history))


# --- exact two-means in one dimension ------------------------------------------

class TwoMeansSplit(NamedTuple):
    low: np.ndarray
    high: np.ndarray
    threshold: float


def split_inertia(values, low, high) -> float:
    """Within-group sum of squared deviations of a two-group split."""
    v = np.asarray(values, dtype=np.float64)
    total = 0.0
    for idx in (low, high):
        g = v[np.asarray(idx, dtype=np.intp)]
        if g.size:
            total += float(np.sum((g - g.mean()) ** 2))
    return total


def two_means_1d(values, seed: int = 0) -> TwoMeansSplit:
    """Globally optimal 2-means partition of scalar ``values``.

    In one dimension the optimal clusters are contiguous in sorted order, so
    scanning every split between distinct neighbouring values is exact. The
    result does not depend on ``seed``; the argument is kept so the call
    matches :func:`kmeans`. Indices in ``low``/``high`` are 0-based and
    ``high`` is the group with the larger mean.
    """
    del seed
    v = np.asarray(values, dtype=np.float64).ravel()
    if not np.all(np.isfinite(v)):
        raise DegenerateInput("values contain non-finite entries")
    if v.size < 2 or np.unique(v).size < 2:
        raise ConstantInput("two-means needs at least two distinct values")

    order = np.argsort(v, kind="stable")
    s = v[order]
    N = s.size
    csum = np.cumsum(s)
    csq = np.cumsum(s * s)
    splits = np.flatnonzero(s[1:] != s[:-1]) + 1
    n1 = splits.astype(np.float64)
    n2 = N - n1
    s1 = csum[splits - 1]
    s2 = csum[-1] - s1
    q1 = csq[splits - 1]
    q2 = csq[-1] - q1
    cost = (q1 - s1 * s1 / n1) + (q2 - s2 * s2 / n2)
    # prefix-sum costs can misrank near-ties; re-score those directly
    slack = 1e-9 * (csq[-1] + 1.0)
    near = splits[cost <= cost.min() + slack]
    exact = [split_inertia(s, np.arange(j), np.arange(j, N)) for j in near]
    best_split = int(near[int(np.argmin(exact))])

    low = np.sort(order[:best_split])
    high = np.sort(order[best_split:])
    threshold = 0.5 * (v[low].mean() + v[high].mean())
    return TwoMeansSplit(low, high, float(threshold))
