"""Clustering of ensemble members from a distance matrix, ARI scoring, and
the baseline distances (PCA on edge profiles, correlation cost, Frobenius)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .graphs import DiGraph

__all__ = [
    "Partition",
    "cluster",
    "ari",
    "pca_baseline",
    "correlation_cost",
    "correlation_sample_distances",
    "frobenius_distance",
]


@dataclass(frozen=True)
class Partition:
    """Cluster labeling of ensemble members."""

    labels: np.ndarray
    medoids: tuple[int, ...] | None
    cost: float

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=int).copy()
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)


def _check_distance_matrix(D) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise InputError("distance matrix must be square")
    if not np.all(np.isfinite(D)):
        raise InputError("distance matrix must be finite")
    if np.abs(np.diag(D)).max() > 1e-9:
        raise InputError("distance matrix must have (near-)zero diagonal")
    asym = np.abs(D - D.T).max()
    if asym > 1e-9:
        warnings.warn(
            f"distance matrix asymmetric by {asym:.3e}; symmetrizing as (D + D.T)/2",
            stacklevel=3,
        )
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return D


def _assign(D, medoids):
    sub = D[np.asarray(medoids)]
    labels = np.argmin(sub, axis=0)
    labels[np.asarray(medoids)] = np.arange(len(medoids))  # medoid owns its cluster
    return labels, float(np.min(sub, axis=0).sum())


def _pam_once(D, k, rng):
    p = D.shape[0]
    medoids = np.sort(rng.choice(p, size=k, replace=False))
    _, cost = _assign(D, medoids)
    improved = True
    while improved:
        improved = False
        best_cost, best_swap = cost, None
        in_set = np.zeros(p, dtype=bool)
        in_set[medoids] = True
        others = np.nonzero(~in_set)[0]
        for mi in range(k):
            rest = np.delete(medoids, mi)
            base = D[rest].min(axis=0) if rest.size else np.full(p, np.inf)
            for h in others:
                cand_cost = float(np.minimum(base, D[h]).sum())
                if cand_cost < best_cost - 1e-12:
                    best_cost, best_swap = cand_cost, (mi, h)
        if best_swap is not None:
            mi, h = best_swap
            medoids = np.sort(np.concatenate([np.delete(medoids, mi), [h]]))
            cost = best_cost
            improved = True
    labels, cost = _assign(D, medoids)
    return labels, tuple(int(m) for m in medoids), cost


def _classical_mds(D, dim):
    n = D.shape[0]
    J = np.eye(n) - np.ones((n, n)) / n
    B = -0.5 * J @ (D**2) @ J
    vals, vecs = np.linalg.eigh(B)
    order = np.argsort(vals)[::-1][:dim]
    vals = np.clip(vals[order], 0.0, None)
    return vecs[:, order] * np.sqrt(vals)[None, :]


def _lloyd_once(X, k, rng):
    p = X.shape[0]
    centers = X[np.sort(rng.choice(p, size=k, replace=False))].copy()
    labels = np.zeros(p, dtype=int)
    for _ in range(300):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        for c in range(k):
            members = new_labels == c
            if members.any():
                centers[c] = X[members].mean(axis=0)
            else:  # reseed an empty cluster on the farthest point
                far = d2.min(axis=1).argmax()
                centers[c] = X[far]
                new_labels[far] = c
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    cost = float(d2[np.arange(p), labels].sum())
    return labels, None, cost


def cluster(D, k: int, seed: int = 0, restarts: int = 8, method: str = "pam") -> Partition:
    """Partition the points of a distance matrix into k clusters.

    ``pam`` runs k-medoids (best-improvement swap search) directly on the
    matrix; ``mds-kmeans`` embeds via classical MDS and runs Lloyd k-means.
    Both take the best of ``restarts`` seeded initializations and are
    deterministic given (D, k, seed, restarts).
    """
    D = _check_distance_matrix(D)
    p = D.shape[0]
    if not 1 <= k <= p:
        raise InputError(f"k must be in [1, {p}], got {k}")
    if restarts < 1:
        raise InputError("restarts must be >= 1")
    if method == "pam":
        run = lambda rng: _pam_once(D, k, rng)  # noqa: E731
    elif method == "mds-kmeans":
        X = _classical_mds(D, min(p - 1, max(k, 2)) if p > 1 else 1)
        run = lambda rng: _lloyd_once(X, k, rng)  # noqa: E731
    else:
        raise InputError(f"unknown clustering method {method!r}")
    best = None
    for r in range(restarts):
        labels, medoids, cost = run(np.random.default_rng((seed, r)))
        if best is None or cost < best[2] - 1e-15:
            best = (labels, medoids, cost)
    labels, medoids, cost = best
    # relabel clusters by order of first appearance for stable output
    remap: dict[int, int] = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels.tolist()):
        if lab not in remap:
            remap[lab] = len(remap)
        out[i] = remap[lab]
    if medoids is not None:
        medoids = tuple(medoids[m] for m in sorted(remap, key=remap.get))
    return Partition(out, medoids, cost)


def ari(a, b) -> float:
    """Hubert-Arabie adjusted Rand index between two labelings."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise InputError("partitions must be equal-length vectors")
    n = a.size
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    M = np.zeros((ai.max() + 1, bi.max() + 1))
    np.add.at(M, (ai, bi), 1)

    def comb2(x):
        return x * (x - 1) / 2.0

    sum_cells = comb2(M).sum()
    sum_rows = comb2(M.sum(axis=1)).sum()
    sum_cols = comb2(M.sum(axis=0)).sum()
    total = comb2(n)
    expected = sum_rows * sum_cols / total if total > 0 else 0.0
    maximum = 0.5 * (sum_rows + sum_cols)
    if maximum == expected:
        return 1.0
    return float((sum_cells - expected) / (maximum - expected))


def pca_baseline(P) -> np.ndarray:
    """Pairwise Euclidean distances between samples after projecting the
    row-centered edge-weight matrix onto its top p-1 principal components.

    Row centering makes the matrix rank-deficient along the sample
    direction, so the projection is exact and the result equals the
    distances between centered columns.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[1] < 2:
        raise InputError("edge-weight matrix must be E x p with p >= 2")
    p = P.shape[1]
    centered = P - P.mean(axis=1, keepdims=True)
    U, _, _ = np.linalg.svd(centered, full_matrices=False)
    r = min(p - 1, U.shape[1])
    proj = U[:, :r].T @ centered  # r x p sample coordinates
    diff = proj[:, :, None] - proj[:, None, :]
    D = np.sqrt((diff**2).sum(axis=0))
    np.fill_diagonal(D, 0.0)
    return D


def _centered_cosine_distance(rows) -> tuple[np.ndarray, np.ndarray]:
    rows = np.asarray(rows, dtype=float)
    centered = rows - rows.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centered, axis=1)
    flat = norms <= 1e-300
    safe = np.where(flat, 1.0, norms)
    cos = (centered @ centered.T) / np.outer(safe, safe)
    D = 1.0 - cos
    # zero-variance convention: distance 1 to everything else, 0 to itself
    D[flat, :] = 1.0
    D[:, flat] = 1.0
    np.clip(D, 0.0, 2.0, out=D)
    np.fill_diagonal(D, 0.0)
    return D, np.nonzero(flat)[0]


def correlation_cost(P) -> np.ndarray:
    """Correlation distance (1 - Pearson) between all pairs of edge rows of
    the edge-weight matrix; used as a Wasserstein ground cost.

    Zero-variance rows get distance 1 to all other rows by convention (a
    warning reports them).
    """
    D, flat = _centered_cosine_distance(np.asarray(P, dtype=float))
    if flat.size:
        warnings.warn(
            f"{flat.size} zero-variance edge rows; correlation cost set to 1 by convention",
            stacklevel=2,
        )
    return D


def correlation_sample_distances(P) -> np.ndarray:
    """Correlation distance between sample columns of the edge-weight matrix
    (the direct-clustering reading of the correlation baseline)."""
    D, flat = _centered_cosine_distance(np.asarray(P, dtype=float).T)
    if flat.size:
        warnings.warn(
            f"{flat.size} zero-variance sample columns in correlation baseline",
            stacklevel=2,
        )
    return D


def frobenius_distance(g1: DiGraph, g2: DiGraph) -> float:
    """Frobenius norm of the adjacency difference over the union label set."""
    labels = sorted(set(g1.labels) | set(g2.labels))
    index = {lab: i for i, lab in enumerate(labels)}
    n = len(labels)
    A1 = np.zeros((n, n))
    A2 = np.zeros((n, n))
    for g, A in ((g1, A1), (g2, A2)):
        for s, t, w in g.edges():
            A[index[s], index[t]] = w
    return float(np.linalg.norm(A1 - A2))
