"""Node-to-node distance matrices for directed graphs.

Two metrics are provided: a resistance distance generalized to digraphs via a
grounded-Laplacian Lyapunov equation, and a hitting-time distance derived
from the Markov chain of the row-normalized weights.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import InputError, NumericalError
from .graphs import DiGraph, analyze_reachability

__all__ = [
    "DistanceMatrix",
    "GroundedSystem",
    "ChainStatistics",
    "grounding_matrix",
    "grounded_system",
    "grd_matrix",
    "transition_matrix",
    "stationary_distribution",
    "hitting_probability_matrix",
    "chain_statistics",
    "htd_matrix",
    "write_distance_matrix",
    "read_distance_matrix",
]

LYAPUNOV_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class DistanceMatrix:
    """N x N node-to-node cost matrix with provenance metadata."""

    values: np.ndarray
    metric_kind: str  # "grd" or "htd"
    labels: tuple[str, ...]
    beta: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "labels", tuple(self.labels))


@dataclass(frozen=True)
class GroundedSystem:
    """Intermediate quantities of the resistance-distance computation."""

    Q: np.ndarray
    L_tilde: np.ndarray
    Sigma: np.ndarray
    X: np.ndarray
    residual: float


@dataclass(frozen=True)
class ChainStatistics:
    """Markov-chain quantities behind the hitting-time distance."""

    P: np.ndarray
    pi: np.ndarray
    qhit: np.ndarray
    t_beta: np.ndarray
    beta: float


def grounding_matrix(n: int, construction: str = "householder") -> np.ndarray:
    """Deterministic (n-1) x n grounding matrix.

    The rows are an orthonormal basis of the subspace orthogonal to the
    all-ones vector, so Q @ 1 = 0, Q @ Q.T = I and Q.T @ Q = I - 11^T/n.
    Two constructions are offered; any valid choice yields the same
    distances downstream.
    """
    if n < 2:
        raise InputError(f"grounding matrix needs n >= 2, got {n}")
    v = np.full(n, 1.0 / np.sqrt(n))
    if construction == "householder":
        u = v.copy()
        u[0] -= 1.0
        H = np.eye(n) - 2.0 * np.outer(u, u) / (u @ u)
        return H[1:, :]
    if construction == "gram_schmidt":
        basis = [v]
        for i in range(1, n):
            w = np.zeros(n)
            w[i] = 1.0
            for q in basis:
                w -= (w @ q) * q
            basis.append(w / np.linalg.norm(w))
        return np.array(basis[1:])
    raise InputError(f"unknown grounding construction {construction!r}")


def _solve_lyapunov_kron(Lt: np.ndarray) -> np.ndarray:
    """Reference solver by Kronecker vectorization; O(m^6), small m only."""
    m = Lt.shape[0]
    K = np.kron(np.eye(m), Lt) + np.kron(Lt, np.eye(m))
    rhs = np.eye(m).flatten(order="F")
    try:
        vec = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Lyapunov Kronecker system is singular: {exc}") from exc
    return vec.reshape((m, m), order="F")


def _solve_lyapunov(Lt: np.ndarray, solver: str) -> np.ndarray:
    m = Lt.shape[0]
    if solver == "kron" or (solver == "auto" and m <= 2):
        return _solve_lyapunov_kron(Lt)
    if solver in ("auto", "bartels_stewart"):
        try:
            return scipy.linalg.solve_continuous_lyapunov(Lt, np.eye(m))
        except Exception as exc:
            raise NumericalError(f"Lyapunov solve failed: {exc}") from exc
    raise InputError(f"unknown Lyapunov solver {solver!r}")


def grounded_system(g: DiGraph, solver: str = "auto") -> GroundedSystem:
    """Grounded Laplacian system for the resistance distance.

    Requires a globally reachable node; otherwise the Lyapunov solution is
    not unique and the caller should regularize first.
    """
    n = g.n_nodes
    if n < 2:
        raise InputError("distance computation needs at least 2 nodes")
    reach = analyze_reachability(g)
    if not reach.has_globally_reachable_node:
        raise InputError(
            "graph has no globally reachable node; apply regularize(g, alpha) first"
        )
    A = np.asarray(g.weights, dtype=float)
    L = np.diag(A.sum(axis=1)) - A
    Q = grounding_matrix(n)
    Lt = Q @ L @ Q.T
    Sigma = _solve_lyapunov(Lt, solver)
    residual = float(np.linalg.norm(Lt @ Sigma + Sigma @ Lt.T - np.eye(n - 1)))
    if not np.isfinite(residual) or residual > LYAPUNOV_RESIDUAL_TOL:
        eig = np.linalg.eigvals(Lt)
        pair_min = np.abs(eig[:, None] + eig[None, :].conj()).min()
        raise NumericalError(
            f"Lyapunov residual {residual:.3e} exceeds {LYAPUNOV_RESIDUAL_TOL:.0e} "
            f"(closest eigenvalue pairing |l_i + conj(l_j)| = {pair_min:.3e})"
        )
    Sigma = 0.5 * (Sigma + Sigma.T)
    X = 2.0 * Q.T @ Sigma @ Q
    X = 0.5 * (X + X.T)
    return GroundedSystem(Q, Lt, Sigma, X, residual)


def grd_matrix(g: DiGraph, solver: str = "auto") -> DistanceMatrix:
    """Generalized resistance distance matrix of a directed graph."""
    system = grounded_system(g, solver=solver)
    X = system.X
    dX = np.diag(X)
    sq = dX[:, None] + dX[None, :] - 2.0 * X
    np.clip(sq, 0.0, None, out=sq)
    values = np.sqrt(sq)
    np.fill_diagonal(values, 0.0)
    meta = {"lyapunov_residual": system.residual}
    if "regularize_alpha" in g.meta:
        meta["alpha"] = g.meta["regularize_alpha"]
    return DistanceMatrix(values, "grd", g.labels, meta=meta)


# ---------------------------------------------------------------------------
# Hitting-time distance


def transition_matrix(g: DiGraph) -> np.ndarray:
    """Row-stochastic P from the weights; rejects zero out-degree rows."""
    A = np.asarray(g.weights, dtype=float)
    out = A.sum(axis=1)
    dead = np.nonzero(out <= 0)[0]
    if dead.size:
        names = ", ".join(g.labels[i] for i in dead.tolist()[:5])
        raise InputError(
            f"nodes with zero out-degree ({names}); apply regularize(g, alpha) first"
        )
    return A / out[:, None]


def _check_stochastic(P: np.ndarray) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise InputError("transition matrix must be square")
    if np.any(P < 0):
        raise InputError("transition matrix must be nonnegative")
    if np.abs(P.sum(axis=1) - 1.0).max() > 1e-8:
        raise InputError("transition matrix rows must sum to 1")
    return P


def _check_irreducible(P: np.ndarray) -> None:
    from .graphs import _strongly_connected_components

    if len(_strongly_connected_components(P > 0)) != 1:
        raise InputError("transition matrix is reducible; regularize the graph first")


def stationary_distribution(P) -> np.ndarray:
    """Unique stationary distribution of an irreducible chain."""
    P = _check_stochastic(P)
    _check_irreducible(P)
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"stationary distribution solve failed: {exc}") from exc
    if pi.min() <= 0:
        raise NumericalError("stationary distribution has non-positive entries")
    pi /= pi.sum()
    resid = np.abs(pi @ P - pi).max()
    if resid > 1e-10:
        raise NumericalError(f"stationary residual {resid:.3e} exceeds 1e-10")
    return pi


def hitting_probability_matrix(P, method: str = "fundamental") -> np.ndarray:
    """Matrix of probabilities of hitting column node before returning to the
    row node.

    ``fundamental`` inverts one fundamental matrix and applies the
    commute-time identity; ``absorbing`` solves the per-pair first-step
    systems (reference path, quadratic number of solves).
    """
    P = _check_stochastic(P)
    _check_irreducible(P)
    if method == "absorbing":
        Q = _kernels.hitting_probabilities_absorbing(P)
    elif method == "fundamental":
        n = P.shape[0]
        pi = stationary_distribution(P)
        try:
            Z = np.linalg.inv(np.eye(n) - P + np.outer(np.ones(n), pi))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"fundamental matrix is singular: {exc}") from exc
        zd = np.diag(Z)
        # mean first-passage times, then the visits-per-commute identity
        E = (zd[None, :] - Z) / pi[None, :]
        with np.errstate(divide="ignore"):
            Q = 1.0 / (pi[:, None] * (E + E.T))
        np.fill_diagonal(Q, 1.0)
    else:
        raise InputError(f"unknown hitting method {method!r}")
    return np.clip(Q, 0.0, 1.0)


def chain_statistics(g: DiGraph, beta: float = 1.0, method: str = "fundamental") -> ChainStatistics:
    """Transition matrix, stationary distribution, hitting probabilities and
    the normalized hitting-time matrix of the graph's random walk."""
    reach = analyze_reachability(g)
    if not reach.strongly_connected:
        raise InputError("graph is not strongly connected; apply regularize(g, alpha) first")
    P = transition_matrix(g)
    pi = stationary_distribution(P)
    qhit = hitting_probability_matrix(P, method=method)
    T = (pi[:, None] ** beta) / (pi[None, :] ** (1.0 - beta)) * qhit
    np.fill_diagonal(T, 1.0)
    return ChainStatistics(P, pi, qhit, T, float(beta))


def htd_matrix(g: DiGraph, beta: float = 1.0, method: str = "fundamental") -> DistanceMatrix:
    """Hitting-time distance matrix, the negative log of the normalized
    hitting-time matrix.

    The intended range is beta in (0.5, 1]; other values (notably the 0.5
    boundary) are computed with a warning.  Negative entries, which can
    appear for skewed stationary distributions, are reported in the
    metadata rather than clamped.
    """
    if g.n_nodes < 2:
        raise InputError("distance computation needs at least 2 nodes")
    beta = float(beta)
    if not np.isfinite(beta) or beta <= 0.0:
        raise InputError(f"beta must be positive and finite, got {beta}")
    if not (0.5 < beta <= 1.0):
        warnings.warn(
            f"beta={beta} is outside (0.5, 1]; proceeding (0.5 is the pseudo-metric boundary)",
            stacklevel=2,
        )
    stats = chain_statistics(g, beta=beta, method=method)
    if np.any(stats.t_beta <= 0):
        raise NumericalError("normalized hitting-time matrix has non-positive entries")
    values = -np.log(stats.t_beta)
    values += 0.0  # normalize -0.0 entries
    np.fill_diagonal(values, 0.0)
    meta: dict = {}
    if "regularize_alpha" in g.meta:
        meta["alpha"] = g.meta["regularize_alpha"]
    neg = int(np.count_nonzero(values < 0))
    if neg:
        meta["n_negative_entries"] = neg
        warnings.warn(
            f"hitting-time distance has {neg} negative entries (beta={beta})",
            stacklevel=2,
        )
    return DistanceMatrix(values, "htd", g.labels, beta=beta, meta=meta)


# ---------------------------------------------------------------------------
# Serialization: CSV matrix plus JSON sidecar


def _sidecar_path(csv_path: Path) -> Path:
    return csv_path.with_name(csv_path.stem + ".meta.json")


def write_distance_matrix(dm: DistanceMatrix, csv_path) -> Path:
    """Write the matrix as CSV (rows/columns in label order) and a JSON
    sidecar with the metric metadata; returns the sidecar path."""
    csv_path = Path(csv_path)
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([""] + list(dm.labels))
        for lab, row in zip(dm.labels, dm.values):
            writer.writerow([lab] + [f"{x:.17g}" for x in row])
    sidecar = _sidecar_path(csv_path)
    payload = {
        "metric_kind": dm.metric_kind,
        "beta": dm.beta,
        "alpha": dm.meta.get("alpha"),
        "meta": {k: v for k, v in dm.meta.items() if k != "alpha"},
    }
    sidecar.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return sidecar


def read_distance_matrix(csv_path) -> DistanceMatrix:
    csv_path = Path(csv_path)
    with csv_path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        labels = tuple(header[1:])
        rows = []
        for rec in reader:
            if not rec:
                continue
            rows.append([float(x) for x in rec[1:]])
    values = np.array(rows)
    if values.shape != (len(labels), len(labels)):
        raise InputError(f"{csv_path}: matrix is not square over its labels")
    sidecar = _sidecar_path(csv_path)
    metric_kind, beta, meta = "unknown", None, {}
    if sidecar.exists():
        payload = json.loads(sidecar.read_text(encoding="utf-8"))
        metric_kind = payload.get("metric_kind", "unknown")
        beta = payload.get("beta")
        meta = dict(payload.get("meta", {}))
        if payload.get("alpha") is not None:
            meta["alpha"] = payload["alpha"]
    return DistanceMatrix(values, metric_kind, labels, beta=beta, meta=meta)
