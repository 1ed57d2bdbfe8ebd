"""Optimal-transport solvers: exact earth-mover LP and Gromov-Wasserstein.

The earth-mover problem is solved exactly with the HiGHS dual simplex, which
returns a vertex plan and the dual potentials.  The Gromov-Wasserstein
solver is a conditional-gradient method with squared-difference loss, exact
line search on each segment, and seeded multi-start; it handles asymmetric
cost matrices (the gradient keeps both orientation terms).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
from scipy.optimize import linprog

from .errors import InputError, NumericalError

__all__ = [
    "TransportPlan",
    "GwOptions",
    "normalize_marginal",
    "emd",
    "gromov_wasserstein",
    "gw_objective",
]

MARGINAL_TOL = 1e-9


@dataclass(frozen=True)
class TransportPlan:
    """Coupling matrix with its objective value and solver diagnostics."""

    gamma: np.ndarray
    objective: float
    converged: bool = True
    n_iter: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float).copy()
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)


def normalize_marginal(w) -> np.ndarray:
    """Validate a nonnegative mass vector and scale it to sum 1."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1:
        raise InputError("marginal must be a vector")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise InputError("marginal must be finite and nonnegative")
    total = w.sum()
    if total <= 0:
        raise InputError("marginal has zero total mass")
    return w / total


def _check_plan_marginals(gamma: np.ndarray, mu: np.ndarray, nu: np.ndarray) -> None:
    row_err = np.abs(gamma.sum(axis=1) - mu).max()
    col_err = np.abs(gamma.sum(axis=0) - nu).max()
    if max(row_err, col_err) > MARGINAL_TOL:
        raise NumericalError(
            f"transport plan violates marginals (row {row_err:.3e}, col {col_err:.3e})"
        )


def _transport_lp(mu: np.ndarray, nu: np.ndarray, C: np.ndarray):
    """Exact transportation LP; cost may have any sign. Returns (plan, duals)."""
    m, n = C.shape
    data = np.ones(2 * m * n)
    cols = np.tile(np.arange(m * n), 2)
    rows = np.concatenate([np.repeat(np.arange(m), n), m + np.tile(np.arange(n), m)])
    A_eq = scipy.sparse.csr_matrix((data, (rows, cols)), shape=(m + n, m * n))
    b_eq = np.concatenate([mu, nu])
    res = linprog(C.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise NumericalError(f"transport LP failed: {res.message}")
    plan = res.x.reshape(m, n)
    duals = np.asarray(res.eqlin.marginals)
    return plan, duals[:m], duals[m:]


def emd(mu, nu, C) -> TransportPlan:
    """Exact earth-mover distance between two mass vectors under cost C.

    Requires matched total mass and a finite nonnegative cost matrix; the
    returned plan is a vertex of the transport polytope and carries the LP
    dual potentials in its metadata.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    C = np.asarray(C, dtype=float)
    if C.shape != (mu.size, nu.size):
        raise InputError(f"cost shape {C.shape} does not match marginals {mu.size}x{nu.size}")
    if not np.all(np.isfinite(C)) or np.any(C < 0):
        raise InputError("cost matrix must be finite and nonnegative")
    if np.any(mu < 0) or np.any(nu < 0):
        raise InputError("marginals must be nonnegative")
    if abs(mu.sum() - nu.sum()) > MARGINAL_TOL:
        raise InputError(
            f"marginal mass mismatch: {mu.sum():.12g} vs {nu.sum():.12g}"
        )
    plan, du, dv = _transport_lp(mu, nu, C)
    _check_plan_marginals(plan, mu, nu)
    objective = float((plan * C).sum())
    return TransportPlan(plan, objective, meta={"dual_row": du, "dual_col": dv})


# ---------------------------------------------------------------------------
# Gromov-Wasserstein


@dataclass(frozen=True)
class GwOptions:
    n_starts: int = 4
    max_iter: int = 1000
    tol: float = 1e-9
    seed: int = 0


def _gw_tensor(C1: np.ndarray, C2: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Matrix M with M[i, j] = sum_kl (C1[i, k] - C2[j, l])^2 T[k, l].

    Uses T's actual marginals, so it is valid for difference directions
    (zero-marginal T) during the line search.
    """
    r = T.sum(axis=1)
    c = T.sum(axis=0)
    return (C1**2) @ r[:, None] + ((C2**2) @ c)[None, :] - C1 @ T @ (2.0 * C2).T


def gw_objective(C1, C2, T) -> float:
    """Quartic Gromov-Wasserstein objective of a coupling T."""
    C1 = np.asarray(C1, dtype=float)
    C2 = np.asarray(C2, dtype=float)
    T = np.asarray(T, dtype=float)
    return float((_gw_tensor(C1, C2, T) * T).sum())


def _gw_gradient(C1, C2, C1t, C2t, T) -> np.ndarray:
    return _gw_tensor(C1, C2, T) + _gw_tensor(C1t, C2t, T)


def _ipf_plan(M: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Scale a positive matrix to the (p, q) transport polytope."""
    G = M.copy()
    for _ in range(1000):
        G *= (p / G.sum(axis=1))[:, None]
        G *= (q / G.sum(axis=0))[None, :]
        if np.abs(G.sum(axis=1) - p).max() < 1e-13:
            break
    return G


def _gw_single_start(C1, C2, C1t, C2t, p, q, G, opts: GwOptions):
    f_val = float((_gw_tensor(C1, C2, G) * G).sum())
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        grad = _gw_gradient(C1, C2, C1t, C2t, G)
        vertex, _, _ = _transport_lp(p, q, grad)
        E = vertex - G
        gap = float((grad * E).sum())
        if gap >= -1e-15:
            converged = True
            break
        a = float((_gw_tensor(C1, C2, E) * E).sum())
        b = float((_gw_tensor(C1, C2, E) * G).sum() + (_gw_tensor(C1, C2, G) * E).sum())
        if a > 0:
            t = min(1.0, max(0.0, -b / (2.0 * a)))
        else:
            t = 1.0 if a + b < 0 else 0.0
        if t == 0.0:
            converged = True
            break
        G = G + t * E
        f_new = f_val + t * b + t * t * a
        if f_val - f_new <= opts.tol * max(abs(f_val), 1e-16):
            f_val = f_new
            converged = True
            break
        f_val = f_new
    # re-evaluate to drop line-search accumulation error
    f_val = float((_gw_tensor(C1, C2, G) * G).sum())
    return G, f_val, converged, it


def gromov_wasserstein(C1, C2, p, q, opts: GwOptions | None = None) -> TransportPlan:
    """Local minimizer of the Gromov-Wasserstein objective between two cost
    matrices with node masses p and q.

    Conditional gradient with exact segment line search; the first start is
    the product coupling p q^T, the remaining ``opts.n_starts - 1`` are
    seeded random feasible plans.  The best objective wins; the reported
    objective is the full quartic value at the returned plan.
    """
    opts = opts or GwOptions()
    C1 = np.asarray(C1, dtype=float)
    C2 = np.asarray(C2, dtype=float)
    if not (np.all(np.isfinite(C1)) and np.all(np.isfinite(C2))):
        raise InputError("cost matrices must be finite")
    if C1.ndim != 2 or C1.shape[0] != C1.shape[1] or C2.ndim != 2 or C2.shape[0] != C2.shape[1]:
        raise InputError("cost matrices must be square")
    p = normalize_marginal(p)
    q = normalize_marginal(q)
    if p.size != C1.shape[0] or q.size != C2.shape[0]:
        raise InputError("marginal sizes must match cost matrices")
    if opts.n_starts < 1:
        raise InputError("n_starts must be >= 1")
    C1t, C2t = C1.T.copy(), C2.T.copy()
    rng = np.random.default_rng(opts.seed)
    starts = [np.outer(p, q)]
    for _ in range(opts.n_starts - 1):
        starts.append(_ipf_plan(rng.random((p.size, q.size)) + 0.1, p, q))
    best = None
    for si, G0 in enumerate(starts):
        G, f_val, conv, it = _gw_single_start(C1, C2, C1t, C2t, p, q, G0, opts)
        if best is None or f_val < best[1]:
            best = (G, f_val, conv, it, si)
    G, f_val, conv, it, si = best
    _check_plan_marginals(G, p, q)
    return TransportPlan(
        G, f_val, converged=conv, n_iter=it, meta={"start_index": si, "n_starts": opts.n_starts}
    )
