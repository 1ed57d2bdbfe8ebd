"""Hot numeric kernels: numba-jitted loops with pure-numpy fallbacks.

The jitted path is used when numba imports cleanly and the environment
variable ``DIGRAPH_OT_DISABLE_NUMBA`` is unset/empty; setting it to ``1``
(or any non-empty value) forces the numpy fallbacks.  Both paths are
deterministic given a seed, but the Monte-Carlo fallback uses a different
(vectorized) sampling order, so the two estimates agree only statistically.
``benchmarks/bench_kernels.py`` compares the two.
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

        if args and callable(args[0]):
            return args[0]
        return wrap


_DISABLE_ENV = "DIGRAPH_OT_DISABLE_NUMBA"


def numba_active() -> bool:
    return HAVE_NUMBA and not os.environ.get(_DISABLE_ENV, "")


# ---------------------------------------------------------------------------
# Monte-Carlo estimate of P_i[ hit j before returning to i ]


@njit(cache=True)
def _mc_hit_loop(cum, start, target, n_walks, seed, max_steps):
    np.random.seed(seed)
    n = cum.shape[0]
    hits = 0
    timeouts = 0
    for _ in range(n_walks):
        state = start
        resolved = False
        for _ in range(max_steps):
            u = np.random.random()
            nxt = n - 1
            for k in range(n - 1):
                if u < cum[state, k]:
                    nxt = k
                    break
            state = nxt
            if state == target:
                hits += 1
                resolved = True
                break
            if state == start:
                resolved = True
                break
        if not resolved:
            timeouts += 1
    return hits, timeouts


def _mc_hit_vectorized(cum, start, target, n_walks, seed, max_steps):
    rng = np.random.default_rng(seed)
    states = np.full(n_walks, start, dtype=np.int64)
    hits = 0
    alive = n_walks
    for _ in range(max_steps):
        u = rng.random(alive)
        states = (u[:, None] < cum[states]).argmax(axis=1)
        hit = states == target
        hits += int(hit.sum())
        cont = ~hit & (states != start)
        states = states[cont]
        alive = states.size
        if alive == 0:
            return hits, 0
    return hits, alive


def mc_hit_before_return(P, start, target, n_walks, seed=0, max_steps=1_000_000):
    """Fraction of random walks from ``start`` that reach ``target`` before
    returning to ``start``.

    Returns (estimate, n_timeouts); timeouts are walks cut off at
    ``max_steps`` without resolving.
    """
    P = np.ascontiguousarray(P, dtype=float)
    if start == target:
        return 1.0, 0
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0
    if numba_active():
        hits, timeouts = _mc_hit_loop(cum, start, target, n_walks, seed, max_steps)
    else:
        hits, timeouts = _mc_hit_vectorized(cum, start, target, n_walks, seed, max_steps)
    return hits / n_walks, timeouts


# ---------------------------------------------------------------------------
# Per-pair absorbing-system hitting probabilities
#
# For each ordered pair (i, j) solve the first-step system
#     h[j] = 1,  h[i] = 0,  h[k] = sum_l P[k, l] h[l]  for k not in {i, j}
# and set Q[i, j] = sum_k P[i, k] h[k].


@njit(cache=True)
def _hitting_absorbing_loop(P):
    n = P.shape[0]
    Q = np.ones((n, n))
    keep = np.empty(n - 2, dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            m = 0
            for k in range(n):
                if k != i and k != j:
                    keep[m] = k
                    m += 1
            A = np.empty((m, m))
            b = np.empty(m)
            for a in range(m):
                ka = keep[a]
                for c in range(m):
                    A[a, c] = -P[ka, keep[c]]
                A[a, a] += 1.0
                b[a] = P[ka, j]
            if m > 0:
                h = np.linalg.solve(A, b)
                acc = P[i, j]
                for a in range(m):
                    acc += P[i, keep[a]] * h[a]
                Q[i, j] = acc
            else:
                Q[i, j] = P[i, j]
    return Q


def _hitting_absorbing_numpy(P):
    n = P.shape[0]
    Q = np.ones((n, n))
    idx = np.arange(n)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            keep = idx[(idx != i) & (idx != j)]
            A = np.eye(keep.size) - P[np.ix_(keep, keep)]
            h = np.linalg.solve(A, P[keep, j]) if keep.size else np.empty(0)
            Q[i, j] = P[i, j] + P[i, keep] @ h
    return Q


def hitting_probabilities_absorbing(P):
    """Hitting-probability matrix via one absorbing linear system per ordered
    pair; diagonal is 1 by convention."""
    P = np.ascontiguousarray(P, dtype=float)
    if numba_active():
        return _hitting_absorbing_loop(P)
    return _hitting_absorbing_numpy(P)
