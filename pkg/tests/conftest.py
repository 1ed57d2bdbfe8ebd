"""Shared helpers for the test suite."""

import numpy as np
import pytest

from digraph_ot.graphs import DiGraph, analyze_reachability


def random_digraph(rng, n, density=0.5, weighted=True):
    """Random directed graph; may or may not be connected."""
    W = (rng.random((n, n)) < density).astype(float)
    np.fill_diagonal(W, 0.0)
    if weighted:
        W *= rng.uniform(0.2, 2.0, size=(n, n))
    labels = tuple(f"v{i}" for i in range(n))
    return DiGraph(labels, W)


def random_strongly_connected(rng, n, density=0.4, weighted=True):
    """Random digraph guaranteed strongly connected via an embedded cycle."""
    while True:
        g = random_digraph(rng, n, density, weighted)
        W = np.array(g.weights)
        perm = rng.permutation(n)
        for a, b in zip(perm, np.roll(perm, -1)):
            if W[a, b] == 0:
                W[a, b] = rng.uniform(0.2, 2.0) if weighted else 1.0
        g = DiGraph(g.labels, W)
        if analyze_reachability(g).strongly_connected:
            return g


def random_connected_symmetric(rng, n, density=0.5):
    """Random connected graph with symmetric weights."""
    while True:
        W = np.triu((rng.random((n, n)) < density) * rng.uniform(0.2, 2.0, (n, n)), 1)
        W = W + W.T
        g = DiGraph(tuple(f"v{i}" for i in range(n)), W)
        if analyze_reachability(g).strongly_connected:
            return g


def random_irreducible_stochastic(rng, n, density=0.6):
    """Row-stochastic irreducible transition matrix with some zero entries."""
    g = random_strongly_connected(rng, n, density)
    A = np.array(g.weights)
    return A / A.sum(axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
