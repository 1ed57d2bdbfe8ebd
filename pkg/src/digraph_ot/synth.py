"""Synthetic directed-graph generators: cycle-of-cycles with edge flips, and
directed stochastic block model ensembles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .graphs import DiGraph, from_edge_list

__all__ = [
    "DsbmSpec",
    "cycle_of_cycles",
    "flip_edge",
    "figure_flip_triple",
    "dsbm_graph",
    "dsbm_ensemble",
]


def cycle_of_cycles(n_cycles: int = 4, cycle_len: int = 4) -> DiGraph:
    """Directed cycles joined cyclically by one global edge per cycle.

    Cycle ``c`` has nodes ``c{c}n0..c{c}n{L-1}`` with unit-weight edges
    around the cycle; node 0 of each cycle emits a unit-weight edge to node
    0 of the next cycle.  The result is strongly connected.
    """
    if n_cycles < 2 or cycle_len < 2:
        raise InputError("need n_cycles >= 2 and cycle_len >= 2")
    rows = []
    for c in range(n_cycles):
        for i in range(cycle_len):
            rows.append((f"c{c}n{i}", f"c{c}n{(i + 1) % cycle_len}", 1.0))
    for c in range(n_cycles):
        rows.append((f"c{c}n0", f"c{(c + 1) % n_cycles}n0", 1.0))
    return from_edge_list(rows)


def flip_edge(g: DiGraph, edge: tuple[str, str]) -> DiGraph:
    """Move the weight of (src, dst) onto the reverse edge (dst, src).

    Rejected when the edge is absent or the reverse edge already carries
    weight (the flip would merge weights).
    """
    src, dst = edge
    i, j = g.index(src), g.index(dst)
    w = float(g.weights[i, j])
    if w <= 0:
        raise InputError(f"edge ({src}, {dst}) is absent, cannot flip")
    if g.weights[j, i] > 0:
        raise InputError(f"reverse edge ({dst}, {src}) already present, flip would merge weights")
    weights = np.array(g.weights)
    weights[i, j] = 0.0
    weights[j, i] = w
    return DiGraph(g.labels, weights, dict(g.meta))


def figure_flip_triple(n_cycles: int = 4, cycle_len: int = 4):
    """(original, local flip, global flip) triple for the flip experiment.

    The local flip reverses the in-cycle edge c0n1 -> c0n2; the global flip
    reverses the between-cycle edge c0n0 -> c1n0.  Undirected views of all
    three graphs coincide.
    """
    if cycle_len < 3 or n_cycles < 3:
        raise InputError("flip experiment needs cycle_len >= 3 and n_cycles >= 3")
    original = cycle_of_cycles(n_cycles, cycle_len)
    local = flip_edge(original, ("c0n1", "c0n2"))
    global_ = flip_edge(original, ("c0n0", "c1n0"))
    return original, local, global_


@dataclass(frozen=True)
class DsbmSpec:
    """Parameters of a directed stochastic block model.

    ``direction_bias`` is the probability that an inter-block edge points
    from the lower-indexed block to the higher one; intra-block edges are
    oriented uniformly.  Undirected statistics are therefore independent of
    the bias.
    """

    block_sizes: tuple[int, ...]
    p_intra: float
    p_inter: float
    direction_bias: float = 0.5
    weight_dist: str = "unit"  # "unit" or "uniform"
    weight_low: float = 1.0
    weight_high: float = 1.0
    seed: int | tuple[int, ...] = 0

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.block_sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise InputError("need at least 2 blocks of positive size")
        object.__setattr__(self, "block_sizes", sizes)
        for name in ("p_intra", "p_inter"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InputError(f"{name} must be in [0, 1], got {v}")
        if not 0.5 <= self.direction_bias <= 1.0:
            raise InputError(f"direction_bias must be in [0.5, 1], got {self.direction_bias}")
        if self.weight_dist not in ("unit", "uniform"):
            raise InputError(f"weight_dist must be 'unit' or 'uniform', got {self.weight_dist!r}")
        if self.weight_dist == "uniform" and not 0.0 < self.weight_low <= self.weight_high:
            raise InputError("uniform weights need 0 < weight_low <= weight_high")

    @property
    def n_nodes(self) -> int:
        return sum(self.block_sizes)


def dsbm_graph(spec: DsbmSpec, rng: np.random.Generator) -> DiGraph:
    """Sample one digraph from the block model."""
    n = spec.n_nodes
    width = len(str(n - 1))
    labels = tuple(f"n{i:0{width}d}" for i in range(n))
    block = np.repeat(np.arange(len(spec.block_sizes)), spec.block_sizes)
    weights = np.zeros((n, n))
    for u in range(n):
        for v in range(u + 1, n):
            same = block[u] == block[v]
            if rng.random() >= (spec.p_intra if same else spec.p_inter):
                continue
            forward_prob = 0.5 if same else spec.direction_bias
            src, dst = (u, v) if rng.random() < forward_prob else (v, u)
            if spec.weight_dist == "uniform":
                w = rng.uniform(spec.weight_low, spec.weight_high)
            else:
                w = 1.0
            weights[src, dst] = w
    return DiGraph(labels, weights)


def _entropy(seed, *rest) -> tuple[int, ...]:
    parts = tuple(int(s) for s in seed) if isinstance(seed, (tuple, list)) else (int(seed),)
    return parts + tuple(int(r) for r in rest)


def dsbm_ensemble(specs) -> tuple[list[DiGraph], list[int]]:
    """Sample an ensemble from (spec, count) pairs; the class label of each
    graph is the index of its spec.  Bit-reproducible for fixed seeds."""
    specs = list(specs)
    if not specs:
        raise InputError("dsbm_ensemble needs at least one (spec, count) pair")
    graphs: list[DiGraph] = []
    labels: list[int] = []
    for class_idx, (spec, count) in enumerate(specs):
        if count < 1:
            raise InputError(f"spec {class_idx}: count must be >= 1")
        for member in range(count):
            rng = np.random.default_rng(_entropy(spec.seed, class_idx, member))
            g = dsbm_graph(spec, rng)
            if g.n_edges == 0:  # resample empty draws deterministically
                for retry in range(1, 100):
                    rng = np.random.default_rng(_entropy(spec.seed, class_idx, member, retry))
                    g = dsbm_graph(spec, rng)
                    if g.n_edges > 0:
                        break
            graphs.append(g)
            labels.append(class_idx)
    return graphs, labels
