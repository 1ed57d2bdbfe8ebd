"""Ensemble-level machinery: edge universe, directed line graph, and the
graph-to-graph distances (Wasserstein on the line graph, Gromov-Wasserstein
on per-graph node metrics)."""

from __future__ import annotations

import csv
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError, NumericalError
from .graphs import DiGraph, analyze_reachability, regularize
from .metrics import DistanceMatrix, grd_matrix, htd_matrix
from .ot import GwOptions, TransportPlan, emd, gromov_wasserstein, normalize_marginal

__all__ = [
    "GraphEnsemble",
    "build_ensemble",
    "build_line_graph",
    "metric_cost",
    "wasserstein_distance",
    "gw_distance",
    "pairwise_distances",
    "write_pairwise_csv",
    "read_pairwise_csv",
]

GW_SYMMETRY_TOL = 1e-6


def metric_cost(
    g: DiGraph,
    metric: str,
    beta: float = 1.0,
    alpha: float = 0.85,
    force_alpha: bool = False,
) -> tuple[DistanceMatrix, bool]:
    """Node-metric cost matrix of a graph, regularizing only when the chosen
    metric's reachability precondition fails (always under ``force_alpha``).

    Returns the distance matrix and whether regularization was applied;
    the flag is also recorded in the matrix metadata.
    """
    if metric == "grd":
        needs = not analyze_reachability(g).has_globally_reachable_node
    elif metric == "htd":
        needs = not analyze_reachability(g).strongly_connected
    else:
        raise InputError(f"unknown metric {metric!r} (expected 'grd' or 'htd')")
    applied = bool(force_alpha or needs)
    if applied:
        g = regularize(g, alpha)
    dm = grd_matrix(g) if metric == "grd" else htd_matrix(g, beta)
    meta = dict(dm.meta)
    meta["alpha_applied"] = applied
    return DistanceMatrix(dm.values, dm.metric_kind, dm.labels, beta=dm.beta, meta=meta), applied


@dataclass(frozen=True)
class GraphEnsemble:
    """Shared edge universe of a graph cohort and its per-graph weights.

    ``edges`` is the lexicographically ordered union of positive-weight
    edges; column k of ``weights`` holds graph k's weights on that universe.
    """

    graphs: tuple[DiGraph, ...]
    ids: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    weights: np.ndarray  # E x p

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_graphs(self) -> int:
        return len(self.graphs)

    def edge_index(self, edge: tuple[str, str]) -> int:
        return self.edges.index(edge)


def build_ensemble(graphs, ids=None) -> GraphEnsemble:
    """Union edge universe and the edge-weight matrix of a cohort.

    Requires at least two graphs, none of them edgeless; warns when a graph
    shares no node labels with any other (the line-graph path is then
    meaningless).
    """
    graphs = tuple(graphs)
    if len(graphs) < 2:
        raise InputError("an ensemble needs at least 2 graphs")
    for gi, g in enumerate(graphs):
        if g.n_edges == 0:
            raise InputError(f"graph {gi} has no edges")
    if ids is None:
        ids = tuple(f"g{i}" for i in range(len(graphs)))
    else:
        ids = tuple(str(i) for i in ids)
        if len(ids) != len(graphs) or len(set(ids)) != len(ids):
            raise InputError("graph ids must be unique and match the graph count")
    label_sets = [set(g.labels) for g in graphs]
    for gi, labs in enumerate(label_sets):
        if all(labs.isdisjoint(other) for gj, other in enumerate(label_sets) if gj != gi):
            warnings.warn(
                f"graph {ids[gi]} shares no node labels with the rest of the ensemble",
                stacklevel=2,
            )
            break
    universe = sorted({(s, t) for g in graphs for s, t, _ in g.edges()})
    index = {e: i for i, e in enumerate(universe)}
    P = np.zeros((len(universe), len(graphs)))
    for k, g in enumerate(graphs):
        for s, t, w in g.edges():
            P[index[(s, t)], k] = w
    return GraphEnsemble(graphs, ids, tuple(universe), P)


def build_line_graph(universe, graphs) -> DiGraph:
    """Directed line graph over an edge universe.

    A line edge (u', v') exists when the target of u' is the source of v';
    its weight is the fraction of ensemble graphs containing both original
    edges (edge weights play no role in adjacency).
    """
    universe = tuple(tuple(e) for e in universe)
    if not universe:
        raise InputError("edge universe is empty")
    graphs = tuple(graphs)
    p = len(graphs)
    if p == 0:
        raise InputError("line graph needs at least one graph")
    E = len(universe)
    present = np.zeros((E, p))
    for k, g in enumerate(graphs):
        edge_set = {(s, t) for s, t, _ in g.edges()}
        for ei, e in enumerate(universe):
            if e in edge_set:
                present[ei, k] = 1.0
    co_occurrence = present @ present.T
    targets = np.array([e[1] for e in universe])
    sources = np.array([e[0] for e in universe])
    chains = targets[:, None] == sources[None, :]
    weights = np.where(chains, co_occurrence / p, 0.0)
    labels = tuple(f"{s}->{t}" for s, t in universe)
    return DiGraph(labels, weights, meta={"kind": "line_graph", "n_graphs": p})


def line_cost(
    ensemble: GraphEnsemble,
    metric: str = "grd",
    beta: float = 1.0,
    alpha: float = 0.85,
    force_alpha: bool = False,
) -> tuple[DistanceMatrix, bool]:
    """Node-metric cost matrix of the ensemble's line graph."""
    lg = build_line_graph(ensemble.edges, ensemble.graphs)
    return metric_cost(lg, metric, beta=beta, alpha=alpha, force_alpha=force_alpha)


def wasserstein_distance(
    ensemble: GraphEnsemble,
    k: int,
    l: int,
    metric: str = "grd",
    beta: float = 1.0,
    alpha: float = 0.85,
    force_alpha: bool = False,
    cost: DistanceMatrix | None = None,
) -> tuple[float, TransportPlan]:
    """Earth-mover distance between two ensemble members on the line graph.

    The marginals are the members' edge-weight columns normalized to unit
    mass; ``cost`` allows reusing a precomputed line-graph cost matrix.
    """
    if cost is None:
        cost, _ = line_cost(ensemble, metric, beta=beta, alpha=alpha, force_alpha=force_alpha)
    for col in (k, l):
        if ensemble.weights[:, col].sum() <= 0:
            raise InputError(f"graph {ensemble.ids[col]} has zero total edge weight")
    mu = normalize_marginal(ensemble.weights[:, k])
    nu = normalize_marginal(ensemble.weights[:, l])
    plan = emd(mu, nu, cost.values)
    return plan.objective, plan


def gw_distance(
    ensemble_or_graphs,
    k: int,
    l: int,
    metric: str = "grd",
    beta: float = 1.0,
    alpha: float = 0.85,
    force_alpha: bool = False,
    opts: GwOptions | None = None,
    costs: tuple[DistanceMatrix, DistanceMatrix] | None = None,
) -> tuple[float, TransportPlan]:
    """Gromov-Wasserstein distance between two graphs under a node metric,
    with uniform node masses."""
    graphs = (
        ensemble_or_graphs.graphs
        if isinstance(ensemble_or_graphs, GraphEnsemble)
        else tuple(ensemble_or_graphs)
    )
    opts = opts or GwOptions()
    if costs is None:
        c1, _ = metric_cost(graphs[k], metric, beta=beta, alpha=alpha, force_alpha=force_alpha)
        c2, _ = metric_cost(graphs[l], metric, beta=beta, alpha=alpha, force_alpha=force_alpha)
    else:
        c1, c2 = costs
    n1, n2 = c1.values.shape[0], c2.values.shape[0]
    plan = gromov_wasserstein(
        c1.values, c2.values, np.full(n1, 1.0 / n1), np.full(n2, 1.0 / n2), opts
    )
    return plan.objective, plan


def pairwise_distances(
    graphs,
    method: str = "wasserstein",
    metric: str = "grd",
    beta: float = 1.0,
    alpha: float = 0.85,
    force_alpha: bool = False,
    opts: GwOptions | None = None,
    ids=None,
    jobs: int = 1,
) -> tuple[np.ndarray, dict]:
    """All graph-to-graph distances of a cohort.

    Returns a p x p matrix with zero diagonal and a diagnostics dict.  The
    Wasserstein/grd matrix is symmetric by construction; Wasserstein/htd is
    computed in both directions (its ground cost is asymmetric) and the
    maximal asymmetry reported.  Gromov-Wasserstein distances are computed
    in both directions, asserted symmetric within 1e-6, and the smaller
    value kept.
    """
    if method not in ("wasserstein", "gw"):
        raise InputError(f"unknown method {method!r} (expected 'wasserstein' or 'gw')")
    graphs = tuple(graphs)
    p = len(graphs)
    if p < 2:
        raise InputError("pairwise distances need at least 2 graphs")
    if ids is None:
        ids = tuple(f"g{i}" for i in range(p))
    else:
        ids = tuple(str(i) for i in ids)
    opts = opts or GwOptions()
    D = np.zeros((p, p))
    meta: dict = {
        "method": method,
        "metric": metric,
        "beta": beta,
        "alpha": alpha,
        "force_alpha": force_alpha,
        "ids": list(ids),
    }

    if method == "wasserstein":
        ensemble = build_ensemble(graphs, ids=ids)
        cost, applied = line_cost(ensemble, metric, beta=beta, alpha=alpha, force_alpha=force_alpha)
        meta["line_alpha_applied"] = applied
        symmetric_cost = metric == "grd"
        pairs = [
            (k, l)
            for k in range(p)
            for l in range(p)
            if (k < l if symmetric_cost else k != l)
        ]

        def solve_pair(pair):
            k, l = pair
            try:
                d, _ = wasserstein_distance(ensemble, k, l, metric, beta, alpha, cost=cost)
            except Exception as exc:
                raise NumericalError(
                    f"pair ({ensemble.ids[k]}, {ensemble.ids[l]}): {exc}"
                ) from exc
            return k, l, d

        for k, l, d in _run(solve_pair, pairs, jobs):
            D[k, l] = d
            if symmetric_cost:
                D[l, k] = d
        if not symmetric_cost:
            meta["max_asymmetry"] = float(np.abs(D - D.T).max())
    else:
        costs = []
        applied_flags = []
        for g in graphs:
            c, a = metric_cost(g, metric, beta=beta, alpha=alpha, force_alpha=force_alpha)
            costs.append(c)
            applied_flags.append(a)
        meta["alpha_applied"] = applied_flags
        meta["gw_opts"] = {
            "n_starts": opts.n_starts,
            "max_iter": opts.max_iter,
            "tol": opts.tol,
            "seed": opts.seed,
        }
        pairs = [(k, l) for k in range(p) for l in range(p) if k < l]

        def solve_pair(pair):
            k, l = pair
            try:
                fwd = GwOptions(opts.n_starts, opts.max_iter, opts.tol, (opts.seed, k, l, 0))
                bwd = GwOptions(opts.n_starts, opts.max_iter, opts.tol, (opts.seed, k, l, 1))
                d_kl, _ = gw_distance(graphs, k, l, metric, beta, alpha, opts=fwd,
                                      costs=(costs[k], costs[l]))
                d_lk, _ = gw_distance(graphs, l, k, metric, beta, alpha, opts=bwd,
                                      costs=(costs[l], costs[k]))
            except NumericalError:
                raise
            except Exception as exc:
                raise NumericalError(f"pair ({ids[k]}, {ids[l]}): {exc}") from exc
            if abs(d_kl - d_lk) > GW_SYMMETRY_TOL:
                raise NumericalError(
                    f"pair ({ids[k]}, {ids[l]}): GW direction mismatch "
                    f"{d_kl:.3e} vs {d_lk:.3e}"
                )
            return k, l, min(d_kl, d_lk), abs(d_kl - d_lk)

        asym = 0.0
        for k, l, d, gap in _run(solve_pair, pairs, jobs):
            D[k, l] = D[l, k] = d
            asym = max(asym, gap)
        meta["max_asymmetry"] = asym
    np.clip(D, 0.0, None, out=D)  # drop negative float dust from the quartic objective
    np.fill_diagonal(D, 0.0)
    return D, meta


def _run(fn, items, jobs):
    if jobs <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Pairwise matrix CSV


def write_pairwise_csv(D: np.ndarray, ids, path) -> None:
    path = Path(path)
    ids = list(ids)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([""] + ids)
        for gid, row in zip(ids, np.asarray(D)):
            writer.writerow([gid] + [f"{x:.17g}" for x in row])


def read_pairwise_csv(path) -> tuple[np.ndarray, list[str]]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        ids = header[1:]
        rows = [[float(x) for x in rec[1:]] for rec in reader if rec]
    D = np.array(rows)
    if D.shape != (len(ids), len(ids)):
        raise InputError(f"{path}: matrix is not square over its ids")
    return D, ids