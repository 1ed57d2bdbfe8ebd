"""Directed weighted graphs: construction, connectivity, regularization, file IO."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError

__all__ = [
    "DiGraph",
    "Reachability",
    "from_edge_list",
    "analyze_reachability",
    "regularize",
    "read_edge_list_csv",
    "write_edge_list_csv",
    "read_manifest",
    "write_manifest",
]


@dataclass(frozen=True)
class DiGraph:
    """Directed weighted graph on labelled nodes.

    ``weights[i, j]`` is the weight of the edge ``labels[i] -> labels[j]``;
    zero means the edge is absent.  Instances are immutable: the weight
    array is a read-only copy.
    """

    labels: tuple[str, ...]
    weights: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        n = len(self.labels)
        if w.shape != (n, n):
            raise InputError(f"weight matrix shape {w.shape} does not match {n} labels")
        if len(set(self.labels)) != n:
            raise InputError("node labels must be unique")
        if not np.all(np.isfinite(w)):
            raise InputError("weights must be finite")
        if np.any(w < 0):
            raise InputError("weights must be nonnegative")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(self.weights))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"unknown node label {label!r}") from None

    def edges(self) -> list[tuple[str, str, float]]:
        """Positive-weight edges as (source, target, weight), row-major order."""
        src, dst = np.nonzero(self.weights)
        return [
            (self.labels[i], self.labels[j], float(self.weights[i, j]))
            for i, j in zip(src.tolist(), dst.tolist())
        ]


@dataclass(frozen=True)
class Reachability:
    strongly_connected: bool
    has_globally_reachable_node: bool


def from_edge_list(rows) -> DiGraph:
    """Build a graph from (source, target, weight) rows.

    Node order follows first appearance; duplicate (source, target) rows sum
    their weights.  Rejects negative or non-finite weights with the offending
    row index.
    """
    rows = list(rows)
    if not rows:
        raise InputError("empty graph: no edge rows given")
    labels: list[str] = []
    seen: dict[str, int] = {}
    parsed: list[tuple[int, int, float]] = []
    for idx, row in enumerate(rows):
        try:
            src, dst, w = row
            src, dst = str(src), str(dst)
            w = float(w)
        except (TypeError, ValueError) as exc:
            raise InputError(f"row {idx}: cannot parse edge row {row!r}") from exc
        if not np.isfinite(w):
            raise InputError(f"row {idx}: weight {w!r} is not finite")
        if w < 0:
            raise InputError(f"row {idx}: negative weight {w!r}")
        for lab in (src, dst):
            if lab not in seen:
                seen[lab] = len(labels)
                labels.append(lab)
        parsed.append((seen[src], seen[dst], w))
    n = len(labels)
    weights = np.zeros((n, n))
    for i, j, w in parsed:
        weights[i, j] += w
    return DiGraph(tuple(labels), weights)


def _strongly_connected_components(adj: np.ndarray) -> list[list[int]]:
    """Tarjan's algorithm, iterative. Edges are entries with weight > 0."""
    n = adj.shape[0]
    succ = [np.nonzero(adj[i] > 0)[0].tolist() for i in range(n)]
    index = [-1] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            while pi < len(succ[v]):
                w = succ[v][pi]
                pi += 1
                if index[w] == -1:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(comp)
            if work:
                u, _ = work[-1]
                lowlink[u] = min(lowlink[u], lowlink[v])
    return components


def analyze_reachability(g: DiGraph) -> Reachability:
    """Connectivity analysis over positive-weight edges.

    A globally reachable node is one reachable from every other node; it
    exists iff the condensation of the graph has exactly one sink component.
    """
    comps = _strongly_connected_components(np.asarray(g.weights))
    if len(comps) == 1:
        return Reachability(True, True)
    comp_of = np.empty(g.n_nodes, dtype=int)
    for ci, comp in enumerate(comps):
        comp_of[comp] = ci
    is_sink = np.ones(len(comps), dtype=bool)
    src, dst = np.nonzero(g.weights > 0)
    for i, j in zip(comp_of[src].tolist(), comp_of[dst].tolist()):
        if i != j:
            is_sink[i] = False
    return Reachability(False, int(is_sink.sum()) == 1)


def regularize(g: DiGraph, alpha: float = 0.85) -> DiGraph:
    """Teleportation-regularized transition graph.

    Row-normalizes the weights (rows with zero out-degree become uniform),
    then mixes with the uniform matrix: ``alpha * W_rownorm + (1 - alpha) / N``.
    The result is row-stochastic and, for ``alpha < 1``, strongly connected.
    """
    if not (0.0 < alpha <= 1.0):
        raise InputError(f"alpha must be in (0, 1], got {alpha}")
    n = g.n_nodes
    if n < 2:
        raise InputError("regularize requires a graph with at least 2 nodes")
    w = np.asarray(g.weights, dtype=float).copy()
    out = w.sum(axis=1)
    dangling = out <= 0
    w[dangling] = 1.0 / n
    w[~dangling] /= out[~dangling, None]
    mixed = alpha * w + (1.0 - alpha) / n
    meta = dict(g.meta)
    meta["regularize_alpha"] = float(alpha)
    return DiGraph(g.labels, mixed, meta)


# ---------------------------------------------------------------------------
# File formats: edge-list CSV and ensemble manifest JSON


def read_edge_list_csv(path) -> DiGraph:
    """Parse an edge-list CSV with header ``source,target,weight``.

    Lines starting with ``#`` are ignored.
    """
    path = Path(path)
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        filtered = (line for line in fh if not line.lstrip().startswith("#"))
        reader = csv.reader(filtered)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:3]] != ["source", "target", "weight"]:
            raise InputError(f"{path}: expected header 'source,target,weight'")
        for rec in reader:
            if not rec or all(not f.strip() for f in rec):
                continue
            if len(rec) < 3:
                raise InputError(f"{path}: malformed row {rec!r}")
            rows.append((rec[0].strip(), rec[1].strip(), rec[2].strip()))
    if not rows:
        raise InputError(f"{path}: no edges found")
    return from_edge_list(rows)


def write_edge_list_csv(g: DiGraph, path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["source", "target", "weight"])
        for src, dst, w in g.edges():
            writer.writerow([src, dst, f"{w:.17g}"])


def read_manifest(path) -> list[dict]:
    """Read an ensemble manifest: {"graphs": [{"id", "path", "label"?}, ...]}.

    Relative graph paths are resolved against the manifest's directory.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"manifest not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    graphs = data.get("graphs")
    if not isinstance(graphs, list) or not graphs:
        raise InputError(f"{path}: manifest must contain a non-empty 'graphs' list")
    entries = []
    for i, entry in enumerate(graphs):
        if "id" not in entry or "path" not in entry:
            raise InputError(f"{path}: graphs[{i}] needs 'id' and 'path'")
        resolved = Path(entry["path"])
        if not resolved.is_absolute():
            resolved = path.parent / resolved
        entries.append({"id": str(entry["id"]), "path": resolved, "label": entry.get("label")})
    return entries


def write_manifest(entries, path) -> None:
    path = Path(path)
    payload = {"graphs": []}
    for e in entries:
        rec = {"id": e["id"], "path": str(e["path"])}
        if e.get("label") is not None:
            rec["label"] = e["label"]
        payload["graphs"].append(rec)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
