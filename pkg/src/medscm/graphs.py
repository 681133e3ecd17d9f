"""Causal DAGs, SWIG node splitting, and d-separation.

d-separation runs a reachability ("Bayes-ball") sweep; the test suite
cross-checks it against an independent path-enumeration oracle and against
numeric conditional independence in random Markov distributions.

SWIGs are built by standard node splitting: each intervened node becomes a
random half (keeps incoming edges) and a fixed half (keeps outgoing edges).
Fixed halves are constants, so any path through one is blocked regardless
of the conditioning set; descendants of a fixed half carry its context in
their label, e.g. ``Y(a',m')``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from importlib import resources

__all__ = [
    "Dag",
    "Swig",
    "GraphError",
    "swig_split",
    "d_separated",
    "implied_independencies",
    "parse_graph",
    "serialize_graph",
    "load_fixture_graph",
    "FIXTURE_GRAPHS",
]


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Dag:
    nodes: tuple
    edges: tuple  # ordered (parent, child) pairs
    thick_edges: tuple = ()

    def __post_init__(self):
        known = set(self.nodes)
        for u, v in self.edges:
            if u not in known or v not in known:
                raise GraphError(f"edge ({u}, {v}) uses unknown node")
        if set(self.thick_edges) - set(self.edges):
            raise GraphError("thick edges must be a subset of the edges")
        if self._has_cycle():
            raise GraphError("graph has a cycle")

    def _has_cycle(self) -> bool:
        order, seen = [], set()
        children = self.children_map()
        state: dict = {}

        def visit(n):
            state[n] = 1
            for c in children.get(n, ()):
                s = state.get(c, 0)
                if s == 1:
                    return True
                if s == 0 and visit(c):
                    return True
            state[n] = 2
            order.append(n)
            return False

        for n in self.nodes:
            if state.get(n, 0) == 0 and visit(n):
                return True
        return False

    def parents_map(self) -> dict:
        out: dict = {n: [] for n in self.nodes}
        for u, v in self.edges:
            out[v].append(u)
        return out

    def children_map(self) -> dict:
        out: dict = {n: [] for n in self.nodes}
        for u, v in self.edges:
            out[u].append(v)
        return out


@dataclass(frozen=True)
class Swig:
    nodes: tuple  # random halves plus fixed halves
    edges: tuple
    fixed: tuple  # subset of nodes that are fixed intervention halves
    labels: dict = field(compare=False, default_factory=dict)  # node -> display label

    def parents_map(self) -> dict:
        out: dict = {n: [] for n in self.nodes}
        for u, v in self.edges:
            out[v].append(u)
        return out

    def children_map(self) -> dict:
        out: dict = {n: [] for n in self.nodes}
        for u, v in self.edges:
            out[u].append(v)
        return out

    def random_nodes(self) -> tuple:
        return tuple(n for n in self.nodes if n not in set(self.fixed))


def fixed_label(node: str) -> str:
    """Lowercase-primed name for the fixed half of a split node: A -> a'."""
    return node.lower() + "'"


def swig_split(dag: Dag, targets) -> Swig:
    """Split every target node into a random half and a fixed half."""
    targets = list(targets)
    known = set(dag.nodes)
    for t in targets:
        if t not in known:
            raise GraphError(f"split target {t!r} not in graph")
        if t == "Y":
            raise GraphError("cannot split the outcome node Y")
    target_set = set(targets)
    fixed = {t: fixed_label(t) for t in targets}

    nodes = list(dag.nodes) + [fixed[t] for t in targets]
    edges = []
    for u, v in dag.edges:
        u2 = fixed[u] if u in target_set else u  # outgoing edges go to the fixed half
        edges.append((u2, v))

    # context propagation: a random node descending from fixed halves carries them
    children: dict = {n: [] for n in nodes}
    for u, v in edges:
        children[u].append(v)
    context: dict = {n: set() for n in nodes}
    order = _topo(nodes, edges)
    for n in order:
        for c in children[n]:
            context[c] |= context[n] | ({n} if n in fixed.values() else set())
    labels = {}
    for n in nodes:
        if n in fixed.values():
            labels[n] = n
        elif context[n]:
            ctx = sorted(context[n])
            labels[n] = f"{n}(" + ",".join(ctx) + ")"
        else:
            labels[n] = n
    return Swig(
        nodes=tuple(nodes),
        edges=tuple(edges),
        fixed=tuple(fixed[t] for t in targets),
        labels=labels,
    )


def _topo(nodes, edges):
    parents: dict = {n: set() for n in nodes}
    for u, v in edges:
        parents[v].add(u)
    order, placed = [], set()
    pending = list(nodes)
    while pending:
        ready = [n for n in pending if parents[n] <= placed]
        if not ready:
            raise GraphError("graph has a cycle")
        for n in ready:
            order.append(n)
            placed.add(n)
            pending.remove(n)
    return order


def _graph_views(graph):
    if isinstance(graph, Dag):
        return graph.nodes, graph.parents_map(), graph.children_map(), frozenset()
    if isinstance(graph, Swig):
        return graph.nodes, graph.parents_map(), graph.children_map(), frozenset(graph.fixed)
    raise GraphError(f"not a graph: {graph!r}")


def d_separated(graph, xs, ys, zs=()) -> bool:
    """True iff every path between xs and ys is blocked given zs.

    Reachability sweep over (node, direction) states.  Fixed SWIG halves
    are constants: the ball never passes through one.
    """
    nodes, parents, children, fixed = _graph_views(graph)
    xs, ys, zs = set(xs), set(ys), set(zs)
    for s in (xs, ys, zs):
        unknown = s - set(nodes)
        if unknown:
            raise GraphError(f"unknown nodes {sorted(unknown)}")
    if (xs & ys) or (xs & zs) or (ys & zs):
        raise GraphError("query sets must be disjoint")

    ancestors_of_z = set()
    frontier = list(zs)
    while frontier:
        n = frontier.pop()
        if n in ancestors_of_z:
            continue
        ancestors_of_z.add(n)
        frontier.extend(parents[n])

    # states: 'up' = arrived from a child (against the edge), 'down' = from a parent
    visited = set()
    frontier = [(x, "up") for x in xs]
    while frontier:
        node, direction = frontier.pop()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node in fixed:
            continue  # fixed halves are constants: always blocked
        if node in ys:
            return False
        if direction == "up":
            if node not in zs:
                for p in parents[node]:
                    frontier.append((p, "up"))
                for c in children[node]:
                    frontier.append((c, "down"))
        else:  # arrived along an edge
            if node not in zs:
                for c in children[node]:
                    frontier.append((c, "down"))
            if node in ancestors_of_z:  # collider open: node or a descendant in Z
                for p in parents[node]:
                    frontier.append((p, "up"))
    return True


def implied_independencies(graph, of_interest=None, pool=None):
    """All d-separations (X, Y, Z) among singleton pairs of random nodes,
    with Z ranging over subsets of the conditioning pool.

    The default pool is the set of nodes whose base name is C, A, or L
    (random halves included), mirroring the observed-conditioning sets the
    identification assumptions use.  Output order is deterministic.
    """
    nodes, _, _, fixed = _graph_views(graph)
    labels = graph.labels if isinstance(graph, Swig) else {}
    lab = lambda n: labels.get(n, n)
    random_nodes = [n for n in nodes if n not in set(fixed)]
    if of_interest is None:
        of_interest = random_nodes
    if pool is None:
        pool = [n for n in random_nodes if n in ("C", "A", "L")]
    out = []
    for x, y in itertools.combinations(sorted(of_interest), 2):
        candidates = [p for p in sorted(pool) if p not in (x, y)]
        for r in range(len(candidates) + 1):
            for z in itertools.combinations(candidates, r):
                if d_separated(graph, {x}, {y}, set(z)):
                    out.append((lab(x), lab(y), frozenset(lab(n) for n in z)))
    out.sort(key=lambda t: (t[0], t[1], len(t[2]), sorted(t[2])))
    return out


def display(graph) -> str:
    if isinstance(graph, Swig):
        lab = graph.labels
        lines = [f"node {lab.get(n, n)}" + ("  [fixed]" if n in set(graph.fixed) else "") for n in graph.nodes]
        lines += [f"edge {lab.get(u, u)} -> {lab.get(v, v)}" for u, v in graph.edges]
        return "\n".join(lines)
    lines = [f"node {n}" for n in graph.nodes]
    lines += [f"edge {u} -> {v}" for u, v in graph.edges]
    lines += [f"thick {u} -> {v}" for u, v in graph.thick_edges]
    return "\n".join(lines)


# -- text format ---------------------------------------------------------------


def parse_graph(text: str) -> Dag:
    nodes, edges, thick = [], [], []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "node" and len(parts) == 2:
            nodes.append(parts[1])
        elif parts[0] == "edge" and len(parts) == 3:
            edges.append((parts[1], parts[2]))
        elif parts[0] == "thick" and len(parts) == 3:
            edges.append((parts[1], parts[2]))
            thick.append((parts[1], parts[2]))
        else:
            raise GraphError(f"bad graph line: {raw!r}")
    return Dag(tuple(nodes), tuple(edges), tuple(thick))


def serialize_graph(dag: Dag) -> str:
    thick = set(dag.thick_edges)
    lines = [f"node {n}" for n in dag.nodes]
    for u, v in dag.edges:
        lines.append(("thick" if (u, v) in thick else "edge") + f" {u} {v}")
    return "\n".join(lines) + "\n"


FIXTURE_GRAPHS = (
    "figure1a",
    "figure2a",
    "figure4a",
    "figure4d",
    "figure6a",
    "figure6b",
    "figure6c",
)


def load_fixture_graph(name: str) -> Dag:
    if name not in FIXTURE_GRAPHS:
        raise GraphError(f"unknown fixture graph {name!r}; choose from {FIXTURE_GRAPHS}")
    text = resources.files("medscm").joinpath(f"fixtures/{name}.graph").read_text()
    return parse_graph(text)
