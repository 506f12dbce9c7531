"""Directed acyclic graphs over chapter or step identifiers."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidGraph

NodeId = int | str


@dataclass
class StructureGraph:
    """Nodes plus directed predecessor-to-successor edges, kept acyclic."""

    nodes: list[NodeId] = field(default_factory=list)
    edges: list[tuple[NodeId, NodeId]] = field(default_factory=list)

    def successors(self, node: NodeId) -> list[NodeId]:
        return [b for a, b in self.edges if a == node]

    def predecessors(self, node: NodeId) -> list[NodeId]:
        return [a for a, b in self.edges if b == node]

    def has_path(self, start: NodeId, goal: NodeId) -> bool:
        if start == goal:
            return True
        adjacency = _adjacency(self)
        stack, seen = [start], {start}
        while stack:
            cur = stack.pop()
            for nxt in adjacency.get(cur, ()):
                if nxt == goal:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    def try_add_edge(self, a: NodeId, b: NodeId) -> bool:
        """Add edge a->b unless it is a self-loop, duplicate, or would close a cycle."""
        if a == b or (a, b) in set(self.edges):
            return False
        if a not in self.nodes or b not in self.nodes:
            return False
        if self.has_path(b, a):
            return False
        self.edges.append((a, b))
        return True


def _adjacency(g: StructureGraph) -> dict[NodeId, list[NodeId]]:
    adj: dict[NodeId, list[NodeId]] = {n: [] for n in g.nodes}
    for a, b in g.edges:
        adj.setdefault(a, []).append(b)
    return adj


@dataclass(frozen=True)
class Violation:
    kind: str  # CYCLE, SELF_LOOP, DUPLICATE_EDGE, DANGLING_NODE, UNREACHABLE
    detail: str


def validate_dag(g: StructureGraph) -> list[Violation]:
    """Diagnostic check: empty list means the graph is a well-formed DAG."""
    violations: list[Violation] = []
    node_set = set(g.nodes)
    seen_edges = set()
    for a, b in g.edges:
        if a == b:
            violations.append(Violation("SELF_LOOP", f"{a}->{b}"))
        if (a, b) in seen_edges:
            violations.append(Violation("DUPLICATE_EDGE", f"{a}->{b}"))
        seen_edges.add((a, b))
        if a not in node_set or b not in node_set:
            violations.append(Violation("DANGLING_NODE", f"{a}->{b}"))

    order = _topological_order(g)
    if order is None:
        violations.append(Violation("CYCLE", "topological sort failed"))
    else:
        sources = [n for n in g.nodes if not g.predecessors(n)]
        reachable = set(sources)
        for n in order:
            if n in reachable:
                for s in g.successors(n):
                    reachable.add(s)
        for n in g.nodes:
            if n not in reachable:
                violations.append(Violation("UNREACHABLE", str(n)))
    return violations


def _topological_order(g: StructureGraph) -> list[NodeId] | None:
    """Kahn's algorithm; None when a cycle blocks completion."""
    indegree = {n: 0 for n in g.nodes}
    adj = _adjacency(g)
    for a, b in g.edges:
        if b in indegree:
            indegree[b] += 1
    ready = [n for n in g.nodes if indegree[n] == 0]
    order: list[NodeId] = []
    while ready:
        cur = ready.pop(0)
        order.append(cur)
        for nxt in adj.get(cur, ()):
            if nxt not in indegree:
                continue  # dangling edge; reported separately by validate_dag
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                ready.append(nxt)
    if len(order) != len(g.nodes):
        return None
    return order


def topological_layers(g: StructureGraph) -> list[list[NodeId]]:
    """Group nodes by longest-path depth from any source.

    Concatenating the layers yields a valid topological order; within a
    layer, nodes keep their declared node-list order.
    """
    order = _topological_order(g)
    if order is None:
        raise InvalidGraph("graph contains a cycle")
    depth: dict[NodeId, int] = {n: 0 for n in g.nodes}
    adj = _adjacency(g)
    for n in order:
        for s in adj.get(n, ()):
            depth[s] = max(depth[s], depth[n] + 1)
    layers: list[list[NodeId]] = [[] for _ in range(max(depth.values(), default=-1) + 1)]
    position = {n: i for i, n in enumerate(g.nodes)}
    for n in sorted(g.nodes, key=lambda n: position[n]):
        layers[depth[n]].append(n)
    return layers
