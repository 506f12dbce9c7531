// Graph ordering shared by the hierarchy panel and the note column: layer
// nodes by longest path from a source, then group parallel siblings (same
// predecessors, same successors) within each layer.

export type NodeId = string | number;
export type Edge = [NodeId, NodeId];

export function topologicalLayers(nodes: NodeId[], edges: Edge[]): NodeId[][] {
  const indegree = new Map<NodeId, number>(nodes.map((n) => [n, 0]));
  const adjacency = new Map<NodeId, NodeId[]>(nodes.map((n) => [n, []]));
  for (const [a, b] of edges) {
    adjacency.get(a)?.push(b);
    indegree.set(b, (indegree.get(b) ?? 0) + 1);
  }
  const ready = nodes.filter((n) => indegree.get(n) === 0);
  const order: NodeId[] = [];
  while (ready.length) {
    const current = ready.shift()!;
    order.push(current);
    for (const next of adjacency.get(current) ?? []) {
      indegree.set(next, indegree.get(next)! - 1);
      if (indegree.get(next) === 0) ready.push(next);
    }
  }
  if (order.length !== nodes.length) {
    throw new Error("graph contains a cycle");
  }
  const depth = new Map<NodeId, number>(nodes.map((n) => [n, 0]));
  for (const node of order) {
    for (const next of adjacency.get(node) ?? []) {
      depth.set(next, Math.max(depth.get(next)!, depth.get(node)! + 1));
    }
  }
  const layerCount = Math.max(0, ...[...depth.values()].map((d) => d + 1));
  const layers: NodeId[][] = Array.from({ length: layerCount }, () => []);
  const position = new Map(nodes.map((n, i) => [n, i]));
  for (const node of [...nodes].sort((a, b) => position.get(a)! - position.get(b)!)) {
    layers[depth.get(node)!].push(node);
  }
  return layers;
}

/**
 * Ordered rendering groups: concatenating them respects every edge, and any
 * group longer than one is a maximal parallel sibling group.
 */
export function orderedGroups(
  nodes: NodeId[],
  edges: Edge[],
  startTime: Map<NodeId, number>,
): NodeId[][] {
  const preds = new Map<NodeId, Set<NodeId>>(nodes.map((n) => [n, new Set()]));
  const succs = new Map<NodeId, Set<NodeId>>(nodes.map((n) => [n, new Set()]));
  for (const [a, b] of edges) {
    succs.get(a)?.add(b);
    preds.get(b)?.add(a);
  }
  const signature = (n: NodeId) =>
    JSON.stringify([[...preds.get(n)!].sort(), [...succs.get(n)!].sort()]);

  const groups: NodeId[][] = [];
  for (const layer of topologicalLayers(nodes, edges)) {
    const sorted = [...layer].sort(
      (a, b) => (startTime.get(a) ?? 0) - (startTime.get(b) ?? 0),
    );
    const bySignature = new Map<string, NodeId[]>();
    for (const node of sorted) {
      const key = signature(node);
      if (!bySignature.has(key)) bySignature.set(key, []);
      bySignature.get(key)!.push(node);
    }
    const emitted = new Set<NodeId>();
    for (const node of sorted) {
      if (emitted.has(node)) continue;
      const group = bySignature.get(signature(node))!;
      group.forEach((n) => emitted.add(n));
      groups.push(group);
    }
  }
  return groups;
}
