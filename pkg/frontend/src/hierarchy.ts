// The middle column: chapter-level graph on top, the selected chapter's
// step-level graph underneath, both laid out by topological layer.

import { topologicalLayers, type Edge, type NodeId } from "./groups.js";
import type { Chapter, Scheme } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const NODE_W = 120;
const NODE_H = 34;
const GAP_X = 24;
const GAP_Y = 46;

interface GraphSpec {
  nodes: { id: NodeId; label: string; t: number }[];
  edges: Edge[];
}

export function renderChapterGraph(
  container: HTMLElement,
  scheme: Scheme,
  selected: number,
  onSelect: (chapterId: number) => void,
): void {
  const spec: GraphSpec = {
    nodes: scheme.chapters.map((c) => ({
      id: c.id,
      label: c.title || `Chapter ${c.id}`,
      t: c.t_s,
    })),
    edges: scheme.chapters.flatMap((c) =>
      c.successors.map((s) => [c.id, s] as Edge)),
  };
  drawGraph(container, spec, String(selected), (id) => onSelect(Number(id)),
    "chapter-node");
}

export function renderStepGraph(
  container: HTMLElement,
  chapter: Chapter,
  onSelect: (stepId: string) => void,
): void {
  const spec: GraphSpec = {
    nodes: chapter.steps.map((s) => ({
      id: s.id,
      label: `Step ${s.id}`,
      t: s.t_s,
    })),
    edges: chapter.steps.flatMap((s) =>
      s.successors.map((t) => [s.id, t] as Edge)),
  };
  drawGraph(container, spec, null, (id) => onSelect(String(id)), "step-node");
}

function drawGraph(
  container: HTMLElement,
  spec: GraphSpec,
  selected: string | null,
  onSelect: (id: NodeId) => void,
  nodeClass: string,
): void {
  container.textContent = "";
  const layers = topologicalLayers(spec.nodes.map((n) => n.id), spec.edges);
  const byId = new Map(spec.nodes.map((n) => [n.id, n]));
  const positions = new Map<NodeId, { x: number; y: number }>();
  const widest = Math.max(1, ...layers.map((layer) => layer.length));

  layers.forEach((layer, row) => {
    const sorted = [...layer].sort((a, b) => byId.get(a)!.t - byId.get(b)!.t);
    sorted.forEach((id, col) => {
      const offset = (widest - sorted.length) / 2;
      positions.set(id, {
        x: (col + offset) * (NODE_W + GAP_X) + GAP_X / 2,
        y: row * (NODE_H + GAP_Y) + GAP_Y / 2,
      });
    });
  });

  const width = widest * (NODE_W + GAP_X) + GAP_X;
  const height = layers.length * (NODE_H + GAP_Y) + GAP_Y / 2;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "hierarchy-graph");

  for (const [a, b] of spec.edges) {
    const from = positions.get(a)!;
    const to = positions.get(b)!;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(from.x + NODE_W / 2));
    line.setAttribute("y1", String(from.y + NODE_H));
    line.setAttribute("x2", String(to.x + NODE_W / 2));
    line.setAttribute("y2", String(to.y));
    line.setAttribute("class", "graph-edge");
    svg.appendChild(line);
  }

  for (const node of spec.nodes) {
    const pos = positions.get(node.id)!;
    const group = document.createElementNS(SVG_NS, "g");
    const isSelected = selected !== null && String(node.id) === selected;
    group.setAttribute("class",
      `graph-node ${nodeClass}${isSelected ? " selected" : ""}`);
    group.setAttribute("data-node-id", String(node.id));
    group.addEventListener("click", () => onSelect(node.id));

    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(pos.x));
    rect.setAttribute("y", String(pos.y));
    rect.setAttribute("rx", "6");
    rect.setAttribute("width", String(NODE_W));
    rect.setAttribute("height", String(NODE_H));
    group.appendChild(rect);

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(pos.x + NODE_W / 2));
    label.setAttribute("y", String(pos.y + NODE_H / 2 + 4));
    label.setAttribute("text-anchor", "middle");
    label.textContent = node.label.length > 18
      ? `${node.label.slice(0, 17)}…` : node.label;
    group.appendChild(label);
    svg.appendChild(group);
  }
  container.appendChild(svg);
}
