/** Pure view-model construction for the tree graph.
 *
 * Takes the topology payload exactly as the service returns it and produces
 * positioned nodes plus styled edges. No tree semantics are computed here —
 * parentage, status, and flow records all come from the server.
 */

import type { Topology, TopologyNode } from "./types";

export interface NodeView {
  id: string;
  label: string;
  x: number;
  y: number;
  fill: string;
  stroke: string;
  textColor: string;
  volatile: boolean;
  status: TopologyNode["status"];
  units: number;
}

export interface EdgeView {
  kind: "parent" | "downstream" | "upstream" | "cross";
  source: string;
  dest: string;
  color: string;
  dash: string | null;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface GraphView {
  nodes: NodeView[];
  edges: EdgeView[];
  width: number;
  height: number;
}

export const COLORS = {
  nodeDefault: "#f3f4f6",
  nodeVolatile: "#d64541",
  nodeMerged: "#c6e6c6",
  nodePurged: "#9ca3af",
  nodeArchived: "#dcd6f7",
  strokeDefault: "#374151",
  textDark: "#111827",
  textLight: "#ffffff",
  edgeParent: "#9ca3af",
  edgeDownstream: "#2b6cb0",
  edgeUpstream: "#d69e2e",
  edgeCross: "#2f855a",
} as const;

export const EDGE_STYLE: Record<EdgeView["kind"], { color: string; dash: string | null }> = {
  parent: { color: COLORS.edgeParent, dash: null },
  downstream: { color: COLORS.edgeDownstream, dash: null },
  upstream: { color: COLORS.edgeUpstream, dash: "6 4" },
  cross: { color: COLORS.edgeCross, dash: "2 4" },
};

const H_SPACING = 150;
const V_SPACING = 110;
const MARGIN = 70;

export function nodeColors(node: TopologyNode): { fill: string; text: string } {
  if (node.status === "purged") return { fill: COLORS.nodePurged, text: COLORS.textLight };
  if (node.status === "merged") return { fill: COLORS.nodeMerged, text: COLORS.textDark };
  if (node.status === "archived") return { fill: COLORS.nodeArchived, text: COLORS.textDark };
  if (node.volatile) return { fill: COLORS.nodeVolatile, text: COLORS.textLight };
  return { fill: COLORS.nodeDefault, text: COLORS.textDark };
}

/** Depth of each node, following parent pointers from the payload. */
function depths(topology: Topology): Map<string, number> {
  const byId = new Map(topology.nodes.map((n) => [n.id, n]));
  const out = new Map<string, number>();
  const depthOf = (id: string): number => {
    const cached = out.get(id);
    if (cached !== undefined) return cached;
    const node = byId.get(id);
    const d = node && node.parent !== null ? depthOf(node.parent) + 1 : 0;
    out.set(id, d);
    return d;
  };
  for (const n of topology.nodes) depthOf(n.id);
  return out;
}

/** Layered top-down layout: depth picks the row, payload order picks the
 * column within the row. Deterministic for a given topology payload. */
export function buildGraphView(topology: Topology): GraphView {
  const depthOf = depths(topology);
  const rows = new Map<number, string[]>();
  for (const n of topology.nodes) {
    const d = depthOf.get(n.id) ?? 0;
    const row = rows.get(d) ?? [];
    row.push(n.id);
    rows.set(d, row);
  }

  const maxRow = Math.max(1, ...[...rows.values()].map((r) => r.length));
  const width = MARGIN * 2 + (maxRow - 1) * H_SPACING;
  const height = MARGIN * 2 + (rows.size - 1) * V_SPACING;

  const pos = new Map<string, { x: number; y: number }>();
  for (const [depth, ids] of rows) {
    const rowWidth = (ids.length - 1) * H_SPACING;
    ids.forEach((id, i) => {
      pos.set(id, {
        x: MARGIN + (width - 2 * MARGIN - rowWidth) / 2 + i * H_SPACING,
        y: MARGIN + depth * V_SPACING,
      });
    });
  }

  const nodes: NodeView[] = topology.nodes.map((n) => {
    const p = pos.get(n.id)!;
    const { fill, text } = nodeColors(n);
    return {
      id: n.id,
      label: n.purpose,
      x: p.x,
      y: p.y,
      fill,
      stroke: COLORS.strokeDefault,
      textColor: text,
      volatile: n.volatile,
      status: n.status,
      units: n.units,
    };
  });

  const edges: EdgeView[] = [];
  const pushEdge = (kind: EdgeView["kind"], source: string, dest: string) => {
    const a = pos.get(source);
    const b = pos.get(dest);
    if (!a || !b) return;
    const style = EDGE_STYLE[kind];
    edges.push({
      kind,
      source,
      dest,
      color: style.color,
      dash: style.dash,
      x1: a.x,
      y1: a.y,
      x2: b.x,
      y2: b.y,
    });
  };

  // Flow edges carry the semantics; a plain parent edge is drawn only for
  // parent/child pairs with no recorded downstream flow (e.g. `none` policy).
  const downstreamPairs = new Set(
    topology.flows.filter((f) => f.kind === "downstream").map((f) => `${f.source}>${f.dest}`),
  );
  for (const e of topology.edges) {
    if (!downstreamPairs.has(`${e.parent}>${e.child}`)) pushEdge("parent", e.parent, e.child);
  }
  for (const f of topology.flows) pushEdge(f.kind, f.source, f.dest);

  return { nodes, edges, width, height };
}
