/** DOM rendering for the graph and transcript panels.
 *
 * Every element carries data attributes describing what it represents, so
 * tests (and event handlers) read semantics off the DOM rather than
 * re-deriving them.
 */

import type { GraphView } from "./graph";
import type { Transcript, TranscriptSegment } from "./types";
import { deleteDialogOptions } from "./dialogs";
import type { TopologyNode } from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";
const NODE_RX = 52;
const NODE_RY = 26;

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  return el;
}

export function renderGraph(container: HTMLElement, view: GraphView): SVGSVGElement {
  container.textContent = "";
  const svg = svgEl("svg", {
    width: String(view.width),
    height: String(view.height),
    viewBox: `0 0 ${view.width} ${view.height}`,
    class: "tree-graph",
  });

  for (const edge of view.edges) {
    const line = svgEl("line", {
      x1: String(edge.x1),
      y1: String(edge.y1),
      x2: String(edge.x2),
      y2: String(edge.y2),
      stroke: edge.color,
      "stroke-width": "2",
      "data-kind": edge.kind,
      "data-source": edge.source,
      "data-dest": edge.dest,
    });
    if (edge.dash) line.setAttribute("stroke-dasharray", edge.dash);
    svg.appendChild(line);
  }

  for (const node of view.nodes) {
    const g = svgEl("g", {
      class: "tree-node",
      "data-node": node.id,
      "data-volatile": String(node.volatile),
      "data-status": node.status,
      transform: `translate(${node.x} ${node.y})`,
    });
    g.appendChild(
      svgEl("ellipse", {
        cx: "0",
        cy: "0",
        rx: String(NODE_RX),
        ry: String(NODE_RY),
        fill: node.fill,
        stroke: node.stroke,
        "stroke-width": node.status === "active" ? "2" : "1",
        "stroke-dasharray": node.status === "active" ? "" : "4 3",
      }),
    );
    const label = svgEl("text", {
      x: "0",
      y: "4",
      "text-anchor": "middle",
      fill: node.textColor,
      "font-size": "13",
    });
    label.textContent = node.status === "purged" ? `${node.label} ✕` : node.label;
    g.appendChild(label);
    const count = svgEl("text", {
      x: "0",
      y: String(NODE_RY + 14),
      "text-anchor": "middle",
      fill: "#6b7280",
      "font-size": "10",
    });
    count.textContent = `${node.units} unit${node.units === 1 ? "" : "s"}`;
    g.appendChild(count);
    svg.appendChild(g);
  }

  container.appendChild(svg);
  return svg;
}

function segmentEl(segment: TranscriptSegment): HTMLElement {
  const div = document.createElement("div");
  if (segment.kind === "native") {
    div.className = "segment native";
    div.dataset.kind = "native";
    for (const [role, text] of [
      ["human", segment.unit.human],
      ["model", segment.unit.model],
    ] as const) {
      const msg = document.createElement("p");
      msg.className = `msg ${role}`;
      msg.dataset.role = role;
      msg.textContent = text;
      div.appendChild(msg);
    }
  } else {
    div.className = `segment imported flow-${segment.flow}`;
    div.dataset.kind = "imported";
    div.dataset.flow = segment.flow;
    div.dataset.source = segment.source_node;
    const header = document.createElement("p");
    header.className = "import-header";
    header.textContent = `⇄ ${segment.flow} from ${segment.source_node}`;
    div.appendChild(header);
    for (const m of segment.payload) {
      const msg = document.createElement("p");
      msg.className = `msg ${m.role}`;
      msg.dataset.role = m.role;
      msg.textContent = m.text;
      div.appendChild(msg);
    }
  }
  return div;
}

export function renderTranscript(container: HTMLElement, transcript: Transcript): void {
  container.textContent = "";
  container.dataset.node = transcript.node;
  container.dataset.status = transcript.status;

  if (transcript.status === "purged") {
    const tomb = document.createElement("p");
    tomb.className = "tombstone";
    tomb.textContent = "This context was purged; its content is gone.";
    container.appendChild(tomb);
    return;
  }

  for (const segment of transcript.segments) container.appendChild(segmentEl(segment));

  if (transcript.pending_chunks > 0) {
    const note = document.createElement("p");
    note.className = "pending-chunks";
    note.textContent = `${transcript.pending_chunks} merged chunk(s) will arrive over the next turns`;
    container.appendChild(note);
  }
}

export interface DeleteDialogHandles {
  overlay: HTMLElement;
  buttons: HTMLButtonElement[];
}

/** Modal asking how to resolve a node. The option set comes from
 * deleteDialogOptions, so volatility rules hold here by construction. */
export function renderDeleteDialog(
  container: HTMLElement,
  node: TopologyNode,
  onPick: (disposition: string) => void,
  onCancel: () => void,
): DeleteDialogHandles {
  const overlay = document.createElement("div");
  overlay.className = "dialog-overlay";
  overlay.dataset.dialog = "delete";
  overlay.dataset.node = node.id;

  const box = document.createElement("div");
  box.className = "dialog";
  const title = document.createElement("h3");
  title.textContent = node.volatile
    ? `Resolve volatile context "${node.purpose}"`
    : `Remove context "${node.purpose}"`;
  box.appendChild(title);

  const buttons: HTMLButtonElement[] = [];
  for (const disposition of deleteDialogOptions(node)) {
    const btn = document.createElement("button");
    btn.dataset.disposition = disposition;
    btn.textContent = disposition;
    btn.addEventListener("click", () => onPick(disposition));
    box.appendChild(btn);
    buttons.push(btn);
  }

  const cancel = document.createElement("button");
  cancel.dataset.disposition = "cancel";
  cancel.textContent = "cancel";
  cancel.addEventListener("click", onCancel);
  box.appendChild(cancel);

  overlay.appendChild(box);
  container.appendChild(overlay);
  return { overlay, buttons };
}

/** Banner listing volatile nodes that block closing the session. */
export function renderUnresolvedBanner(container: HTMLElement, unresolved: string[]): void {
  container.textContent = "";
  if (unresolved.length === 0) return;
  const banner = document.createElement("div");
  banner.className = "unresolved-banner";
  banner.dataset.count = String(unresolved.length);
  banner.textContent = `Cannot close session: resolve volatile contexts first — ${unresolved.join(", ")}`;
  container.appendChild(banner);
}
