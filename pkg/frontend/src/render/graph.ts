import { MalformedPayload } from "../types.js";
import type { GraphNode, GraphPayload, SessionView } from "../types.js";
import { esc, trimLabel } from "./util.js";

/** Deterministic dual-lane layered layout.
 *
 * Columns are lanes (maker left, checker right), rows are layers top-down:
 * decision, factor, action, evidence. Positions depend only on sorted node
 * ids, so one payload always renders the same SVG — which is what makes the
 * view snapshot-testable.
 */

const WIDTH = 1320;
const HALF = WIDTH / 2;
const MARGIN = 36;
const ROW_Y: Record<GraphNode["node_kind"], number> = {
  decision: 60,
  factor: 170,
  action: 300,
  evidence: 440,
};
const HEIGHT = 520;

type Point = { x: number; y: number };

function label(node: GraphNode): string {
  switch (node.node_kind) {
    case "decision":
      return node.verdict ?? node.id;
    case "factor":
      return node.statement ?? node.id;
    case "action":
      return node.goal ?? node.canonical_key ?? node.id;
    case "evidence":
      return node.id;
  }
}

function checkGraph(graph: GraphPayload): void {
  if (!graph || !Array.isArray(graph.nodes) || !Array.isArray(graph.edges)) {
    throw new MalformedPayload("graph payload must carry nodes and edges arrays");
  }
  const ids = new Set<string>();
  for (const node of graph.nodes) {
    if (!node.id || !node.node_kind || !node.lane) {
      throw new MalformedPayload(`incomplete node ${JSON.stringify(node)}`);
    }
    ids.add(node.id);
  }
  for (const edge of graph.edges) {
    if (!ids.has(edge.from) || !ids.has(edge.to)) {
      throw new MalformedPayload(`edge ${edge.from}->${edge.to} references unknown nodes`);
    }
  }
}

function layout(graph: GraphPayload): Map<string, Point> {
  const positions = new Map<string, Point>();
  const lanes: Array<GraphNode["lane"]> = ["maker", "checker"];
  const kinds: Array<GraphNode["node_kind"]> = ["decision", "factor", "action", "evidence"];
  for (const lane of lanes) {
    for (const kind of kinds) {
      const group = graph.nodes
        .filter((n) => n.lane === lane && n.node_kind === kind)
        .sort((a, b) => (a.id < b.id ? -1 : 1));
      const x0 = lane === "maker" ? 0 : HALF;
      const span = HALF - 2 * MARGIN;
      group.forEach((node, i) => {
        positions.set(node.id, {
          x: Math.round(x0 + MARGIN + ((i + 0.5) * span) / group.length),
          y: ROW_Y[kind],
        });
      });
    }
  }
  return positions;
}

function nodeMarkup(node: GraphNode, at: Point, recommended: Set<string>): string {
  const classes = ["node", node.node_kind, `lane-${node.lane}`];
  if (node.node_kind === "action") {
    classes.push(`status-${node.status ?? "unknown"}`);
    if (node.criticality === "critical") classes.push("critical");
    if (recommended.has(node.id)) classes.push("recommended");
  }
  if (node.node_kind === "factor") {
    classes.push(`outcome-${node.outcome ?? "unknown"}`, `resolution-${node.resolution ?? "unknown"}`);
  }
  if (node.node_kind === "decision") classes.push(`verdict-${node.verdict ?? "unknown"}`);

  const text = esc(trimLabel(label(node)));
  const title = `<title>${esc(node.id)}: ${esc(label(node))}</title>`;
  const caption = `<text x="${at.x}" y="${at.y + 34}" text-anchor="middle" class="label">${text}</text>`;

  if (node.node_kind === "evidence") {
    return (
      `<g class="${classes.join(" ")}" data-node-id="${esc(node.id)}">` +
      `<circle cx="${at.x}" cy="${at.y}" r="12">${title}</circle>` +
      `<text x="${at.x}" y="${at.y + 26}" text-anchor="middle" class="label small">${esc(node.id)}</text>` +
      `</g>`
    );
  }
  const badge =
    node.node_kind === "action"
      ? `<text x="${at.x}" y="${at.y - 18}" text-anchor="middle" class="badge">` +
        `${esc(node.status ?? "")}${node.criticality === "critical" ? " ⚠ critical" : ""}</text>`
      : "";
  return (
    `<g class="${classes.join(" ")}" data-node-id="${esc(node.id)}">` +
    `<rect x="${at.x - 60}" y="${at.y - 14}" width="120" height="28" rx="6">${title}</rect>` +
    badge +
    caption +
    `</g>`
  );
}

export function renderGraph(session: SessionView): string {
  const graph = session.graph;
  checkGraph(graph);
  const positions = layout(graph);
  const recommended = new Set(session.recommendations.map((r) => r.action));

  const edges = [...graph.edges]
    .sort((a, b) => {
      const ka = `${a.edge_kind}|${a.from}|${a.to}`;
      const kb = `${b.edge_kind}|${b.from}|${b.to}`;
      return ka < kb ? -1 : 1;
    })
    .map((edge) => {
      const from = positions.get(edge.from)!;
      const to = positions.get(edge.to)!;
      const classes = ["edge", edge.edge_kind];
      if (edge.edge_kind === "factor_factor") classes.push("conflict", `path-${edge.path_kind}`);
      if (edge.stance) classes.push(`stance-${edge.stance}`);
      return (
        `<line class="${classes.join(" ")}" data-edge="${esc(edge.from)}->${esc(edge.to)}" ` +
        `x1="${from.x}" y1="${from.y}" x2="${to.x}" y2="${to.y}"/>`
      );
    })
    .join("");

  const nodes = [...graph.nodes]
    .sort((a, b) => (a.id < b.id ? -1 : 1))
    .map((node) => nodeMarkup(node, positions.get(node.id)!, recommended))
    .join("");

  const laneHeaders =
    `<text x="${HALF / 2}" y="24" text-anchor="middle" class="lane-header">maker</text>` +
    `<text x="${HALF + HALF / 2}" y="24" text-anchor="middle" class="lane-header">checker</text>` +
    `<line class="lane-divider" x1="${HALF}" y1="10" x2="${HALF}" y2="${HEIGHT - 10}"/>`;

  return (
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" class="case-graph" ` +
    `data-case-id="${esc(graph.case_id)}" xmlns="http://www.w3.org/2000/svg">` +
    laneHeaders +
    `<g class="edges">${edges}</g>` +
    `<g class="nodes">${nodes}</g>` +
    `</svg>`
  );
}
