/**
 * GraphViewModel: editable mirror of a pipeline document plus view-only
 * state (positions, statuses, previews). Inline type flags reuse the
 * port-type table from types.ts; the server's checker remains the
 * authority and re-reports on save.
 */

import { NODE_SIGNATURES } from "./types.js";
import type {
  ModelDoc,
  NodeResultDoc,
  PipelineDoc,
  PipelineNodeDoc,
  TypeIssueDoc,
} from "./types.js";

export type NodeStatus = "idle" | "running" | "ok" | "failed" | "skipped";

export interface GraphViewModel {
  name: string;
  doc: PipelineDoc;
  etag: string | null;
  dirty: boolean;
  statuses: Record<string, NodeStatus>;
  results: Record<string, NodeResultDoc>;
  error: string | null;
}

export function newGraph(name: string, doc?: PipelineDoc): GraphViewModel {
  return {
    name,
    doc: doc ?? { nodes: [], edges: [] },
    etag: null,
    dirty: false,
    statuses: {},
    results: {},
    error: null,
  };
}

export function nodeById(doc: PipelineDoc, id: string): PipelineNodeDoc | undefined {
  return doc.nodes.find((node) => node.id === id);
}

export function addNode(doc: PipelineDoc, node: PipelineNodeDoc): boolean {
  if (nodeById(doc, node.id)) return false;
  doc.nodes.push(node);
  return true;
}

export function removeNode(doc: PipelineDoc, id: string): boolean {
  const before = doc.nodes.length;
  doc.nodes = doc.nodes.filter((node) => node.id !== id);
  doc.edges = doc.edges.filter(([from, to]) => from !== id && to !== id);
  return doc.nodes.length !== before;
}

export function connect(doc: PipelineDoc, from: string, to: string): boolean {
  if (!nodeById(doc, from) || !nodeById(doc, to) || from === to) return false;
  if (doc.edges.some(([a, b]) => a === from && b === to)) return false;
  doc.edges.push([from, to]);
  return true;
}

export function disconnect(doc: PipelineDoc, from: string, to: string): boolean {
  const before = doc.edges.length;
  doc.edges = doc.edges.filter(([a, b]) => !(a === from && b === to));
  return doc.edges.length !== before;
}

export function setParam(doc: PipelineDoc, id: string, key: string, value: unknown): boolean {
  const node = nodeById(doc, id);
  if (!node) return false;
  if (value === undefined || value === "") delete node.params[key];
  else node.params[key] = value;
  return true;
}

// Typing mirror ----------------------------------------------------------

function upstreamOf(doc: PipelineDoc, id: string): string[] {
  return doc.edges.filter(([, to]) => to === id).map(([from]) => from);
}

/** Resolve a node's output port, following export passthrough like the
 * engine does. Returns null when unknown (no input yet, unknown kind, or
 * a passthrough cycle). */
export function outputPort(doc: PipelineDoc, id: string, seen: Set<string> = new Set()): string | null {
  if (seen.has(id)) return null;
  seen.add(id);
  const node = nodeById(doc, id);
  if (!node) return null;
  const signature = NODE_SIGNATURES[node.kind];
  if (!signature) return null;
  if (signature.output !== "passthrough") return signature.output;
  const inputs = upstreamOf(doc, id);
  if (inputs.length !== 1) return null;
  return outputPort(doc, inputs[0], seen);
}

/** Inline edge typing: mirrors the server's type_check closely enough to
 * flag mistakes before save. Unknown upstream types are not flagged. */
export function localTypeIssues(doc: PipelineDoc): TypeIssueDoc[] {
  const issues: TypeIssueDoc[] = [];
  for (const [from, to] of doc.edges) {
    const target = nodeById(doc, to);
    if (!target) continue;
    const signature = NODE_SIGNATURES[target.kind];
    if (!signature || signature.input === null || signature.input === "any") continue;
    const actual = outputPort(doc, from);
    if (actual !== null && actual !== signature.input) {
      issues.push({ from, to, expected: signature.input, actual });
    }
  }
  return issues;
}

/** Structural problems that would make the server reject the document. */
export function draftProblems(doc: PipelineDoc): string[] {
  const problems: string[] = [];
  if (doc.nodes.length === 0) problems.push("pipeline has no nodes");
  for (const node of doc.nodes) {
    const inputs = upstreamOf(doc, node.id).length;
    const signature = NODE_SIGNATURES[node.kind];
    if (!signature) {
      problems.push(`node '${node.id}' has unknown kind '${node.kind}'`);
    } else if (signature.input === null && inputs > 0) {
      problems.push(`source '${node.id}' cannot take inputs`);
    } else if (signature.input !== null && inputs !== 1) {
      problems.push(`node '${node.id}' needs exactly one input, has ${inputs}`);
    }
  }
  if (topologicalOrder(doc) === null && doc.nodes.length > 0) {
    problems.push("pipeline contains a cycle");
  }
  return problems;
}

/** Kahn's algorithm with lexicographic tie-break, like the engine. Returns
 * null when the graph has a cycle. */
export function topologicalOrder(doc: PipelineDoc): string[] | null {
  const indegree = new Map<string, number>();
  for (const node of doc.nodes) indegree.set(node.id, 0);
  for (const [, to] of doc.edges) {
    if (indegree.has(to)) indegree.set(to, (indegree.get(to) ?? 0) + 1);
  }
  const ready = [...indegree.entries()].filter(([, d]) => d === 0).map(([id]) => id);
  ready.sort();
  const order: string[] = [];
  while (ready.length > 0) {
    const id = ready.shift() as string;
    order.push(id);
    for (const [from, to] of doc.edges) {
      if (from !== id || !indegree.has(to)) continue;
      const next = (indegree.get(to) ?? 1) - 1;
      indegree.set(to, next);
      if (next === 0) {
        ready.push(to);
        ready.sort();
      }
    }
  }
  return order.length === doc.nodes.length ? order : null;
}

// Layout -----------------------------------------------------------------

export interface Position {
  x: number;
  y: number;
}

/** Deterministic layered layout: column = longest path from a source,
 * row = order within the column. Good enough for small graphs and stable
 * across reloads. */
export function layout(doc: PipelineDoc): Record<string, Position> {
  const order = topologicalOrder(doc) ?? doc.nodes.map((node) => node.id);
  const depth = new Map<string, number>();
  for (const id of order) {
    const inputs = upstreamOf(doc, id).map((from) => depth.get(from) ?? 0);
    depth.set(id, inputs.length === 0 ? 0 : Math.max(...inputs) + 1);
  }
  const rows = new Map<number, number>();
  const positions: Record<string, Position> = {};
  for (const id of order) {
    const column = depth.get(id) ?? 0;
    const row = rows.get(column) ?? 0;
    rows.set(column, row + 1);
    positions[id] = { x: 40 + column * 190, y: 40 + row * 110 };
  }
  return positions;
}

// Result previews --------------------------------------------------------

export function fittedEquation(model: ModelDoc): string {
  const c = model.c.toPrecision(4);
  const s = model.s.toPrecision(4);
  if (model.kind === "pdf_zipf") return `p(r) = ${c} · r^−${s}`;
  if (model.kind === "cdf_zipf") return `λ(b) = ${c} · b^${s}`;
  return `empirical over ${model.n_ranks} ranks`;
}

export function applyRunResults(
  view: GraphViewModel,
  results: Record<string, NodeResultDoc>,
): void {
  view.results = results;
  view.statuses = {};
  for (const node of view.doc.nodes) {
    const result = results[node.id];
    view.statuses[node.id] = result ? result.status : "idle";
  }
}
