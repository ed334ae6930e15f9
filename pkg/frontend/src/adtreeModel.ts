/**
 * TreeViewModel: the editable mirror of an ADTree document plus the most
 * recent server mitigation report. All editing happens on plain document
 * objects; nothing here computes mitigation or probabilities — badges
 * always reflect the latest EvaluateResponse from the server.
 */

import type {
  AttackDoc,
  DefenceDoc,
  MitigationReportDoc,
  RuleDoc,
  TreeDoc,
  TreeNodeDoc,
} from "./types.js";

export interface TreeViewModel {
  name: string;
  doc: TreeDoc;
  etag: string | null;
  dirty: boolean;
  report: MitigationReportDoc | null;
  successProbability: number | null;
  error: string | null;
}

export function emptyTree(rootId = "root", label = "attack goal"): TreeDoc {
  return { root: { id: rootId, actor: "attacker", label } };
}

export function newViewModel(name: string, doc?: TreeDoc): TreeViewModel {
  return {
    name,
    doc: doc ?? emptyTree(),
    etag: null,
    dirty: false,
    report: null,
    successProbability: null,
    error: null,
  };
}

export function findNode(doc: TreeDoc, id: string): TreeNodeDoc | null {
  const stack: TreeNodeDoc[] = [doc.root];
  while (stack.length > 0) {
    const node = stack.pop() as TreeNodeDoc;
    if (node.id === id) return node;
    for (const child of node.children ?? []) stack.push(child);
  }
  return null;
}

export function allNodes(doc: TreeDoc): TreeNodeDoc[] {
  const out: TreeNodeDoc[] = [];
  const walk = (node: TreeNodeDoc) => {
    out.push(node);
    for (const child of node.children ?? []) walk(child);
  };
  walk(doc.root);
  return out;
}

export function isLeaf(node: TreeNodeDoc): boolean {
  return (node.children ?? []).length === 0;
}

function parentOf(doc: TreeDoc, id: string): TreeNodeDoc | null {
  for (const node of allNodes(doc)) {
    if ((node.children ?? []).some((child) => child.id === id)) return node;
  }
  return null;
}

/** Node and defence ids share one id-space, exactly like the validator. */
export function idInUse(doc: TreeDoc, id: string): boolean {
  for (const node of allNodes(doc)) {
    if (node.id === id) return true;
    if (node.countermeasure?.id === id) return true;
  }
  return false;
}

export function nextId(doc: TreeDoc, prefix: string): string {
  let i = 1;
  while (idInUse(doc, `${prefix}${i}`)) i += 1;
  return `${prefix}${i}`;
}

// Editing actions: each returns false (and leaves the doc alone) when the
// target is missing or the edit would be structurally impossible.

export function addChild(
  doc: TreeDoc,
  parentId: string,
  child: { id: string; label: string },
): boolean {
  const parent = findNode(doc, parentId);
  if (!parent || idInUse(doc, child.id)) return false;
  // A parent stops being an attack leaf the moment it gets children.
  delete parent.attack;
  parent.children = parent.children ?? [];
  parent.refinement = parent.refinement ?? "or";
  parent.children.push({ id: child.id, actor: "attacker", label: child.label });
  return true;
}

export function removeNode(doc: TreeDoc, id: string): boolean {
  if (doc.root.id === id) return false;
  const parent = parentOf(doc, id);
  if (!parent || !parent.children) return false;
  parent.children = parent.children.filter((child) => child.id !== id);
  if (parent.children.length === 0) {
    delete parent.children;
    delete parent.refinement;
  }
  return true;
}

export function setRefinement(doc: TreeDoc, id: string, refinement: "or" | "and"): boolean {
  const node = findNode(doc, id);
  if (!node || isLeaf(node)) return false;
  node.refinement = refinement;
  return true;
}

export function setLabel(doc: TreeDoc, id: string, label: string): boolean {
  const node = findNode(doc, id);
  if (!node) return false;
  node.label = label;
  return true;
}

export function setAttack(doc: TreeDoc, id: string, attack: AttackDoc | null): boolean {
  const node = findNode(doc, id);
  if (!node || !isLeaf(node)) return false;
  if (attack === null) delete node.attack;
  else node.attack = attack;
  return true;
}

export function attachDefence(
  doc: TreeDoc,
  id: string,
  defence: { id: string; label: string; rule: RuleDoc },
): boolean {
  const node = findNode(doc, id);
  if (!node || idInUse(doc, defence.id)) return false;
  const full: DefenceDoc = { id: defence.id, actor: "defender", label: defence.label, rule: defence.rule };
  node.countermeasure = full;
  return true;
}

export function removeDefence(doc: TreeDoc, id: string): boolean {
  const node = findNode(doc, id);
  if (!node || !node.countermeasure) return false;
  delete node.countermeasure;
  return true;
}

// Badges -----------------------------------------------------------------

export type Badge = "mitigated" | "unmitigated" | "none";

export function badgeFor(report: MitigationReportDoc | null, nodeId: string): Badge {
  if (!report) return "none";
  const leaf = report.leaves.find((entry) => entry.id === nodeId);
  if (!leaf) return "none";
  return leaf.mitigated ? "mitigated" : "unmitigated";
}

export function justificationFor(report: MitigationReportDoc | null, nodeId: string): string {
  return report?.leaves.find((entry) => entry.id === nodeId)?.justification ?? "";
}

/** Structural readiness: every leaf needs an attack before the server will
 * accept the document. Purely a pre-flight hint; the server re-validates. */
export function draftProblems(doc: TreeDoc): string[] {
  const problems: string[] = [];
  for (const node of allNodes(doc)) {
    if (isLeaf(node) && !node.attack) {
      problems.push(`leaf '${node.id}' has no attack yet`);
    }
  }
  return problems;
}
