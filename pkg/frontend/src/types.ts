/** Document and response shapes mirrored from the HTTP API. */

export interface ApiErrorBody {
  status: number;
  code: string;
  message: string;
  detail?: unknown;
}

// Policy rules (the same JSON shape the backend stores everywhere).

export type RuleDoc =
  | { kind: "min_length"; n: number }
  | { kind: "max_length"; n: number }
  | { kind: "require_class"; class: string; k: number }
  | { kind: "ban_dictionary"; dictionary: string }
  | { kind: "ban_substring"; substring: string }
  | { kind: "ban_exact"; word: string };

export type AttackDoc =
  | { kind: "dictionary"; dictionary: string }
  | { kind: "brute_force"; alphabet: string; max_len: number };

export interface DefenceDoc {
  id: string;
  actor: "defender";
  label: string;
  rule: RuleDoc;
}

export interface TreeNodeDoc {
  id: string;
  actor: "attacker";
  label: string;
  refinement?: "or" | "and";
  children?: TreeNodeDoc[];
  attack?: AttackDoc;
  countermeasure?: DefenceDoc;
}

export interface TreeDoc {
  root: TreeNodeDoc;
}

export interface LeafMitigationDoc {
  id: string;
  mitigated: boolean;
  justification: string;
}

export interface MitigationReportDoc {
  leaves: LeafMitigationDoc[];
  root_defended: boolean;
}

export interface EvaluateResponse {
  mitigation: MitigationReportDoc;
  success_probability: number | null;
}

export interface SynthesizeResponse {
  name: string;
  policy_name: string;
  source: string;
}

// Guessing models and lockout.

export interface ModelDoc {
  kind: "pdf_zipf" | "cdf_zipf" | "empirical";
  c: number;
  s: number;
  fit_range: [number, number] | null;
  r_squared: number;
  n_ranks: number;
}

export interface LockoutResponse {
  epsilon: number;
  max_attempts: number;
  achieved_probability: number;
  basis: string;
  curve: [number, number][];
}

// Pipelines.

export interface PipelineNodeDoc {
  id: string;
  kind: string;
  params: Record<string, unknown>;
  description?: string;
}

export interface PipelineDoc {
  nodes: PipelineNodeDoc[];
  edges: [string, string][];
  description?: string;
}

export interface TypeIssueDoc {
  from: string;
  to: string;
  expected: string;
  actual: string;
}

export interface NodeResultDoc {
  node_id: string;
  status: "ok" | "failed" | "skipped";
  artifact?: string;
  error?: string;
}

export interface VerdictDoc {
  accepted: boolean;
  violations: { rule: RuleDoc; reason: string }[];
}

export interface ParseErrorDoc {
  message: string;
  line: number;
  column: number;
}

/**
 * Port-type table mirrored from the pipeline engine, used only to flag
 * mis-typed edges inline while editing; the server re-checks on save and
 * remains authoritative.
 */
export const NODE_SIGNATURES: Record<string, { input: string | null; output: string | null }> = {
  source: { input: null, output: "raw_bytes" },
  formatter: { input: "raw_bytes", output: "frequency_table" },
  zipf_fit: { input: "frequency_table", output: "model" },
  lockout: { input: "model", output: "recommendation" },
  policy_filter: { input: "frequency_table", output: "frequency_table" },
  export: { input: "any", output: "passthrough" },
};

/** Editor form metadata: which params each node kind takes. */
export interface ParamSpec {
  name: string;
  kind: "text" | "int" | "float" | "choice";
  choices?: string[];
  required: boolean;
}

export const NODE_PARAMS: Record<string, ParamSpec[]> = {
  source: [
    { name: "path", kind: "text", required: true },
    { name: "format", kind: "choice", choices: ["raw", "colon", "csv"], required: true },
  ],
  formatter: [],
  zipf_fit: [
    { name: "model", kind: "choice", choices: ["pdf", "cdf"], required: true },
    { name: "min_count", kind: "int", required: false },
    { name: "rank_limit", kind: "int", required: false },
  ],
  lockout: [{ name: "epsilon", kind: "float", required: true }],
  policy_filter: [{ name: "policy", kind: "text", required: true }],
  export: [{ name: "path", kind: "text", required: true }],
};

export const CHAR_CLASSES = ["lower", "upper", "digit", "symbol"] as const;

export const BUILTIN_ALPHABETS = [
  "lower",
  "upper",
  "digit",
  "symbol",
  "alphanumeric",
  "printable",
] as const;
