/**
 * Test support: the pinned API fixture (captured from a real backend by
 * scripts/make_ui_fixtures.py and cross-checked by the Python suite) plus
 * a recording fetch stub for driving the Api client offline.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));

export interface Fixture {
  datasets: string[];
  tree: { root: Record<string, unknown> };
  synthesize: { name: string; policy_name: string; source: string };
  evaluate: {
    mitigation: { leaves: { id: string; mitigated: boolean; justification: string }[]; root_defended: boolean };
    success_probability: number | null;
  };
  mitigation_only: Fixture["evaluate"];
  lockout: Record<
    string,
    {
      epsilon: number;
      max_attempts: number;
      achieved_probability: number;
      basis: string;
      curve: [number, number][];
    }
  >;
  fit_model: {
    kind: "pdf_zipf" | "cdf_zipf" | "empirical";
    c: number;
    s: number;
    fit_range: [number, number] | null;
    r_squared: number;
    n_ranks: number;
  };
  pipeline: {
    nodes: { id: string; kind: string; params: Record<string, unknown> }[];
    edges: [string, string][];
    description?: string;
  };
  pipeline_type_issues: { from: string; to: string; expected: string; actual: string }[];
  run_results: Record<string, { node_id: string; status: "ok" | "failed" | "skipped"; artifact?: string }>;
}

export function loadFixture(): Fixture {
  return JSON.parse(readFileSync(join(here, "fixtures", "api.json"), "utf8")) as Fixture;
}

/** Canonical bytes of the checked-in tree asset, for byte-level checks. */
export function bundledTreeBytes(): string {
  return readFileSync(
    join(here, "..", "..", "assets", "workspace", "adtrees", "bimodal-guess.json"),
    "utf8",
  );
}

// Fetch stub --------------------------------------------------------------

export interface RecordedCall {
  method: string;
  path: string;
  body: unknown;
  headers: Record<string, string>;
}

export interface StubReply {
  status?: number;
  json?: unknown;
  text?: string;
  headers?: Record<string, string>;
}

export type StubHandler = (call: RecordedCall) => StubReply;

export interface FetchStub {
  fetchFn: (input: string, init?: RequestInit) => Promise<Response>;
  calls: RecordedCall[];
  callsTo: (method: string, path: string) => RecordedCall[];
}

/**
 * Routes are "METHOD /path" keys; "METHOD *" catches the rest. Unmatched
 * requests come back as a 404 envelope so a missing stub shows up as an
 * ApiError in the test, not a hang.
 */
export function stubFetch(routes: Record<string, StubHandler>): FetchStub {
  const calls: RecordedCall[] = [];
  const fetchFn = async (input: string, init?: RequestInit): Promise<Response> => {
    const method = (init?.method ?? "GET").toUpperCase();
    const call: RecordedCall = {
      method,
      path: input,
      body: typeof init?.body === "string" ? JSON.parse(init.body) : undefined,
      headers: { ...((init?.headers as Record<string, string>) ?? {}) },
    };
    calls.push(call);
    const handler = routes[`${method} ${input}`] ?? routes[`${method} *`];
    if (!handler) {
      return jsonResponse(
        { status: 404, code: "not_found", message: `no stub for ${method} ${input}` },
        404,
      );
    }
    const reply = handler(call);
    if (reply.text !== undefined) {
      return new Response(reply.text, {
        status: reply.status ?? 200,
        headers: { "content-type": "text/plain", ...(reply.headers ?? {}) },
      });
    }
    return jsonResponse(reply.json, reply.status ?? 200, reply.headers);
  };
  return {
    fetchFn,
    calls,
    callsTo: (method, path) => calls.filter((c) => c.method === method && c.path === path),
  };
}

export function jsonResponse(
  body: unknown,
  status = 200,
  headers: Record<string, string> = {},
): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json", ...headers },
  });
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
