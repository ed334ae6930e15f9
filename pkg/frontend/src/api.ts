/** Thin typed client over the workbench HTTP API. */

import type {
  ApiErrorBody,
  EvaluateResponse,
  LockoutResponse,
  NodeResultDoc,
  PipelineDoc,
  SynthesizeResponse,
  TreeDoc,
  TypeIssueDoc,
  VerdictDoc,
} from "./types.js";

export class ApiError extends Error {
  readonly body: ApiErrorBody;

  constructor(body: ApiErrorBody) {
    super(body.message);
    this.name = "ApiError";
    this.body = body;
  }

  get isConflict(): boolean {
    return this.body.status === 409;
  }
}

export interface Document<T> {
  doc: T;
  etag: string | null;
}

export interface PutResult {
  name: string;
  etag: string;
  created: boolean;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Api {
  private readonly fetchFn: FetchLike;
  private readonly base: string;

  constructor(fetchFn?: FetchLike, base = "") {
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
    this.base = base;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    headers: Record<string, string> = {},
  ): Promise<{ data: T; etag: string | null }> {
    const init: RequestInit = { method, headers: { ...headers } };
    if (body !== undefined) {
      (init.headers as Record<string, string>)["Content-Type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, init);
    const contentType = response.headers.get("content-type") ?? "";
    const isJson = contentType.includes("application/json");
    if (!response.ok) {
      const fallback: ApiErrorBody = {
        status: response.status,
        code: "internal",
        message: `${response.status} ${response.statusText}`,
      };
      throw new ApiError(isJson ? ((await response.json()) as ApiErrorBody) : fallback);
    }
    const data = (isJson ? await response.json() : await response.text()) as T;
    return { data, etag: response.headers.get("etag") };
  }

  async health(): Promise<{ status: string; version: string }> {
    return (await this.request<{ status: string; version: string }>("GET", "/api/health")).data;
  }

  // Collections ------------------------------------------------------------

  async listNames(section: "datasets" | "policies" | "adtrees" | "pipelines"): Promise<string[]> {
    return (await this.request<{ names: string[] }>("GET", `/api/${section}`)).data.names;
  }

  // Datasets / policies (text documents) -------------------------------------

  async getText(section: "datasets" | "policies", name: string): Promise<Document<string>> {
    const { data, etag } = await this.request<{ content: string }>(
      "GET",
      `/api/${section}/${name}`,
    );
    return { doc: data.content, etag };
  }

  async putText(
    section: "datasets" | "policies",
    name: string,
    content: string,
    etag?: string | null,
  ): Promise<PutResult> {
    const headers: Record<string, string> = etag ? { "If-Match": etag } : {};
    return (
      await this.request<PutResult>("PUT", `/api/${section}/${name}`, { content }, headers)
    ).data;
  }

  async checkPolicy(name: string, password: string): Promise<VerdictDoc> {
    return (
      await this.request<VerdictDoc>("POST", `/api/policies/${name}/check`, { password })
    ).data;
  }

  // ADTrees ------------------------------------------------------------------

  async getTree(name: string): Promise<Document<TreeDoc>> {
    const { data, etag } = await this.request<TreeDoc>("GET", `/api/adtrees/${name}`);
    return { doc: data, etag };
  }

  async putTree(name: string, doc: TreeDoc, etag?: string | null): Promise<PutResult> {
    const headers: Record<string, string> = etag ? { "If-Match": etag } : {};
    return (await this.request<PutResult>("PUT", `/api/adtrees/${name}`, doc, headers)).data;
  }

  async deleteTree(name: string): Promise<void> {
    await this.request("DELETE", `/api/adtrees/${name}`);
  }

  async synthesize(name: string, tree?: TreeDoc): Promise<SynthesizeResponse> {
    const body = tree === undefined ? {} : { tree };
    return (
      await this.request<SynthesizeResponse>("POST", `/api/adtrees/${name}/synthesize`, body)
    ).data;
  }

  async evaluate(
    name: string,
    options: { tree?: TreeDoc; dataset?: string; budget?: number } = {},
  ): Promise<EvaluateResponse> {
    return (
      await this.request<EvaluateResponse>("POST", `/api/adtrees/${name}/evaluate`, options)
    ).data;
  }

  // Lockout ------------------------------------------------------------------

  async lockout(dataset: string, epsilon: number, basis: string): Promise<LockoutResponse> {
    return (
      await this.request<LockoutResponse>("POST", "/api/lockout", { dataset, epsilon, basis })
    ).data;
  }

  // Pipelines ----------------------------------------------------------------

  async getPipeline(name: string): Promise<Document<PipelineDoc>> {
    const { data, etag } = await this.request<PipelineDoc>("GET", `/api/pipelines/${name}`);
    return { doc: data, etag };
  }

  async putPipeline(
    name: string,
    doc: PipelineDoc,
    etag?: string | null,
  ): Promise<PutResult & { type_issues: TypeIssueDoc[] }> {
    const headers: Record<string, string> = etag ? { "If-Match": etag } : {};
    return (
      await this.request<PutResult & { type_issues: TypeIssueDoc[] }>(
        "PUT",
        `/api/pipelines/${name}`,
        doc,
        headers,
      )
    ).data;
  }

  async runPipeline(name: string): Promise<Record<string, NodeResultDoc>> {
    const { data } = await this.request<{ results: Record<string, NodeResultDoc> }>(
      "POST",
      `/api/pipelines/${name}/run`,
    );
    return data.results;
  }

  async fetchArtifactJson<T>(artifact: string): Promise<T> {
    return (await this.request<T>("GET", `/api/artifacts/${artifact}`)).data;
  }

  async fetchArtifactText(artifact: string): Promise<string> {
    const response = await this.fetchFn(`${this.base}/api/artifacts/${artifact}`, {
      method: "GET",
    });
    if (!response.ok) {
      throw new ApiError({
        status: response.status,
        code: "internal",
        message: `${response.status} ${response.statusText}`,
      });
    }
    return await response.text();
  }
}
