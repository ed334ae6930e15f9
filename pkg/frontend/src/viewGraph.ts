/**
 * Pipeline editor: node-graph canvas, edge wiring with inline type flags,
 * param forms, save (server re-checks types) and run with per-node status
 * and artifact previews.
 */

import { Api, ApiError } from "./api.js";
import {
  GraphViewModel,
  addNode,
  applyRunResults,
  connect,
  disconnect,
  draftProblems,
  fittedEquation,
  layout,
  localTypeIssues,
  newGraph,
  nodeById,
  removeNode,
  setParam,
} from "./graphModel.js";
import { clear, h, option } from "./dom.js";
import { logLogPlot } from "./plot.js";
import { NODE_PARAMS, NODE_SIGNATURES } from "./types.js";
import type { ModelDoc, PipelineDoc, TypeIssueDoc } from "./types.js";

const BOX_W = 150;
const BOX_H = 56;

export interface GraphRenderOptions {
  selected?: string | null;
  issues?: TypeIssueDoc[];
}

/**
 * Pure SVG markup for the node graph. Node boxes carry data-node ids so a
 * single click handler on the container can resolve selection; edges that
 * fail the inline type check get the "edge-bad" class.
 */
export function renderGraphSvg(
  view: GraphViewModel,
  options: GraphRenderOptions = {},
): string {
  const doc = view.doc;
  const positions = layout(doc);
  const issues = options.issues ?? localTypeIssues(doc);
  const flagged = new Set(issues.map((issue) => `${issue.from}->${issue.to}`));
  const parts: string[] = [];

  let width = 240;
  let height = 180;
  for (const pos of Object.values(positions)) {
    width = Math.max(width, pos.x + BOX_W + 40);
    height = Math.max(height, pos.y + BOX_H + 40);
  }

  for (const [from, to] of doc.edges) {
    const a = positions[from];
    const b = positions[to];
    if (!a || !b) continue;
    const bad = flagged.has(`${from}->${to}`);
    parts.push(
      `<line class="edge${bad ? " edge-bad" : ""}" ` +
        `x1="${a.x + BOX_W}" y1="${a.y + BOX_H / 2}" ` +
        `x2="${b.x}" y2="${b.y + BOX_H / 2}"/>`,
    );
  }

  for (const node of doc.nodes) {
    const pos = positions[node.id];
    if (!pos) continue;
    const status = view.statuses[node.id] ?? "idle";
    const selected = options.selected === node.id ? " selected" : "";
    parts.push(
      `<g class="node status-${status}${selected}" data-node="${node.id}" ` +
        `transform="translate(${pos.x} ${pos.y})">` +
        `<rect width="${BOX_W}" height="${BOX_H}" rx="8"/>` +
        `<text class="node-title" x="10" y="22">${node.id}</text>` +
        `<text class="node-kind" x="10" y="42">${node.kind}</text>` +
        `</g>`,
    );
  }

  return (
    `<svg class="graph" viewBox="0 0 ${width} ${height}" ` +
    `width="${width}" height="${height}">` +
    parts.join("") +
    `</svg>`
  );
}

export class GraphView {
  readonly element: HTMLElement;
  model: GraphViewModel;
  private readonly api: Api;
  private names: string[] = [];
  private selected: string | null = null;
  private serverIssues: TypeIssueDoc[] = [];
  private preview: HTMLElement | null = null;
  private notice: string | null = null;

  constructor(api: Api) {
    this.api = api;
    this.model = newGraph("new-pipeline");
    this.element = h("section.panel.graph-panel");
    this.render();
  }

  async load(): Promise<void> {
    try {
      this.names = await this.api.listNames("pipelines");
    } catch (err) {
      this.model.error = err instanceof ApiError ? err.message : String(err);
    }
    if (this.names.length > 0) await this.open(this.names[0]);
    else this.render();
  }

  async open(name: string): Promise<void> {
    try {
      const { doc, etag } = await this.api.getPipeline(name);
      this.model = newGraph(name, doc);
      this.model.etag = etag;
      this.selected = null;
      this.serverIssues = [];
      this.preview = null;
      this.notice = null;
    } catch (err) {
      this.model.error = err instanceof ApiError ? err.message : String(err);
    }
    this.render();
  }

  private changed(): void {
    this.model.dirty = true;
    this.model.statuses = {};
    this.model.results = {};
    this.preview = null;
    this.notice = null;
    this.render();
  }

  async save(): Promise<void> {
    try {
      const result = await this.api.putPipeline(this.model.name, this.model.doc, this.model.etag);
      this.model.etag = result.etag;
      this.model.dirty = false;
      this.model.error = null;
      this.serverIssues = result.type_issues;
      this.notice =
        result.type_issues.length === 0
          ? "saved; server type check clean"
          : `saved as work in progress; server reports ${result.type_issues.length} type issue(s)`;
      if (!this.names.includes(this.model.name)) this.names.push(this.model.name);
    } catch (err) {
      if (err instanceof ApiError && err.isConflict) {
        this.model.error =
          "This pipeline changed on the server since you loaded it. Reload to pick up the latest copy.";
      } else {
        this.model.error = err instanceof ApiError ? err.message : String(err);
      }
    }
    this.render();
  }

  async run(): Promise<void> {
    if (this.model.dirty) await this.save();
    if (this.model.error) return;
    for (const node of this.model.doc.nodes) this.model.statuses[node.id] = "running";
    this.render();
    try {
      const results = await this.api.runPipeline(this.model.name);
      applyRunResults(this.model, results);
      this.model.error = null;
      this.notice = null;
    } catch (err) {
      this.model.statuses = {};
      this.model.error = err instanceof ApiError ? err.message : String(err);
    }
    this.render();
    if (this.selected) await this.showPreview(this.selected);
  }

  /** Build the preview pane for a node's run artifact, if it has one. */
  async showPreview(nodeId: string): Promise<void> {
    this.preview = null;
    const result = this.model.results[nodeId];
    const node = nodeById(this.model.doc, nodeId);
    if (!result || !node || result.status !== "ok" || !result.artifact) {
      this.render();
      return;
    }
    try {
      if (node.kind === "zipf_fit") {
        const model = await this.api.fetchArtifactJson<ModelDoc>(result.artifact);
        this.preview = await this.fitPreview(nodeId, model);
      } else if (node.kind === "lockout") {
        const rec = await this.api.fetchArtifactJson<{
          epsilon: number;
          max_attempts: number;
          achieved_probability: number;
          basis: string;
        }>(result.artifact);
        this.preview = h(
          "div.preview",
          {},
          h("h3", {}, `${nodeId} — lockout recommendation`),
          h(
            "p",
            {},
            `allow at most ${rec.max_attempts} attempts ` +
              `(achieves ${rec.achieved_probability.toPrecision(3)} ≤ ε = ${rec.epsilon}, ` +
              `basis ${rec.basis})`,
          ),
        );
      } else if (result.artifact.endsWith(".csv")) {
        const text = await this.api.fetchArtifactText(result.artifact);
        const lines = text.split("\n");
        const shown = lines.slice(0, 12).join("\n");
        this.preview = h(
          "div.preview",
          {},
          h("h3", {}, `${nodeId} — frequency table`),
          h("pre", {}, shown + (lines.length > 12 ? "\n…" : "")),
        );
      } else {
        this.preview = h(
          "div.preview",
          {},
          h("h3", {}, nodeId),
          h("p", {}, `artifact ${result.artifact}`),
        );
      }
    } catch (err) {
      this.preview = h(
        "div.preview",
        {},
        h("p.error", {}, err instanceof ApiError ? err.message : String(err)),
      );
    }
    this.render();
  }

  /** Fitted-equation preview with the observed points from the upstream
   * frequency table when it is available as an artifact. */
  private async fitPreview(nodeId: string, model: ModelDoc): Promise<HTMLElement> {
    const pane = h("div.preview", {}, h("h3", {}, `${nodeId} — fitted model`));
    pane.append(
      h("p.equation", {}, fittedEquation(model)),
      h("p", {}, `r² = ${model.r_squared.toPrecision(4)} over ${model.n_ranks} ranks`),
    );
    const upstream = this.model.doc.edges.find(([, to]) => to === nodeId)?.[0];
    const upstreamArtifact = upstream ? this.model.results[upstream]?.artifact : undefined;
    if (upstreamArtifact && upstreamArtifact.endsWith(".csv")) {
      try {
        const csv = await this.api.fetchArtifactText(upstreamArtifact);
        const counts = parseFrequencyCsv(csv);
        const total = counts.reduce((a, b) => a + b, 0);
        if (total > 0) {
          const points =
            model.kind === "cdf_zipf" ? cumulativePoints(counts, total) : pdfPoints(counts, total);
          // logLogPlot draws log10 y = log10 c - s*log10 x; the CDF exponent
          // enters with the opposite sign.
          const slope = model.kind === "cdf_zipf" ? -model.s : model.s;
          const holder = h("div.plot-holder");
          holder.innerHTML = logLogPlot(points, model.c, slope);
          pane.append(holder);
        }
      } catch {
        // Preview plot is best-effort; the equation above already rendered.
      }
    }
    return pane;
  }

  render(): void {
    clear(this.element);
    const model = this.model;
    const liveIssues = localTypeIssues(model.doc);
    const problems = draftProblems(model.doc);

    const picker = h("select", {
      onchange: (event: Event) => void this.open((event.target as HTMLSelectElement).value),
    }) as HTMLSelectElement;
    for (const name of this.names) picker.append(option(name));
    if (this.names.includes(model.name)) picker.value = model.name;

    const nameInput = h("input", {
      type: "text",
      value: model.name,
      onchange: (event: Event) => {
        model.name = (event.target as HTMLInputElement).value.trim() || model.name;
      },
    });

    const kindSelect = h("select") as HTMLSelectElement;
    for (const kind of Object.keys(NODE_SIGNATURES)) kindSelect.append(option(kind));

    const addButton = h(
      "button",
      {
        onclick: () => {
          const kind = kindSelect.value;
          let i = 1;
          while (nodeById(model.doc, `${kind}${i}`)) i += 1;
          addNode(model.doc, { id: `${kind}${i}`, kind, params: {} });
          this.selected = `${kind}${i}`;
          this.changed();
        },
      },
      "+ node",
    );

    this.element.append(
      h("h2", {}, "Pipeline editor"),
      h(
        "div.controls",
        {},
        this.names.length > 0 ? h("label", {}, "open ", picker) : null,
        h("label", {}, "name ", nameInput),
        h("button", { onclick: () => void this.save() }, model.dirty ? "Save*" : "Save"),
        h(
          "button",
          { onclick: () => void this.run(), disabled: problems.length > 0 || liveIssues.length > 0 },
          "Run",
        ),
        h(
          "button",
          {
            onclick: () => {
              this.model = newGraph("new-pipeline");
              this.selected = null;
              this.serverIssues = [];
              this.preview = null;
              this.render();
            },
          },
          "New pipeline",
        ),
        h("label", {}, "add ", kindSelect),
        addButton,
      ),
    );

    const canvas = h("div.graph-canvas", {
      onclick: (event: Event) => {
        const target = (event.target as Element).closest("[data-node]");
        const id = target?.getAttribute("data-node") ?? null;
        this.selected = id;
        this.render();
        if (id) void this.showPreview(id);
      },
    });
    canvas.innerHTML = renderGraphSvg(model, { selected: this.selected, issues: liveIssues });
    this.element.append(canvas);

    this.element.append(this.renderWiring());
    if (this.selected) {
      const node = nodeById(model.doc, this.selected);
      if (node) this.element.append(this.renderNodeEditor(node.id));
    }

    const issueList = h("ul.issues");
    for (const problem of problems) issueList.append(h("li.problem", {}, problem));
    for (const issue of liveIssues) {
      issueList.append(
        h(
          "li.type-issue",
          {},
          `edge ${issue.from} → ${issue.to}: expected ${issue.expected}, got ${issue.actual}`,
        ),
      );
    }
    for (const issue of this.serverIssues) {
      issueList.append(
        h(
          "li.type-issue.server",
          {},
          `server: edge ${issue.from} → ${issue.to}: expected ${issue.expected}, got ${issue.actual}`,
        ),
      );
    }
    if (issueList.childElementCount > 0) this.element.append(issueList);

    if (Object.keys(model.results).length > 0) {
      const list = h("ul.run-results");
      for (const node of model.doc.nodes) {
        const result = model.results[node.id];
        if (!result) continue;
        list.append(
          h(
            "li",
            { "data-result": node.id },
            `${node.id}: ${result.status}` +
              (result.artifact ? ` → ${result.artifact}` : "") +
              (result.error ? ` (${result.error})` : ""),
          ),
        );
      }
      this.element.append(h("div.results", {}, h("h3", {}, "Last run"), list));
    }

    if (this.notice) this.element.append(h("p.notice", {}, this.notice));
    if (model.error) this.element.append(h("p.error", {}, model.error));
    if (this.preview) this.element.append(this.preview);
  }

  private renderWiring(): HTMLElement {
    const model = this.model;
    const ids = model.doc.nodes.map((node) => node.id);
    const fromSelect = h("select") as HTMLSelectElement;
    const toSelect = h("select") as HTMLSelectElement;
    for (const id of ids) {
      fromSelect.append(option(id));
      toSelect.append(option(id));
    }
    return h(
      "div.wiring",
      {},
      h("label", {}, "from ", fromSelect),
      h("label", {}, "to ", toSelect),
      h(
        "button",
        {
          onclick: () => {
            if (connect(model.doc, fromSelect.value, toSelect.value)) this.changed();
          },
        },
        "connect",
      ),
      h(
        "button",
        {
          onclick: () => {
            if (disconnect(model.doc, fromSelect.value, toSelect.value)) this.changed();
          },
        },
        "disconnect",
      ),
    );
  }

  private renderNodeEditor(nodeId: string): HTMLElement {
    const model = this.model;
    const node = nodeById(model.doc, nodeId);
    if (!node) return h("div");
    const editor = h(
      "div.node-editor",
      {},
      h("h3", {}, `${node.id} (${node.kind})`),
    );
    for (const spec of NODE_PARAMS[node.kind] ?? []) {
      const current = node.params[spec.name];
      let field: HTMLElement;
      if (spec.kind === "choice") {
        const select = h("select", {
          onchange: (event: Event) => {
            setParam(model.doc, node.id, spec.name, (event.target as HTMLSelectElement).value);
            this.changed();
          },
        }) as HTMLSelectElement;
        if (!spec.required) select.append(option("", "(unset)"));
        for (const choice of spec.choices ?? []) select.append(option(choice));
        select.value = current === undefined ? "" : String(current);
        field = select;
      } else {
        field = h("input", {
          type: spec.kind === "text" ? "text" : "number",
          step: spec.kind === "float" ? "any" : undefined,
          value: current === undefined ? "" : String(current),
          onchange: (event: Event) => {
            const raw = (event.target as HTMLInputElement).value;
            let value: unknown = raw;
            if (raw === "") value = undefined;
            else if (spec.kind === "int") value = Math.trunc(Number(raw));
            else if (spec.kind === "float") value = Number(raw);
            setParam(model.doc, node.id, spec.name, value);
            this.changed();
          },
        });
      }
      editor.append(
        h("label.param", {}, `${spec.name}${spec.required ? "" : " (optional)"} `, field),
      );
    }
    editor.append(
      h(
        "button",
        {
          onclick: () => {
            removeNode(model.doc, node.id);
            this.selected = null;
            this.changed();
          },
        },
        "remove node",
      ),
    );
    return editor;
  }
}

// CSV helpers for previews ------------------------------------------------

/** Parse artifact CSV into per-rank counts. Only the first line is a
 * header; "password" is a perfectly plausible password. */
export function parseFrequencyCsv(text: string): number[] {
  const counts: number[] = [];
  const lines = text.split("\n");
  const start = lines[0] === "password,count" ? 1 : 0;
  for (const line of lines.slice(start)) {
    if (line === "") continue;
    const comma = line.lastIndexOf(",");
    if (comma < 0) continue;
    const count = Number(line.slice(comma + 1));
    if (Number.isFinite(count)) counts.push(count);
  }
  return counts;
}

export function pdfPoints(counts: number[], total: number): { x: number; y: number }[] {
  return counts.map((count, index) => ({ x: index + 1, y: count / total }));
}

export function cumulativePoints(counts: number[], total: number): { x: number; y: number }[] {
  let running = 0;
  return counts.map((count, index) => {
    running += count;
    return { x: index + 1, y: running / total };
  });
}
