/**
 * Policy editor: plain-text source with server-side parse feedback on
 * save, plus a quick password check box driven by the stored policy.
 */

import { Api, ApiError } from "./api.js";
import { append, clear, h, option } from "./dom.js";
import type { ParseErrorDoc, VerdictDoc } from "./types.js";

export class PolicyView {
  readonly element: HTMLElement;
  private readonly api: Api;
  private names: string[] = [];
  private name = "new-policy";
  private source = 'policy "new-policy" {\n  min_length 12;\n}\n';
  private etag: string | null = null;
  private dirty = false;
  private parseErrors: ParseErrorDoc[] = [];
  private verdict: VerdictDoc | null = null;
  private checkInput = "";
  private error: string | null = null;
  private notice: string | null = null;

  constructor(api: Api) {
    this.api = api;
    this.element = h("section.panel.policy-panel");
    this.render();
  }

  async load(): Promise<void> {
    try {
      this.names = await this.api.listNames("policies");
    } catch (err) {
      this.error = err instanceof ApiError ? err.message : String(err);
    }
    if (this.names.length > 0) await this.open(this.names[0]);
    else this.render();
  }

  async open(name: string): Promise<void> {
    try {
      const { doc, etag } = await this.api.getText("policies", name);
      this.name = name;
      this.source = doc;
      this.etag = etag;
      this.dirty = false;
      this.parseErrors = [];
      this.verdict = null;
      this.error = null;
      this.notice = null;
    } catch (err) {
      this.error = err instanceof ApiError ? err.message : String(err);
    }
    this.render();
  }

  async save(): Promise<void> {
    this.parseErrors = [];
    this.notice = null;
    try {
      const result = await this.api.putText("policies", this.name, this.source, this.etag);
      this.etag = result.etag;
      this.dirty = false;
      this.error = null;
      this.notice = result.created ? "created" : "saved";
      if (!this.names.includes(this.name)) this.names.push(this.name);
    } catch (err) {
      if (err instanceof ApiError && err.body.code === "parse_error") {
        this.parseErrors = (err.body.detail as ParseErrorDoc[] | undefined) ?? [];
        this.error = err.message;
      } else if (err instanceof ApiError && err.isConflict) {
        this.error =
          "This policy changed on the server since you loaded it. Reload to pick up the latest copy.";
      } else {
        this.error = err instanceof ApiError ? err.message : String(err);
      }
    }
    this.render();
  }

  async check(): Promise<void> {
    try {
      this.verdict = await this.api.checkPolicy(this.name, this.checkInput);
      this.error = null;
    } catch (err) {
      this.verdict = null;
      this.error = err instanceof ApiError ? err.message : String(err);
    }
    this.render();
  }

  render(): void {
    clear(this.element);

    const picker = h("select", {
      onchange: (event: Event) => void this.open((event.target as HTMLSelectElement).value),
    }) as HTMLSelectElement;
    for (const name of this.names) picker.append(option(name));
    if (this.names.includes(this.name)) picker.value = this.name;

    const nameInput = h("input", {
      type: "text",
      value: this.name,
      onchange: (event: Event) => {
        this.name = (event.target as HTMLInputElement).value.trim() || this.name;
        this.etag = null;
      },
    });

    const editor = h("textarea.policy-source", {
      rows: "14",
      spellcheck: "false",
      oninput: (event: Event) => {
        this.source = (event.target as HTMLTextAreaElement).value;
        this.dirty = true;
      },
    }) as HTMLTextAreaElement;
    editor.value = this.source;

    const checkField = h("input", {
      type: "text",
      placeholder: "password to test",
      value: this.checkInput,
      oninput: (event: Event) => {
        this.checkInput = (event.target as HTMLInputElement).value;
      },
    });

    append(
      this.element,
      h("h2", {}, "Policy editor"),
      h(
        "div.controls",
        {},
        this.names.length > 0 ? h("label", {}, "open ", picker) : null,
        h("label", {}, "name ", nameInput),
        h("button", { onclick: () => void this.save() }, this.dirty ? "Save*" : "Save"),
      ),
      editor,
      this.parseErrors.length > 0
        ? h(
            "ul.parse-errors",
            {},
            ...this.parseErrors.map((e) =>
              h("li", {}, `line ${e.line}, column ${e.column}: ${e.message}`),
            ),
          )
        : null,
      h(
        "div.check-box",
        {},
        h("h3", {}, "Check a password"),
        checkField,
        h("button", { onclick: () => void this.check() }, "Check"),
        this.verdict
          ? h(
              `p.verdict.${this.verdict.accepted ? "ok" : "bad"}`,
              {},
              this.verdict.accepted
                ? "accepted"
                : "rejected: " + this.verdict.violations.map((v) => v.reason).join("; "),
            )
          : null,
      ),
      this.notice ? h("p.notice", {}, this.notice) : null,
      this.error ? h("p.error", {}, this.error) : null,
    );
  }
}
