/**
 * ADTree builder: nested node cards with attack/defence editors, live
 * mitigation badges (debounced evaluate on every change), synthesis pane,
 * and save/load with conflict handling.
 */

import { Api, ApiError } from "./api.js";
import {
  addChild,
  allNodes,
  attachDefence,
  badgeFor,
  draftProblems,
  isLeaf,
  justificationFor,
  newViewModel,
  nextId,
  removeDefence,
  removeNode,
  setAttack,
  setLabel,
  setRefinement,
} from "./adtreeModel.js";
import type { TreeViewModel } from "./adtreeModel.js";
import { canonicalJson, debounce } from "./canonical.js";
import { append, clear, h, option } from "./dom.js";
import { BUILTIN_ALPHABETS, CHAR_CLASSES } from "./types.js";
import type { AttackDoc, RuleDoc, TreeNodeDoc } from "./types.js";

const EVALUATE_DEBOUNCE_MS = 250;

export class TreeView {
  readonly element: HTMLElement;
  model: TreeViewModel;
  private readonly api: Api;
  private readonly evaluateSoon: () => void;
  private synthesized: string | null = null;
  private names: string[] = [];

  constructor(api: Api) {
    this.api = api;
    this.model = newViewModel("new-tree");
    this.evaluateSoon = debounce(() => void this.evaluateNow(), EVALUATE_DEBOUNCE_MS);
    this.element = h("section.panel.tree-panel");
    this.render();
  }

  async load(): Promise<void> {
    try {
      this.names = await this.api.listNames("adtrees");
    } catch (err) {
      this.model.error = err instanceof ApiError ? err.message : String(err);
    }
    if (this.names.length > 0) await this.open(this.names[0]);
    else this.render();
  }

  async open(name: string): Promise<void> {
    try {
      const { doc, etag } = await this.api.getTree(name);
      this.model = newViewModel(name, doc);
      this.model.etag = etag;
      this.synthesized = null;
      this.render();
      await this.evaluateNow();
    } catch (err) {
      this.model.error = err instanceof ApiError ? err.message : String(err);
      this.render();
    }
  }

  /** Called after every edit: mark dirty, redraw, schedule live evaluate. */
  private changed(): void {
    this.model.dirty = true;
    this.synthesized = null;
    this.render();
    this.evaluateSoon();
  }

  async evaluateNow(): Promise<void> {
    if (draftProblems(this.model.doc).length > 0) {
      this.model.report = null;
      this.model.successProbability = null;
      this.render();
      return;
    }
    try {
      const result = await this.api.evaluate(this.model.name, { tree: this.model.doc });
      this.model.report = result.mitigation;
      this.model.successProbability = result.success_probability;
      this.model.error = null;
    } catch (err) {
      this.model.report = null;
      this.model.error = err instanceof ApiError ? err.message : String(err);
    }
    this.render();
  }

  async save(): Promise<void> {
    try {
      const result = await this.api.putTree(this.model.name, this.model.doc, this.model.etag);
      this.model.etag = result.etag;
      this.model.dirty = false;
      this.model.error = null;
      if (!this.names.includes(this.model.name)) this.names.push(this.model.name);
    } catch (err) {
      if (err instanceof ApiError && err.isConflict) {
        this.model.error =
          "This tree changed on the server since you loaded it. Reload to pick up the latest copy.";
      } else {
        this.model.error = err instanceof ApiError ? err.message : String(err);
      }
    }
    this.render();
  }

  async synthesize(): Promise<void> {
    try {
      const result = await this.api.synthesize(this.model.name, this.model.doc);
      this.synthesized = result.source;
      this.model.error = null;
    } catch (err) {
      this.model.error = err instanceof ApiError ? err.message : String(err);
    }
    this.render();
  }

  render(): void {
    clear(this.element);
    const model = this.model;
    const report = model.report;

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

    const rootBadge = report
      ? h(
          `span.badge.${report.root_defended ? "ok" : "bad"}`,
          { id: "root-badge" },
          report.root_defended ? "root defended" : "root undefended",
        )
      : h("span.badge.unknown", { id: "root-badge" }, "not evaluated");

    append(
      this.element,
      h("h2", {}, "Attack-defence tree builder"),
      h(
        "div.controls",
        {},
        this.names.length > 0 ? h("label", {}, "open ", picker) : null,
        h("label", {}, "name ", nameInput),
        h("button", { onclick: () => void this.save() }, model.dirty ? "Save*" : "Save"),
        h("button", { onclick: () => void this.synthesize() }, "Synthesize policy"),
        h(
          "button",
          {
            onclick: () => {
              this.model = newViewModel("new-tree");
              this.synthesized = null;
              this.render();
            },
          },
          "New tree",
        ),
        rootBadge,
        model.successProbability !== null
          ? h(
              "span.metric",
              {},
              `attack success ≤ ${model.successProbability.toPrecision(3)}`,
            )
          : null,
      ),
      this.renderNode(model.doc.root),
      model.error ? h("p.error", {}, model.error) : null,
      this.synthesized
        ? h("div.synth-pane", {}, h("h3", {}, "Synthesized policy"), h("pre", {}, this.synthesized))
        : null,
    );
  }

  private renderNode(node: TreeNodeDoc): HTMLElement {
    const model = this.model;
    const badge = badgeFor(model.report, node.id);
    const card = h(`div.tree-node`, { "data-node": node.id });

    const header = h(
      "div.node-header",
      {},
      h("span.node-id", {}, node.id),
      h("input.node-label", {
        type: "text",
        value: node.label,
        onchange: (event: Event) => {
          setLabel(model.doc, node.id, (event.target as HTMLInputElement).value);
          this.changed();
        },
      }),
      badge === "none"
        ? null
        : h(
            `span.badge.${badge === "mitigated" ? "ok" : "bad"}`,
            { title: justificationFor(model.report, node.id) },
            badge,
          ),
    );
    card.append(header);

    if (!isLeaf(node)) {
      const refinement = h("select", {
        onchange: (event: Event) => {
          setRefinement(model.doc, node.id, (event.target as HTMLSelectElement).value as "or" | "and");
          this.changed();
        },
      }) as HTMLSelectElement;
      refinement.append(option("or", "OR — any child suffices"));
      refinement.append(option("and", "AND — all children needed"));
      refinement.value = node.refinement ?? "or";
      card.append(h("div.node-row", {}, h("label", {}, "refinement ", refinement)));
    } else {
      card.append(this.renderAttackEditor(node));
    }

    card.append(this.renderDefenceEditor(node));

    const actions = h(
      "div.node-actions",
      {},
      h(
        "button",
        {
          onclick: () => {
            addChild(model.doc, node.id, {
              id: nextId(model.doc, "node"),
              label: "new attack step",
            });
            this.changed();
          },
        },
        "+ child",
      ),
      node.id !== model.doc.root.id
        ? h(
            "button",
            {
              onclick: () => {
                removeNode(model.doc, node.id);
                this.changed();
              },
            },
            "remove",
          )
        : null,
    );
    card.append(actions);

    if (node.children && node.children.length > 0) {
      const childHolder = h("div.node-children");
      for (const child of node.children) childHolder.append(this.renderNode(child));
      card.append(childHolder);
    }
    return card;
  }

  private renderAttackEditor(node: TreeNodeDoc): HTMLElement {
    const model = this.model;
    const kindSelect = h("select", {
      onchange: (event: Event) => {
        const kind = (event.target as HTMLSelectElement).value;
        let attack: AttackDoc | null = null;
        if (kind === "dictionary") attack = { kind: "dictionary", dictionary: "common" };
        if (kind === "brute_force") attack = { kind: "brute_force", alphabet: "printable", max_len: 8 };
        setAttack(model.doc, node.id, attack);
        this.changed();
      },
    }) as HTMLSelectElement;
    kindSelect.append(option("", "no attack yet"));
    kindSelect.append(option("dictionary"));
    kindSelect.append(option("brute_force", "brute force"));
    kindSelect.value = node.attack?.kind ?? "";

    const row = h("div.node-row.attack-row", {}, h("label", {}, "attack ", kindSelect));

    if (node.attack?.kind === "dictionary") {
      row.append(
        h("label", {}, "dictionary ", h("input", {
          type: "text",
          value: node.attack.dictionary,
          onchange: (event: Event) => {
            setAttack(model.doc, node.id, {
              kind: "dictionary",
              dictionary: (event.target as HTMLInputElement).value,
            });
            this.changed();
          },
        })),
      );
    } else if (node.attack?.kind === "brute_force") {
      const alphabetSelect = h("select", {
        onchange: (event: Event) => {
          const attack = node.attack as AttackDoc & { kind: "brute_force" };
          setAttack(model.doc, node.id, {
            kind: "brute_force",
            alphabet: (event.target as HTMLSelectElement).value,
            max_len: attack.max_len,
          });
          this.changed();
        },
      }) as HTMLSelectElement;
      for (const name of BUILTIN_ALPHABETS) alphabetSelect.append(option(name));
      alphabetSelect.value = node.attack.alphabet;
      row.append(
        h("label", {}, "alphabet ", alphabetSelect),
        h("label", {}, "max length ", h("input", {
          type: "number",
          min: "1",
          value: String(node.attack.max_len),
          onchange: (event: Event) => {
            const attack = node.attack as AttackDoc & { kind: "brute_force" };
            setAttack(model.doc, node.id, {
              kind: "brute_force",
              alphabet: attack.alphabet,
              max_len: Math.max(1, Number((event.target as HTMLInputElement).value) || 1),
            });
            this.changed();
          },
        })),
      );
    }
    return row;
  }

  private renderDefenceEditor(node: TreeNodeDoc): HTMLElement {
    const model = this.model;
    const defence = node.countermeasure;
    if (!defence) {
      return h(
        "div.node-row.defence-row",
        {},
        h(
          "button",
          {
            onclick: () => {
              attachDefence(model.doc, node.id, {
                id: nextId(model.doc, "def"),
                label: "countermeasure",
                rule: { kind: "min_length", n: 12 },
              });
              this.changed();
            },
          },
          "+ defence",
        ),
      );
    }

    const ruleSelect = h("select", {
      onchange: (event: Event) => {
        defence.rule = defaultRule((event.target as HTMLSelectElement).value);
        this.changed();
      },
    }) as HTMLSelectElement;
    for (const kind of [
      "min_length",
      "max_length",
      "require_class",
      "ban_dictionary",
      "ban_substring",
      "ban_exact",
    ]) {
      ruleSelect.append(option(kind));
    }
    ruleSelect.value = defence.rule.kind;

    const row = h(
      "div.node-row.defence-row",
      {},
      h("span.defence-tag", {}, "\u{1f6e1} " + defence.id),
      h("label", {}, "rule ", ruleSelect),
    );
    row.append(...this.ruleFields(defence.rule));
    row.append(
      h(
        "button",
        {
          onclick: () => {
            removeDefence(model.doc, node.id);
            this.changed();
          },
        },
        "remove defence",
      ),
    );
    return row;
  }

  private ruleFields(rule: RuleDoc): HTMLElement[] {
    const numberField = (label: string, value: number, apply: (n: number) => void) =>
      h("label", {}, `${label} `, h("input", {
        type: "number",
        value: String(value),
        onchange: (event: Event) => {
          apply(Number((event.target as HTMLInputElement).value) || 0);
          this.changed();
        },
      }));
    const textField = (label: string, value: string, apply: (s: string) => void) =>
      h("label", {}, `${label} `, h("input", {
        type: "text",
        value,
        onchange: (event: Event) => {
          apply((event.target as HTMLInputElement).value);
          this.changed();
        },
      }));

    switch (rule.kind) {
      case "min_length":
        return [numberField("n", rule.n, (n) => (rule.n = n))];
      case "max_length":
        return [numberField("n", rule.n, (n) => (rule.n = n))];
      case "require_class": {
        const classSelect = h("select", {
          onchange: (event: Event) => {
            rule.class = (event.target as HTMLSelectElement).value;
            this.changed();
          },
        }) as HTMLSelectElement;
        for (const cls of CHAR_CLASSES) classSelect.append(option(cls));
        classSelect.value = rule.class;
        return [
          h("label", {}, "class ", classSelect),
          numberField("k", rule.k, (k) => (rule.k = k)),
        ];
      }
      case "ban_dictionary":
        return [textField("dictionary", rule.dictionary, (v) => (rule.dictionary = v))];
      case "ban_substring":
        return [textField("substring", rule.substring, (v) => (rule.substring = v))];
      case "ban_exact":
        return [textField("word", rule.word, (v) => (rule.word = v))];
    }
  }

  /** Canonical bytes of the current document (used by tests and export). */
  canonicalSource(): string {
    return canonicalJson(orderedTreeDoc(this.model.doc));
  }
}

function defaultRule(kind: string): RuleDoc {
  switch (kind) {
    case "max_length":
      return { kind: "max_length", n: 64 };
    case "require_class":
      return { kind: "require_class", class: "digit", k: 1 };
    case "ban_dictionary":
      return { kind: "ban_dictionary", dictionary: "common" };
    case "ban_substring":
      return { kind: "ban_substring", substring: "1234" };
    case "ban_exact":
      return { kind: "ban_exact", word: "password" };
    default:
      return { kind: "min_length", n: 12 };
  }
}

/** Rebuild the document with only the server's keys, dropping empties, so
 * canonical serialization matches the stored bytes. */
export function orderedTreeDoc(doc: { root: TreeNodeDoc }): { root: TreeNodeDoc } {
  const rebuild = (node: TreeNodeDoc): TreeNodeDoc => {
    const out: TreeNodeDoc = { id: node.id, actor: "attacker", label: node.label };
    if (node.children && node.children.length > 0) {
      out.refinement = node.refinement ?? "or";
      out.children = node.children.map(rebuild);
    }
    if (node.attack) out.attack = node.attack;
    if (node.countermeasure) {
      out.countermeasure = {
        id: node.countermeasure.id,
        actor: "defender",
        label: node.countermeasure.label,
        rule: node.countermeasure.rule,
      };
    }
    return out;
  };
  return { root: rebuild(doc.root) };
}
