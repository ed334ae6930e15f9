/** Application shell: tab bar plus one lazily loaded view per tab. */

import { Api } from "./api.js";
import { clear, h } from "./dom.js";
import { GraphView } from "./viewGraph.js";
import { LockoutView } from "./viewLockout.js";
import { PolicyView } from "./viewPolicy.js";
import { TreeView } from "./viewTree.js";

interface Tab {
  id: string;
  label: string;
  element: HTMLElement;
  load: () => Promise<void>;
  loaded: boolean;
}

export function buildApp(root: HTMLElement, api: Api): { activate: (id: string) => void } {
  const graph = new GraphView(api);
  const tree = new TreeView(api);
  const lockout = new LockoutView(api);
  const policy = new PolicyView(api);

  const tabs: Tab[] = [
    { id: "pipelines", label: "Pipelines", element: graph.element, load: () => graph.load(), loaded: false },
    { id: "adtrees", label: "Attack trees", element: tree.element, load: () => tree.load(), loaded: false },
    { id: "lockout", label: "Lockout", element: lockout.element, load: () => lockout.load(), loaded: false },
    { id: "policies", label: "Policies", element: policy.element, load: () => policy.load(), loaded: false },
  ];

  const bar = h("nav.tab-bar");
  const body = h("main.tab-body");

  const activate = (id: string) => {
    for (const tab of tabs) {
      const button = bar.querySelector(`[data-tab="${tab.id}"]`);
      button?.classList.toggle("active", tab.id === id);
    }
    const tab = tabs.find((t) => t.id === id) ?? tabs[0];
    clear(body);
    body.append(tab.element);
    if (!tab.loaded) {
      tab.loaded = true;
      void tab.load();
    }
  };

  for (const tab of tabs) {
    bar.append(
      h("button.tab", { "data-tab": tab.id, onclick: () => activate(tab.id) }, tab.label),
    );
  }

  clear(root);
  root.append(h("header.app-header", {}, h("h1", {}, "Password workbench")), bar, body);
  activate("pipelines");
  return { activate };
}

declare global {
  interface Window {
    __APP_TEST__?: boolean;
  }
}

if (typeof document !== "undefined" && !globalThis.window?.__APP_TEST__) {
  const root = document.getElementById("app");
  if (root) buildApp(root, new Api());
}
