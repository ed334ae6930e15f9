/** Lockout what-if panel: dataset picker, epsilon slider, live curve. */

import { Api, ApiError } from "./api.js";
import { append, clear, h, option } from "./dom.js";
import {
  LockoutPanelState,
  currentEpsilon,
  newPanel,
  setDatasets,
  shouldRequest,
} from "./lockoutModel.js";
import { lockoutCurvePlot } from "./plot.js";
import { debounce } from "./canonical.js";

export class LockoutView {
  readonly element: HTMLElement;
  readonly state: LockoutPanelState;
  private readonly api: Api;
  private readonly refreshSoon: () => void;

  constructor(api: Api) {
    this.api = api;
    this.state = newPanel();
    this.element = h("section.panel.lockout-panel");
    this.refreshSoon = debounce(() => void this.fetch(), 150);
    this.render();
  }

  async load(): Promise<void> {
    try {
      setDatasets(this.state, await this.api.listNames("datasets"));
      this.state.error = null;
    } catch (err) {
      this.state.error = err instanceof ApiError ? err.message : String(err);
    }
    this.render();
    if (shouldRequest(this.state)) await this.fetch();
  }

  async fetch(): Promise<void> {
    if (!shouldRequest(this.state)) return;
    const dataset = this.state.selected as string;
    this.state.pending = true;
    this.render();
    try {
      this.state.response = await this.api.lockout(
        dataset,
        currentEpsilon(this.state),
        this.state.basis,
      );
      this.state.error = null;
    } catch (err) {
      this.state.response = null;
      this.state.error = err instanceof ApiError ? err.message : String(err);
    }
    this.state.pending = false;
    this.render();
  }

  render(): void {
    clear(this.element);
    const state = this.state;
    if (state.datasets.length === 0) {
      this.element.append(
        h("h2", {}, "Lockout explorer"),
        h(
          "p.empty-state",
          {},
          state.error ??
            "No datasets in the workspace yet. Ingest a dump or PUT a dataset, then reload.",
        ),
      );
      return;
    }

    const datasetSelect = h("select", {
      onchange: (event: Event) => {
        state.selected = (event.target as HTMLSelectElement).value;
        void this.fetch();
      },
    }) as HTMLSelectElement;
    for (const name of state.datasets) datasetSelect.append(option(name));
    if (state.selected) datasetSelect.value = state.selected;

    const basisSelect = h("select", {
      onchange: (event: Event) => {
        state.basis = (event.target as HTMLSelectElement).value as typeof state.basis;
        void this.fetch();
      },
    }) as HTMLSelectElement;
    for (const basis of ["empirical", "pdf", "cdf"]) basisSelect.append(option(basis));
    basisSelect.value = state.basis;

    const slider = h("input", {
      type: "range",
      min: "0",
      max: "100",
      value: String(state.sliderPosition),
      oninput: (event: Event) => {
        state.sliderPosition = Number((event.target as HTMLInputElement).value);
        this.renderReadout();
        this.refreshSoon();
      },
    });

    const response = state.response;
    append(
      this.element,
      h("h2", {}, "Lockout explorer"),
      h(
        "div.controls",
        {},
        h("label", {}, "dataset ", datasetSelect),
        h("label", {}, "basis ", basisSelect),
        h("label.slider-label", {}, "epsilon ", slider),
      ),
      h("div.readout", { id: "lockout-readout" }),
      h("div.plot-holder", {
        id: "lockout-plot",
      }),
      state.error ? h("p.error", {}, state.error) : null,
    );
    this.renderReadout();
    const holder = this.element.querySelector("#lockout-plot") as HTMLElement;
    if (response) {
      holder.innerHTML = lockoutCurvePlot(response.curve, response.epsilon, response.max_attempts);
    }
  }

  /** The numbers row. max_attempts always comes from the last response. */
  private renderReadout(): void {
    const holder = this.element.querySelector("#lockout-readout") as HTMLElement | null;
    if (!holder) return;
    clear(holder);
    const response = this.state.response;
    append(
      holder,
      h("span.metric", {}, `requested ε = ${currentEpsilon(this.state)}`),
      h(
        "span.metric.big",
        { id: "max-attempts" },
        response === null
          ? this.state.pending
            ? "…"
            : "—"
          : `max attempts: ${response.max_attempts}`,
      ),
      response === null
        ? null
        : h(
            "span.metric",
            {},
            `achieved λ = ${response.achieved_probability.toPrecision(3)} (${response.basis})`,
          ),
    );
  }
}
