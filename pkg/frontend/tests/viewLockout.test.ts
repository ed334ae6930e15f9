import { describe, expect, it } from "vitest";

import { Api } from "../src/api.js";
import {
  currentEpsilon,
  epsilonForSlider,
  newPanel,
  sliderForEpsilon,
} from "../src/lockoutModel.js";
import { LockoutView } from "../src/viewLockout.js";
import { loadFixture, sleep, stubFetch } from "./helpers.js";
import type { FetchStub, RecordedCall } from "./helpers.js";

const fixture = loadFixture();

/** Serves whichever fixture lockout entry is closest to the asked epsilon. */
function lockoutStub(datasets: string[] = fixture.datasets): FetchStub {
  return stubFetch({
    "GET /api/datasets": () => ({ json: { names: datasets } }),
    "POST /api/lockout": (call: RecordedCall) => {
      const body = call.body as { epsilon: number };
      const nearest = Object.entries(fixture.lockout).sort(
        (a, b) => Math.abs(Number(a[0]) - body.epsilon) - Math.abs(Number(b[0]) - body.epsilon),
      )[0][1];
      return { json: nearest };
    },
  });
}

describe("slider scale", () => {
  it("is a monotone log scale over [1e-4, 0.5]", () => {
    let last = 0;
    for (let position = 0; position <= 100; position += 10) {
      const epsilon = epsilonForSlider(position);
      expect(epsilon).toBeGreaterThan(last);
      last = epsilon;
    }
    expect(epsilonForSlider(0)).toBeCloseTo(1e-4, 6);
    expect(epsilonForSlider(100)).toBeCloseTo(0.5, 3);
  });

  it("round-trips slider positions through epsilon", () => {
    for (const position of [0, 13, 37, 62, 89, 100]) {
      expect(sliderForEpsilon(epsilonForSlider(position))).toBe(position);
    }
  });

  it("starts near epsilon 0.02", () => {
    const panel = newPanel();
    expect(currentEpsilon(panel)).toBeGreaterThan(0.015);
    expect(currentEpsilon(panel)).toBeLessThan(0.025);
  });
});

describe("LockoutView", () => {
  it("shows the server's max attempts after loading", async () => {
    const stub = lockoutStub();
    const view = new LockoutView(new Api(stub.fetchFn));
    await view.load();
    expect(view.element.querySelector("#max-attempts")?.textContent).toBe("max attempts: 1");
    const options = [...view.element.querySelectorAll("select")[0].options].map((o) => o.value);
    expect(options).toEqual(fixture.datasets);
    expect(stub.callsTo("POST", "/api/lockout")[0].body).toMatchObject({
      dataset: fixture.datasets[0],
      basis: "empirical",
    });
  });

  it("re-queries after a debounced slider move and displays the new budget", async () => {
    const stub = lockoutStub();
    const view = new LockoutView(new Api(stub.fetchFn));
    await view.load();
    const slider = view.element.querySelector("input[type=range]") as HTMLInputElement;
    slider.value = String(sliderForEpsilon(0.2));
    slider.dispatchEvent(new Event("input"));
    await sleep(300);
    expect(view.element.querySelector("#max-attempts")?.textContent).toBe("max attempts: 65");
    expect(view.element.textContent).toContain("(empirical)");
    expect(stub.callsTo("POST", "/api/lockout").length).toBe(2);
  });

  it("draws the curve with threshold and budget markers", async () => {
    const stub = lockoutStub();
    const view = new LockoutView(new Api(stub.fetchFn));
    await view.load();
    const plot = view.element.querySelector("#lockout-plot") as HTMLElement;
    expect(plot.innerHTML).toContain("<svg");
    expect(plot.innerHTML).toContain('class="threshold"');
    expect(plot.innerHTML).toContain('class="curve"');
  });

  it("refetches when the basis changes", async () => {
    const stub = lockoutStub();
    const view = new LockoutView(new Api(stub.fetchFn));
    await view.load();
    const basisSelect = view.element.querySelectorAll("select")[1];
    basisSelect.value = "pdf";
    basisSelect.dispatchEvent(new Event("change"));
    await sleep(20);
    const posts = stub.callsTo("POST", "/api/lockout");
    expect(posts.length).toBe(2);
    expect((posts[1].body as { basis: string }).basis).toBe("pdf");
  });

  it("shows the empty state and asks nothing without datasets", async () => {
    const stub = lockoutStub([]);
    const view = new LockoutView(new Api(stub.fetchFn));
    await view.load();
    expect(view.element.textContent).toContain("No datasets in the workspace yet");
    expect(stub.callsTo("POST", "/api/lockout").length).toBe(0);
  });

  it("fixture budgets grow with epsilon", () => {
    const budgets = Object.keys(fixture.lockout)
      .map(Number)
      .sort((a, b) => a - b)
      .map((epsilon) => fixture.lockout[String(epsilon)].max_attempts);
    expect(budgets).toEqual([1, 5, 65]);
    for (let i = 1; i < budgets.length; i++) {
      expect(budgets[i]).toBeGreaterThan(budgets[i - 1]);
    }
  });
});
