import { describe, expect, it } from "vitest";

import { lockoutCurvePlot, logLogPlot } from "../src/plot.js";
import { loadFixture } from "./helpers.js";

const fixture = loadFixture();

describe("logLogPlot", () => {
  it("plots one dot per positive point plus the fitted line", () => {
    const points = [
      { x: 1, y: 0.5 },
      { x: 2, y: 0.25 },
      { x: 3, y: 0.125 },
      { x: 4, y: 0 },
    ];
    const svg = logLogPlot(points, 0.5, 1.0);
    expect(svg.match(/class="dot"/g)?.length).toBe(3);
    expect(svg).toContain('class="fit-line"');
    expect(svg).toContain("log10 rank");
  });
});

describe("lockoutCurvePlot", () => {
  it("draws the fixture curve with threshold and chosen budget", () => {
    const entry = fixture.lockout["0.05"];
    const svg = lockoutCurvePlot(entry.curve, entry.epsilon, entry.max_attempts);
    expect(svg).toContain('class="curve"');
    expect(svg).toContain('class="threshold"');
    expect(svg).toContain('class="budget"');
  });

  it("returns nothing for an empty curve", () => {
    expect(lockoutCurvePlot([], 0.1, 1)).toBe("");
  });

  it("omits the budget marker when it falls outside the curve", () => {
    const svg = lockoutCurvePlot(
      [
        [10, 0.1],
        [20, 0.2],
      ],
      0.15,
      1,
    );
    expect(svg).not.toContain('class="budget"');
  });
});
