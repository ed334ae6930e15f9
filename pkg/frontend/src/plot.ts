/**
 * Tiny dependency-free SVG plots. Pure string builders so tests can assert
 * on markup without a DOM.
 */

export interface PlotPoint {
  x: number;
  y: number;
}

const WIDTH = 420;
const HEIGHT = 260;
const MARGIN = { left: 56, right: 16, top: 14, bottom: 34 };

interface Scale {
  (value: number): number;
}

function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return (value) => r0 + ((value - d0) / span) * (r1 - r0);
}

function fmt(value: number): string {
  return Number(value.toFixed(2)).toString();
}

function axisLabels(domain: [number, number], count: number): number[] {
  const [lo, hi] = domain;
  const out: number[] = [];
  for (let i = 0; i <= count; i++) out.push(lo + ((hi - lo) * i) / count);
  return out;
}

function frame(
  xDomain: [number, number],
  yDomain: [number, number],
  xLabel: string,
  yLabel: string,
  body: (sx: Scale, sy: Scale) => string,
): string {
  const sx = linearScale(xDomain, [MARGIN.left, WIDTH - MARGIN.right]);
  const sy = linearScale(yDomain, [HEIGHT - MARGIN.bottom, MARGIN.top]);
  const ticks: string[] = [];
  for (const x of axisLabels(xDomain, 4)) {
    ticks.push(
      `<text class="tick" x="${fmt(sx(x))}" y="${HEIGHT - 12}" text-anchor="middle">${fmt(x)}</text>`,
    );
  }
  for (const y of axisLabels(yDomain, 4)) {
    ticks.push(
      `<text class="tick" x="${MARGIN.left - 8}" y="${fmt(sy(y) + 4)}" text-anchor="end">${fmt(y)}</text>`,
    );
  }
  return (
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" class="plot" role="img">` +
    `<rect class="plot-bg" x="${MARGIN.left}" y="${MARGIN.top}" ` +
    `width="${WIDTH - MARGIN.left - MARGIN.right}" height="${HEIGHT - MARGIN.top - MARGIN.bottom}"/>` +
    ticks.join("") +
    `<text class="axis-label" x="${WIDTH / 2}" y="${HEIGHT - 2}" text-anchor="middle">${xLabel}</text>` +
    `<text class="axis-label" x="12" y="${HEIGHT / 2}" transform="rotate(-90 12 ${HEIGHT / 2})" text-anchor="middle">${yLabel}</text>` +
    body(sx, sy) +
    `</svg>`
  );
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo)) return [0, 1];
  if (lo === hi) return [lo - 0.5, hi + 0.5];
  return [lo, hi];
}

/**
 * Log-log scatter of rank/probability points with the fitted power law
 * drawn on top: log10 p = log10 c - s * log10 r.
 */
export function logLogPlot(points: PlotPoint[], c: number, s: number): string {
  const data = points
    .filter((p) => p.x > 0 && p.y > 0)
    .map((p) => ({ x: Math.log10(p.x), y: Math.log10(p.y) }));
  const xDomain = extent(data.map((p) => p.x));
  const yDomain = extent(data.map((p) => p.y));
  return frame(xDomain, yDomain, "log10 rank", "log10 probability", (sx, sy) => {
    const dots = data
      .map((p) => `<circle class="dot" cx="${fmt(sx(p.x))}" cy="${fmt(sy(p.y))}" r="1.6"/>`)
      .join("");
    const y0 = Math.log10(c) - s * xDomain[0];
    const y1 = Math.log10(c) - s * xDomain[1];
    const line =
      `<line class="fit-line" x1="${fmt(sx(xDomain[0]))}" y1="${fmt(sy(y0))}" ` +
      `x2="${fmt(sx(xDomain[1]))}" y2="${fmt(sy(y1))}"/>`;
    return dots + line;
  });
}

/**
 * Cumulative success curve with the epsilon threshold line and the chosen
 * budget marked.
 */
export function lockoutCurvePlot(
  curve: [number, number][],
  epsilon: number,
  maxAttempts: number,
): string {
  if (curve.length === 0) return "";
  const xDomain = extent(curve.map(([b]) => b));
  const yDomain: [number, number] = [0, Math.max(1e-9, ...curve.map(([, v]) => v), epsilon) * 1.05];
  return frame(xDomain, yDomain, "guess budget b", "success probability", (sx, sy) => {
    const path = curve
      .map(([b, v], i) => `${i === 0 ? "M" : "L"}${fmt(sx(b))},${fmt(sy(v))}`)
      .join("");
    const parts = [`<path class="curve" d="${path}" fill="none"/>`];
    parts.push(
      `<line class="threshold" x1="${MARGIN.left}" y1="${fmt(sy(epsilon))}" ` +
        `x2="${WIDTH - MARGIN.right}" y2="${fmt(sy(epsilon))}"/>`,
    );
    if (maxAttempts >= xDomain[0] && maxAttempts <= xDomain[1]) {
      parts.push(
        `<line class="budget" x1="${fmt(sx(maxAttempts))}" y1="${MARGIN.top}" ` +
          `x2="${fmt(sx(maxAttempts))}" y2="${HEIGHT - MARGIN.bottom}"/>`,
      );
    }
    return parts.join("");
  });
}
