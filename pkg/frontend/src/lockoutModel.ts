/**
 * Lockout what-if panel state. Every displayed number comes from the most
 * recent POST /api/lockout response; the slider only chooses which epsilon
 * to ask about.
 */

import type { LockoutResponse } from "./types.js";

export const SLIDER_STEPS = 100;
const EPSILON_MIN = 1e-4;
const EPSILON_MAX = 0.5;

/** Log-scaled slider: position 0..SLIDER_STEPS to epsilon in [1e-4, 0.5]. */
export function epsilonForSlider(position: number): number {
  const t = Math.min(SLIDER_STEPS, Math.max(0, position)) / SLIDER_STEPS;
  const log = Math.log(EPSILON_MIN) + t * (Math.log(EPSILON_MAX) - Math.log(EPSILON_MIN));
  return Number(Math.exp(log).toPrecision(3));
}

export function sliderForEpsilon(epsilon: number): number {
  const clamped = Math.min(EPSILON_MAX, Math.max(EPSILON_MIN, epsilon));
  const t =
    (Math.log(clamped) - Math.log(EPSILON_MIN)) / (Math.log(EPSILON_MAX) - Math.log(EPSILON_MIN));
  return Math.round(t * SLIDER_STEPS);
}

export interface LockoutPanelState {
  datasets: string[];
  selected: string | null;
  basis: "empirical" | "pdf" | "cdf";
  sliderPosition: number;
  response: LockoutResponse | null;
  error: string | null;
  pending: boolean;
}

export function newPanel(): LockoutPanelState {
  return {
    datasets: [],
    selected: null,
    basis: "empirical",
    sliderPosition: sliderForEpsilon(0.02),
    response: null,
    error: null,
    pending: false,
  };
}

export function setDatasets(state: LockoutPanelState, names: string[]): void {
  state.datasets = names;
  if (state.selected === null || !names.includes(state.selected)) {
    state.selected = names.length > 0 ? names[0] : null;
  }
}

/** The empty-state contract: with no datasets there is nothing to ask the
 * server, so the panel must not issue a request. */
export function shouldRequest(state: LockoutPanelState): boolean {
  return state.selected !== null;
}

export function currentEpsilon(state: LockoutPanelState): number {
  return epsilonForSlider(state.sliderPosition);
}
