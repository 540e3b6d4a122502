// Color encodings shared across the views.

import type { SchemeDoc } from "./types.js";

// Four coding-scheme color groups.
const GROUP_COLORS: Record<number, string> = {
  1: "#4e79a7", // understanding / analysis
  2: "#f2b900", // planning
  3: "#59a14f", // implementation
  4: "#b07aa1", // awareness / social
};

export const ROLE_COLORS: Record<string, string> = {
  Driver: "#e15759",
  Navigator: "#f28e2b",
  Monitor: "#4e79a7",
  None: "#d0d0d0",
};

export const SCAFFOLD_COLORS: Record<string, string> = {
  "CS-L": "#a0cbe8",
  "CS-M": "#4e79a7",
  "CS-H": "#1b4e79",
  MS: "#9c755f",
};

const LEAF_COLORS = ["#cdeac0", "#84c77b", "#2f8f46"];

export function categoryColor(scheme: SchemeDoc, category: string): string {
  const entry = scheme.categories.find((c) => c.name === category);
  return entry ? GROUP_COLORS[entry.color_group] ?? "#888888" : "#888888";
}

export function leafColor(level: number): string {
  return LEAF_COLORS[Math.max(0, Math.min(LEAF_COLORS.length - 1, level))]!;
}

// Prior performance in [0, 1] mapped onto a light-to-dark ramp.
export function priorColor(fraction: number): string {
  const f = Math.max(0, Math.min(1, fraction));
  const from = [222, 235, 247];
  const to = [33, 83, 141];
  const channel = (i: number) => Math.round(from[i]! + (to[i]! - from[i]!) * f);
  return `rgb(${channel(0)}, ${channel(1)}, ${channel(2)})`;
}
