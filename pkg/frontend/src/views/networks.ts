// Group pattern panel: behavior networks with nodes sized/darkened by
// frequency and edges weighted by co-occurrence, side by side when a
// comparison group is active. Question buttons re-query the range.

import { categoryColor } from "../colors.js";
import { el, svg, clear, fmt } from "../dom.js";
import type { NetworkDoc, SchemeDoc } from "../types.js";

const SIZE = 260;

export function networkSvg(doc: NetworkDoc, scheme: SchemeDoc, groupId: string): SVGSVGElement {
  const canvas = svg("svg", {
    class: "network",
    viewBox: `0 0 ${SIZE} ${SIZE}`,
    width: SIZE,
    height: SIZE,
    "data-group": groupId,
    "data-range": doc.range.join(","),
  });
  const center = SIZE / 2;
  const ring = SIZE / 2 - 40;
  const nodes = [...doc.nodes].sort((a, b) => a.category.localeCompare(b.category));
  const position = new Map<string, [number, number]>();
  nodes.forEach((node, i) => {
    const angle = (2 * Math.PI * i) / Math.max(1, nodes.length) - Math.PI / 2;
    position.set(node.category, [
      center + ring * Math.cos(angle),
      center + ring * Math.sin(angle),
    ]);
  });
  for (const edge of doc.edges) {
    const [x1, y1] = position.get(edge.a)!;
    const [x2, y2] = position.get(edge.b)!;
    canvas.append(
      svg("line", {
        class: "edge",
        x1: fmt(x1), y1: fmt(y1), x2: fmt(x2), y2: fmt(y2),
        stroke: "#666666",
        "stroke-width": fmt(1 + 3 * edge.norm),
        "stroke-opacity": fmt(0.25 + 0.65 * edge.norm),
        "data-pair": `${edge.a}|${edge.b}`,
        "data-w": edge.w,
      }),
    );
  }
  for (const node of nodes) {
    const [x, y] = position.get(node.category)!;
    const dot = svg("circle", {
      class: "node",
      cx: fmt(x),
      cy: fmt(y),
      r: fmt(5 + 11 * node.norm),
      fill: categoryColor(scheme, node.category),
      "fill-opacity": fmt(0.45 + 0.55 * node.norm),
      "data-category": node.category,
      "data-freq": node.freq,
    });
    dot.append(svg("title", { text: `${node.category}: ${node.freq}` }));
    canvas.append(dot);
    canvas.append(
      svg("text", {
        class: "node-label",
        x: fmt(x),
        y: fmt(y - (8 + 11 * node.norm)),
        "text-anchor": "middle",
        "font-size": 8,
        text: node.category,
      }),
    );
  }
  return canvas;
}

export interface NetworksPanel {
  root: HTMLElement;
  renderButtons(questionIds: number[], active: number[]): void;
  renderNetworks(
    left: { id: string; doc: NetworkDoc } | null,
    right: { id: string; doc: NetworkDoc } | null,
    scheme: SchemeDoc,
  ): void;
}

export function createNetworksPanel(
  onRangeChange: (questions: number[]) => void,
): NetworksPanel {
  const buttons = el("div", { class: "question-buttons", "data-testid": "question-buttons" });
  const plots = el("div", { class: "network-plots" });
  const root = el("div", { class: "networks-panel" }, [buttons, plots]);
  let active = new Set<number>();

  function renderButtons(questionIds: number[], current: number[]): void {
    active = new Set(current);
    clear(buttons);
    for (const qid of questionIds) {
      const button = el("button", {
        class: active.has(qid) ? "question active" : "question",
        "data-question": qid,
        text: `Q${qid}`,
      });
      button.addEventListener("click", () => {
        if (active.has(qid)) active.delete(qid);
        else active.add(qid);
        button.classList.toggle("active");
        onRangeChange([...active].sort((a, b) => a - b));
      });
      buttons.append(button);
    }
  }

  function renderNetworks(
    left: { id: string; doc: NetworkDoc } | null,
    right: { id: string; doc: NetworkDoc } | null,
    scheme: SchemeDoc,
  ): void {
    clear(plots);
    plots.className = right ? "network-plots side-by-side" : "network-plots";
    for (const side of [left, right]) {
      if (!side) continue;
      const cell = el("figure", { class: "network-cell", "data-group": side.id });
      cell.append(networkSvg(side.doc, scheme, side.id), el("figcaption", { text: side.id }));
      plots.append(cell);
    }
    if (!left && !right) {
      plots.append(el("p", { class: "placeholder", text: "Network unavailable." }));
    }
  }

  return { root, renderButtons, renderNetworks };
}
