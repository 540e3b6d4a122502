// Timeline panel: confidence bars colored by category with dashed question
// separators, scaffold badges on instructor bars, the per-student role
// strip, and three engagement line charts. A brush zooms into a window;
// clicking a bar links to the detail view.

import { categoryColor, ROLE_COLORS, SCAFFOLD_COLORS } from "../colors.js";
import { el, svg, clear, fmt } from "../dom.js";
import { linearScale } from "../scales.js";
import type { Store } from "../state.js";
import type {
  EngagementDoc,
  SchemeDoc,
  TimelineDoc,
  TimelineQuestion,
} from "../types.js";

const WIDTH = 760;
const BAR_AREA = 90;
const ROLE_ROW = 12;

interface Spanned {
  t0: number;
  t1: number;
}

// Client-side mirror of the service's window filter: keep items overlapping
// the window, clipped to it.
export function clipToWindow<T extends Spanned>(items: T[], t0: number, t1: number): T[] {
  if (t0 >= t1) throw new Error(`inverted window [${t0}, ${t1}]`);
  const out: T[] = [];
  for (const item of items) {
    const lo = Math.max(item.t0, t0);
    const hi = Math.min(item.t1, t1);
    if (lo < hi) out.push({ ...item, t0: lo, t1: hi });
  }
  return out;
}

export function timelineSpan(doc: TimelineDoc): [number, number] {
  const spans = doc.questions.filter((q) => q.bars.length);
  if (!spans.length) return [0, 1];
  return [
    Math.min(...spans.map((q) => q.span[0])),
    Math.max(...spans.map((q) => q.span[1])),
  ];
}

export interface TimelineView {
  root: HTMLElement;
  render(groupId: string, doc: TimelineDoc, engagement: EngagementDoc, scheme: SchemeDoc): void;
}

export function createTimelineView(store: Store): TimelineView {
  const barsSvg = svg("svg", {
    class: "timeline-bars",
    viewBox: `0 0 ${WIDTH} ${BAR_AREA + 6 * ROLE_ROW}`,
    width: WIDTH,
  });
  const brushLow = el("input", { type: "range", class: "brush-low", "data-testid": "brush-low" });
  const brushHigh = el("input", { type: "range", class: "brush-high", "data-testid": "brush-high" });
  const brushLabel = el("span", { class: "brush-label" });
  const resetButton = el("button", { class: "brush-reset", text: "Reset window" });
  const charts = el("div", { class: "engagement-charts", "data-testid": "engagement-charts" });
  const tooltip = el("div", { class: "tooltip", hidden: true });

  const root = el("section", { class: "timeline-view" }, [
    el("h3", { text: "Timeline" }),
    el("div", { class: "brush" }, [brushLow, brushHigh, brushLabel, resetButton]),
    barsSvg as unknown as Element,
    el("h4", { text: "Engagement" }),
    charts,
    tooltip,
  ]);

  let current: {
    groupId: string;
    doc: TimelineDoc;
    engagement: EngagementDoc;
    scheme: SchemeDoc;
  } | null = null;

  function windowBounds(): [number, number] {
    if (!current) return [0, 1];
    const full = timelineSpan(current.doc);
    const win = store.state.window;
    if (!win) return full;
    return [Math.max(full[0], win[0]), Math.min(full[1], win[1])];
  }

  resetButton.addEventListener("click", () => {
    store.update({ window: null });
    redraw();
  });

  function onBrush(): void {
    const lo = Number(brushLow.value);
    const hi = Number(brushHigh.value);
    if (Number.isFinite(lo) && Number.isFinite(hi) && lo < hi) {
      store.update({ window: [lo, hi] });
      redraw();
    }
  }
  brushLow.addEventListener("change", onBrush);
  brushHigh.addEventListener("change", onBrush);

  function drawQuestion(
    question: TimelineQuestion,
    x: (t: number) => number,
    t0: number,
    t1: number,
  ): SVGGElement {
    const g = svg("g", { class: "question-lane", "data-question": question.question_id });
    const scheme = current!.scheme;
    const scaffoldByIndex = new Map(question.scaffolds.map((s) => [s.index, s]));
    for (const bar of clipToWindow(question.bars, t0, t1)) {
      const height = (bar.confidence / 100) * BAR_AREA;
      const node = svg("rect", {
        class: "bar",
        x: fmt(x(bar.t0)),
        y: fmt(BAR_AREA - height),
        width: fmt(Math.max(1, x(bar.t1) - x(bar.t0))),
        height: fmt(height),
        fill: categoryColor(scheme, bar.category),
        "data-question": question.question_id,
        "data-index": bar.index,
        "data-category": bar.category,
        "data-confidence": fmt(bar.confidence, 1),
        "data-t0": bar.t0,
      });
      node.addEventListener("mouseenter", () => {
        tooltip.textContent =
          `${bar.category} (${fmt(bar.confidence, 1)}%) - ${bar.explanation}`;
        tooltip.hidden = false;
      });
      node.addEventListener("mouseleave", () => {
        tooltip.hidden = true;
      });
      node.addEventListener("click", () => {
        const scaffold = scaffoldByIndex.get(bar.index);
        store.update({
          detail: { group: current!.groupId, q: question.question_id, t: bar.t0 },
          scaffoldKind: scaffold ? scaffold.kind : null,
        });
      });
      g.append(node);
      const scaffold = scaffoldByIndex.get(bar.index);
      if (scaffold) {
        g.append(
          svg("rect", {
            class: "scaffold-marker",
            x: fmt(x(bar.t0)),
            y: 0,
            width: fmt(Math.max(1, x(bar.t1) - x(bar.t0))),
            height: 4,
            fill: SCAFFOLD_COLORS[scaffold.kind] ?? "#333333",
            "data-kind": scaffold.kind,
          }),
        );
      }
    }
    return g;
  }

  function drawRoles(x: (t: number) => number, t0: number, t1: number): SVGGElement {
    const g = svg("g", { class: "role-strip", "data-testid": "role-strip" });
    const students = current!.engagement.students;
    students.forEach((student, row) => {
      const y = BAR_AREA + 14 + row * ROLE_ROW;
      g.append(
        svg("text", {
          x: 0, y: fmt(y + 9), "font-size": 8, class: "role-label", text: student,
        }),
      );
      for (const question of current!.doc.questions) {
        const mine = question.roles.filter((r) => r.student === student);
        for (const role of clipToWindow(mine, t0, t1)) {
          g.append(
            svg("rect", {
              class: "role-rect",
              x: fmt(x(role.t0)),
              y: fmt(y),
              width: fmt(Math.max(1, x(role.t1) - x(role.t0))),
              height: ROLE_ROW - 2,
              fill: ROLE_COLORS[role.role] ?? "#cccccc",
              "data-student": student,
              "data-role": role.role,
            }),
          );
        }
      }
    });
    return g;
  }

  function drawCharts(): void {
    clear(charts);
    const doc = current!.engagement;
    for (const series of doc.smoothed) {
      const chart = svg("svg", {
        class: "engagement-chart",
        viewBox: "0 0 240 70",
        width: 240,
        height: 70,
        "data-student": series.student,
      });
      const n = series.behavioral.length;
      const px = linearScale([0, Math.max(1, n - 1)], [6, 234]);
      const py = linearScale([0, 1], [62, 6]);
      const toPoints = (values: number[]) =>
        values.map((v, i) => `${fmt(px(i))},${fmt(py(Math.max(0, Math.min(1, v))))}`).join(" ");
      chart.append(
        svg("polyline", {
          class: "line behavioral",
          points: toPoints(series.behavioral),
          fill: "none",
          stroke: "#e15759",
          "stroke-width": 1.6,
        }),
        svg("polyline", {
          class: "line cognitive",
          points: toPoints(series.cognitive),
          fill: "none",
          stroke: "#4e79a7",
          "stroke-width": 1.6,
          "stroke-dasharray": "4 2",
        }),
        svg("text", { x: 6, y: 12, "font-size": 8, text: series.student }),
      );
      charts.append(chart);
    }
  }

  function redraw(): void {
    if (!current) return;
    const [t0, t1] = windowBounds();
    const full = timelineSpan(current.doc);
    brushLow.min = brushHigh.min = String(Math.floor(full[0]));
    brushLow.max = brushHigh.max = String(Math.ceil(full[1]));
    brushLow.value = String(t0);
    brushHigh.value = String(t1);
    brushLabel.textContent = `[${fmt(t0, 1)}s, ${fmt(t1, 1)}s]`;

    clear(barsSvg);
    const x = linearScale([t0, t1], [40, WIDTH - 10]);
    for (const question of current.doc.questions) {
      barsSvg.append(drawQuestion(question, x, t0, t1));
    }
    // Dashed separators between consecutive visible questions.
    for (const question of current.doc.questions.slice(1)) {
      const boundary = question.span[0];
      if (boundary > t0 && boundary < t1) {
        barsSvg.append(
          svg("line", {
            class: "separator",
            x1: fmt(x(boundary)),
            x2: fmt(x(boundary)),
            y1: 0,
            y2: BAR_AREA + 6 * ROLE_ROW,
            stroke: "#999999",
            "stroke-dasharray": "5 4",
            "data-question": question.question_id,
          }),
        );
      }
    }
    barsSvg.append(drawRoles(x, t0, t1));
    drawCharts();
  }

  function render(
    groupId: string,
    doc: TimelineDoc,
    engagement: EngagementDoc,
    scheme: SchemeDoc,
  ): void {
    current = { groupId, doc, engagement, scheme };
    redraw();
  }

  return { root, render };
}
