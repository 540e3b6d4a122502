// Filter view: interactive projection scatter with lasso selection, the
// bouquet strip for selected groups, and the similarity panel for the
// searched group.

import { ApiClient } from "../api.js";
import { el, svg, clear, fmt } from "../dom.js";
import { bouquetNode, projectionMarker } from "../glyph.js";
import { pointsInPolygon, type Point } from "../lasso.js";
import { linearScale, extent, type LinearScale } from "../scales.js";
import type { Store } from "../state.js";
import type { GroupEntry, SimilarDoc } from "../types.js";

const WIDTH = 520;
const HEIGHT = 340;
const MARGIN = 30;

export interface FilterView {
  root: HTMLElement;
  render(groups: GroupEntry[]): void;
  applyLasso(polygon: Point[]): void;
}

export function createFilterView(api: ApiClient, store: Store): FilterView {
  const plot = svg("svg", {
    class: "projection",
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: WIDTH,
    height: HEIGHT,
  });
  const markers = svg("g", { class: "markers" });
  const lassoPath = svg("polyline", { class: "lasso", fill: "none" });
  plot.append(markers, lassoPath);

  const searchInput = el("input", {
    id: "group-search",
    list: "group-ids",
    placeholder: "Search group...",
  });
  const datalist = el("datalist", { id: "group-ids" });
  const similarity = el("div", { class: "similarity-panel", "data-testid": "similarity" });
  const strip = el("div", { class: "bouquet-strip", "data-testid": "bouquet-strip" });
  const tooltip = el("div", { class: "tooltip", hidden: true });
  const banner = el("div", { class: "error-banner", hidden: true });

  const root = el("section", { class: "filter-view" }, [
    el("h2", { text: "Group overview" }),
    banner,
    el("div", { class: "filter-controls" }, [searchInput, datalist]),
    plot as unknown as Element,
    el("h3", { text: "Selection" }),
    strip,
    el("h3", { text: "Similarity" }),
    similarity,
    tooltip,
  ]);

  let groups: GroupEntry[] = [];
  let sx: LinearScale = linearScale([0, 1], [MARGIN, WIDTH - MARGIN]);
  let sy: LinearScale = linearScale([0, 1], [HEIGHT - MARGIN, MARGIN]);

  function showError(message: string): void {
    banner.textContent = message;
    banner.hidden = false;
  }

  function renderStrip(): void {
    clear(strip);
    for (const id of store.state.selected) {
      const entry = groups.find((g) => g.group_id === id);
      if (!entry?.glyph) continue;
      const cell = el("figure", { class: "bouquet-cell", "data-group": id });
      const canvas = svg("svg", { viewBox: "-60 -60 120 120", width: 110, height: 110 });
      canvas.append(bouquetNode(entry.glyph));
      cell.append(canvas, el("figcaption", { text: id }));
      strip.append(cell);
    }
  }

  function renderSimilarity(doc: SimilarDoc | null): void {
    clear(similarity);
    if (!doc) {
      similarity.append(el("p", { class: "placeholder", text: "Search a group to rank similarity." }));
      return;
    }
    similarity.append(
      el("p", { "data-testid": "most-similar" }, [
        "Most similar: ",
        el("strong", { text: doc.most_similar.group_id }),
        ` (distance ${fmt(doc.most_similar.distance)})`,
      ]),
      el("p", { "data-testid": "most-different" }, [
        "Most different: ",
        el("strong", { text: doc.most_different.group_id }),
        ` (distance ${fmt(doc.most_different.distance)})`,
      ]),
      el("button", {
        class: "compare-button",
        "data-testid": "compare-similar",
        text: `Compare with ${doc.most_similar.group_id}`,
      }),
    );
    const button = similarity.querySelector("button")!;
    button.addEventListener("click", () => store.update({ compare: doc.most_similar.group_id }));
  }

  async function runSearch(id: string): Promise<void> {
    store.update({ search: id });
    try {
      const doc = await api.get<SimilarDoc>(`/api/groups/${id}/similar`, "similar");
      renderSimilarity(doc);
    } catch (err) {
      renderSimilarity(null);
      showError(`Similarity unavailable: ${(err as Error).message}`);
    }
  }

  searchInput.addEventListener("change", () => {
    const id = searchInput.value.trim();
    if (id) void runSearch(id);
  });

  function coordOf(entry: GroupEntry): Point | null {
    return entry.projection_xy ? [entry.projection_xy[0], entry.projection_xy[1]] : null;
  }

  function applyLasso(polygon: Point[]): void {
    const hits = pointsInPolygon(groups, coordOf, polygon).map((g) => g.group_id);
    store.update({ selected: hits });
    renderStrip();
  }

  // Freehand lasso: collect pixel points, convert to data space on release.
  let dragging: Point[] | null = null;
  plot.addEventListener("mousedown", (event) => {
    dragging = [[event.offsetX, event.offsetY]];
  });
  plot.addEventListener("mousemove", (event) => {
    if (!dragging) return;
    dragging.push([event.offsetX, event.offsetY]);
    lassoPath.setAttribute("points", dragging.map(([x, y]) => `${x},${y}`).join(" "));
  });
  plot.addEventListener("mouseup", () => {
    if (dragging && dragging.length >= 3) {
      applyLasso(dragging.map(([px, py]) => [sx.invert(px), sy.invert(py)] as Point));
    }
    dragging = null;
    lassoPath.removeAttribute("points");
  });

  function render(next: GroupEntry[]): void {
    groups = next.filter((g) => g.status === "ok" && g.projection_xy);
    clear(markers);
    clear(datalist);
    for (const g of next) {
      if (g.status === "ok") datalist.append(el("option", { value: g.group_id }));
    }
    const xs = groups.map((g) => g.projection_xy![0]);
    const ys = groups.map((g) => g.projection_xy![1]);
    sx = linearScale(extent(xs, 0.1), [MARGIN, WIDTH - MARGIN]);
    sy = linearScale(extent(ys, 0.1), [HEIGHT - MARGIN, MARGIN]);
    for (const entry of groups) {
      if (!entry.glyph) continue;
      const marker = projectionMarker(entry.glyph);
      const [x, y] = entry.projection_xy!;
      marker.setAttribute("transform", `translate(${fmt(sx(x))} ${fmt(sy(y))})`);
      marker.addEventListener("mouseenter", () => {
        const profile = entry.profile!;
        const scaffolds = Object.entries(profile.scaffold_counts)
          .map(([kind, count]) => `${kind} ${count}`)
          .join(", ");
        tooltip.textContent =
          `${entry.group_id}: duration ${fmt(profile.discussion_duration, 0)}s, ` +
          `quality ${fmt(profile.quality)}, scaffolds ${scaffolds}`;
        tooltip.hidden = false;
      });
      marker.addEventListener("mouseleave", () => {
        tooltip.hidden = true;
      });
      marker.addEventListener("click", () => void runSearch(entry.group_id));
      markers.append(marker);
    }
    renderStrip();
    renderSimilarity(null);
  }

  return { root, render, applyLasso };
}
