// Content view: a toggle between the codes panel and the student
// projection + group pattern panels, plus the timeline. Search group
// renders on the left, the comparison group on the right.

import { ApiClient, ApiError } from "../api.js";
import { el, clear } from "../dom.js";
import type { Store } from "../state.js";
import type {
  CodesDoc,
  EngagementDoc,
  NetworkDoc,
  SchemeDoc,
  StudentEntry,
  TimelineDoc,
} from "../types.js";
import { renderCodes } from "./codes.js";
import { createNetworksPanel, type NetworksPanel } from "./networks.js";
import { renderStudentProjection } from "./projection.js";
import { createTimelineView, type TimelineView } from "./timeline.js";

async function fetchOrNull<T>(api: ApiClient, path: string, key: string): Promise<T | null> {
  try {
    return await api.get<T>(path, key);
  } catch (err) {
    if (err instanceof ApiError) return null;
    throw err;
  }
}

export interface ContentView {
  root: HTMLElement;
  render(): Promise<void>;
}

export function createContentView(api: ApiClient, store: Store, scheme: SchemeDoc): ContentView {
  const toggle = el("button", {
    class: "panel-toggle",
    "data-testid": "panel-toggle",
    text: "Show student projection & patterns",
  });
  const panelHost = el("div", { class: "panel-host" });
  const timeline: TimelineView = createTimelineView(store);
  const networks: NetworksPanel = createNetworksPanel((questions) => {
    store.update({ questions });
    void renderPatternNetworks();
  });
  const projectionHost = el("div", { class: "projection-host" });
  const patternsWrap = el("div", { class: "patterns-panel" }, [projectionHost, networks.root]);
  const root = el("section", { class: "content-view" }, [
    el("h2", { text: "Content" }),
    toggle,
    panelHost,
    timeline.root,
  ]);

  toggle.addEventListener("click", () => {
    store.update({ panel: store.state.panel === "codes" ? "students" : "codes" });
    void render();
  });

  function networkPath(groupId: string): string {
    const questions = store.state.questions;
    const query = questions.length ? `?questions=${questions.join(",")}` : "";
    return `/api/groups/${groupId}/network${query}`;
  }

  async function renderPatternNetworks(): Promise<void> {
    const { search, compare } = store.state;
    if (!search) return;
    const left = await fetchOrNull<NetworkDoc>(api, networkPath(search), "network-left");
    const right = compare
      ? await fetchOrNull<NetworkDoc>(api, networkPath(compare), "network-right")
      : null;
    networks.renderNetworks(
      left ? { id: search, doc: left } : null,
      right && compare ? { id: compare, doc: right } : null,
      scheme,
    );
  }

  async function render(): Promise<void> {
    const { search, compare, panel } = store.state;
    clear(panelHost);
    if (!search) {
      panelHost.append(
        el("p", { class: "placeholder", text: "Search or select a group to inspect." }),
      );
      return;
    }
    toggle.textContent =
      panel === "codes" ? "Show student projection & patterns" : "Show codes";

    if (panel === "codes") {
      const left = await fetchOrNull<CodesDoc>(api, `/api/groups/${search}/codes`, "codes-left");
      const right = compare
        ? await fetchOrNull<CodesDoc>(api, `/api/groups/${compare}/codes`, "codes-right")
        : null;
      const host = el("div");
      renderCodes(
        host,
        left ? { id: search, doc: left } : null,
        right && compare ? { id: compare, doc: right } : null,
      );
      panelHost.append(host);
    } else {
      panelHost.append(patternsWrap);
      const students = await fetchOrNull<StudentEntry[]>(api, "/api/students", "students");
      renderStudentProjection(projectionHost, students ?? [], search, compare);
      const questionIds = (
        await fetchOrNull<TimelineDoc>(api, `/api/groups/${search}/timeline`, "qids")
      )?.questions.map((q) => q.question_id) ?? [];
      networks.renderButtons(questionIds, store.state.questions);
      await renderPatternNetworks();
    }

    const timelineDoc = await fetchOrNull<TimelineDoc>(
      api, `/api/groups/${search}/timeline`, "timeline",
    );
    const engagement = await fetchOrNull<EngagementDoc>(
      api, `/api/groups/${search}/engagement`, "engagement",
    );
    if (timelineDoc && engagement) {
      timeline.render(search, timelineDoc, engagement, scheme);
      timeline.root.hidden = false;
    } else {
      timeline.root.hidden = true;
    }
  }

  return { root, render };
}
