// Application assembly: three linked views over the snapshot API, with the
// whole view state living in the URL query string.

import { ApiClient, ApiError } from "./api.js";
import { el, clear } from "./dom.js";
import { fromQuery, Store } from "./state.js";
import type { GroupEntry, SchemeDoc, TranscriptDoc } from "./types.js";
import { createContentView } from "./views/content.js";
import { renderDetail } from "./views/detail.js";
import { createFilterView } from "./views/filter.js";

export interface App {
  store: Store;
  refresh(): Promise<void>;
}

export async function bootstrap(root: HTMLElement, api = new ApiClient("")): Promise<App> {
  clear(root);
  const store = new Store(fromQuery(typeof location !== "undefined" ? location.search : ""));

  let scheme: SchemeDoc;
  let groups: GroupEntry[];
  try {
    [scheme, groups] = await Promise.all([
      api.get<SchemeDoc>("/api/scheme"),
      api.get<GroupEntry[]>("/api/groups"),
    ]);
  } catch (err) {
    root.append(
      el("div", {
        class: "error-banner",
        text: `Failed to load snapshot: ${(err as Error).message}`,
      }),
    );
    throw err;
  }

  const filter = createFilterView(api, store);
  const content = createContentView(api, store, scheme);
  const detailHost = el("section", { class: "detail-host", "data-testid": "detail-host" });
  root.append(filter.root, content.root, detailHost);

  filter.render(groups);

  let lastContentKey = "";
  let lastDetailKey = "";

  async function refreshDetail(): Promise<void> {
    const focus = store.state.detail;
    clear(detailHost);
    if (!focus) return;
    try {
      const transcript = await api.get<TranscriptDoc>(
        `/api/groups/${focus.group}/transcript?q=${focus.q}&t=${focus.t}`,
        "transcript",
      );
      renderDetail(detailHost, transcript, focus, store.state.scaffoldKind);
    } catch (err) {
      if (err instanceof ApiError) {
        detailHost.append(el("p", { class: "placeholder", text: "Transcript unavailable." }));
      } else {
        throw err;
      }
    }
  }

  async function refresh(): Promise<void> {
    const contentKey = JSON.stringify([
      store.state.search,
      store.state.compare,
      store.state.panel,
      store.state.questions,
      store.state.window,
    ]);
    if (contentKey !== lastContentKey) {
      lastContentKey = contentKey;
      await content.render();
    }
    const detailKey = JSON.stringify([store.state.detail, store.state.scaffoldKind]);
    if (detailKey !== lastDetailKey) {
      lastDetailKey = detailKey;
      await refreshDetail();
    }
  }

  store.subscribe(() => {
    void refresh();
  });
  if (typeof window !== "undefined") {
    window.addEventListener("popstate", () => {
      store.state = fromQuery(location.search);
      void refresh();
    });
  }
  await refresh();
  return { store, refresh };
}

// Browser entry point; tests import bootstrap directly instead.
const mount = typeof document !== "undefined" ? document.getElementById("app") : null;
if (mount) {
  void bootstrap(mount);
}
