// View state with URL round-tripping: the whole selection is deep-linkable.

export interface DetailFocus {
  group: string;
  q: number;
  t: number;
}

export interface ViewState {
  selected: string[];
  search: string | null;
  compare: string | null;
  questions: number[];
  window: [number, number] | null;
  panel: "codes" | "students";
  detail: DetailFocus | null;
  scaffoldKind: string | null;
}

export function defaultState(): ViewState {
  return {
    selected: [],
    search: null,
    compare: null,
    questions: [],
    window: null,
    panel: "codes",
    detail: null,
    scaffoldKind: null,
  };
}

export function toQuery(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.selected.length) params.set("sel", state.selected.join(","));
  if (state.search) params.set("search", state.search);
  if (state.compare) params.set("compare", state.compare);
  if (state.questions.length) params.set("q", state.questions.join(","));
  if (state.window) params.set("win", `${state.window[0]}-${state.window[1]}`);
  if (state.panel !== "codes") params.set("panel", state.panel);
  if (state.detail) {
    params.set("detail", `${state.detail.group}:${state.detail.q}:${state.detail.t}`);
  }
  if (state.scaffoldKind) params.set("scaffold", state.scaffoldKind);
  return params.toString();
}

export function fromQuery(query: string): ViewState {
  const params = new URLSearchParams(query);
  const state = defaultState();
  const sel = params.get("sel");
  if (sel) state.selected = sel.split(",").filter(Boolean);
  state.search = params.get("search");
  state.compare = params.get("compare");
  const q = params.get("q");
  if (q) state.questions = q.split(",").map(Number).filter((n) => Number.isFinite(n));
  const win = params.get("win");
  if (win) {
    const [a, b] = win.split("-").map(Number);
    if (Number.isFinite(a) && Number.isFinite(b) && a! < b!) state.window = [a!, b!];
  }
  if (params.get("panel") === "students") state.panel = "students";
  const detail = params.get("detail");
  if (detail) {
    const [group, qId, t] = detail.split(":");
    if (group && qId !== undefined && t !== undefined) {
      const qNum = Number(qId);
      const tNum = Number(t);
      if (Number.isFinite(qNum) && Number.isFinite(tNum)) {
        state.detail = { group, q: qNum, t: tNum };
      }
    }
  }
  state.scaffoldKind = params.get("scaffold");
  if (state.compare !== null && state.compare === state.search) state.compare = null;
  return state;
}

type Listener = (state: ViewState) => void;

export class Store {
  state: ViewState;
  private listeners: Listener[] = [];

  constructor(initial?: ViewState, private readonly syncUrl: boolean = true) {
    this.state = initial ?? defaultState();
  }

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  update(patch: Partial<ViewState>): void {
    const next = { ...this.state, ...patch };
    // A group cannot be compared against itself.
    if (next.compare !== null && next.compare === next.search) next.compare = null;
    this.state = next;
    if (this.syncUrl && typeof history !== "undefined") {
      const query = toQuery(next);
      history.replaceState(null, "", query ? `?${query}` : location.pathname);
    }
    for (const fn of this.listeners) fn(next);
  }
}
