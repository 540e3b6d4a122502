// Shared test plumbing: a fetch stub that serves the committed snapshot
// fixture documents with the same routing semantics as the service.

import { vi } from "vitest";
import type {
  CodesDoc,
  GroupEntry,
  NetworkDoc,
  SchemeDoc,
  StudentEntry,
  TimelineDoc,
  TranscriptDoc,
  EngagementDoc,
} from "../src/types.js";

import groupsJson from "./fixtures/groups.json";
import similarityJson from "./fixtures/similarity.json";
import studentsJson from "./fixtures/students.json";
import schemeJson from "./fixtures/scheme.json";
import g10Timeline from "./fixtures/g10_timeline.json";
import g18Timeline from "./fixtures/g18_timeline.json";
import g10Engagement from "./fixtures/g10_engagement.json";
import g10Networks from "./fixtures/g10_networks.json";
import g18Networks from "./fixtures/g18_networks.json";
import g10Transcript from "./fixtures/g10_transcript.json";
import g18Transcript from "./fixtures/g18_transcript.json";
import g10Codes from "./fixtures/g10_codes.json";
import g18Codes from "./fixtures/g18_codes.json";

export const fixtures = {
  groups: groupsJson as unknown as GroupEntry[],
  similarity: similarityJson as unknown as {
    per_group: Record<string, { most_similar: unknown; most_different: unknown }>;
  },
  students: studentsJson as unknown as StudentEntry[],
  scheme: schemeJson as unknown as SchemeDoc,
  timeline: { G10: g10Timeline as unknown as TimelineDoc, G18: g18Timeline as unknown as TimelineDoc },
  engagement: { G10: g10Engagement as unknown as EngagementDoc },
  networks: {
    G10: g10Networks as unknown as { window: number; per_question: Record<string, NetworkDoc>; full: NetworkDoc },
    G18: g18Networks as unknown as { window: number; per_question: Record<string, NetworkDoc>; full: NetworkDoc },
  },
  transcript: { G10: g10Transcript as unknown as TranscriptDoc, G18: g18Transcript as unknown as TranscriptDoc },
  codes: { G10: g10Codes as unknown as CodesDoc, G18: g18Codes as unknown as CodesDoc },
};

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function notFound(message: string): Response {
  return json({ error: { code: "not-found", message } }, 404);
}

// Accumulate per-question networks for a ?questions= range the same way the
// service does (edge additivity), normalizing by the merged peak.
function networkForRange(group: "G10" | "G18", questions: number[]): NetworkDoc {
  const per = fixtures.networks[group].per_question;
  const nodes = new Map<string, number>();
  const edges = new Map<string, number>();
  for (const q of questions) {
    const doc = per[String(q)];
    if (!doc) continue;
    for (const node of doc.nodes) nodes.set(node.category, (nodes.get(node.category) ?? 0) + node.freq);
    for (const edge of doc.edges) {
      const key = `${edge.a}|${edge.b}`;
      edges.set(key, (edges.get(key) ?? 0) + edge.w);
    }
  }
  const maxNode = Math.max(0, ...nodes.values());
  const maxEdge = Math.max(0, ...edges.values());
  return {
    range: [...questions].sort((a, b) => a - b),
    nodes: [...nodes.entries()].map(([category, freq]) => ({
      category,
      freq,
      norm: maxNode > 0 ? freq / maxNode : 0,
    })),
    edges: [...edges.entries()].map(([key, w]) => {
      const [a, b] = key.split("|");
      return { a: a!, b: b!, w, norm: maxEdge > 0 ? w / maxEdge : 0 };
    }),
  };
}

function transcriptWithFocus(group: "G10" | "G18", q: number | null, t: number | null): TranscriptDoc {
  const doc = fixtures.transcript[group];
  const questions = doc.questions
    .filter((question) => q === null || question.question_id === q)
    .map((question) => ({
      ...question,
      utterances: question.utterances.map((u) => ({
        ...u,
        ...(t !== null && u.start <= t && t < u.end ? { focus: true } : {}),
      })),
    }));
  return { ...doc, questions };
}

export interface FetchStub {
  calls: string[];
  restore(): void;
}

export function installFetchStub(overrides: Record<string, Response | (() => Response)> = {}): FetchStub {
  const calls: string[] = [];

  const handler = async (input: RequestInfo | URL): Promise<Response> => {
    const url = String(input instanceof Request ? input.url : input);
    calls.push(url);
    const override = overrides[url];
    if (override) return typeof override === "function" ? override() : override.clone();

    const [path, query = ""] = url.split("?");
    const params = new URLSearchParams(query);

    if (path === "/api/scheme") return json(fixtures.scheme);
    if (path === "/api/groups") return json(fixtures.groups);
    if (path === "/api/students") return json(fixtures.students);

    let match = path!.match(/^\/api\/groups\/(\w+)\/similar$/);
    if (match) {
      const entry = fixtures.similarity.per_group[match[1]!];
      if (!entry) return notFound(`unknown group ${match[1]}`);
      return json({ target: match[1], ...entry });
    }
    match = path!.match(/^\/api\/groups\/(\w+)\/timeline$/);
    if (match) {
      const doc = fixtures.timeline[match[1] as "G10" | "G18"];
      return doc ? json(doc) : notFound(`no timeline for ${match[1]}`);
    }
    match = path!.match(/^\/api\/groups\/(\w+)\/engagement$/);
    if (match) {
      const doc = (fixtures.engagement as Record<string, unknown>)[match[1]!];
      return doc ? json(doc) : notFound(`no engagement for ${match[1]}`);
    }
    match = path!.match(/^\/api\/groups\/(\w+)\/codes$/);
    if (match) {
      const doc = (fixtures.codes as Record<string, unknown>)[match[1]!];
      return doc ? json(doc) : notFound(`no codes for ${match[1]}`);
    }
    match = path!.match(/^\/api\/groups\/(\w+)\/network$/);
    if (match) {
      const group = match[1] as "G10" | "G18";
      if (!(group in fixtures.networks)) return notFound(`no networks for ${group}`);
      const questions = params.get("questions");
      if (!questions) return json(fixtures.networks[group].full);
      return json(networkForRange(group, questions.split(",").map(Number)));
    }
    match = path!.match(/^\/api\/groups\/(\w+)\/transcript$/);
    if (match) {
      const group = match[1] as "G10" | "G18";
      if (!(group in fixtures.transcript)) return notFound(`no transcript for ${group}`);
      const q = params.get("q");
      const t = params.get("t");
      return json(transcriptWithFocus(group, q ? Number(q) : null, t ? Number(t) : null));
    }
    return notFound(`unrouted ${url}`);
  };

  vi.stubGlobal("fetch", vi.fn(handler));
  return {
    calls,
    restore: () => vi.unstubAllGlobals(),
  };
}

export async function flush(times = 6): Promise<void> {
  for (let i = 0; i < times; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

export function groupCoord(groups: GroupEntry[], id: string): [number, number] {
  const entry = groups.find((g) => g.group_id === id);
  if (!entry?.projection_xy) throw new Error(`no coords for ${id}`);
  return entry.projection_xy;
}

// Axis-aligned polygon strictly containing the given points.
export function polygonAround(points: Array<[number, number]>, pad = 0.05): Array<[number, number]> {
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  const spanX = Math.max(...xs) - Math.min(...xs) || 1;
  const spanY = Math.max(...ys) - Math.min(...ys) || 1;
  const x0 = Math.min(...xs) - spanX * pad;
  const x1 = Math.max(...xs) + spanX * pad;
  const y0 = Math.min(...ys) - spanY * pad;
  const y1 = Math.max(...ys) + spanY * pad;
  return [
    [x0, y0],
    [x1, y0],
    [x1, y1],
    [x0, y1],
  ];
}
