// Document shapes served by the snapshot API. The dashboard renders these
// values verbatim; nothing is recomputed client-side.

export interface ProfileDoc {
  mean_score: number;
  engagement_vector: number[];
  sigma_e: number;
  cv_e: number;
  quality: number;
  scaffold_counts: Record<string, number>;
  discussion_duration: number;
  prior_performance: number;
  behavior_color_freqs: number[];
  behavioral_mean: number;
  cognitive_mean: number;
}

export interface FlowerDoc {
  student_id: string;
  petal_size: number;
  stamen_size: number;
  flower_color: string;
}

export interface GlyphDoc {
  group_id: string;
  flowers: FlowerDoc[];
  leaf_color_level: number;
  butterfly_count: number;
  shape: "point" | "rectangle";
  arc_fraction: number;
  base_color: number;
}

export interface GroupEntry {
  group_id: string;
  status: "ok" | "failed";
  error?: string;
  profile: ProfileDoc | null;
  glyph: GlyphDoc | null;
  projection_xy: [number, number] | null;
}

export interface SimilarityEntry {
  group_id: string;
  distance: number;
}

export interface SimilarDoc {
  target: string;
  most_similar: SimilarityEntry;
  most_different: SimilarityEntry;
}

export interface SchemeDoc {
  schema_version: number;
  expected_count: number;
  categories: Array<{ name: string; color_group: number }>;
}

export interface TimelineBar {
  index: number;
  t0: number;
  t1: number;
  speaker: string;
  category: string;
  confidence: number;
  raw_confidence: number;
  explanation: string;
}

export interface TimelineRun {
  category: string;
  t0: number;
  t1: number;
  confidence: number;
  duration: number;
  members: number[];
}

export interface TimelineRole {
  index: number;
  t0: number;
  t1: number;
  student: string;
  role: "Driver" | "Navigator" | "Monitor" | "None";
}

export interface TimelineScaffold {
  index: number;
  t0: number;
  t1: number;
  kind: string;
  confidence: number;
  explanation: string;
}

export interface TimelineQuestion {
  question_id: number;
  span: [number, number];
  driver: string | null;
  bars: TimelineBar[];
  runs: TimelineRun[];
  roles: TimelineRole[];
  scaffolds: TimelineScaffold[];
}

export interface TimelineDoc {
  questions: TimelineQuestion[];
}

export interface EngagementPointDoc {
  student: string;
  q: number;
  phase: "half" | "full";
  behavioral: number;
  cognitive: number;
}

export interface EngagementSeries {
  student: string;
  labels: Array<[number, string]>;
  behavioral: number[];
  cognitive: number[];
}

export interface EngagementDoc {
  students: string[];
  points: EngagementPointDoc[];
  smoothed: EngagementSeries[];
}

export interface NetworkNode {
  category: string;
  freq: number;
  norm: number;
}

export interface NetworkEdge {
  a: string;
  b: string;
  w: number;
  norm: number;
}

export interface NetworkDoc {
  range: number[];
  nodes: NetworkNode[];
  edges: NetworkEdge[];
}

export interface UtteranceDoc {
  start: number;
  end: number;
  speaker: string;
  text: string;
  focus?: boolean;
}

export interface TranscriptQuestion {
  question_id: number;
  driver: string | null;
  utterances: UtteranceDoc[];
}

export interface TranscriptDoc {
  group_id: string;
  media: string | null;
  questions: TranscriptQuestion[];
}

export interface CodeScoreDoc {
  problem_solving: number;
  code_integrity: number;
  code_accuracy: number;
  algorithm_innovation: number;
  weighted_total: number;
  rationale: string;
  n_samples: number;
  demerits: string[];
}

export interface CodesQuestion {
  question_id: number;
  source: string;
  score?: CodeScoreDoc;
}

export interface CodesDoc {
  questions: CodesQuestion[];
}

export interface StudentEntry {
  student_id: string;
  group_id: string;
  major: string;
  prior_score: number;
  behavioral_mean: number;
  cognitive_mean: number;
  role_share: Record<string, number>;
  speaking_seconds: number;
  utterance_count: number;
  modal_role: string;
  projection_xy: [number, number] | null;
}
