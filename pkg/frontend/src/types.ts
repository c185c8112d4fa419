// Wire types for the /api endpoints. Model identities never appear here:
// outputs are keyed by opaque positional aliases (sys1, sys2, ...).

export type Severity = "minor" | "major";
export type SpanOrigin = "human" | "prefilled" | "prefilled-edited";
export type Granularity = "word" | "character";

export interface SpanData {
  start_i: number;
  end_i: number;
  severity: Severity;
  origin: SpanOrigin;
  category?: string;
}

export interface ContentData {
  kind: "text" | "audio" | "video" | "html";
  value: string;
}

export interface OutputData extends ContentData {
  prefilled_spans?: SpanData[];
}

export interface SegmentData {
  src: ContentData;
  ref: ContentData | null;
  outputs: Record<string, OutputData>;
}

export interface SliderConfig {
  name: string;
  anchors: string[];
}

export interface NextItemPayload {
  complete: false;
  protocol: "DA" | "ESA" | "MQM" | "ESA^AI";
  document_index: number;
  instructions: string | null;
  aliases: string[];
  segments: SegmentData[];
  sliders: SliderConfig[];
  progress: { done: number; total: number };
  flags: {
    granularity_toggle: boolean;
    alignment_hover: boolean;
    postedit: boolean;
    redo: boolean;
    contrastive: boolean;
    skip_allowed: boolean;
  };
}

export interface CompletePayload {
  complete: true;
  verdict: "accept" | "reject";
  token: string;
}

export type NextResponse = NextItemPayload | CompletePayload;

export interface ActionEventData {
  ts: number;
  segment: number | null;
  model: string | null; // alias, never a true model id
  kind:
    | "span_create"
    | "span_delete"
    | "severity_change"
    | "score_set"
    | "comment_set"
    | "tutorial_fail"
    | "tutorial_skip"
    | "submit";
  payload: Record<string, unknown>;
}

export interface SegmentSubmission {
  score: number;
  spans: SpanData[];
  postedit?: string;
  missing?: boolean;
}

export interface SubmitPayload {
  document_index: number;
  outputs: Record<string, { segments: SegmentSubmission[] }>;
  comment?: string;
  skip_tutorial?: boolean;
  events: ActionEventData[];
}

export interface SubmitResponse {
  status: "accepted" | "blocked";
  warnings?: string[];
  progress?: { done: number; total: number };
}

export interface SessionInfo {
  campaign_id: string;
  user_id: string;
  role: "annotator" | "manager";
  protocol: string;
  assignment: string;
}

export interface UserProgressRow {
  done: number;
  total: number;
  mean_seconds_per_item: number | null;
  attention_pass_rate: number | null;
  attention_seen: number;
  tutorial_attempts: number;
}

export interface DashboardPayload {
  campaign_id: string;
  assignment: string;
  protocol: string;
  items_done: number;
  items_total: number;
  users: Record<string, UserProgressRow>;
  records: Array<Record<string, unknown>>;
  rule_outcomes: Array<Record<string, unknown>>;
  bias_disclaimer: string | null;
}

export interface RankingRow {
  model: string;
  mean: number;
  n: number;
}

export interface RankingReport {
  rows: RankingRow[];
  separations: number[];
  pairwise_p: Array<Array<number | null>>;
  alpha: number;
  assignment: string;
  bias_disclaimer: boolean;
  bias_disclaimer_text: string | null;
}
