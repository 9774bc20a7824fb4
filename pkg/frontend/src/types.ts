/** api-v1 payload shapes. The console renders these verbatim: every verdict,
 * state, status, and recommendation string on screen comes from a server
 * field, never from client-side inference. */

export type Lane = "maker" | "checker";

export interface GraphNode {
  type: "node";
  node_kind: "evidence" | "action" | "factor" | "decision";
  id: string;
  lane: Lane;
  // evidence
  content?: string;
  source_ref?: string;
  source_type?: string;
  // action
  goal?: string;
  canonical_key?: string;
  origin?: string;
  criticality?: string;
  status?: string;
  // factor
  statement?: string;
  outcome?: string;
  resolution?: string;
  // decision
  role?: string;
  verdict?: string;
}

export interface GraphEdge {
  type: "edge";
  edge_kind: "evidence_action" | "action_factor" | "factor_decision" | "factor_factor";
  from: string;
  to: string;
  path_kind?: string;
  stance?: string;
}

export interface GraphPayload {
  case_id: string;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface Recommendation {
  action: string;
  canonical_key: string;
  request_text: string;
}

export interface OutcomeEntry {
  timestamp: string;
  verdict: string;
  recommendations: Recommendation[];
}

export interface SessionSummary {
  case_id: string;
  state: string;
  verdict: string;
  recommendation_count: number;
  submitted_at: string;
  updated_at: string;
}

export interface SessionView extends SessionSummary {
  record: Record<string, unknown>;
  graph: GraphPayload;
  recommendations: Recommendation[];
  trace: { case_id: string; steps: Record<string, unknown>[] };
  outcome_history: OutcomeEntry[];
}

export interface QueuePayload {
  sessions: SessionSummary[];
}

export interface EvidenceItemInput {
  id: string;
  source_type: string;
  content: string;
  source_ref: string;
}

export class MalformedPayload extends Error {}
