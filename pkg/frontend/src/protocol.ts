// Message and payload shapes for the proving service protocol.
// Mirrors docs/protocol.md; field names are part of the wire contract.

export interface SlotPayload {
  name: string;
  kind: "premise-line" | "conclusion-line" | "parameter";
  value: string | null;
  mandatory: boolean;
}

export interface SuggestionPayload {
  command: string;
  args: string;
  completeness: number;
  complete: boolean;
  goal_closing: boolean;
  slots: SlotPayload[];
}

export interface ProofPayload {
  lines: string[];
  complete: boolean;
  executed?: string;
}

export interface ReportPayload {
  command: string;
  average: number;
  active: number;
  retired: number;
}

export interface AgentPayload {
  agent: string;
  rating: number;
  failures: number;
  retired: boolean;
  excluded: boolean;
}

export interface ResourcePayload {
  reports: ReportPayload[];
  agents: AgentPayload[];
}

export type EventKind =
  | "proof-updated"
  | "proof-complete"
  | "classification"
  | "suggestions-updated"
  | "resource-report";

export interface SessionEventMsg {
  seq: number;
  kind: EventKind;
  epoch: number;
  payload: any;
}

export interface OkResponse {
  id: number;
  kind: "ok";
  result: any;
}

export interface ErrorResponse {
  id: number | null;
  kind: "error";
  code: string;
  message: string;
}

export interface EventEnvelope {
  kind: "event";
  event: SessionEventMsg;
}

export type ServerMessage = OkResponse | ErrorResponse | EventEnvelope;

export interface StateResult {
  epoch: number;
  proof: ProofPayload;
  suggestions: SuggestionPayload[];
  classification: string | null;
  resources: ResourcePayload;
}

export function isEvent(msg: ServerMessage): msg is EventEnvelope {
  return msg.kind === "event";
}

export function parseServerMessage(raw: string): ServerMessage {
  return JSON.parse(raw) as ServerMessage;
}

export function encodeRequest(msg: Record<string, unknown>): string {
  return JSON.stringify(msg);
}
