// Wire schema shared with the engine. One JSON object per WebSocket frame.

export type AckKind = "user_nod" | "user_backchannel" | "silence_timeout";

export interface AsrMessage {
  type: "asr_partial" | "asr_final";
  session: string;
  text: string;
  seq: number;
  t_ms: number;
}

export interface AckMessage {
  type: "ack";
  session: string;
  kind: AckKind;
  seq: number;
  t_ms: number;
}

export type ClientMessage = AsrMessage | AckMessage;

export interface SpeakPayload {
  text: string;
  expression: string;
  motion: string;
}

export interface QueryPayload {
  major_categories: string[];
  subcategories: string[];
  minor_categories: string[];
  other: string[];
}

export interface TreeNodePayload {
  topic_key: string;
  created_turn: number;
  preferences: { facet: string; value: string; source_turn: number }[];
  children: TreeNodePayload[];
}

export interface GroundPayload {
  root: TreeNodePayload;
  active_path: string[];
}

export interface ResultPayload {
  id: string;
  name: string;
  description: string;
  opening_hours: string;
  fee: string;
  score: number;
}

export interface ServerMessage {
  type:
    | "speak"
    | "nod"
    | "backchannel"
    | "query_update"
    | "ground_update"
    | "results_update"
    | "error";
  session: string;
  idx: number;
  payload: unknown;
  message?: string;
}

export function parseServerMessage(raw: string): ServerMessage | null {
  try {
    const value = JSON.parse(raw);
    if (value && typeof value.type === "string") {
      return value as ServerMessage;
    }
  } catch {
    // fall through: unparsable frames are dropped, not fatal
  }
  return null;
}
