/**
 * Wire types for the play service API.
 *
 * Everything here mirrors the JSON the Python service emits; field names
 * stay snake_case so payloads can be used without translation.
 */

/** Engine event kinds that can appear on the stream or in exports. */
export type EventKind =
  | "Planned"
  | "ActorResponse"
  | "PlayerAction"
  | "ForceComplete"
  | "ObjectiveAdvanced"
  | "StorylineRebuilt"
  | "ActComplete"
  | "ColumnAdvanced";

/** One engine event. `Planned` carries a narration line; `ActorResponse`
 * and `PlayerAction` carry spoken lines; the rest are plot bookkeeping. */
export interface EventFrame {
  sequence: number;
  tick: number;
  kind: EventKind;
  act_id: string;
  role: string;
  text: string;
  detail: string;
  objective_id: string;
}

/** Sent once by the websocket when a finished session is fully drained.
 * `sequence` is the next sequence a client would read. */
export interface StreamEndFrame {
  kind: "StreamEnd";
  sequence: number;
}

/** Sent by the websocket instead of events when the session id is unknown. */
export interface StreamErrorFrame {
  kind: "Error";
  code: string;
  message: string;
}

export type StreamFrame = EventFrame | StreamEndFrame | StreamErrorFrame;

export function isEndFrame(frame: StreamFrame): frame is StreamEndFrame {
  return frame.kind === "StreamEnd";
}

export function isErrorFrame(frame: StreamFrame): frame is StreamErrorFrame {
  return frame.kind === "Error";
}

export function isEventFrame(frame: StreamFrame): frame is EventFrame {
  return frame.kind !== "StreamEnd" && frame.kind !== "Error";
}

/** Error body every non-2xx API response carries. */
export interface ProblemBody {
  code: string;
  message: string;
}

export interface LogLine {
  role: string;
  text: string;
  tick: number;
}

export interface ActInfo {
  id: string;
  place: string;
  column: number;
  characters: string[];
  complete: boolean;
  objective_index: number;
  objective_count: number;
  turns_on_objective: number;
  pending_player: boolean;
  log: LogLine[];
}

export interface SessionOverview {
  session_id: string;
  title: string;
  status: "running" | "paused" | "finished";
  tick: number;
  column: number;
  events: number;
}

export interface SessionDetail extends SessionOverview {
  player_role: string;
  max_column: number;
  acts: ActInfo[];
}

export interface AdvanceResult {
  events: EventFrame[];
  status: string;
  tick: number;
}

export interface SpeakResult {
  queued: boolean;
  act_id: string;
}

export interface InterviewResult {
  act_id: string;
  role: string;
  question: string;
  answer: string;
  exchanges: number;
}

export interface CreateSessionOptions {
  seed?: number;
  check_policy?: string;
  config?: Record<string, unknown>;
}
