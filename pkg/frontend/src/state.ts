/**
 * Console view state and the pure reducer that folds event frames into it.
 *
 * The console keeps no play logic of its own: every transcript entry is a
 * deterministic function of the frames applied, so re-streaming from
 * sequence 0 rebuilds the identical view. Interview exchanges live in a
 * separate area and never enter the act transcripts.
 */

import type { ActInfo, EventFrame, SessionDetail } from "./types.js";

/** Turns allowed on one objective before the engine forces completion. */
export const FORCE_LIMIT = 9;

/** Divider text shown when the director rebuilds the storyline. */
export const REBUILD_DIVIDER = "the director adjusts the plot";

export interface LineEntry {
  kind: "line";
  role: string;
  text: string;
  tick: number;
}

export interface DividerEntry {
  kind: "divider";
  text: string;
}

export interface NoteEntry {
  kind: "note";
  text: string;
}

export type TranscriptEntry = LineEntry | DividerEntry | NoteEntry;

export interface ActPane {
  id: string;
  place: string;
  column: number;
  characters: string[];
  complete: boolean;
  objectiveIndex: number;
  objectiveCount: number;
  /** Turns spent on the current objective, clamped to FORCE_LIMIT. */
  gauge: number;
  entries: TranscriptEntry[];
}

export interface InterviewExchange {
  role: string;
  question: string;
  answer: string;
}

export interface ViewState {
  sessionId: string;
  title: string;
  playerRole: string;
  status: "idle" | "running" | "paused" | "finished";
  tick: number;
  column: number;
  /** Highest applied frame sequence; -1 before the first frame. */
  lastSequence: number;
  /** True when a frame arrived out of order; the view needs a re-stream. */
  gap: boolean;
  connection: "idle" | "live" | "closed" | "error";
  actOrder: string[];
  acts: Record<string, ActPane>;
  activeActId: string | null;
  notice: string | null;
  interview: InterviewExchange[];
}

export function initialView(): ViewState {
  return {
    sessionId: "",
    title: "",
    playerRole: "",
    status: "idle",
    tick: 0,
    column: 0,
    lastSequence: -1,
    gap: false,
    connection: "idle",
    actOrder: [],
    acts: {},
    activeActId: null,
    notice: null,
    interview: [],
  };
}

function paneFromInfo(info: ActInfo): ActPane {
  return {
    id: info.id,
    place: info.place,
    column: info.column,
    characters: info.characters.slice(),
    complete: info.complete,
    objectiveIndex: info.objective_index,
    objectiveCount: info.objective_count,
    gauge: Math.min(FORCE_LIMIT, info.turns_on_objective),
    entries: [],
  };
}

/**
 * Fold session metadata into the view. Transcript entries are left alone;
 * they come only from frames, so a detail refresh never duplicates lines.
 */
export function applyDetail(view: ViewState, detail: SessionDetail): ViewState {
  const acts: Record<string, ActPane> = { ...view.acts };
  const actOrder = view.actOrder.slice();
  for (const info of detail.acts) {
    const existing = acts[info.id];
    if (existing) {
      acts[info.id] = {
        ...existing,
        place: info.place,
        column: info.column,
        characters: info.characters.slice(),
      };
    } else {
      acts[info.id] = paneFromInfo(info);
      actOrder.push(info.id);
    }
  }
  return {
    ...view,
    sessionId: detail.session_id,
    title: detail.title,
    playerRole: detail.player_role,
    status: detail.status,
    tick: detail.tick,
    column: detail.column,
    actOrder,
    acts,
  };
}

function blankPane(actId: string): ActPane {
  return {
    id: actId,
    place: "",
    column: 0,
    characters: [],
    complete: false,
    objectiveIndex: 0,
    objectiveCount: 0,
    gauge: 0,
    entries: [],
  };
}

function withPane(
  view: ViewState,
  actId: string,
  update: (pane: ActPane) => ActPane,
): ViewState {
  const pane = view.acts[actId] ?? blankPane(actId);
  const known = actId in view.acts;
  return {
    ...view,
    actOrder: known ? view.actOrder : [...view.actOrder, actId],
    acts: { ...view.acts, [actId]: update(pane) },
  };
}

function appendEntry(pane: ActPane, entry: TranscriptEntry): ActPane {
  return { ...pane, entries: [...pane.entries, entry] };
}

/**
 * Apply one frame. Frames at or below lastSequence are ignored (replay
 * overlap); a skipped sequence marks the view as gapped rather than
 * rendering a transcript with holes.
 */
export function applyFrame(view: ViewState, frame: EventFrame): ViewState {
  if (frame.sequence <= view.lastSequence) return view;
  if (view.lastSequence >= 0 && frame.sequence !== view.lastSequence + 1) {
    return { ...view, gap: true, notice: "event stream gap; reconnect" };
  }
  const next = dispatchFrame(view, frame);
  return { ...next, lastSequence: frame.sequence, tick: frame.tick };
}

function dispatchFrame(view: ViewState, frame: EventFrame): ViewState {
  switch (frame.kind) {
    case "Planned":
    case "ActorResponse":
    case "PlayerAction":
      return withPane(view, frame.act_id, (pane) =>
        appendEntry(
          {
            ...pane,
            gauge: Math.min(FORCE_LIMIT, pane.gauge + 1),
          },
          { kind: "line", role: frame.role, text: frame.text, tick: frame.tick },
        ),
      );
    case "StorylineRebuilt":
      return withPane(view, frame.act_id, (pane) =>
        appendEntry(pane, { kind: "divider", text: REBUILD_DIVIDER }),
      );
    case "ForceComplete":
      return withPane(view, frame.act_id, (pane) =>
        appendEntry(pane, {
          kind: "note",
          text: "the director forces the plot onward",
        }),
      );
    case "ObjectiveAdvanced":
      return withPane(view, frame.act_id, (pane) => ({
        ...pane,
        objectiveIndex: Math.min(pane.objectiveCount, pane.objectiveIndex + 1),
        gauge: 0,
      }));
    case "ActComplete":
      return withPane(view, frame.act_id, (pane) =>
        appendEntry({ ...pane, complete: true }, {
          kind: "note",
          text: "act complete",
        }),
      );
    case "ColumnAdvanced": {
      const match = /^column=(\d+)$/.exec(frame.detail);
      return match ? { ...view, column: Number(match[1]) } : view;
    }
    default:
      return view;
  }
}

export function applyFrames(
  view: ViewState,
  frames: readonly EventFrame[],
): ViewState {
  let current = view;
  for (const frame of frames) current = applyFrame(current, frame);
  return current;
}

export function enterAct(view: ViewState, actId: string): ViewState {
  if (!(actId in view.acts)) return view;
  return { ...view, activeActId: actId, notice: null };
}

export function setStatus(
  view: ViewState,
  status: ViewState["status"],
): ViewState {
  return { ...view, status };
}

export function setConnection(
  view: ViewState,
  connection: ViewState["connection"],
): ViewState {
  return { ...view, connection };
}

export function setNotice(view: ViewState, notice: string | null): ViewState {
  return { ...view, notice };
}

/** Pause bookkeeping; the interview area opens while paused. */
export function markPaused(view: ViewState): ViewState {
  return { ...view, status: "paused" };
}

/** Resume drops the interview exchanges: they are not part of the play. */
export function markResumed(view: ViewState): ViewState {
  return { ...view, status: "running", interview: [] };
}

export function recordInterview(
  view: ViewState,
  exchange: InterviewExchange,
): ViewState {
  return { ...view, interview: [...view.interview, exchange] };
}

/**
 * The transcript as plain data, for equality checks: a reloaded client
 * that re-streams from 0 must produce an identical value.
 */
export function transcriptOf(
  view: ViewState,
): { actId: string; entries: TranscriptEntry[] }[] {
  return view.actOrder.map((actId) => ({
    actId,
    entries: view.acts[actId].entries,
  }));
}
