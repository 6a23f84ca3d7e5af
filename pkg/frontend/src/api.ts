/**
 * Thin client for the play service.
 *
 * All network primitives are injectable so the same code runs in a real
 * browser (global fetch / WebSocket) and under tests (node fetch, the
 * `ws` package). The client holds no play state; see state.ts for that.
 */

import type {
  AdvanceResult,
  CreateSessionOptions,
  EventFrame,
  InterviewResult,
  SessionDetail,
  SessionOverview,
  SpeakResult,
  StreamFrame,
} from "./types.js";
import { isEndFrame, isErrorFrame } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** The subset of the WebSocket interface the stream needs. */
export interface WebSocketLike {
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: ((event: unknown) => void) | null;
  onerror: ((event: unknown) => void) | null;
  close(): void;
}

export type WebSocketCtor = new (url: string) => WebSocketLike;

/** A non-2xx response, decoded from the service's problem body. */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
  }
}

export interface StreamHandlers {
  onFrame: (frame: EventFrame) => void;
  /** Called with the next sequence to read once a finished play drains. */
  onEnd?: (nextSequence: number) => void;
  onError?: (code: string, message: string) => void;
  onClose?: () => void;
}

export interface StreamHandle {
  close(): void;
}

export interface ConsoleClientOptions {
  baseUrl?: string;
  fetchImpl?: FetchLike;
  wsCtor?: WebSocketCtor;
}

export class ConsoleClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;
  private readonly wsCtor: WebSocketCtor | null;

  constructor(options: ConsoleClientOptions = {}) {
    this.baseUrl = (options.baseUrl ?? "").replace(/\/$/, "");
    const fallbackFetch =
      typeof fetch !== "undefined" ? fetch.bind(globalThis) : null;
    const impl = options.fetchImpl ?? fallbackFetch;
    if (!impl) throw new Error("no fetch implementation available");
    this.fetchImpl = impl;
    const globalWs = (globalThis as { WebSocket?: WebSocketCtor }).WebSocket;
    this.wsCtor = options.wsCtor ?? globalWs ?? null;
  }

  async listSessions(): Promise<SessionOverview[]> {
    const body = await this.request<{ sessions: SessionOverview[] }>(
      "GET",
      "/api/sessions",
    );
    return body.sessions;
  }

  createSession(options: CreateSessionOptions = {}): Promise<SessionDetail> {
    return this.request("POST", "/api/sessions", options);
  }

  getSession(sessionId: string): Promise<SessionDetail> {
    return this.request("GET", `/api/sessions/${sessionId}`);
  }

  advance(sessionId: string, ticks = 1): Promise<AdvanceResult> {
    return this.request("POST", `/api/sessions/${sessionId}/advance`, { ticks });
  }

  speak(sessionId: string, actId: string, text: string): Promise<SpeakResult> {
    return this.request("POST", `/api/sessions/${sessionId}/speak`, {
      act_id: actId,
      text,
    });
  }

  pause(sessionId: string): Promise<{ status: string }> {
    return this.request("POST", `/api/sessions/${sessionId}/pause`);
  }

  resume(sessionId: string): Promise<{ status: string }> {
    return this.request("POST", `/api/sessions/${sessionId}/resume`);
  }

  interview(
    sessionId: string,
    actId: string,
    role: string,
    question: string,
  ): Promise<InterviewResult> {
    return this.request("POST", `/api/sessions/${sessionId}/interview`, {
      act_id: actId,
      role,
      question,
    });
  }

  events(sessionId: string, fromSequence = 0): Promise<EventFrame[]> {
    return this.request<{ events: EventFrame[] }>(
      "GET",
      `/api/sessions/${sessionId}/events?from_sequence=${fromSequence}`,
    ).then((body) => body.events);
  }

  /** Raw export body, byte-for-byte what the service sent. */
  async exportText(sessionId: string): Promise<string> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/api/sessions/${sessionId}/export`,
    );
    const text = await response.text();
    if (!response.ok) throw decodeProblem(response.status, text);
    return text;
  }

  /**
   * Subscribe to the event stream starting at `fromSequence` (inclusive;
   * pass lastSeen + 1 to resume). Frames arrive in sequence order.
   */
  stream(
    sessionId: string,
    fromSequence: number,
    handlers: StreamHandlers,
  ): StreamHandle {
    if (!this.wsCtor) throw new Error("no WebSocket implementation available");
    const wsBase = this.baseUrl
      ? this.baseUrl.replace(/^http/, "ws")
      : defaultWsBase();
    const url =
      `${wsBase}/api/sessions/${sessionId}/stream` +
      `?from_sequence=${fromSequence}`;
    const socket = new this.wsCtor(url);
    socket.onmessage = (event) => {
      let frame: StreamFrame;
      try {
        frame = JSON.parse(String(event.data)) as StreamFrame;
      } catch {
        return;
      }
      if (isEndFrame(frame)) handlers.onEnd?.(frame.sequence);
      else if (isErrorFrame(frame)) handlers.onError?.(frame.code, frame.message);
      else handlers.onFrame(frame);
    };
    socket.onerror = () => handlers.onError?.("connection", "stream error");
    socket.onclose = () => handlers.onClose?.();
    return {
      close() {
        socket.onmessage = null;
        socket.onclose = null;
        socket.onerror = null;
        socket.close();
      },
    };
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const text = await response.text();
    if (!response.ok) throw decodeProblem(response.status, text);
    return JSON.parse(text) as T;
  }
}

function decodeProblem(status: number, text: string): ApiError {
  try {
    const body = JSON.parse(text) as { code?: string; message?: string };
    return new ApiError(status, body.code ?? "unknown", body.message ?? text);
  } catch {
    return new ApiError(status, "unknown", text);
  }
}

function defaultWsBase(): string {
  const loc = (globalThis as { location?: Location }).location;
  if (!loc) throw new Error("relative websocket URL needs a browser location");
  const scheme = loc.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${loc.host}`;
}
