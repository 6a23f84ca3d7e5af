/**
 * Console controller: owns the ViewState, drives the client, renders on
 * every change. The network client and the DOM root are injected, so the
 * same controller runs in the browser and under jsdom tests.
 */

import { ApiError, type ConsoleClient, type StreamHandle } from "./api.js";
import {
  applyDetail,
  applyFrame,
  applyFrames,
  enterAct,
  initialView,
  markPaused,
  markResumed,
  recordInterview,
  setConnection,
  setNotice,
  setStatus,
  type ViewState,
} from "./state.js";
import { mount, type ConsoleUi } from "./ui.js";

export interface ConsoleAppOptions {
  root: HTMLElement;
  client: ConsoleClient;
  /** Receives the raw export body whenever a download completes. */
  onExport?: (text: string, sessionId: string) => void;
}

export class ConsoleApp {
  private view: ViewState = initialView();
  private readonly ui: ConsoleUi;
  private readonly client: ConsoleClient;
  private readonly onExport: ((text: string, sessionId: string) => void) | null;
  private stream: StreamHandle | null = null;
  private pending: Promise<void> = Promise.resolve();
  private exported: string | null = null;

  constructor(options: ConsoleAppOptions) {
    this.client = options.client;
    this.onExport = options.onExport ?? null;
    this.ui = mount(options.root, {
      onEnterAct: (actId) => this.update(enterAct(this.view, actId)),
      onStep: () => this.track(() => this.step()),
      onPause: () => this.track(() => this.pause()),
      onResume: () => this.track(() => this.resume()),
      onDownload: () => this.track(() => this.download()),
      onSpeak: (text) => this.track(() => this.speak(text)),
      onAsk: (role, question) => this.track(() => this.ask(role, question)),
    });
    this.ui.render(this.view);
  }

  /** Current state, for tests and debugging; treat as read-only. */
  state(): ViewState {
    return this.view;
  }

  /** Last downloaded export body, byte-for-byte. */
  lastExport(): string | null {
    return this.exported;
  }

  /** Resolves once every user action started so far has settled. */
  idle(): Promise<void> {
    return this.pending;
  }

  async attach(sessionId: string): Promise<void> {
    const detail = await this.client.getSession(sessionId);
    this.update(applyDetail(this.view, detail));
    this.connect();
  }

  /** Re-subscribe from the next unseen sequence (or 0 on first attach). */
  connect(): void {
    this.stream?.close();
    const from = this.view.lastSequence + 1;
    this.update(setConnection(this.view, "live"));
    this.stream = this.client.stream(this.view.sessionId, from, {
      onFrame: (frame) => this.update(applyFrame(this.view, frame)),
      onEnd: () =>
        this.update(
          setConnection(setStatus(this.view, "finished"), "closed"),
        ),
      onError: (code, message) =>
        this.update(
          setNotice(setConnection(this.view, "error"), `${code}: ${message}`),
        ),
      onClose: () => {
        if (this.view.connection === "live") {
          this.update(setConnection(this.view, "closed"));
        }
      },
    });
  }

  detach(): void {
    this.stream?.close();
    this.stream = null;
    this.update(setConnection(this.view, "closed"));
  }

  private update(view: ViewState): void {
    this.view = view;
    this.ui.render(view);
  }

  private track(action: () => Promise<void>): void {
    this.pending = this.pending.then(action).catch((error) => {
      this.update(setNotice(this.view, describeError(error)));
    });
  }

  private async step(): Promise<void> {
    const result = await this.client.advance(this.view.sessionId, 1);
    // The stream delivers the same frames; the sequence guard dedupes.
    const next = applyFrames(this.view, result.events);
    this.update(
      setStatus({ ...next, tick: result.tick }, result.status as ViewState["status"]),
    );
  }

  private async speak(text: string): Promise<void> {
    const actId = this.view.activeActId;
    if (!actId) {
      this.update(setNotice(this.view, "enter an act first"));
      return;
    }
    try {
      await this.client.speak(this.view.sessionId, actId, text);
      this.update(setNotice(this.view, "line queued; step to deliver it"));
    } catch (error) {
      if (error instanceof ApiError && error.code === "cooldown") {
        this.update(setNotice(this.view, `cooldown: ${error.message}`));
        return;
      }
      throw error;
    }
  }

  private async pause(): Promise<void> {
    await this.client.pause(this.view.sessionId);
    this.update(markPaused(this.view));
  }

  private async resume(): Promise<void> {
    await this.client.resume(this.view.sessionId);
    this.update(markResumed(this.view));
  }

  private async ask(role: string, question: string): Promise<void> {
    const actId = this.view.activeActId ?? this.view.actOrder[0];
    if (!actId) return;
    const result = await this.client.interview(
      this.view.sessionId,
      actId,
      role,
      question,
    );
    this.update(
      recordInterview(this.view, {
        role: result.role,
        question: result.question,
        answer: result.answer,
      }),
    );
  }

  private async download(): Promise<void> {
    const text = await this.client.exportText(this.view.sessionId);
    this.exported = text;
    this.onExport?.(text, this.view.sessionId);
  }
}

function describeError(error: unknown): string {
  if (error instanceof ApiError) return `${error.code}: ${error.message}`;
  return error instanceof Error ? error.message : String(error);
}
