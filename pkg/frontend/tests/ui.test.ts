import { JSDOM } from "jsdom";
import { beforeEach, describe, expect, it } from "vitest";

import {
  applyDetail,
  applyFrame,
  applyFrames,
  enterAct,
  initialView,
  markPaused,
  recordInterview,
  setNotice,
  type ViewState,
} from "../src/state.js";
import type { EventFrame, SessionDetail } from "../src/types.js";
import { mount, type ConsoleUi, type UiHandlers } from "../src/ui.js";

const DETAIL: SessionDetail = {
  session_id: "play-abc",
  title: "Console Test",
  status: "running",
  tick: 0,
  column: 0,
  events: 0,
  player_role: "Visitor",
  max_column: 0,
  acts: [
    {
      id: "act-1",
      place: "The pier",
      column: 0,
      characters: ["Anna", "Berta", "Visitor"],
      complete: false,
      objective_index: 0,
      objective_count: 2,
      turns_on_objective: 0,
      pending_player: false,
      log: [],
    },
  ],
};

function frame(
  sequence: number,
  kind: EventFrame["kind"],
  overrides: Partial<EventFrame> = {},
): EventFrame {
  return {
    sequence,
    tick: sequence,
    kind,
    act_id: "act-1",
    role: "",
    text: "",
    detail: "",
    objective_id: "act-1/0",
    ...overrides,
  };
}

interface Recorded {
  entered: string[];
  steps: number;
  pauses: number;
  resumes: number;
  downloads: number;
  spoken: string[];
  asked: [string, string][];
}

function recorder(): { calls: Recorded; handlers: UiHandlers } {
  const calls: Recorded = {
    entered: [],
    steps: 0,
    pauses: 0,
    resumes: 0,
    downloads: 0,
    spoken: [],
    asked: [],
  };
  return {
    calls,
    handlers: {
      onEnterAct: (actId) => calls.entered.push(actId),
      onStep: () => (calls.steps += 1),
      onPause: () => (calls.pauses += 1),
      onResume: () => (calls.resumes += 1),
      onDownload: () => (calls.downloads += 1),
      onSpeak: (text) => calls.spoken.push(text),
      onAsk: (role, question) => calls.asked.push([role, question]),
    },
  };
}

describe("console ui", () => {
  let root: HTMLElement;
  let ui: ConsoleUi;
  let calls: Recorded;

  beforeEach(() => {
    const dom = new JSDOM('<!doctype html><div id="app"></div>');
    root = dom.window.document.getElementById("app") as HTMLElement;
    const recorded = recorder();
    calls = recorded.calls;
    ui = mount(root, recorded.handlers);
  });

  function baseView(): ViewState {
    return applyDetail(initialView(), DETAIL);
  }

  it("renders the rebuild divider verbatim", () => {
    const view = applyFrames(baseView(), [
      frame(0, "ActorResponse", { role: "Anna", text: "hello" }),
      frame(1, "StorylineRebuilt", { detail: "player" }),
    ]);
    ui.render(view);
    const divider = root.querySelector('[data-kind="divider"]');
    expect(divider).not.toBeNull();
    expect(divider?.textContent).toBe("the director adjusts the plot");
  });

  it("keeps the gauge at or below 9 no matter how many turns arrive", () => {
    let view = baseView();
    for (let i = 0; i < 15; i += 1) {
      view = applyFrame(view, frame(i, "ActorResponse", { role: "Anna", text: `t${i}` }));
      ui.render(view);
      const gauge = root.querySelector('[data-ui="gauge"]')?.textContent ?? "";
      const turns = Number(gauge.split("/")[0]);
      expect(turns).toBeLessThanOrEqual(9);
    }
    expect(root.querySelector('[data-ui="gauge"]')?.textContent).toBe("9/9");
  });

  it("shows objective progress as i/n", () => {
    const view = applyFrame(baseView(), frame(0, "ObjectiveAdvanced", {}));
    ui.render(view);
    expect(root.querySelector('[data-ui="objective"]')?.textContent).toBe(
      "objective 2/2",
    );
  });

  it("surfaces a cooldown notice without touching the transcript", () => {
    let view = applyFrame(baseView(), frame(0, "ActorResponse", { role: "Anna", text: "x" }));
    ui.render(view);
    const linesBefore = root.querySelectorAll('[data-kind="line"]').length;
    view = setNotice(view, "cooldown: the player just spoke");
    ui.render(view);
    const notice = root.querySelector('[data-ui="notice"]') as HTMLElement;
    expect(notice.hidden).toBe(false);
    expect(notice.textContent).toContain("cooldown");
    expect(root.querySelectorAll('[data-kind="line"]').length).toBe(linesBefore);
  });

  it("hides the interview panel unless paused and segregates exchanges", () => {
    let view = baseView();
    ui.render(view);
    const panel = root.querySelector('[data-ui="interview"]') as HTMLElement;
    expect(panel.hidden).toBe(true);

    view = recordInterview(markPaused(view), {
      role: "Anna",
      question: "why the pier?",
      answer: "the tide keeps secrets",
    });
    ui.render(view);
    expect(panel.hidden).toBe(false);
    const exchange = root.querySelector('[data-kind="interview"]');
    expect(exchange?.textContent).toContain("the tide keeps secrets");
    expect(root.querySelector('[data-act] [data-kind="interview"]')).toBeNull();
  });

  it("offers only non-player roles for interviews", () => {
    ui.render(markPaused(enterAct(baseView(), "act-1")));
    const options = Array.from(
      root.querySelectorAll('[data-ui="interview-role"] option'),
      (option) => (option as HTMLOptionElement).value,
    );
    expect(options).toEqual(["Anna", "Berta"]);
  });

  it("routes act header clicks to onEnterAct", () => {
    ui.render(baseView());
    const head = root.querySelector("[data-act-enter]") as HTMLElement;
    head.click();
    expect(calls.entered).toEqual(["act-1"]);
  });

  it("collects speak input, trims it, and clears the box", () => {
    ui.render(enterAct(baseView(), "act-1"));
    const input = root.querySelector('[data-ui="speak-input"]') as HTMLInputElement;
    const button = root.querySelector('[data-ui="speak"]') as HTMLElement;
    input.value = "  who goes there?  ";
    button.click();
    expect(calls.spoken).toEqual(["who goes there?"]);
    expect(input.value).toBe("");
    button.click();
    expect(calls.spoken).toHaveLength(1);
  });

  it("passes the selected role and question to onAsk", () => {
    ui.render(markPaused(enterAct(baseView(), "act-1")));
    const select = root.querySelector('[data-ui="interview-role"]') as HTMLSelectElement;
    const question = root.querySelector('[data-ui="interview-question"]') as HTMLInputElement;
    const ask = root.querySelector('[data-ui="ask"]') as HTMLElement;
    select.value = "Berta";
    question.value = "what did you see?";
    ask.click();
    expect(calls.asked).toEqual([["Berta", "what did you see?"]]);
    expect(question.value).toBe("");
  });

  it("disables controls that do not apply to the current status", () => {
    const running = enterAct(baseView(), "act-1");
    ui.render(running);
    const button = (name: string) =>
      root.querySelector(`[data-ui="${name}"]`) as HTMLButtonElement;
    expect(button("step").disabled).toBe(false);
    expect(button("resume").disabled).toBe(true);
    expect(button("speak").disabled).toBe(false);

    ui.render(markPaused(running));
    expect(button("step").disabled).toBe(true);
    expect(button("pause").disabled).toBe(true);
    expect(button("resume").disabled).toBe(false);

    ui.render(baseView());
    expect(button("speak").disabled).toBe(true);
  });
});
