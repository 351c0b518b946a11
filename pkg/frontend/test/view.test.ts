// @vitest-environment jsdom
import { beforeEach, describe, expect, it, vi } from "vitest";

import {
  initialState,
  replyReceived,
  sendPending,
  startSucceeded,
  recordLoaded,
} from "../src/state.js";
import type { ChatViewState } from "../src/state.js";
import { render, type Handlers } from "../src/view.js";
import type { MessageReply } from "../src/types.js";

function handlers(): Handlers {
  return {
    onStart: vi.fn(),
    onSend: vi.fn(),
    onQuickReply: vi.fn(),
    onToggleRecord: vi.fn(),
    onDownloadRecord: vi.fn(),
  };
}

function askReply(): MessageReply {
  return {
    reply: {
      speaker: "System",
      text: "Do you also have melena? Please answer yes or no.",
      turn: 1,
      attachments: [],
      fallback: false,
    },
    phase: "Elicitation",
    candidates_count: 3,
    asked_symptom: "melena",
  };
}

function drugReply(): MessageReply {
  return {
    reply: {
      speaker: "System",
      text: "For gastritis, commonly used over-the-counter options include ...",
      turn: 5,
      attachments: [
        {
          drug: "omeprazole",
          drug_name: "omeprazole",
          image_uri: "assets/omeprazole.png",
          ref: "aaaa",
          url: "/v1/images/aaaa",
        },
        {
          drug: "hydrotalcite",
          drug_name: "hydrotalcite",
          image_uri: "https://img.example.org/drugs/hydrotalcite.png",
          ref: "bbbb",
          url: "/v1/images/bbbb",
        },
      ],
      fallback: false,
    },
    phase: "DrugRecommendation",
    candidates_count: 1,
  };
}

describe("view rendering", () => {
  let root: HTMLElement;
  beforeEach(() => {
    document.body.innerHTML = '<main id="app"></main>';
    root = document.getElementById("app")!;
  });

  const started = (): ChatViewState =>
    startSucceeded(initialState(), "sess-1", "Elicitation");

  it("renders yes/no quick replies when a symptom question arrives", () => {
    const state = replyReceived(sendPending(started(), "hi"), askReply());
    const h = handlers();
    render(root, state, h);
    const buttons = root.querySelectorAll('[data-testid="quick-replies"] button');
    expect([...buttons].map((b) => b.textContent)).toEqual(["yes", "no"]);
    (buttons[1] as HTMLButtonElement).click();
    expect(h.onQuickReply).toHaveBeenCalledWith("no");
  });

  it("renders no quick replies without asked_symptom", () => {
    const state = replyReceived(sendPending(started(), "ok"), {
      ...askReply(),
      asked_symptom: undefined,
      phase: "Examination",
    });
    render(root, state, handlers());
    expect(root.querySelector('[data-testid="quick-replies"]')).toBeNull();
  });

  it("renders one drug card per attachment with the image route", () => {
    const state = replyReceived(sendPending(started(), "drugs please"), drugReply());
    render(root, state, handlers());
    const cards = root.querySelectorAll('[data-testid="drug-card"]');
    expect(cards).toHaveLength(2);
    const images = [...root.querySelectorAll<HTMLImageElement>(".drug-card img")];
    expect(images.map((img) => img.getAttribute("src"))).toEqual([
      "/v1/images/aaaa",
      "/v1/images/bbbb",
    ]);
    expect(root.textContent).toContain("hydrotalcite");
  });

  it("blocks empty input client-side", () => {
    const state = started();
    const h = handlers();
    render(root, state, h);
    const input = root.querySelector<HTMLInputElement>('[data-testid="composer-input"]')!;
    const send = root.querySelector<HTMLButtonElement>('[data-testid="send-button"]')!;
    input.value = "   ";
    send.click();
    expect(h.onSend).not.toHaveBeenCalled();
    input.value = "real message";
    send.click();
    expect(h.onSend).toHaveBeenCalledWith("real message");
  });

  it("disables the start button while a session is being created", () => {
    const state = { ...initialState(), starting: true };
    render(root, state, handlers());
    const button = root.querySelector<HTMLButtonElement>('[data-testid="start-button"]')!;
    expect(button.disabled).toBe(true);
  });

  it("disables the record button until the session closes", () => {
    let state = started();
    const h = handlers();
    render(root, state, h);
    let button = root.querySelector<HTMLButtonElement>('[data-testid="record-button"]')!;
    expect(button.disabled).toBe(true);

    state = replyReceived(sendPending(state, "thanks"), {
      ...askReply(),
      asked_symptom: undefined,
      phase: "Closed",
    });
    render(root, state, h);
    button = root.querySelector<HTMLButtonElement>('[data-testid="record-button"]')!;
    expect(button.disabled).toBe(false);
    expect(button.classList.contains("highlight")).toBe(true);
  });

  it("shows the record fields and phase badge", () => {
    let state = replyReceived(sendPending(started(), "thanks"), {
      ...askReply(),
      asked_symptom: undefined,
      phase: "Closed",
    });
    state = recordLoaded(
      state,
      {
        session_id: "sess-1",
        department: "gastroenterology",
        chief_complaint: "I feel sick in my stomach",
        confirmed_symptoms: ["gassralgia"],
        denied_symptoms: ["melena"],
        disease: "gastritis",
        examinations: ["gastroscopy"],
        drugs: ["omeprazole"],
        narrative: "narrative text",
      },
      new Uint8Array([123, 125])
    );
    render(root, state, handlers());
    expect(root.querySelector('[data-testid="phase-badge"]')!.textContent).toBe("Closed");
    const panel = root.querySelector('[data-testid="record-panel"]')!;
    expect(panel.textContent).toContain("gastritis");
    expect(panel.textContent).toContain("gastroenterology");
    expect(panel.querySelector('[data-field="confirmed-symptoms"]')!.textContent).toBe(
      "gassralgia"
    );
  });
});
