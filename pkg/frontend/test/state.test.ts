import { describe, expect, it } from "vitest";

import {
  canSend,
  canStart,
  initialState,
  quickRepliesVisible,
  quickReplyTokens,
  recordAvailable,
  replyReceived,
  sendFailed,
  sendPending,
  startFailed,
  startPending,
  startSucceeded,
} from "../src/state.js";
import type { MessageReply } from "../src/types.js";

function reply(overrides: Partial<MessageReply> = {}): MessageReply {
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
    ...overrides,
  };
}

describe("session start", () => {
  it("blocks double start while pending", () => {
    let state = initialState();
    expect(canStart(state)).toBe(true);
    state = startPending(state);
    expect(canStart(state)).toBe(false);
  });

  it("keeps no session id on failure", () => {
    let state = startPending(initialState());
    state = startFailed(state, "connect refused");
    expect(state.sessionId).toBeNull();
    expect(state.error).toContain("connect refused");
    expect(canStart(state)).toBe(true);
  });

  it("binds the session and shows Elicitation", () => {
    const state = startSucceeded(startPending(initialState()), "sess-1", "Elicitation");
    expect(state.sessionId).toBe("sess-1");
    expect(state.phase).toBe("Elicitation");
    expect(state.messages).toHaveLength(0);
  });
});

describe("messaging", () => {
  const started = startSucceeded(initialState(), "sess-1", "Elicitation");

  it("echoes optimistically and enforces one in-flight message", () => {
    const state = sendPending(started, "I feel sick in my stomach");
    expect(state.messages.at(-1)).toMatchObject({ role: "patient", turn: 0 });
    expect(canSend(state)).toBe(false);
  });

  it("appends the server reply in turn order", () => {
    let state = sendPending(started, "I feel sick in my stomach");
    state = replyReceived(state, reply());
    expect(state.messages.map((m) => m.turn)).toEqual([0, 1]);
    expect(state.candidatesCount).toBe(3);
    expect(canSend(state)).toBe(true);
  });

  it("message count is twice the completed turns", () => {
    let state = started;
    for (let turn = 0; turn < 3; turn++) {
      state = sendPending(state, `msg ${turn}`);
      state = replyReceived(
        state,
        reply({
          reply: {
            speaker: "System",
            text: "ok",
            turn: state.messages.length,
            attachments: [],
            fallback: false,
          },
        })
      );
    }
    expect(state.messages).toHaveLength(6);
  });

  it("rolls the echo back when the request fails", () => {
    let state = sendPending(started, "hello");
    state = sendFailed(state, "boom");
    expect(state.messages).toHaveLength(0);
    expect(state.error).toBe("boom");
  });

  it("disables input once closed", () => {
    let state = sendPending(started, "thanks");
    state = replyReceived(
      state,
      reply({ phase: "Closed", asked_symptom: undefined })
    );
    expect(canSend(state)).toBe(false);
    expect(recordAvailable(state)).toBe(true);
  });
});

describe("quick replies", () => {
  const started = startSucceeded(initialState(), "sess-1", "Elicitation");

  it("appear iff the last reply carries asked_symptom", () => {
    let state = replyReceived(sendPending(started, "hi"), reply());
    expect(quickRepliesVisible(state)).toBe(true);

    state = replyReceived(
      sendPending(state, "no"),
      reply({ phase: "Examination", asked_symptom: undefined })
    );
    expect(quickRepliesVisible(state)).toBe(false);
  });

  it("localize with the served template table", () => {
    expect(quickReplyTokens("en")).toEqual({ yes: "yes", no: "no" });
    expect(quickReplyTokens("zh")).toEqual({ yes: "有", no: "没有" });
  });
});
