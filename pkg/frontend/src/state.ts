// Pure view-state transitions, kept free of DOM and network so they can be
// unit-tested directly. The view renders whatever this state says.

import type { Attachment, MedicalRecordDoc, MessageReply, Phase } from "./types.js";

export interface ChatMessage {
  role: "patient" | "system";
  text: string;
  turn: number;
  attachments: Attachment[];
}

export interface ChatViewState {
  sessionId: string | null;
  phase: Phase | null;
  locale: string;
  messages: ChatMessage[];
  askedSymptom: string | null;
  candidatesCount: number | null;
  starting: boolean;
  busy: boolean;
  error: string | null;
  recordOpen: boolean;
  record: MedicalRecordDoc | null;
  recordBytes: Uint8Array | null;
}

export function initialState(locale = "en"): ChatViewState {
  return {
    sessionId: null,
    phase: null,
    locale,
    messages: [],
    askedSymptom: null,
    candidatesCount: null,
    starting: false,
    busy: false,
    error: null,
    recordOpen: false,
    record: null,
    recordBytes: null,
  };
}

export function startPending(state: ChatViewState): ChatViewState {
  return { ...state, starting: true, error: null };
}

export function startSucceeded(
  state: ChatViewState,
  sessionId: string,
  phase: Phase
): ChatViewState {
  return {
    ...initialState(state.locale),
    sessionId,
    phase,
  };
}

export function startFailed(state: ChatViewState, message: string): ChatViewState {
  // No session id may be kept when creation failed.
  return { ...state, starting: false, sessionId: null, error: message };
}

/** Optimistic echo of the patient's message; blocks further sends. */
export function sendPending(state: ChatViewState, text: string): ChatViewState {
  const message: ChatMessage = {
    role: "patient",
    text,
    turn: state.messages.length,
    attachments: [],
  };
  return {
    ...state,
    busy: true,
    error: null,
    askedSymptom: null,
    messages: [...state.messages, message],
  };
}

export function replyReceived(state: ChatViewState, reply: MessageReply): ChatViewState {
  const message: ChatMessage = {
    role: "system",
    text: reply.reply.text,
    turn: reply.reply.turn,
    attachments: reply.reply.attachments,
  };
  return {
    ...state,
    busy: false,
    phase: reply.phase,
    candidatesCount: reply.candidates_count,
    askedSymptom: reply.asked_symptom ?? null,
    messages: [...state.messages, message],
  };
}

export function sendFailed(state: ChatViewState, message: string): ChatViewState {
  // Roll back the optimistic echo so the transcript mirrors the server.
  return {
    ...state,
    busy: false,
    error: message,
    messages: state.messages.slice(0, -1),
  };
}

export function recordLoaded(
  state: ChatViewState,
  document: MedicalRecordDoc,
  bytes: Uint8Array
): ChatViewState {
  return { ...state, record: document, recordBytes: bytes, recordOpen: true };
}

export function recordClosed(state: ChatViewState): ChatViewState {
  return { ...state, recordOpen: false };
}

// -- derived flags the view keys off --------------------------------------

export function canStart(state: ChatViewState): boolean {
  return !state.starting && state.sessionId === null;
}

export function canSend(state: ChatViewState): boolean {
  return (
    state.sessionId !== null &&
    !state.busy &&
    state.phase !== null &&
    state.phase !== "Closed"
  );
}

/** Quick replies appear iff the last reply asked about a symptom. */
export function quickRepliesVisible(state: ChatViewState): boolean {
  return state.askedSymptom !== null && canSend(state);
}

export function recordAvailable(state: ChatViewState): boolean {
  return state.phase === "Closed";
}

/** Localized one-tap answers for the polar symptom questions. */
export function quickReplyTokens(locale: string): { yes: string; no: string } {
  return locale === "zh" ? { yes: "有", no: "没有" } : { yes: "yes", no: "no" };
}
