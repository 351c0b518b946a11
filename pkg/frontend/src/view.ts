// DOM rendering. The whole view re-renders from state on every change; the
// document stays small (one consultation), so diffing isn't worth the code.

import type { ChatViewState } from "./state.js";
import {
  canSend,
  canStart,
  quickRepliesVisible,
  quickReplyTokens,
  recordAvailable,
} from "./state.js";

export interface Handlers {
  onStart(): void;
  onSend(text: string): void;
  onQuickReply(token: string): void;
  onToggleRecord(): void;
  onDownloadRecord(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function render(root: HTMLElement, state: ChatViewState, handlers: Handlers): void {
  root.textContent = "";

  const header = el("header", "header");
  header.appendChild(el("h1", "title", "medconsult"));
  const badge = el("span", `phase-badge phase-${state.phase ?? "none"}`);
  badge.dataset.testid = "phase-badge";
  badge.textContent = state.phase ?? "not started";
  header.appendChild(badge);
  root.appendChild(header);

  if (state.error) {
    const banner = el("div", "error-banner");
    banner.dataset.testid = "error-banner";
    banner.appendChild(el("span", undefined, state.error));
    const retry = el("button", "retry", "retry");
    retry.onclick = () => handlers.onStart();
    if (state.sessionId === null) banner.appendChild(retry);
    root.appendChild(banner);
  }

  const messages = el("div", "messages");
  messages.dataset.testid = "messages";
  for (const message of state.messages) {
    const bubble = el("div", `bubble ${message.role}`);
    bubble.appendChild(el("p", "text", message.text));
    if (message.attachments.length > 0) {
      const cards = el("div", "drug-cards");
      for (const attachment of message.attachments) {
        const card = el("figure", "drug-card");
        card.dataset.testid = "drug-card";
        const img = el("img");
        img.src = attachment.url;
        img.alt = attachment.drug_name;
        card.appendChild(img);
        card.appendChild(el("figcaption", "drug-name", attachment.drug_name));
        cards.appendChild(card);
      }
      bubble.appendChild(cards);
    }
    messages.appendChild(bubble);
  }
  if (state.busy) {
    messages.appendChild(el("div", "bubble system pending", "..."));
  }
  root.appendChild(messages);

  if (quickRepliesVisible(state)) {
    const tokens = quickReplyTokens(state.locale);
    const quick = el("div", "quick-replies");
    quick.dataset.testid = "quick-replies";
    for (const token of [tokens.yes, tokens.no]) {
      const button = el("button", "quick-reply", token);
      button.onclick = () => handlers.onQuickReply(token);
      quick.appendChild(button);
    }
    root.appendChild(quick);
  }

  const composer = el("div", "composer");
  if (state.sessionId === null) {
    const start = el("button", "start", "start consultation");
    start.dataset.testid = "start-button";
    start.disabled = !canStart(state);
    start.onclick = () => handlers.onStart();
    composer.appendChild(start);
  } else {
    const input = el("input");
    input.dataset.testid = "composer-input";
    input.type = "text";
    input.placeholder =
      state.phase === "Closed" ? "consultation closed" : "describe your symptoms";
    input.disabled = !canSend(state);
    const send = el("button", "send", "send");
    send.dataset.testid = "send-button";
    send.disabled = !canSend(state);
    const submit = () => {
      const text = input.value.trim();
      if (!text) return; // empty input never reaches the server
      input.value = "";
      handlers.onSend(text);
    };
    send.onclick = submit;
    input.onkeydown = (event) => {
      if (event.key === "Enter") submit();
    };
    composer.appendChild(input);
    composer.appendChild(send);

    const record = el("button", "record-toggle", "medical record");
    record.dataset.testid = "record-button";
    record.disabled = !recordAvailable(state);
    record.title = recordAvailable(state)
      ? "view the medical record"
      : "available when the consultation closes";
    if (recordAvailable(state)) record.classList.add("highlight");
    record.onclick = () => handlers.onToggleRecord();
    composer.appendChild(record);
  }
  root.appendChild(composer);

  if (state.recordOpen && state.record) {
    const panel = el("section", "record-panel");
    panel.dataset.testid = "record-panel";
    panel.appendChild(el("h2", undefined, "medical record"));
    const fields: Array<[string, string]> = [
      ["department", state.record.department],
      ["chief complaint", state.record.chief_complaint],
      ["confirmed symptoms", state.record.confirmed_symptoms.join(", ") || "none"],
      ["denied symptoms", state.record.denied_symptoms.join(", ") || "none"],
      ["disease", state.record.disease],
      ["examinations", state.record.examinations.join(", ") || "none"],
      ["drugs", state.record.drugs.join(", ") || "none"],
    ];
    const list = el("dl", "record-fields");
    for (const [label, value] of fields) {
      list.appendChild(el("dt", undefined, label));
      const dd = el("dd", undefined, value);
      dd.dataset.field = label.replace(/ /g, "-");
      list.appendChild(dd);
    }
    panel.appendChild(list);
    panel.appendChild(el("p", "narrative", state.record.narrative));
    const download = el("button", "download", "download JSON");
    download.dataset.testid = "download-button";
    download.onclick = () => handlers.onDownloadRecord();
    panel.appendChild(download);
    root.appendChild(panel);
  }
}
