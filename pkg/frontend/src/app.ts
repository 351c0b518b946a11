// Controller: wires the API client, the pure state module, and the view.
// Exported as a class so tests can drive it against a real or fake fetch.

import { ApiClient, ApiError } from "./api.js";
import type { ChatViewState } from "./state.js";
import {
  canSend,
  canStart,
  initialState,
  recordClosed,
  recordLoaded,
  replyReceived,
  sendFailed,
  sendPending,
  startFailed,
  startPending,
  startSucceeded,
} from "./state.js";
import { render, type Handlers } from "./view.js";

export class ChatApp {
  state: ChatViewState;
  private saveBlob: (bytes: Uint8Array, filename: string) => void;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    options?: { saveBlob?: (bytes: Uint8Array, filename: string) => void }
  ) {
    this.state = initialState();
    this.saveBlob = options?.saveBlob ?? defaultSaveBlob;
  }

  async init(): Promise<void> {
    try {
      const health = await this.api.health();
      this.state = initialState(health.locale);
    } catch {
      this.state = { ...initialState(), error: "service unreachable" };
    }
    this.render();
  }

  private render(): void {
    const handlers: Handlers = {
      onStart: () => void this.start(),
      onSend: (text) => void this.send(text),
      onQuickReply: (token) => void this.send(token),
      onToggleRecord: () => void this.toggleRecord(),
      onDownloadRecord: () => this.download(),
    };
    render(this.root, this.state, handlers);
  }

  async start(): Promise<void> {
    if (!canStart(this.state)) return; // double-clicks create no second session
    this.state = startPending(this.state);
    this.render();
    try {
      const handle = await this.api.createSession();
      this.state = startSucceeded(this.state, handle.session_id, handle.phase);
    } catch (error) {
      this.state = startFailed(this.state, describe(error));
    }
    this.render();
  }

  async send(text: string): Promise<void> {
    if (!canSend(this.state) || !text.trim()) return;
    const sessionId = this.state.sessionId!;
    this.state = sendPending(this.state, text);
    this.render();
    try {
      const reply = await this.api.sendMessage(sessionId, text);
      this.state = replyReceived(this.state, reply);
    } catch (error) {
      if (error instanceof ApiError && error.code === "session_closed") {
        this.state = { ...sendFailed(this.state, error.message), phase: "Closed" };
      } else {
        this.state = sendFailed(this.state, describe(error));
      }
    }
    this.render();
  }

  async toggleRecord(): Promise<void> {
    if (this.state.recordOpen) {
      this.state = recordClosed(this.state);
      this.render();
      return;
    }
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    try {
      const { document, bytes } = await this.api.getRecord(sessionId);
      this.state = recordLoaded(this.state, document, bytes);
    } catch (error) {
      this.state = { ...this.state, error: describe(error) };
    }
    this.render();
  }

  download(): void {
    // Pass-through of the exact server bytes, so the file always equals the
    // GET /record response.
    if (!this.state.recordBytes || !this.state.sessionId) return;
    this.saveBlob(this.state.recordBytes, `record-${this.state.sessionId}.json`);
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.code}: ${error.message}`;
  if (error instanceof Error) return error.message;
  return String(error);
}

function defaultSaveBlob(bytes: Uint8Array, filename: string): void {
  // Copy onto a plain ArrayBuffer so the value satisfies BlobPart.
  const blob = new Blob([new Uint8Array(bytes)], { type: "application/json" });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}
