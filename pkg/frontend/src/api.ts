// Thin typed client over the /v1 API. All medical content comes from here;
// the UI itself never reasons about symptoms or diseases.

import type {
  Health,
  MedicalRecordDoc,
  MessageReply,
  SessionHandle,
  SessionView,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public code: string,
    message: string,
    public status: number
  ) {
    super(message);
  }
}

async function throwFrom(response: Response): Promise<never> {
  let code = "internal";
  let message = `request failed with status ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body.code === "string") code = body.code;
    if (body && typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body; keep the generic message
  }
  throw new ApiError(code, message, response.status);
}

export class ApiClient {
  constructor(private base: string = "") {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.base + path, init);
    if (!response.ok) await throwFrom(response);
    return (await response.json()) as T;
  }

  health(): Promise<Health> {
    return this.json<Health>("/v1/health");
  }

  createSession(seed?: number): Promise<SessionHandle> {
    return this.json<SessionHandle>("/v1/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(seed === undefined ? {} : { seed }),
    });
  }

  sendMessage(sessionId: string, text: string): Promise<MessageReply> {
    return this.json<MessageReply>(`/v1/sessions/${sessionId}/messages`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.json<SessionView>(`/v1/sessions/${sessionId}`);
  }

  /** Record document plus the exact response bytes (the download must be
   *  byte-identical to GET /record). */
  async getRecord(
    sessionId: string
  ): Promise<{ document: MedicalRecordDoc; bytes: Uint8Array }> {
    const response = await fetch(`${this.base}/v1/sessions/${sessionId}/record`);
    if (!response.ok) await throwFrom(response);
    const buffer = new Uint8Array(await response.arrayBuffer());
    const document = JSON.parse(new TextDecoder().decode(buffer)) as MedicalRecordDoc;
    return { document, bytes: buffer };
  }
}
