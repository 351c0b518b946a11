// @vitest-environment jsdom
//
// Full contract test against a real fixture-backed server: spawns the Python
// service, drives the consultation flow through the actual app controller and
// DOM, and checks the record download is byte-identical to GET /record.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ChatApp } from "../src/app.js";
import { quickRepliesVisible } from "../src/state.js";

const PORT = 8900 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;
const SCRIPT = ["I feel sick in my stomach", "no", "drugs please", "thanks"];

let server: ChildProcess;

async function waitForHealth(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/v1/health`);
      if (response.ok) return;
    } catch (error) {
      lastError = error;
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error(`service never became healthy on ${BASE}: ${lastError}`);
}

beforeAll(async () => {
  const store = mkdtempSync(join(tmpdir(), "medconsult-ui-"));
  server = spawn(
    "python3",
    ["-m", "medconsult.cli", "serve", "--store", store, "--listen", `127.0.0.1:${PORT}`],
    { stdio: "ignore" }
  );
  await waitForHealth();
}, 45_000);

afterAll(() => {
  server?.kill("SIGTERM");
});

describe("figure-flow against the live service", () => {
  it("completes the consultation with quick replies, drug cards, and a byte-exact download", async () => {
    document.body.innerHTML = '<main id="app"></main>';
    const root = document.getElementById("app")!;
    let saved: Uint8Array | null = null;
    const app = new ChatApp(root, new ApiClient(BASE), {
      saveBlob: (bytes) => {
        saved = bytes;
      },
    });

    await app.init();
    expect(app.state.locale).toBe("en");

    // Start button creates exactly one session even when clicked twice.
    const first = app.start();
    const second = app.start();
    await Promise.all([first, second]);
    const sessionId = app.state.sessionId!;
    expect(sessionId).toBeTruthy();
    expect(app.state.phase).toBe("Elicitation");

    // Turn 1: complaint. The reply is a symptom question with quick replies.
    await app.send(SCRIPT[0]);
    expect(app.state.askedSymptom).toBe("melena");
    expect(app.state.candidatesCount).toBe(3);
    expect(quickRepliesVisible(app.state)).toBe(true);
    let quick = root.querySelectorAll('[data-testid="quick-replies"] button');
    expect(quick).toHaveLength(2);

    // Every symptom question renders quick replies; answer "no" via the
    // actual button.
    (quick[1] as HTMLButtonElement).click();
    await vi_waitUntil(() => app.state.phase === "Examination");
    expect(root.querySelector('[data-testid="quick-replies"]')).toBeNull();

    // Turn 3: drug request renders one card per attachment.
    await app.send(SCRIPT[2]);
    expect(app.state.phase).toBe("DrugRecommendation");
    const cards = root.querySelectorAll('[data-testid="drug-card"]');
    expect(cards).toHaveLength(2);
    const image = root.querySelector<HTMLImageElement>(".drug-card img")!;
    const imageResponse = await fetch(BASE + image.getAttribute("src")!);
    expect(imageResponse.status).toBe(200);

    // Turn 4: close; the record button lights up.
    await app.send(SCRIPT[3]);
    expect(app.state.phase).toBe("Closed");
    const recordButton = root.querySelector<HTMLButtonElement>(
      '[data-testid="record-button"]'
    )!;
    expect(recordButton.disabled).toBe(false);

    // Record panel shows every confirmed symptom exactly once.
    await app.toggleRecord();
    const panel = root.querySelector('[data-testid="record-panel"]')!;
    expect(panel.textContent).toContain("gastritis");
    const confirmedField = panel.querySelector('[data-field="confirmed-symptoms"]')!;
    expect(confirmedField.textContent).toBe("gassralgia");

    // Download bytes equal the raw GET /record body exactly.
    app.download();
    expect(saved).not.toBeNull();
    const raw = new Uint8Array(
      await (await fetch(`${BASE}/v1/sessions/${sessionId}/record`)).arrayBuffer()
    );
    expect(Array.from(saved!)).toEqual(Array.from(raw));

    // Message stream is patient/system alternating: 2 x 4 turns.
    expect(app.state.messages).toHaveLength(8);
    app.state.messages.forEach((message, index) => {
      expect(message.role).toBe(index % 2 === 0 ? "patient" : "system");
    });

    // Input is disabled after close.
    const input = root.querySelector<HTMLInputElement>('[data-testid="composer-input"]')!;
    expect(input.disabled).toBe(true);
  }, 30_000);

  it("shows an error banner and keeps no session when the service is down", async () => {
    document.body.innerHTML = '<main id="app"></main>';
    const root = document.getElementById("app")!;
    const app = new ChatApp(root, new ApiClient("http://127.0.0.1:1"));
    await app.init();
    await app.start();
    expect(app.state.sessionId).toBeNull();
    expect(root.querySelector('[data-testid="error-banner"]')).not.toBeNull();
    expect(
      root.querySelector<HTMLButtonElement>('[data-testid="start-button"]')!.disabled
    ).toBe(false);
  });
});

async function vi_waitUntil(predicate: () => boolean, timeoutMs = 5000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (predicate()) return;
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
  throw new Error("condition never became true");
}
