/**
 * Browser entry point. With ?session=ID in the URL the console attaches
 * to that session; otherwise it shows a small picker to join or create
 * one. Downloads go through a Blob anchor; the session id stays in the
 * URL so reloads re-stream from sequence 0.
 */

import { ConsoleClient } from "./api.js";
import { ConsoleApp } from "./app.js";

function triggerDownload(text: string, sessionId: string): void {
  try {
    const blob = new Blob([text], { type: "application/json" });
    const url = URL.createObjectURL(blob);
    const anchor = document.createElement("a");
    anchor.href = url;
    anchor.download = `${sessionId}.json`;
    document.body.append(anchor);
    anchor.click();
    anchor.remove();
    URL.revokeObjectURL(url);
  } catch {
    // Environments without object URLs still get the export via onExport.
  }
}

async function showPicker(root: HTMLElement, client: ConsoleClient): Promise<void> {
  root.textContent = "";
  const heading = document.createElement("h1");
  heading.textContent = "stagecraft console";
  const list = document.createElement("ul");
  const sessions = await client.listSessions();
  for (const session of sessions) {
    const item = document.createElement("li");
    const link = document.createElement("a");
    link.href = `?session=${encodeURIComponent(session.session_id)}`;
    link.textContent = `${session.title} (${session.session_id}, ${session.status})`;
    item.append(link);
    list.append(item);
  }
  const seedInput = document.createElement("input");
  seedInput.type = "number";
  seedInput.value = "0";
  const createButton = document.createElement("button");
  createButton.textContent = "New session";
  createButton.addEventListener("click", async () => {
    createButton.disabled = true;
    try {
      const detail = await client.createSession({
        seed: Number(seedInput.value) || 0,
      });
      window.location.search = `?session=${encodeURIComponent(detail.session_id)}`;
    } catch (error) {
      createButton.disabled = false;
      const notice = document.createElement("p");
      notice.textContent = error instanceof Error ? error.message : String(error);
      root.append(notice);
    }
  });
  root.append(heading, list, seedInput, createButton);
}

async function bootstrap(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  const client = new ConsoleClient({ baseUrl: "" });
  const sessionId = new URLSearchParams(window.location.search).get("session");
  if (!sessionId) {
    await showPicker(root, client);
    return;
  }
  const app = new ConsoleApp({
    root,
    client,
    onExport: (text, id) => triggerDownload(text, id),
  });
  await app.attach(sessionId);
}

void bootstrap();
