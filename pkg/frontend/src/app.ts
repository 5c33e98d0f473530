/**
 * DOM wiring for the shop-manager console: chat input, step-card trace
 * viewer, live table browser, snapshot/rollback controls.
 *
 * Everything rendered comes from the view models verbatim (textContent
 * assignment only). One message in flight at a time, enforced by disabling
 * the input; a 409 from the server shows the same notice. Network failures
 * show a banner and never retry silently. Refreshing the page replays
 * GET /trace/1..n for the session in the URL hash, so the view rebuilds
 * from server state alone.
 */

import { ApiError, SqlmemClient } from "./api.js";
import {
  SnapshotRegistry,
  TurnView,
  buildTableView,
  buildTurnView,
  highlightedAnswer,
  tablePlaceholder,
} from "./viewmodel.js";

declare global {
  interface Window {
    SQLMEM_API?: string;
  }
}

// Same-origin by default; set window.SQLMEM_API when the static page is
// served from somewhere other than the API host.
const client = new SqlmemClient(typeof window !== "undefined" ? (window.SQLMEM_API ?? "") : "");
const snapshots = new SnapshotRegistry();
let sessionId = "";
let busy = false;

// ---------------------------------------------------------------------------
// Small DOM helpers
// ---------------------------------------------------------------------------

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function banner(message: string): void {
  const box = byId<HTMLDivElement>("banner");
  box.textContent = message;
  box.hidden = message === "";
}

function staleSessionDialog(): void {
  const dialog = byId<HTMLDialogElement>("stale-dialog");
  if (!dialog.open) dialog.showModal();
}

// ---------------------------------------------------------------------------
// Chat + step cards
// ---------------------------------------------------------------------------

function renderTurn(view: TurnView): void {
  const log = byId<HTMLDivElement>("chat-log");

  const userLine = el("div", "msg user");
  userLine.appendChild(el("div", "bubble", view.input));
  log.appendChild(userLine);

  const agentLine = el("div", "msg agent");
  const bubble = el("div", "bubble");

  for (const card of view.cards) {
    const details = el("details", "step-card");
    details.appendChild(el("summary", "", `Step${card.index}: ${card.description}`));
    card.statements.forEach((statement, i) => {
      const sql = el("pre", "sql");
      sql.textContent = statement;
      details.appendChild(sql);
      if (card.results[i] !== undefined) {
        const result = el("pre", "result");
        result.textContent = card.results[i];
        details.appendChild(result);
      }
    });
    if (card.note) details.appendChild(el("div", "note", card.note));
    if (card.error) details.appendChild(el("div", "error", card.error));
    bubble.appendChild(details);
  }

  if (view.turnError) bubble.appendChild(el("div", "error", view.turnError));
  bubble.appendChild(el("div", "reply", view.reply));
  const answer = highlightedAnswer(view.reply);
  if (answer !== null) bubble.appendChild(el("div", "answer", answer));

  agentLine.appendChild(bubble);
  log.appendChild(agentLine);
  log.scrollTop = log.scrollHeight;
}

function setBusy(value: boolean, notice = ""): void {
  busy = value;
  byId<HTMLInputElement>("chat-input").disabled = value;
  byId<HTMLButtonElement>("chat-send").disabled = value;
  byId<HTMLDivElement>("busy-notice").textContent = notice;
}

async function sendMessage(): Promise<void> {
  const input = byId<HTMLInputElement>("chat-input");
  const text = input.value.trim();
  if (!text || busy) return;
  setBusy(true, "waiting for the shop keeper...");
  banner("");
  try {
    const response = await client.sendMessage(sessionId, text);
    input.value = "";
    renderTurn(buildTurnView(response.trace));
    await refreshTables();
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      setBusy(true, "another message is already in flight for this session");
      return;
    }
    if (err instanceof ApiError && err.status === 404) {
      staleSessionDialog();
      return;
    }
    banner(`request failed: ${err instanceof Error ? err.message : String(err)}`);
  } finally {
    if (busy) setBusy(false);
  }
}

// ---------------------------------------------------------------------------
// Table browser
// ---------------------------------------------------------------------------

let currentSnapshot: number | null = null;

async function refreshTables(): Promise<void> {
  const container = byId<HTMLDivElement>("tables");
  let names: string[];
  try {
    names = await client.listTables(sessionId);
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      staleSessionDialog();
      return;
    }
    banner(`could not load tables: ${err instanceof Error ? err.message : String(err)}`);
    return;
  }
  container.textContent = "";
  for (const name of names) {
    const payload = await client.tableRows(sessionId, name);
    const view = buildTableView(payload, currentSnapshot);
    const details = el("details", "table-view");
    const marker = view.snapshotMarker === null ? "" : ` [snapshot ${view.snapshotMarker}]`;
    details.appendChild(el("summary", "", `${view.name} (${view.rowCount} rows)${marker}`));
    const table = el("table");
    const head = el("tr");
    for (const column of view.columns) head.appendChild(el("th", "", column));
    table.appendChild(head);
    for (const row of view.rows) {
      const tr = el("tr");
      for (const cell of row) tr.appendChild(el("td", "", cell));
      table.appendChild(tr);
    }
    details.appendChild(table);
    if (view.empty) details.appendChild(el("div", "note", tablePlaceholder(view)));
    container.appendChild(details);
  }
}

// ---------------------------------------------------------------------------
// Snapshot / rollback controls
// ---------------------------------------------------------------------------

function renderSnapshotPicker(): void {
  const picker = byId<HTMLDivElement>("snapshots");
  picker.textContent = "";
  for (const snapshot of snapshots.list()) {
    const row = el("div", "snapshot-row");
    row.appendChild(
      el("span", "", `#${snapshot.sequence}${snapshot.label ? ` ${snapshot.label}` : ""}`),
    );
    const button = el("button", "", "roll back");
    button.onclick = () => void doRollback(snapshot.sequence);
    row.appendChild(button);
    picker.appendChild(row);
  }
}

async function takeSnapshot(): Promise<void> {
  try {
    const info = await client.snapshot(sessionId, new Date().toISOString());
    snapshots.add(info);
    currentSnapshot = info.sequence;
    renderSnapshotPicker();
    await refreshTables();
  } catch (err) {
    banner(`snapshot failed: ${err instanceof Error ? err.message : String(err)}`);
  }
}

async function doRollback(sequence: number): Promise<void> {
  try {
    await client.rollback(sessionId, sequence);
  } catch (err) {
    banner(`rollback failed: ${err instanceof Error ? err.message : String(err)}`);
    return;
  }
  snapshots.invalidateAfter(sequence);
  currentSnapshot = sequence;
  renderSnapshotPicker();
  await refreshTables();
}

// ---------------------------------------------------------------------------
// Boot: reuse the session in the hash, replay its turns, else start fresh
// ---------------------------------------------------------------------------

async function replayExistingTurns(): Promise<void> {
  for (let turn = 1; ; turn++) {
    let doc;
    try {
      doc = await client.trace(sessionId, turn);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) return; // past the last turn
      throw err;
    }
    renderTurn(buildTurnView(doc));
  }
}

async function boot(): Promise<void> {
  const hash = new URLSearchParams(location.hash.slice(1));
  const existing = hash.get("s");
  if (existing) {
    sessionId = existing;
    try {
      await replayExistingTurns();
    } catch {
      staleSessionDialog();
      return;
    }
  } else {
    sessionId = await client.createSession();
    location.hash = `s=${sessionId}`;
  }
  await refreshTables();

  byId<HTMLButtonElement>("chat-send").onclick = () => void sendMessage();
  byId<HTMLInputElement>("chat-input").onkeydown = (event) => {
    if (event.key === "Enter") void sendMessage();
  };
  byId<HTMLButtonElement>("snapshot-take").onclick = () => void takeSnapshot();
  byId<HTMLButtonElement>("stale-new-session").onclick = () => {
    location.hash = "";
    location.reload();
  };
}

if (typeof document !== "undefined") {
  void boot();
}
