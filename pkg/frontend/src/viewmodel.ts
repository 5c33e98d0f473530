/**
 * Pure view-model builders: trace documents and table payloads become the
 * exact objects the DOM layer renders. No arithmetic, no reformatting --
 * every string in a view is one of the payload's strings, so fidelity can
 * be asserted structurally in tests.
 */

import type { SnapshotInfo, TableRowsResponse, TraceDoc } from "./api.js";

// ---------------------------------------------------------------------------
// Turn view (chat panel + step cards)
// ---------------------------------------------------------------------------

export interface StepCard {
  index: number;
  description: string;
  statements: string[];
  results: string[];
  note: string;
  error: string | null;
}

export interface TurnView {
  turnId: number;
  input: string;
  usedMemory: boolean;
  cards: StepCard[];
  reply: string;
  turnError: string | null;
}

export function buildTurnView(doc: TraceDoc): TurnView {
  const cards: StepCard[] = doc.steps.map((step) => ({
    index: step.index,
    description: step.description,
    statements: step.statements,
    results: step.results,
    note: step.note,
    error:
      doc.error !== null && doc.error.step === step.index
        ? doc.error.message
        : null,
  }));
  const stepIndices = new Set(doc.steps.map((s) => s.index));
  const turnError =
    doc.error !== null && !stepIndices.has(doc.error.step) ? doc.error.message : null;
  return {
    turnId: doc.turn_id,
    input: doc.input,
    usedMemory: doc.used_memory,
    cards,
    reply: doc.reply,
    turnError,
  };
}

/** The highlighted value of a question turn: the reply's `answer:` field. */
export function highlightedAnswer(reply: string): string | null {
  const matches = reply.match(/answer:\s*(.+)/gi);
  if (!matches) return null;
  const last = matches[matches.length - 1];
  return last.replace(/answer:\s*/i, "").trim();
}

// ---------------------------------------------------------------------------
// Table view (database browser)
// ---------------------------------------------------------------------------

export interface TableView {
  name: string;
  columns: string[];
  rows: string[][];
  rowCount: number;
  /** snapshot sequence active when this view was fetched, or null */
  snapshotMarker: number | null;
  empty: boolean;
}

export function buildTableView(
  payload: TableRowsResponse,
  snapshotMarker: number | null = null,
): TableView {
  return {
    name: payload.table,
    columns: payload.columns,
    rows: payload.rows,
    rowCount: payload.row_count,
    snapshotMarker,
    empty: payload.rows.length === 0,
  };
}

export function tablePlaceholder(view: TableView): string {
  return view.empty ? "(0 rows)" : "";
}

// ---------------------------------------------------------------------------
// Snapshot picker (client-side registry; the API has no snapshot listing)
// ---------------------------------------------------------------------------

export class SnapshotRegistry {
  private snapshots: SnapshotInfo[] = [];

  list(): SnapshotInfo[] {
    return [...this.snapshots];
  }

  add(snapshot: SnapshotInfo): void {
    this.snapshots.push(snapshot);
    this.snapshots.sort((a, b) => a.sequence - b.sequence);
  }

  /** After a rollback to `sequence`, snapshots taken later are invalid. */
  invalidateAfter(sequence: number): void {
    this.snapshots = this.snapshots.filter((s) => s.sequence <= sequence);
  }
}
