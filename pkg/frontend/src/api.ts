/**
 * Typed client for the sqlmem session API.
 *
 * Every method maps 1:1 to one endpoint; payloads are returned verbatim
 * (the UI renders values byte-equal to what the server sent, all
 * formatting happens server-side). Errors carry the HTTP status so the
 * caller can distinguish 404 (stale session) from 409 (busy).
 */

// ---------------------------------------------------------------------------
// Wire types (mirror the trace document exactly)
// ---------------------------------------------------------------------------

export interface TraceStep {
  index: number;
  description: string;
  statements: string[];
  results: string[];
  note: string;
}

export interface TraceError {
  kind: string;
  step: number;
  message: string;
}

export interface TraceDoc {
  turn_id: number;
  input: string;
  used_memory: boolean;
  steps: TraceStep[];
  error: TraceError | null;
  reply: string;
}

export interface MessageResponse {
  reply: string;
  trace: TraceDoc;
}

export interface TableRowsResponse {
  table: string;
  columns: string[];
  rows: string[][];
  row_count: number;
}

export interface SnapshotInfo {
  label: string;
  sequence: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

export class SqlmemClient {
  constructor(
    private baseUrl: string,
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const parsed = (await response.json()) as { detail?: unknown };
        if (parsed.detail !== undefined) detail = JSON.stringify(parsed.detail);
      } catch {
        /* non-JSON error body: keep statusText */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  async createSession(): Promise<string> {
    const data = await this.request<{ session_id: string }>("POST", "/sessions", {});
    return data.session_id;
  }

  sendMessage(session: string, text: string): Promise<MessageResponse> {
    return this.request("POST", `/sessions/${session}/message`, { text });
  }

  async listTables(session: string): Promise<string[]> {
    const data = await this.request<{ tables: string[] }>("GET", `/sessions/${session}/tables`);
    return data.tables;
  }

  tableRows(session: string, table: string, limit = 50): Promise<TableRowsResponse> {
    return this.request("GET", `/sessions/${session}/tables/${table}?limit=${limit}`);
  }

  async snapshot(session: string, label = ""): Promise<SnapshotInfo> {
    const data = await this.request<{ snapshot: SnapshotInfo }>(
      "POST",
      `/sessions/${session}/snapshot`,
      { label },
    );
    return data.snapshot;
  }

  rollback(session: string, sequence: number): Promise<{ ok: boolean; sequence: number }> {
    return this.request("POST", `/sessions/${session}/rollback`, { snapshot: sequence });
  }

  trace(session: string, turn: number): Promise<TraceDoc> {
    return this.request("GET", `/sessions/${session}/trace/${turn}`);
  }
}
