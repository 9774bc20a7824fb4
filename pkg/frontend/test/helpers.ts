import { readFileSync } from "node:fs";
import type { QueuePayload, SessionView } from "../src/types.js";

function load<T>(name: string): T {
  const url = new URL(`../../test/fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf-8")) as T;
}

/** Recorded api-v1 payloads from a live service run of the worked demo case
 * (see scripts/record_fixtures.py). */
export const fixtures = {
  sessionAwaiting: () => load<SessionView>("session-awaiting.json"),
  sessionResolved: () => load<SessionView>("session-resolved.json"),
  queueAwaiting: () => load<QueuePayload>("queue-awaiting.json"),
  queueResolved: () => load<QueuePayload>("queue-resolved.json"),
  recommendations: () =>
    load<{ case_id: string; recommendations: SessionView["recommendations"] }>(
      "recommendations.json",
    ),
  evidenceConflict: () =>
    load<{ status: number; body: { error: string } }>("evidence-conflict.json"),
};

export function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
