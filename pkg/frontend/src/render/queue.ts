import type { SessionSummary } from "../types.js";
import { esc } from "./util.js";

// cases waiting on a reviewer always surface first
const STATE_ORDER: Record<string, number> = {
  awaiting_info: 0,
  pending: 1,
  adjudicated: 2,
  closed: 3,
};

export function queueOrder(sessions: SessionSummary[]): SessionSummary[] {
  return [...sessions].sort((a, b) => {
    const rank = (STATE_ORDER[a.state] ?? 9) - (STATE_ORDER[b.state] ?? 9);
    if (rank !== 0) return rank;
    if (a.updated_at !== b.updated_at) return a.updated_at < b.updated_at ? 1 : -1;
    return a.case_id < b.case_id ? -1 : 1;
  });
}

function row(session: SessionSummary): string {
  const recs = session.recommendation_count
    ? `<span class="rec-count">${session.recommendation_count} request(s)</span>`
    : "";
  return (
    `<li class="queue-row state-${esc(session.state)}" data-case-id="${esc(session.case_id)}">` +
    `<span class="case-id">${esc(session.case_id)}</span>` +
    `<span class="chip state">${esc(session.state)}</span>` +
    `<span class="chip verdict verdict-${esc(session.verdict)}">${esc(session.verdict)}</span>` +
    recs +
    `<span class="updated">${esc(session.updated_at)}</span>` +
    `</li>`
  );
}

export function renderQueue(sessions: SessionSummary[]): string {
  if (sessions.length === 0) {
    return `<div class="empty-state">No cases submitted yet.</div>`;
  }
  const rows = queueOrder(sessions).map(row).join("");
  return `<ul class="queue">${rows}</ul>`;
}

export function renderErrorBanner(message: string): string {
  return `<div class="error-banner" role="alert">Service unavailable: ${esc(message)}</div>`;
}
