import { renderGraph } from "./render/graph.js";
import { renderEvidenceForm, renderHeader, renderRequests } from "./render/panel.js";
import { renderTimeline } from "./render/timeline.js";
import type { SessionView } from "./types.js";

/** The full session view, composed purely from the server payload. */
export function renderSessionView(session: SessionView): string {
  return (
    `<section class="session" data-case-id="${session.case_id}">` +
    renderHeader(session) +
    renderRequests(session) +
    renderGraph(session) +
    renderEvidenceForm(session) +
    renderTimeline(session.outcome_history) +
    `</section>`
  );
}
