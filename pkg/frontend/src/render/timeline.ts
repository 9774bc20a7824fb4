import type { OutcomeEntry } from "../types.js";
import { esc } from "./util.js";

export function renderTimeline(history: OutcomeEntry[]): string {
  const items = history
    .map((entry) => {
      const requests = entry.recommendations
        .map((r) => `<div class="timeline-request">${esc(r.request_text)}</div>`)
        .join("");
      return (
        `<li class="timeline-entry verdict-${esc(entry.verdict)}">` +
        `<span class="when">${esc(entry.timestamp)}</span>` +
        `<span class="chip verdict verdict-${esc(entry.verdict)}">${esc(entry.verdict)}</span>` +
        requests +
        `</li>`
      );
    })
    .join("");
  return `<ol class="timeline">${items}</ol>`;
}
