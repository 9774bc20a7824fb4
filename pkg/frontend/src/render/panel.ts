import type { EvidenceItemInput, SessionView } from "../types.js";
import { esc } from "./util.js";

const SOURCE_TYPES = ["document", "seller_statement", "image_extract", "chat_log",
  "system_record"];

export function renderHeader(session: SessionView): string {
  return (
    `<header class="session-header">` +
    `<h2>${esc(session.case_id)}</h2>` +
    `<span class="chip state">${esc(session.state)}</span>` +
    `<span class="chip verdict verdict-${esc(session.verdict)}">${esc(session.verdict)}</span>` +
    `</header>`
  );
}

export function renderRequests(session: SessionView): string {
  if (session.recommendations.length === 0) {
    return `<div class="requests none">No open information requests.</div>`;
  }
  const items = session.recommendations
    .map(
      (r) =>
        `<li class="request" data-action-id="${esc(r.action)}">` +
        `<code>${esc(r.canonical_key)}</code> ${esc(r.request_text)}</li>`,
    )
    .join("");
  return `<div class="requests"><h3>Requested information</h3><ul>${items}</ul></div>`;
}

export function renderEvidenceForm(session: SessionView): string {
  if (session.state !== "awaiting_info") {
    return "";
  }
  const options = SOURCE_TYPES.map((t) => `<option value="${t}">${t}</option>`).join("");
  return (
    `<form class="evidence-form" data-case-id="${esc(session.case_id)}">` +
    `<h3>Submit requested evidence</h3>` +
    `<input name="id" placeholder="evidence id" required>` +
    `<select name="source_type">${options}</select>` +
    `<input name="source_ref" placeholder="source reference" required>` +
    `<textarea name="content" placeholder="evidence content" required></textarea>` +
    `<button type="submit">Attach evidence</button>` +
    `<div class="form-error" role="alert"></div>` +
    `</form>`
  );
}

/** Client-side form validation: all fields present before a request is made.
 * Anything beyond presence is the server's call. */
export function validateEvidenceInput(item: Partial<EvidenceItemInput>): string[] {
  const problems: string[] = [];
  for (const field of ["id", "source_type", "content", "source_ref"] as const) {
    if (!item[field] || !String(item[field]).trim()) {
      problems.push(`${field} is required`);
    }
  }
  return problems;
}
