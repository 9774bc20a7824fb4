import { ApiClient, ApiError } from "./api.js";
import { renderErrorBanner, renderQueue } from "./render/queue.js";
import { validateEvidenceInput } from "./render/panel.js";
import { renderSessionView } from "./view.js";
import type { EvidenceItemInput } from "./types.js";

/** Browser bootstrap. All state lives on the server; every render works from
 * the latest payload, and a submission re-renders from the POST response —
 * no reloads, no optimistic updates. */

const api = new ApiClient("");
let currentCaseId: string | null = null;

function mount(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing mount point #${id}`);
  return el;
}

async function refreshQueue(): Promise<void> {
  const target = mount("queue-pane");
  try {
    const queue = await api.getQueue();
    target.innerHTML = renderQueue(queue.sessions);
    for (const row of target.querySelectorAll<HTMLElement>(".queue-row")) {
      row.addEventListener("click", () => {
        void openSession(row.dataset.caseId as string);
      });
    }
  } catch (err) {
    target.innerHTML = renderErrorBanner(err instanceof Error ? err.message : String(err));
  }
}

async function openSession(caseId: string): Promise<void> {
  const target = mount("session-pane");
  try {
    const session = await api.getSession(caseId);
    currentCaseId = caseId;
    target.innerHTML = renderSessionView(session);
    wireForm(target);
  } catch (err) {
    target.innerHTML = renderErrorBanner(err instanceof Error ? err.message : String(err));
  }
}

function wireForm(root: HTMLElement): void {
  const form = root.querySelector<HTMLFormElement>(".evidence-form");
  if (!form) return;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void submitForm(form);
  });
}

async function submitForm(form: HTMLFormElement): Promise<void> {
  const data = new FormData(form);
  const item: EvidenceItemInput = {
    id: String(data.get("id") ?? ""),
    source_type: String(data.get("source_type") ?? ""),
    content: String(data.get("content") ?? ""),
    source_ref: String(data.get("source_ref") ?? ""),
  };
  const errorSlot = form.querySelector<HTMLElement>(".form-error");
  const problems = validateEvidenceInput(item);
  if (problems.length > 0) {
    if (errorSlot) errorSlot.textContent = problems.join("; ");
    return;
  }
  const caseId = form.dataset.caseId as string;
  try {
    const session = await api.submitEvidence(caseId, [item]);
    const target = mount("session-pane");
    target.innerHTML = renderSessionView(session);
    wireForm(target);
    void refreshQueue();
  } catch (err) {
    // conflicts and validation errors surface inline; the view stays as-is
    const message = err instanceof ApiError ? `${err.status}: ${err.message}` : String(err);
    if (errorSlot) errorSlot.textContent = message;
  }
}

export function start(): void {
  void refreshQueue();
  window.addEventListener("focus", () => {
    void refreshQueue();
    if (currentCaseId) void openSession(currentCaseId);
  });
}

if (typeof document !== "undefined" && document.getElementById("queue-pane")) {
  start();
}
