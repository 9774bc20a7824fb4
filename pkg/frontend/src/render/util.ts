const REPLACEMENTS: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&#39;",
};

export function esc(text: unknown): string {
  return String(text ?? "").replace(/[&<>"']/g, (ch) => REPLACEMENTS[ch] ?? ch);
}

export function trimLabel(text: string, max = 28): string {
  return text.length <= max ? text : text.slice(0, max - 1) + "…";
}
