// Pure view functions: state in, HTML strings out.  main.ts wires the
// resulting DOM through event delegation on data-* attributes.

import { AgentPayload, ReportPayload, SuggestionPayload } from "./protocol.js";
import { UiSessionState } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderStatusBar(state: UiSessionState): string {
  const cls = state.classification
    ? `<span class="badge class-${state.classification.toLowerCase()}">${state.classification}</span>`
    : `<span class="badge class-none">&mdash;</span>`;
  const done = state.proofComplete ? `<span class="badge done">complete</span>` : "";
  return `<span class="epoch">epoch ${state.epoch}</span> ${cls} ${done}`;
}

export function renderRetryBanner(visible: boolean): string {
  if (!visible) {
    return "";
  }
  return `<div class="banner retry" data-role="retry-banner">connection lost &mdash; retrying&hellip;</div>`;
}

export function renderProof(state: UiSessionState): string {
  if (state.proofLines.length === 0) {
    return `<div class="proof empty">no proof loaded</div>`;
  }
  const rows = state.proofLines
    .map((line) => {
      const open = line.endsWith(" Open");
      return `<div class="proof-line${open ? " open" : ""}">${escapeHtml(line)}</div>`;
    })
    .join("");
  return `<div class="proof">${rows}</div>`;
}

function slotEditor(entry: SuggestionPayload, index: number): string {
  const editable = entry.slots.filter((slot) => slot.value === null);
  if (editable.length === 0) {
    return "";
  }
  const fields = editable
    .map(
      (slot) =>
        `<label>${escapeHtml(slot.name)}${slot.mandatory ? "*" : ""}` +
        `<input data-entry="${index}" data-slot="${escapeHtml(slot.name)}"` +
        ` placeholder="${slot.kind}"></label>`,
    )
    .join(" ");
  return `<span class="slot-editor">${fields}</span>`;
}

export function renderSuggestions(state: UiSessionState): string {
  if (state.suggestions.length === 0) {
    const note = state.awaitingSuggestions ? "collecting suggestions&hellip;" : "none";
    return `<div class="suggestions empty">${note}</div>`;
  }
  // service order is preserved verbatim; no client-side re-sorting
  const rows = state.suggestions
    .map((entry, index) => {
      const percent = Math.round(entry.completeness * 100);
      const filled = entry.slots.filter((slot) => slot.value !== null).length;
      return (
        `<div class="suggestion${entry.complete ? " complete" : ""}" data-index="${index}">` +
        `<button data-role="execute" data-index="${index}">run</button>` +
        `<code class="args">${escapeHtml(entry.args)}</code>` +
        `<span class="count">${filled}/${entry.slots.length}</span>` +
        `<span class="bar"><span class="fill" style="width:${percent}%"></span></span>` +
        (entry.goal_closing ? `<span class="badge closing">closes goal</span>` : "") +
        slotEditor(entry, index) +
        `</div>`
      );
    })
    .join("");
  return `<div class="suggestions">${rows}</div>`;
}

function reportRow(report: ReportPayload, threshold?: number): string {
  const hot = threshold !== undefined && report.average > threshold;
  return (
    `<tr class="society${hot ? " over-threshold" : ""}">` +
    `<td>${escapeHtml(report.command)}</td>` +
    `<td>${report.average.toFixed(3)}${hot ? ' <span class="badge warn">over threshold</span>' : ""}</td>` +
    `<td>${report.active}</td><td>${report.retired}</td></tr>`
  );
}

function agentRow(agent: AgentPayload): string {
  const status = agent.retired ? "retired" : agent.excluded ? "excluded" : "active";
  return (
    `<tr class="agent ${status}">` +
    `<td>${escapeHtml(agent.agent)}</td>` +
    `<td>${agent.rating.toFixed(3)}</td>` +
    `<td>${agent.failures}</td>` +
    `<td>${status}</td></tr>`
  );
}

export function renderResources(state: UiSessionState): string {
  const { reports, agents } = state.resources;
  if (reports.length === 0 && agents.length === 0) {
    return `<div class="resources empty">no resource report yet</div>`;
  }
  const threshold = state.resources.threshold;
  const societies =
    `<table class="societies"><thead><tr>` +
    `<th>society</th><th>avg rating</th><th>active</th><th>retired</th>` +
    `</tr></thead><tbody>` +
    reports.map((r) => reportRow(r, threshold)).join("") +
    `</tbody></table>`;
  const table =
    `<table class="agents"><thead><tr>` +
    `<th>agent</th><th>rating</th><th>failures</th><th>status</th>` +
    `</tr></thead><tbody>` +
    agents.map(agentRow).join("") +
    `</tbody></table>`;
  return `<div class="resources">${societies}${table}</div>`;
}

export function renderError(message: string | null): string {
  if (!message) {
    return "";
  }
  return `<div class="banner error">${escapeHtml(message)}</div>`;
}
