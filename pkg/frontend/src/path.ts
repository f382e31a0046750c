import type { Classification, GateOutcome, SessionView } from "./types.js";

// Diagnostics worth calling out on the final screen, with facilitator wording.
const WARNING_LABELS: Record<string, string> = {
  severity_gap_multi_level3: "several harm categories sit just below the escalation floor",
  perpetual_trigger_standing_condition: "standing condition keeps re-qualifying across borders",
  blocked_by_data_gap: "a decisive input was unavailable; the verdict is conservative",
  c1_indeterminate: "causal involvement could not be established either way",
  c7_reversibility_unknown: "restorability is unknown on one or more layers",
};

function node(doc: Document, tag: string, className: string, text?: string): HTMLElement {
  const out = doc.createElement(tag);
  out.className = className;
  if (text !== undefined) out.textContent = text;
  return out;
}

/**
 * The decision path as a flowchart: one node per gate outcome, in exactly the
 * order the trace reports them. Never filters, never reorders.
 */
export function renderPath(doc: Document, outcomes: GateOutcome[]): HTMLElement {
  const list = node(doc, "ol", "gate-path");
  for (const outcome of outcomes) {
    const item = node(doc, "li", `gate-node result-${outcome.result.toLowerCase()}`);
    item.dataset.gate = outcome.gate;
    item.appendChild(node(doc, "span", "gate-id", outcome.gate));
    item.appendChild(node(doc, "span", "gate-result", outcome.result));
    if (outcome.evidence.length > 0) {
      item.appendChild(node(doc, "span", "gate-evidence", outcome.evidence.join(", ")));
    }
    for (const diag of outcome.diagnostics) {
      item.appendChild(node(doc, "span", "gate-diagnostic", diag));
    }
    list.appendChild(item);
  }
  return list;
}

export interface FinalScreenOptions {
  /** Classification of the session this one was forked from, if any. */
  baseline?: Classification;
  onExport?: () => void;
  onWhatIf?: (gate: string) => void;
}

/**
 * Final screen: verdict, rationale, flagged diagnostics, the full path, and
 * the export / what-if actions. When a baseline is given (a what-if re-run)
 * and the verdict moved, the change is highlighted.
 */
export function renderFinal(doc: Document, view: SessionView, options: FinalScreenOptions = {}): HTMLElement {
  const trace = view.trace;
  if (view.status !== "complete" || !trace) {
    throw new Error("renderFinal needs a completed session");
  }
  const root = node(doc, "section", "final-screen");

  const verdict = node(doc, "p", `classification classification-${trace.classification}`, trace.classification);
  if (options.baseline !== undefined && options.baseline !== trace.classification) {
    verdict.classList.add("classification-changed");
    verdict.appendChild(node(doc, "span", "changed-from", ` (was ${options.baseline})`));
  }
  root.appendChild(verdict);
  root.appendChild(node(doc, "p", "rationale", trace.rationale));

  const flagged = trace.outcomes.flatMap((o) => o.diagnostics).filter((d) => d in WARNING_LABELS);
  if (flagged.length > 0) {
    const warnings = node(doc, "ul", "warnings");
    for (const code of [...new Set(flagged)]) {
      const item = node(doc, "li", "warning");
      item.dataset.code = code;
      item.textContent = `${code}: ${WARNING_LABELS[code]}`;
      warnings.appendChild(item);
    }
    root.appendChild(warnings);
  }

  root.appendChild(renderPath(doc, trace.outcomes));

  if (view.skipped.length > 0) {
    root.appendChild(node(doc, "p", "skipped", `not asked: ${view.skipped.join(", ")}`));
  }

  if (options.onExport) {
    const button = node(doc, "button", "export", "export record");
    button.setAttribute("type", "button");
    button.addEventListener("click", options.onExport);
    root.appendChild(button);
  }

  if (options.onWhatIf) {
    const row = node(doc, "div", "what-if-row");
    row.appendChild(node(doc, "span", "what-if-label", "what if, from:"));
    for (const gate of view.answered) {
      const button = node(doc, "button", "what-if", gate);
      button.setAttribute("type", "button");
      button.addEventListener("click", () => options.onWhatIf!(gate));
      row.appendChild(button);
    }
    root.appendChild(row);
  }

  return root;
}
