import { ApiError, SessionApi } from "./api.js";
import { ControlSet } from "./controls.js";
import { renderFinal, renderPath } from "./path.js";
import type { Classification, GateId, SessionView } from "./types.js";

function node(doc: Document, tag: string, className: string, text?: string): HTMLElement {
  const out = doc.createElement(tag);
  out.className = className;
  if (text !== undefined) out.textContent = text;
  return out;
}

/**
 * One walkthrough per page. Every state change round-trips to the server;
 * the only state held here is the current view, plus the parent verdict when
 * this session is a what-if fork (so the final screen can highlight a flip).
 */
export class App {
  private view: SessionView | null = null;
  private baseline: Classification | undefined;
  private controls: ControlSet | null = null;

  constructor(
    private readonly doc: Document,
    private readonly mount: HTMLElement,
    private readonly api: SessionApi,
  ) {}

  async start(): Promise<void> {
    this.renderCreateForm();
  }

  private renderCreateForm(): void {
    this.mount.replaceChildren();
    const form = node(this.doc, "form", "create-form");
    const title = this.doc.createElement("input");
    title.type = "text";
    title.placeholder = "incident title";
    const occurred = this.doc.createElement("input");
    occurred.type = "text";
    occurred.placeholder = "occurred at (RFC 3339)";
    const reported = this.doc.createElement("input");
    reported.type = "text";
    reported.placeholder = "reported at (RFC 3339)";
    const submit = node(this.doc, "button", "start", "start walkthrough");
    submit.setAttribute("type", "submit");
    const error = node(this.doc, "p", "form-error");
    error.hidden = true;
    form.append(title, occurred, reported, submit, error);
    form.addEventListener("submit", async (event) => {
      event.preventDefault();
      try {
        this.baseline = undefined;
        this.view = await this.api.createSession({
          title: title.value || "untitled exercise",
          occurred_at: occurred.value,
          reported_at: reported.value,
        });
        this.render();
      } catch (err) {
        error.textContent = err instanceof ApiError ? err.detail : String(err);
        error.hidden = false;
      }
    });
    this.mount.appendChild(form);
  }

  private render(): void {
    const view = this.view;
    if (!view) return;
    this.mount.replaceChildren();
    this.mount.appendChild(node(this.doc, "h2", "session-title", view.title));

    if (view.status === "complete") {
      this.mount.appendChild(
        renderFinal(this.doc, view, {
          baseline: this.baseline,
          onExport: () => void this.exportRecord(),
          onWhatIf: (gate) => void this.whatIf(gate as GateId),
        }),
      );
      return;
    }

    // Path so far, then the current question.
    this.mount.appendChild(renderPath(this.doc, view.outcomes));
    const question = view.question!;
    const section = node(this.doc, "section", "question");
    section.appendChild(node(this.doc, "h3", "prompt", `${question.gate}: ${question.prompt}`));

    this.controls = new ControlSet(this.doc, question.fields, view.answers[question.gate]);
    const form = node(this.doc, "form", "answer-form");
    form.appendChild(this.controls.root);
    const submit = node(this.doc, "button", "submit", "answer");
    submit.setAttribute("type", "submit");
    form.appendChild(submit);
    const formError = node(this.doc, "p", "form-error");
    formError.hidden = true;
    form.appendChild(formError);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitCurrent(formError);
    });
    section.appendChild(form);
    this.mount.appendChild(section);
  }

  private async submitCurrent(formError: HTMLElement): Promise<void> {
    const view = this.view!;
    const controls = this.controls!;
    formError.hidden = true;
    const result = controls.readAnswer();
    if (!result.ok) return; // inline errors already shown; nothing sent
    try {
      this.view = await this.api.submitAnswer(view.id, view.current_gate!, result.value);
      this.render();
    } catch (err) {
      if (err instanceof ApiError && controls.showServerError(err.detail)) return;
      formError.textContent = err instanceof ApiError ? err.detail : String(err);
      formError.hidden = false;
    }
  }

  private async exportRecord(): Promise<void> {
    const view = this.view!;
    const exported = await this.api.exportRecord(view.id);
    const blob = new Blob([JSON.stringify(exported.record, null, 2)], {
      type: "application/json",
    });
    const url = URL.createObjectURL(blob);
    const link = this.doc.createElement("a");
    link.href = url;
    link.download = `${exported.record.id}.json`;
    link.click();
    URL.revokeObjectURL(url);
  }

  /** Fork a fresh session that replays every answer before `gate`. */
  private async whatIf(gate: GateId): Promise<void> {
    const view = this.view!;
    const fork = await this.api.fork(view.id, gate, `${view.title} (what if ${gate}?)`);
    this.baseline = view.classification ?? undefined;
    this.view = fork;
    this.render();
  }
}
