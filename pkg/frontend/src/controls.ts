import type { AnswerPayload, FieldSpec } from "./types.js";

// Basis values accepted by the record model for harm entries.
const HARM_BASES = ["realized", "aggregate", "potential"];

export interface FieldError {
  field: string;
  message: string;
}

export type ReadResult =
  | { ok: true; value: AnswerPayload }
  | { ok: false; errors: FieldError[] };

interface Control {
  spec: FieldSpec;
  root: HTMLElement;
  errorEl: HTMLElement;
  /** undefined means "leave the field out of the payload". */
  read(): { value?: unknown; error?: string };
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function select(doc: Document, choices: string[], blankLabel = "(select)"): HTMLSelectElement {
  const node = doc.createElement("select");
  const blank = doc.createElement("option");
  blank.value = "";
  blank.textContent = blankLabel;
  node.appendChild(blank);
  for (const choice of choices) {
    const option = doc.createElement("option");
    option.value = choice;
    option.textContent = choice;
    node.appendChild(option);
  }
  return node;
}

function label(doc: Document, text: string, input: HTMLElement): HTMLLabelElement {
  const node = doc.createElement("label");
  node.appendChild(el(doc, "span", "field-name", text));
  node.appendChild(input);
  return node;
}

function enumControl(doc: Document, spec: FieldSpec, prefill?: unknown): Control {
  const input = select(doc, spec.choices ?? []);
  if (typeof prefill === "string") input.value = prefill;
  const root = el(doc, "div", "control");
  root.appendChild(label(doc, spec.name, input));
  return {
    spec,
    root,
    errorEl: attachError(doc, root),
    read() {
      if (input.value === "") {
        return spec.required ? { error: "required" } : {};
      }
      return { value: input.value };
    },
  };
}

function boolControl(doc: Document, spec: FieldSpec, prefill?: unknown): Control {
  const input = select(doc, ["yes", "no"]);
  if (prefill === true) input.value = "yes";
  if (prefill === false) input.value = "no";
  const root = el(doc, "div", "control");
  root.appendChild(label(doc, spec.name, input));
  return {
    spec,
    root,
    errorEl: attachError(doc, root),
    read() {
      if (input.value === "") {
        return spec.required ? { error: "required" } : {};
      }
      return { value: input.value === "yes" };
    },
  };
}

function enumListControl(doc: Document, spec: FieldSpec, prefill?: unknown): Control {
  const chosen = new Set(Array.isArray(prefill) ? (prefill as string[]) : []);
  const root = el(doc, "div", "control");
  root.appendChild(el(doc, "span", "field-name", spec.name));
  const boxes: HTMLInputElement[] = [];
  for (const choice of spec.choices ?? []) {
    const box = doc.createElement("input");
    box.type = "checkbox";
    box.value = choice;
    box.checked = chosen.has(choice);
    boxes.push(box);
    const wrap = doc.createElement("label");
    wrap.className = "choice";
    wrap.appendChild(box);
    wrap.appendChild(doc.createTextNode(choice));
    root.appendChild(wrap);
  }
  return {
    spec,
    root,
    errorEl: attachError(doc, root),
    read() {
      return { value: boxes.filter((b) => b.checked).map((b) => b.value) };
    },
  };
}

function stringListControl(doc: Document, spec: FieldSpec, prefill?: unknown): Control {
  const input = doc.createElement("input");
  input.type = "text";
  input.placeholder = "comma separated";
  if (Array.isArray(prefill)) input.value = (prefill as string[]).join(", ");
  const root = el(doc, "div", "control");
  root.appendChild(label(doc, spec.name, input));
  return {
    spec,
    root,
    errorEl: attachError(doc, root),
    read() {
      const items = input.value
        .split(",")
        .map((s) => s.trim())
        .filter((s) => s.length > 0);
      if (items.length === 0 && spec.required) return { error: "required" };
      return { value: items };
    },
  };
}

function objectControl(doc: Document, spec: FieldSpec, prefill?: unknown): Control {
  const prior = (prefill ?? {}) as Record<string, unknown>;
  const root = el(doc, "div", "control control-object");
  root.appendChild(el(doc, "span", "field-name", spec.name));
  const parts: Array<{ key: string; read(): { value?: unknown; error?: string } }> = [];
  for (const [key, shape] of Object.entries(spec.shape ?? {})) {
    if (shape === "string") {
      const input = doc.createElement("input");
      input.type = "text";
      if (typeof prior[key] === "string") input.value = prior[key] as string;
      root.appendChild(label(doc, key, input));
      parts.push({
        key,
        read: () => (input.value.trim() === "" ? { error: `${key} required` } : { value: input.value.trim() }),
      });
    } else if (shape === "bool") {
      const box = doc.createElement("input");
      box.type = "checkbox";
      box.checked = prior[key] === true;
      root.appendChild(label(doc, key, box));
      parts.push({ key, read: () => ({ value: box.checked }) });
    } else {
      const input = select(doc, shape);
      if (typeof prior[key] === "string") input.value = prior[key] as string;
      root.appendChild(label(doc, key, input));
      parts.push({
        key,
        read: () => (input.value === "" ? { error: `${key} required` } : { value: input.value }),
      });
    }
  }
  return {
    spec,
    root,
    errorEl: attachError(doc, root),
    read() {
      const value: Record<string, unknown> = {};
      for (const part of parts) {
        const result = part.read();
        if (result.error) {
          return spec.required ? { error: result.error } : {};
        }
        value[part.key] = result.value;
      }
      return { value };
    },
  };
}

function harmListControl(doc: Document, spec: FieldSpec, prefill?: unknown): Control {
  const root = el(doc, "div", "control control-harm");
  root.appendChild(el(doc, "span", "field-name", spec.name));
  const rows = el(doc, "div", "harm-rows");
  root.appendChild(rows);
  const entries: Array<{
    row: HTMLElement;
    category: HTMLInputElement;
    severity: HTMLInputElement;
    basis: HTMLSelectElement;
  }> = [];

  const addRow = (prior?: Record<string, unknown>) => {
    const row = el(doc, "div", "harm-row");
    const category = doc.createElement("input");
    category.type = "text";
    category.placeholder = "category";
    const severity = doc.createElement("input");
    severity.type = "number";
    severity.min = "1";
    severity.max = "5";
    const basis = select(doc, HARM_BASES);
    if (prior) {
      if (typeof prior.category === "string") category.value = prior.category;
      if (typeof prior.severity === "number") severity.value = String(prior.severity);
      if (typeof prior.basis === "string") basis.value = prior.basis;
    }
    const remove = el(doc, "button", "remove-row", "remove");
    remove.setAttribute("type", "button");
    remove.addEventListener("click", () => {
      rows.removeChild(row);
      entries.splice(
        entries.findIndex((e) => e.row === row),
        1,
      );
    });
    row.appendChild(category);
    row.appendChild(severity);
    row.appendChild(basis);
    row.appendChild(remove);
    rows.appendChild(row);
    entries.push({ row, category, severity, basis });
  };

  const add = el(doc, "button", "add-row", "add harm entry");
  add.setAttribute("type", "button");
  add.addEventListener("click", () => addRow());
  root.appendChild(add);

  if (Array.isArray(prefill)) {
    for (const entry of prefill as Record<string, unknown>[]) addRow(entry);
  }

  return {
    spec,
    root,
    errorEl: attachError(doc, root),
    read() {
      const value: Record<string, unknown>[] = [];
      for (const entry of entries) {
        const category = entry.category.value.trim();
        const severity = Number(entry.severity.value);
        const basis = entry.basis.value;
        if (category === "" || entry.severity.value === "" || basis === "") {
          return { error: "each harm entry needs category, severity, basis" };
        }
        value.push({ category, severity, basis });
      }
      if (value.length === 0 && spec.required) return { error: "required" };
      return { value };
    },
  };
}

function attachError(doc: Document, root: HTMLElement): HTMLElement {
  const node = el(doc, "span", "field-error");
  node.hidden = true;
  root.appendChild(node);
  return node;
}

const BUILDERS: Record<FieldSpec["type"], (doc: Document, spec: FieldSpec, prefill?: unknown) => Control> = {
  enum: enumControl,
  bool: boolControl,
  enum_list: enumListControl,
  string_list: stringListControl,
  object: objectControl,
  harm_list: harmListControl,
};

/**
 * One control per field spec, in the server's order. `readAnswer` does only
 * presence checks; everything semantic is the server's call, and
 * `showServerError` routes its message back onto the offending control.
 */
export class ControlSet {
  private controls: Control[] = [];
  readonly root: HTMLElement;

  constructor(doc: Document, fields: FieldSpec[], prefill?: AnswerPayload) {
    this.root = el(doc, "div", "controls");
    for (const spec of fields) {
      const control = BUILDERS[spec.type](doc, spec, prefill?.[spec.name]);
      control.root.dataset.field = spec.name;
      this.controls.push(control);
      this.root.appendChild(control.root);
    }
  }

  fieldNames(): string[] {
    return this.controls.map((c) => c.spec.name);
  }

  clearErrors(): void {
    for (const control of this.controls) {
      control.errorEl.hidden = true;
      control.errorEl.textContent = "";
      control.root.classList.remove("has-error");
    }
  }

  readAnswer(): ReadResult {
    this.clearErrors();
    const payload: AnswerPayload = {};
    const errors: FieldError[] = [];
    for (const control of this.controls) {
      const result = control.read();
      if (result.error) {
        errors.push({ field: control.spec.name, message: result.error });
        this.mark(control, result.error);
      } else if (result.value !== undefined) {
        payload[control.spec.name] = result.value;
      }
    }
    return errors.length > 0 ? { ok: false, errors } : { ok: true, value: payload };
  }

  /**
   * Attach a server validation message to the control it talks about. Server
   * messages name record paths (for example "causation.role"), which always
   * contain the answer field's name; the longest matching name wins so
   * "potential_harm" is not misrouted to "harm". Returns false when no
   * control matched, so the caller can fall back to a form-level banner.
   */
  showServerError(detail: string): boolean {
    let best: Control | null = null;
    for (const control of this.controls) {
      if (!detail.includes(control.spec.name)) continue;
      if (best === null || control.spec.name.length > best.spec.name.length) {
        best = control;
      }
    }
    if (best === null) return false;
    this.mark(best, detail);
    return true;
  }

  private mark(control: Control, message: string): void {
    control.errorEl.textContent = message;
    control.errorEl.hidden = false;
    control.root.classList.add("has-error");
  }
}
