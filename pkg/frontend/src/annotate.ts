// Annotation forms: free text or a structured template. Required template
// fields are enforced client-side before submit; the gateway re-validates
// and its field-level rejection is surfaced on the offending input.

import { ApiClient, ApiError } from "./api.js";
import type { AnnotationSubmission, EventView, Template } from "./types.js";

export interface ValidationResult {
  ok: boolean;
  field_id?: string;
  message?: string;
}

export function collectResponses(
  template: Template,
  values: Record<string, string>,
): { responses: Record<string, unknown>; validation: ValidationResult } {
  const responses: Record<string, unknown> = {};
  for (const field of template.fields) {
    const raw = (values[field.field_id] ?? "").trim();
    if (raw === "") {
      if (field.required) {
        return {
          responses,
          validation: { ok: false, field_id: field.field_id, message: "required" },
        };
      }
      continue;
    }
    if (field.input === "scale_1_to_5") {
      const n = Number(raw);
      if (!Number.isInteger(n) || n < 1 || n > 5) {
        return {
          responses,
          validation: { ok: false, field_id: field.field_id, message: "must be 1..5" },
        };
      }
      responses[field.field_id] = n;
    } else if (field.input === "choice") {
      if (!field.options?.includes(raw)) {
        return {
          responses,
          validation: { ok: false, field_id: field.field_id, message: "not an option" },
        };
      }
      responses[field.field_id] = raw;
    } else {
      responses[field.field_id] = raw;
    }
  }
  return { responses, validation: { ok: true } };
}

function fieldInput(fieldId: string, template: Template): HTMLElement {
  const field = template.fields.find((f) => f.field_id === fieldId)!;
  if (field.input === "scale_1_to_5") {
    const select = document.createElement("select");
    select.name = field.field_id;
    select.append(new Option("--", ""));
    for (let i = 1; i <= 5; i++) select.append(new Option(String(i), String(i)));
    return select;
  }
  if (field.input === "choice") {
    const select = document.createElement("select");
    select.name = field.field_id;
    select.append(new Option("--", ""));
    for (const option of field.options ?? []) select.append(new Option(option, option));
    return select;
  }
  const input = document.createElement("input");
  input.type = "text";
  input.name = field.field_id;
  return input;
}

export class AnnotationForm {
  readonly root: HTMLFormElement;
  private errorBox: HTMLElement;
  private template: Template | null = null;

  constructor(
    private api: ApiClient,
    private event: EventView,
    templates: Template[],
    private onSaved: (view: EventView) => void,
  ) {
    this.root = document.createElement("form");
    this.root.className = "annotation-form";

    const picker = document.createElement("select");
    picker.className = "template-picker";
    picker.append(new Option("free text", ""));
    for (const template of templates) {
      picker.append(new Option(template.title, template.template_id));
    }
    picker.addEventListener("change", () => {
      this.template = templates.find((t) => t.template_id === picker.value) ?? null;
      this.renderFields();
    });

    this.errorBox = document.createElement("p");
    this.errorBox.className = "form-error";
    this.root.append(picker);
    this.fieldsBox = document.createElement("div");
    this.root.append(this.fieldsBox, this.errorBox);

    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "Add note";
    this.root.append(submit);
    this.renderFields();

    this.root.addEventListener("submit", (e) => {
      e.preventDefault();
      void this.submit();
    });
  }

  private fieldsBox: HTMLElement;

  private renderFields(): void {
    this.fieldsBox.textContent = "";
    this.errorBox.textContent = "";
    if (this.template === null) {
      const textarea = document.createElement("textarea");
      textarea.name = "text";
      textarea.placeholder = "What was going on?";
      this.fieldsBox.append(textarea);
      return;
    }
    for (const field of this.template.fields) {
      const label = document.createElement("label");
      label.textContent = field.prompt + (field.required ? " *" : "");
      label.append(fieldInput(field.field_id, this.template));
      this.fieldsBox.append(label);
    }
  }

  values(): Record<string, string> {
    const out: Record<string, string> = {};
    const elements = this.root.querySelectorAll<HTMLInputElement>("input, textarea, select");
    elements.forEach((element) => {
      if (element.name) out[element.name] = element.value;
    });
    return out;
  }

  buildSubmission(): { body?: AnnotationSubmission; validation: ValidationResult } {
    const values = this.values();
    if (this.template === null) {
      const text = (values["text"] ?? "").trim();
      if (text === "") {
        return { validation: { ok: false, field_id: "text", message: "write something first" } };
      }
      return { body: { kind: "free_text", text }, validation: { ok: true } };
    }
    const { responses, validation } = collectResponses(this.template, values);
    if (!validation.ok) return { validation };
    return {
      body: {
        kind: "template",
        template_id: this.template.template_id,
        responses,
        text: (values["text"] ?? "").trim(),
      },
      validation: { ok: true },
    };
  }

  markInvalid(fieldId: string, message: string): void {
    this.errorBox.textContent = `${fieldId}: ${message}`;
    const input = this.root.querySelector<HTMLElement>(`[name="${fieldId}"]`);
    input?.classList.add("invalid");
  }

  private async submit(): Promise<void> {
    this.root.querySelectorAll(".invalid").forEach((n) => n.classList.remove("invalid"));
    const { body, validation } = this.buildSubmission();
    if (!validation.ok || !body) {
      this.markInvalid(validation.field_id ?? "?", validation.message ?? "invalid");
      return;
    }
    try {
      const view = await this.api.annotate(this.event.id, body);
      this.root.reset();
      this.errorBox.textContent = "";
      this.onSaved(view);
    } catch (err) {
      if (err instanceof ApiError && typeof err.detail === "object" && err.detail !== null) {
        const detail = err.detail as { field_id?: string; error?: string };
        this.markInvalid(detail.field_id ?? "?", detail.error ?? "rejected");
      } else {
        this.errorBox.textContent = "couldn't save the note (gateway unreachable?)";
      }
    }
  }
}
