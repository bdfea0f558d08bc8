/** Sample-form rendering and copilot wiring.
 * The copilot reads the form and shows suggestions; only the user's typing
 * (or an explicit diff Accept) ever writes a field. */

import type { ApiClient, FieldDescriptorPayload } from "./api.js";
import { evaluateVisibility, type SchemaField } from "./condlogic.js";
import { SuggestionPopup } from "./popup.js";

export interface FormQuestionSpec {
  descriptor: FieldDescriptorPayload;
  question: string;
}

export interface FormSpec {
  name: string;
  questions: FormQuestionSpec[];
}

export interface CopilotOptions {
  enabled?: boolean;
  onFieldMapped?: (label: string, fieldId: string | null) => void;
}

function inputFor(doc: Document, descriptor: FieldDescriptorPayload): HTMLElement {
  const kind = descriptor.input_kind ?? "TextInput";
  if (kind === "Select") {
    const select = doc.createElement("select");
    const blank = doc.createElement("option");
    blank.value = "";
    blank.textContent = "--";
    select.appendChild(blank);
    for (const option of descriptor.options ?? []) {
      const el = doc.createElement("option");
      el.value = option;
      el.textContent = option;
      select.appendChild(el);
    }
    return select;
  }
  if (kind === "TextArea") {
    return doc.createElement("textarea");
  }
  const input = doc.createElement("input");
  input.type = kind === "DateInput" ? "text" : "text";
  if (descriptor.placeholder) {
    input.placeholder = descriptor.placeholder;
  }
  return input;
}

export class CopilotForm {
  readonly form: HTMLFormElement;
  readonly popup: SuggestionPopup;
  /** canonical field id -> current value, for conditional evaluation */
  readonly values: Record<string, string> = {};
  private readonly fieldIds = new Map<HTMLElement, string | null>();
  private readonly rowByFieldId = new Map<string, HTMLElement>();
  private enabled: boolean;
  private inflight = 0;

  constructor(
    doc: Document,
    private readonly api: ApiClient,
    spec: FormSpec,
    private readonly schemaFields: SchemaField[],
    popup?: SuggestionPopup,
    options: CopilotOptions = {},
  ) {
    this.enabled = options.enabled ?? true;
    this.popup =
      popup ??
      new SuggestionPopup(doc, (text) => doc.defaultView!.navigator.clipboard.writeText(text));
    this.form = doc.createElement("form");
    this.form.className = "gf-form";
    this.form.addEventListener("submit", (event) => event.preventDefault());

    for (const question of spec.questions) {
      const row = doc.createElement("div");
      row.className = "gf-row";
      const label = doc.createElement("label");
      label.textContent = question.descriptor.label_text ?? question.question;
      const input = inputFor(doc, question.descriptor);
      input.setAttribute("data-question", question.question);
      row.append(label, input);
      this.form.appendChild(row);

      input.addEventListener("focus", () => {
        void this.onFocus(input, question);
      });
      input.addEventListener("change", () => {
        this.onValueChange(input);
      });
      void this.premap(input, question, options);
    }
  }

  setEnabled(enabled: boolean): void {
    this.enabled = enabled;
    if (!enabled) {
      this.popup.close();
    }
  }

  get busy(): boolean {
    return this.inflight > 0;
  }

  private async premap(
    input: HTMLElement,
    question: FormQuestionSpec,
    options: CopilotOptions,
  ): Promise<void> {
    this.inflight += 1;
    try {
      const mapping = await this.api.mapField(question.descriptor);
      this.fieldIds.set(input, mapping.field_id);
      if (mapping.field_id) {
        this.rowByFieldId.set(mapping.field_id, input.parentElement as HTMLElement);
      }
      options.onFieldMapped?.(
        question.descriptor.label_text ?? question.question,
        mapping.field_id,
      );
    } catch {
      this.fieldIds.set(input, null);
    } finally {
      this.inflight -= 1;
      if (this.inflight === 0) {
        this.applyVisibility();
      }
    }
  }

  private async onFocus(input: HTMLElement, question: FormQuestionSpec): Promise<void> {
    if (!this.enabled) {
      return;
    }
    this.inflight += 1;
    try {
      const response = await this.api.suggest(question.descriptor, this.values);
      if (response.status === "Suggestions") {
        this.popup.openFor(input, response.candidates);
      } else {
        this.popup.openNoData(input);
      }
    } catch {
      this.popup.openNoData(input);
    } finally {
      this.inflight -= 1;
    }
  }

  private onValueChange(input: HTMLElement): void {
    const fieldId = this.fieldIds.get(input);
    if (fieldId) {
      this.values[fieldId] = (input as HTMLInputElement).value;
    }
    this.applyVisibility();
  }

  /** Re-evaluate the shipped condition set and show/hide rows in place. */
  applyVisibility(): void {
    const state = evaluateVisibility(this.schemaFields, this.values);
    for (const [fieldId, row] of this.rowByFieldId) {
      const hidden = state.visibility[fieldId] === "Hidden";
      (row as HTMLElement).hidden = hidden;
      if (hidden) {
        this.popup.close();
      }
    }
  }

  visibilityOf(fieldId: string): "Visible" | "Hidden" {
    const row = this.rowByFieldId.get(fieldId);
    if (!row) {
      return "Visible";
    }
    return (row as HTMLElement).hidden ? "Hidden" : "Visible";
  }
}
