/** Diff rendering and the accept/reject edit session.
 * Revisions stay provisional until accepted; successive requests build on
 * the last accepted text. */

import type { DiffOp, EditResponse } from "./api.js";

export interface EditBackend {
  edit(selectedText: string, instruction: string): Promise<EditResponse>;
}

export function renderDiff(doc: Document, ops: DiffOp[]): HTMLElement {
  const container = doc.createElement("div");
  container.className = "gf-diff";
  for (const op of ops) {
    const span = doc.createElement("span");
    span.className = `gf-diff-${op.op}`;
    span.textContent = op.text + " ";
    container.appendChild(span);
  }
  return container;
}

export class EditSession {
  private acceptedText: string;
  private pending: EditResponse | null = null;

  constructor(
    private readonly backend: EditBackend,
    initialText: string,
  ) {
    this.acceptedText = initialText;
  }

  get current(): string {
    return this.acceptedText;
  }

  get hasPending(): boolean {
    return this.pending !== null;
  }

  get pendingOps(): DiffOp[] {
    return this.pending?.diff ?? [];
  }

  /** Request a revision of the last accepted text. */
  async request(instruction: string): Promise<EditResponse> {
    const response = await this.backend.edit(this.acceptedText, instruction);
    this.pending = response;
    return response;
  }

  /** Adopt the pending revision; the next request builds on it. */
  accept(): string {
    if (this.pending) {
      this.acceptedText = this.pending.revised_text;
      this.pending = null;
    }
    return this.acceptedText;
  }

  /** Discard the pending revision; the original text stands. */
  reject(): string {
    this.pending = null;
    return this.acceptedText;
  }
}
