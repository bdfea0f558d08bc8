/** Suggestion popup: carousel over candidates, copy-to-clipboard, NoData
 * message. It renders outside the form and never writes a form element. */

import type { Candidate } from "./api.js";

export interface PopupPosition {
  left: number;
  top: number;
}

export interface RectLike {
  left: number;
  top: number;
  right: number;
  bottom: number;
  width: number;
  height: number;
}

export const POPUP_SIZE = { width: 280, height: 120 };
export const NOTIFICATION_MS = 1500;

/** Place the popup under its anchor, clamped so it stays fully on screen. */
export function clampPosition(
  anchor: RectLike,
  viewport: { width: number; height: number },
  size: { width: number; height: number } = POPUP_SIZE,
): PopupPosition {
  let left = anchor.left;
  let top = anchor.bottom + 4;
  if (left + size.width > viewport.width) {
    left = Math.max(0, viewport.width - size.width);
  }
  if (top + size.height > viewport.height) {
    top = Math.max(0, anchor.top - size.height - 4);
  }
  return { left, top };
}

export function stripCitationMarkers(value: string): string {
  return value.replace(/\s*\[\d+\]/g, "").trim();
}

export type ClipboardWriter = (text: string) => Promise<void>;

export class SuggestionPopup {
  readonly root: HTMLElement;
  private candidates: Candidate[] = [];
  private index = 0;
  private notificationTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly doc: Document,
    private readonly writeClipboard: ClipboardWriter,
  ) {
    this.root = doc.createElement("div");
    this.root.className = "gf-popup";
    this.root.hidden = true;
    doc.body.appendChild(this.root);
  }

  get currentCandidate(): Candidate | null {
    return this.candidates[this.index] ?? null;
  }

  get isOpen(): boolean {
    return !this.root.hidden;
  }

  openFor(anchor: HTMLElement, candidates: Candidate[]): void {
    this.candidates = candidates;
    this.index = 0;
    this.position(anchor);
    this.render();
    this.root.hidden = false;
  }

  openNoData(anchor: HTMLElement): void {
    this.candidates = [];
    this.index = 0;
    this.position(anchor);
    this.root.replaceChildren();
    const message = this.doc.createElement("p");
    message.className = "gf-nodata";
    message.textContent = "No data available for this field yet.";
    this.root.appendChild(message);
    this.root.hidden = false;
  }

  close(): void {
    this.root.hidden = true;
    this.candidates = [];
  }

  next(): void {
    if (this.candidates.length > 0) {
      this.index = (this.index + 1) % this.candidates.length;
      this.render();
    }
  }

  prev(): void {
    if (this.candidates.length > 0) {
      this.index =
        (this.index - 1 + this.candidates.length) % this.candidates.length;
      this.render();
    }
  }

  async copyCurrent(): Promise<void> {
    const candidate = this.currentCandidate;
    if (!candidate) {
      return;
    }
    try {
      await this.writeClipboard(stripCitationMarkers(candidate.value));
      this.notify("Copied. Paste it into the field when ready.");
    } catch {
      this.notify("Clipboard unavailable; copy manually.", true);
    }
  }

  private position(anchor: HTMLElement): void {
    const view = this.doc.defaultView;
    const rect = anchor.getBoundingClientRect();
    const { left, top } = clampPosition(rect, {
      width: view?.innerWidth ?? 1024,
      height: view?.innerHeight ?? 768,
    });
    this.root.style.left = `${left}px`;
    this.root.style.top = `${top}px`;
  }

  private render(): void {
    this.root.replaceChildren();
    const candidate = this.currentCandidate;
    if (!candidate) {
      return;
    }
    const value = this.doc.createElement("p");
    value.className = "gf-value";
    value.textContent = candidate.value;

    const badge = this.doc.createElement("span");
    badge.className = `gf-badge gf-badge-${candidate.source_type.toLowerCase()}`;
    badge.textContent = candidate.source_type;

    const counter = this.doc.createElement("span");
    counter.className = "gf-counter";
    counter.textContent = `${this.index + 1} / ${this.candidates.length}`;

    const prev = this.button("gf-prev", "<", () => this.prev());
    const next = this.button("gf-next", ">", () => this.next());
    const copy = this.button("gf-copy", "Copy", () => {
      void this.copyCurrent();
    });

    this.root.append(badge, value, prev, counter, next, copy);
  }

  private button(cls: string, label: string, onClick: () => void): HTMLButtonElement {
    const el = this.doc.createElement("button");
    el.type = "button";
    el.className = cls;
    el.textContent = label;
    el.addEventListener("click", onClick);
    return el;
  }

  private notify(text: string, isError = false): void {
    const existing = this.root.querySelector(".gf-toast");
    existing?.remove();
    const toast = this.doc.createElement("div");
    toast.className = isError ? "gf-toast gf-toast-error" : "gf-toast";
    toast.textContent = text;
    this.root.appendChild(toast);
    if (this.notificationTimer) {
      clearTimeout(this.notificationTimer);
    }
    this.notificationTimer = setTimeout(() => toast.remove(), NOTIFICATION_MS);
  }
}
