// Span selection logic, kept free of DOM concerns so it can be tested headless.
//
// All indices are Unicode scalar (code point) offsets, matching what the
// server validates against. JS strings are UTF-16, so everything here works
// over Array.from(text) rather than raw string indices.

import type { ActionEventData, Granularity, Severity, SpanData, SpanOrigin } from "./types";

export function codePoints(text: string): string[] {
  return Array.from(text);
}

export function codePointLength(text: string): number {
  return codePoints(text).length;
}

const isSpace = (cp: string) => /\s/.test(cp);

/** Inclusive bounds of the word containing `index`; whitespace snaps to the
 * nearest word in reading direction. */
export function wordBoundsAt(text: string, index: number): [number, number] {
  const cps = codePoints(text);
  if (cps.length === 0) return [0, 0];
  let i = Math.max(0, Math.min(index, cps.length - 1));
  if (isSpace(cps[i])) {
    let forward = i;
    while (forward < cps.length && isSpace(cps[forward])) forward++;
    let backward = i;
    while (backward >= 0 && isSpace(cps[backward])) backward--;
    i = forward < cps.length ? forward : backward;
    if (i < 0) return [0, cps.length - 1];
  }
  let start = i;
  while (start > 0 && !isSpace(cps[start - 1])) start--;
  let end = i;
  while (end < cps.length - 1 && !isSpace(cps[end + 1])) end++;
  return [start, end];
}

/** Turn a click-start/click-end pair into inclusive span indices. Word mode
 * snaps each end outward to its word boundary before emitting. */
export function clickPairToSpan(
  text: string,
  first: number,
  second: number,
  granularity: Granularity,
): { start_i: number; end_i: number } {
  const lo = Math.min(first, second);
  const hi = Math.max(first, second);
  if (granularity === "character") {
    return { start_i: lo, end_i: hi };
  }
  const [start] = wordBoundsAt(text, lo);
  const [, end] = wordBoundsAt(text, hi);
  return { start_i: start, end_i: end };
}

export interface TrackerEvent {
  kind: ActionEventData["kind"];
  payload: Record<string, unknown>;
}

/** Per-output span state machine: two clicks make a span, clicking an
 * existing highlight cycles severity and then removes it. Emits the action
 * events the timeline logging needs. */
export class SpanTracker {
  spans: SpanData[] = [];
  events: TrackerEvent[] = [];
  private anchor: number | null = null;

  constructor(
    private readonly text: string,
    public granularity: Granularity = "word",
    prefilled: SpanData[] = [],
  ) {
    this.spans = prefilled.map((s) => ({ ...s, origin: s.origin ?? "prefilled" }));
  }

  get pendingAnchor(): number | null {
    return this.anchor;
  }

  private emit(kind: ActionEventData["kind"], payload: Record<string, unknown>): void {
    this.events.push({ kind, payload });
  }

  spanAt(index: number): number {
    return this.spans.findIndex((s) => s.start_i <= index && index <= s.end_i);
  }

  /** A click on plain text: first click anchors, second click closes the span. */
  click(index: number, severity: Severity = "minor"): SpanData | null {
    const max = codePointLength(this.text) - 1;
    index = Math.max(0, Math.min(index, max));
    if (this.anchor === null) {
      this.anchor = index;
      return null;
    }
    const { start_i, end_i } = clickPairToSpan(this.text, this.anchor, index, this.granularity);
    this.anchor = null;
    const span: SpanData = { start_i, end_i, severity, origin: "human" };
    this.spans.push(span);
    this.emit("span_create", { start_i, end_i, severity, origin: "human" });
    return span;
  }

  cancelPending(): void {
    this.anchor = null;
  }

  /** Clicking an existing highlight: minor -> major -> removed. */
  cycle(spanIndex: number): void {
    const span = this.spans[spanIndex];
    if (!span) return;
    if (span.severity === "minor") {
      this.setSeverity(spanIndex, "major");
    } else {
      this.remove(spanIndex);
    }
  }

  setSeverity(spanIndex: number, severity: Severity): void {
    const span = this.spans[spanIndex];
    if (!span || span.severity === severity) return;
    span.severity = severity;
    if (span.origin === "prefilled") span.origin = "prefilled-edited";
    this.emit("severity_change", {
      start_i: span.start_i,
      end_i: span.end_i,
      severity,
      origin: span.origin,
    });
  }

  setCategory(spanIndex: number, category: string): void {
    const span = this.spans[spanIndex];
    if (!span) return;
    span.category = category;
    if (span.origin === "prefilled") span.origin = "prefilled-edited";
  }

  remove(spanIndex: number): void {
    const span = this.spans[spanIndex];
    if (!span) return;
    this.spans.splice(spanIndex, 1);
    this.emit("span_delete", {
      start_i: span.start_i,
      end_i: span.end_i,
      severity: span.severity,
      origin: span.origin,
    });
  }
}

/** Origins the UI must render distinctly (prefilled spans are editable). */
export const ORIGIN_CLASSES: Record<SpanOrigin, string> = {
  human: "span-human",
  prefilled: "span-prefilled",
  "prefilled-edited": "span-prefilled-edited",
};
