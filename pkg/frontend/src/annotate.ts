// Annotation screen: renders one document at a time, collects scores, error
// spans, post-edits and comments, and submits them as a whole-document unit.
// Everything is plain DOM so the screen can be driven headless in tests.

import { proportionalWindow } from "./align";
import { ORIGIN_CLASSES, SpanTracker, codePoints } from "./spans";
import type {
  ActionEventData,
  ContentData,
  Granularity,
  NextItemPayload,
  SpanData,
  SubmitPayload,
  SubmitResponse,
} from "./types";

export const MQM_CATEGORIES = [
  "Accuracy/Mistranslation",
  "Accuracy/Omission",
  "Accuracy/Addition",
  "Accuracy/Overtranslated",
  "Accuracy/Undertranslated",
  "Fluency/Grammar",
  "Fluency/Spelling",
  "Fluency/Punctuation",
  "Fluency/Inconsistency",
  "Terminology",
  "Style/Awkward",
  "Locale/Format",
  "Other",
];

interface OutputState {
  alias: string;
  segment: number;
  tracker: SpanTracker | null; // null for non-text or DA outputs
  score: number;
  scoreTouched: boolean;
  missing: boolean;
  postedit: string | null;
  textEl: HTMLElement | null;
  spanListEl: HTMLElement | null;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderMedia(content: ContentData): HTMLElement {
  if (content.kind === "audio") {
    const audio = el("audio");
    audio.setAttribute("controls", "");
    audio.setAttribute("src", content.value);
    return audio;
  }
  if (content.kind === "video") {
    const video = el("video");
    video.setAttribute("controls", "");
    video.setAttribute("src", content.value);
    return video;
  }
  const div = el("div", "html-content");
  div.innerHTML = content.value; // campaign-author supplied markup
  return div;
}

export class AnnotationScreen {
  readonly events: ActionEventData[] = [];
  granularity: Granularity = "word";
  alignmentOn = true;
  private outputs: OutputState[] = [];
  private comment = "";
  private warningsEl: HTMLElement;
  private skipRequested = false;
  private readonly epoch = Date.now();

  constructor(
    private readonly root: HTMLElement,
    readonly payload: NextItemPayload,
    private readonly onSubmit: (body: SubmitPayload) => Promise<SubmitResponse>,
    private readonly onAccepted: () => void,
  ) {
    this.warningsEl = el("div", "tutorial-banner hidden");
    this.render();
  }

  private now(): number {
    return Date.now() - this.epoch;
  }

  private record(
    kind: ActionEventData["kind"],
    segment: number | null,
    alias: string | null,
    payload: Record<string, unknown> = {},
  ): void {
    this.events.push({ ts: this.now(), segment, model: alias, kind, payload });
  }

  private render(): void {
    const p = this.payload;
    this.root.textContent = "";
    const screen = el("div", "annotation-screen");

    const header = el("div", "screen-header");
    header.appendChild(el("div", "progress", `Document ${p.progress.done + 1} of ${p.progress.total}`));
    if (p.instructions) {
      header.appendChild(el("div", "instructions", p.instructions));
    }
    if (p.flags.granularity_toggle) {
      header.appendChild(this.renderGranularityToggle());
    }
    if (p.flags.alignment_hover) {
      header.appendChild(this.renderAlignmentToggle());
    }
    screen.appendChild(header);
    screen.appendChild(this.warningsEl);

    p.segments.forEach((_, segIdx) => screen.appendChild(this.renderSegment(segIdx)));

    const commentBox = el("textarea", "comment-box") as HTMLTextAreaElement;
    commentBox.placeholder = "Comments or issues with this document (optional)";
    commentBox.addEventListener("change", () => {
      this.comment = commentBox.value;
      this.record("comment_set", null, null, { length: commentBox.value.length });
    });
    screen.appendChild(commentBox);

    const submit = el("button", "submit-button", "Submit document") as HTMLButtonElement;
    submit.addEventListener("click", () => void this.submit());
    screen.appendChild(submit);

    this.root.appendChild(screen);
  }

  private renderGranularityToggle(): HTMLElement {
    const wrap = el("label", "granularity-toggle", "Span granularity: ");
    const select = el("select") as HTMLSelectElement;
    for (const mode of ["word", "character"]) {
      const option = el("option", undefined, mode) as HTMLOptionElement;
      option.value = mode;
      select.appendChild(option);
    }
    select.value = this.granularity;
    select.addEventListener("change", () => {
      this.granularity = select.value as Granularity;
      for (const output of this.outputs) {
        if (output.tracker) output.tracker.granularity = this.granularity;
      }
    });
    wrap.appendChild(select);
    return wrap;
  }

  private renderAlignmentToggle(): HTMLElement {
    const wrap = el("label", "alignment-toggle", "Alignment hover ");
    const box = el("input") as HTMLInputElement;
    box.type = "checkbox";
    box.checked = this.alignmentOn;
    box.addEventListener("change", () => {
      this.alignmentOn = box.checked;
    });
    wrap.appendChild(box);
    return wrap;
  }

  private renderSegment(segIdx: number): HTMLElement {
    const segment = this.payload.segments[segIdx];
    const container = el("div", "segment");
    container.dataset.segment = String(segIdx);

    const srcBlock = el("div", "source-block");
    srcBlock.appendChild(el("div", "block-label", "Source"));
    srcBlock.appendChild(this.renderSource(segment.src, segIdx));
    container.appendChild(srcBlock);
    if (segment.ref) {
      const refBlock = el("div", "reference-block");
      refBlock.appendChild(el("div", "block-label", "Reference"));
      refBlock.appendChild(
        segment.ref.kind === "text"
          ? el("div", "plain-text", segment.ref.value)
          : renderMedia(segment.ref),
      );
      container.appendChild(refBlock);
    }

    const row = el("div", this.payload.flags.contrastive ? "outputs contrastive" : "outputs");
    for (const alias of this.payload.aliases) {
      row.appendChild(this.renderOutput(segIdx, alias));
    }
    container.appendChild(row);
    return container;
  }

  private renderSource(src: ContentData, segIdx: number): HTMLElement {
    if (src.kind !== "text") return renderMedia(src);
    const block = el("div", "text source-text");
    const cps = codePoints(src.value);
    cps.forEach((cp, i) => {
      const span = el("span", "cp", cp);
      span.dataset.i = String(i);
      if (this.payload.flags.alignment_hover) {
        span.addEventListener("mouseenter", () => this.hoverAlign(segIdx, i, cps.length, true));
        span.addEventListener("mouseleave", () => this.hoverAlign(segIdx, i, cps.length, false));
      }
      block.appendChild(span);
    });
    return block;
  }

  private hoverAlign(segIdx: number, srcIndex: number, srcLen: number, on: boolean): void {
    if (!this.alignmentOn) return;
    for (const output of this.outputs) {
      if (output.segment !== segIdx || !output.textEl) continue;
      const nodes = output.textEl.querySelectorAll<HTMLElement>(".cp");
      if (!on) {
        nodes.forEach((node) => node.classList.remove("align-hint"));
        continue;
      }
      const [lo, hi] = proportionalWindow(srcLen, nodes.length, srcIndex);
      nodes.forEach((node, i) => node.classList.toggle("align-hint", i >= lo && i <= hi));
    }
  }

  private renderOutput(segIdx: number, alias: string): HTMLElement {
    const segment = this.payload.segments[segIdx];
    const output = segment.outputs[alias];
    const spanProtocol = this.payload.protocol !== "DA" && output.kind === "text";
    const state: OutputState = {
      alias,
      segment: segIdx,
      tracker: spanProtocol
        ? new SpanTracker(output.value, this.granularity, output.prefilled_spans ?? [])
        : null,
      score: 50,
      scoreTouched: false,
      missing: false,
      postedit: null,
      textEl: null,
      spanListEl: null,
    };
    this.outputs.push(state);

    const block = el("div", "output-block");
    block.dataset.alias = alias;
    block.dataset.segment = String(segIdx);
    block.appendChild(el("div", "block-label", `Output ${alias.replace("sys", "")}`));

    if (output.kind !== "text") {
      block.appendChild(renderMedia(output));
    } else if (!state.tracker) {
      block.appendChild(el("div", "plain-text", output.value));
    } else {
      const text = el("div", "text output-text");
      state.textEl = text;
      codePoints(output.value).forEach((cp, i) => {
        const span = el("span", "cp", cp);
        span.dataset.i = String(i);
        span.addEventListener("click", () => this.clickOutput(state, i));
        text.appendChild(span);
      });
      const missing = el("span", "missing-chip", "[missing]");
      missing.setAttribute("role", "button");
      missing.title = "Mark content omitted at the end of this segment";
      missing.addEventListener("click", () => {
        state.missing = !state.missing;
        missing.classList.toggle("active", state.missing);
        this.record(state.missing ? "span_create" : "span_delete", segIdx, alias, {
          missing: true,
        });
      });
      text.appendChild(missing);
      block.appendChild(text);

      const spanList = el("ul", "span-list");
      state.spanListEl = spanList;
      block.appendChild(spanList);
      this.paintSpans(state);
    }

    if (this.payload.flags.postedit && output.kind === "text") {
      const editor = el("textarea", "postedit-box") as HTMLTextAreaElement;
      editor.value = output.value;
      editor.addEventListener("change", () => {
        state.postedit = editor.value;
      });
      block.appendChild(editor);
    }

    block.appendChild(this.renderSliders(state));
    return block;
  }

  private renderSliders(state: OutputState): HTMLElement {
    const wrap = el("div", "sliders");
    for (const slider of this.payload.sliders) {
      const label = el("label", "slider-label", `${slider.name}: `);
      const value = el("span", "slider-value", "50");
      const input = el("input", "score-slider") as HTMLInputElement;
      input.type = "range";
      input.min = "0";
      input.max = "100";
      input.value = "50";
      input.addEventListener("input", () => {
        state.score = Number(input.value);
        state.scoreTouched = true;
        value.textContent = input.value;
        this.record("score_set", state.segment, state.alias, { score: state.score });
      });
      label.appendChild(input);
      label.appendChild(value);
      wrap.appendChild(label);
      const anchors = el("div", "anchors");
      for (const anchor of slider.anchors) {
        anchors.appendChild(el("span", "anchor", anchor));
      }
      wrap.appendChild(anchors);
    }
    return wrap;
  }

  private clickOutput(state: OutputState, index: number): void {
    const tracker = state.tracker;
    if (!tracker) return;
    const existing = tracker.spanAt(index);
    if (existing >= 0 && tracker.pendingAnchor === null) {
      const span = tracker.spans[existing];
      tracker.cycle(existing);
      this.flushTrackerEvents(state);
      if (this.payload.protocol === "MQM" && tracker.spans.includes(span)) {
        // still present: severity changed, keep its category editable
      }
      this.paintSpans(state);
      return;
    }
    const created = tracker.click(index);
    this.flushTrackerEvents(state);
    if (created && this.payload.protocol === "MQM") {
      tracker.setCategory(tracker.spans.indexOf(created), MQM_CATEGORIES[0]);
    }
    this.paintSpans(state);
  }

  private flushTrackerEvents(state: OutputState): void {
    const tracker = state.tracker;
    if (!tracker) return;
    for (const event of tracker.events.splice(0)) {
      this.record(event.kind, state.segment, state.alias, event.payload);
    }
  }

  /** Repaint highlight classes and the span list from tracker state. */
  private paintSpans(state: OutputState): void {
    const tracker = state.tracker;
    if (!tracker || !state.textEl || !state.spanListEl) return;
    const nodes = state.textEl.querySelectorAll<HTMLElement>(".cp");
    nodes.forEach((node, i) => {
      node.className = "cp";
      delete node.dataset.severity;
      const spanIdx = tracker.spanAt(i);
      if (spanIdx >= 0) {
        const span = tracker.spans[spanIdx];
        node.classList.add("marked", `sev-${span.severity}`, ORIGIN_CLASSES[span.origin]);
        node.dataset.severity = span.severity;
      }
      if (tracker.pendingAnchor === i) node.classList.add("anchor-pending");
    });

    state.spanListEl.textContent = "";
    tracker.spans.forEach((span, idx) => {
      const item = el("li", `span-item ${ORIGIN_CLASSES[span.origin]}`);
      item.appendChild(
        el("span", "span-desc",
           `[${span.start_i}-${span.end_i}] ${span.severity}` +
           (span.origin !== "human" ? ` (${span.origin})` : "")),
      );
      if (this.payload.protocol === "MQM") {
        const category = el("select", "category-picker") as HTMLSelectElement;
        for (const name of MQM_CATEGORIES) {
          const option = el("option", undefined, name) as HTMLOptionElement;
          option.value = name;
          category.appendChild(option);
        }
        category.value = span.category ?? MQM_CATEGORIES[0];
        category.addEventListener("change", () => tracker.setCategory(idx, category.value));
        item.appendChild(category);
      }
      const severity = el("button", "severity-button", span.severity) as HTMLButtonElement;
      severity.addEventListener("click", () => {
        tracker.setSeverity(idx, span.severity === "minor" ? "major" : "minor");
        this.flushTrackerEvents(state);
        this.paintSpans(state);
      });
      item.appendChild(severity);
      const remove = el("button", "delete-span", "remove") as HTMLButtonElement;
      remove.addEventListener("click", () => {
        tracker.remove(idx);
        this.flushTrackerEvents(state);
        this.paintSpans(state);
      });
      item.appendChild(remove);
      state.spanListEl!.appendChild(item);
    });
  }

  showWarnings(warnings: string[]): void {
    this.warningsEl.textContent = "";
    this.warningsEl.classList.remove("hidden");
    for (const warning of warnings) {
      this.warningsEl.appendChild(el("div", "tutorial-warning", warning));
    }
    if (this.payload.flags.skip_allowed) {
      const skip = el("button", "skip-tutorial", "Skip tutorial") as HTMLButtonElement;
      skip.addEventListener("click", () => {
        this.skipRequested = true;
        this.record("tutorial_skip", null, null, {});
        void this.submit();
      });
      this.warningsEl.appendChild(skip);
    }
    this.record("tutorial_fail", null, null, { warnings });
  }

  collect(): SubmitPayload {
    const outputs: SubmitPayload["outputs"] = {};
    for (const alias of this.payload.aliases) {
      outputs[alias] = { segments: [] };
    }
    for (const state of this.outputs) {
      const spans: SpanData[] = state.tracker ? state.tracker.spans.map((s) => ({ ...s })) : [];
      if (this.payload.protocol !== "MQM") {
        for (const span of spans) delete span.category;
      }
      outputs[state.alias].segments[state.segment] = {
        score: state.score,
        spans,
        ...(state.postedit !== null ? { postedit: state.postedit } : {}),
        ...(state.missing ? { missing: true } : {}),
      };
    }
    return {
      document_index: this.payload.document_index,
      outputs,
      ...(this.comment ? { comment: this.comment } : {}),
      ...(this.skipRequested ? { skip_tutorial: true } : {}),
      events: [...this.events, { ts: this.now(), segment: null, model: null, kind: "submit", payload: {} }],
    };
  }

  async submit(): Promise<void> {
    const result = await this.onSubmit(this.collect());
    if (result.status === "blocked") {
      this.showWarnings(result.warnings ?? []);
      return;
    }
    this.onAccepted();
  }
}

export function renderCompletion(root: HTMLElement, verdict: string, token: string): void {
  root.textContent = "";
  const done = el("div", "completion-screen");
  done.appendChild(el("h2", undefined, "All done, thank you!"));
  done.appendChild(el("p", undefined, "Your completion code (paste it into the crowdsourcing form):"));
  done.appendChild(el("code", `verdict-${verdict}`, token));
  root.appendChild(done);
}

export async function runAnnotator(
  root: HTMLElement,
  api: {
    nextItem: () => Promise<import("./types").NextResponse>;
    submit: (body: SubmitPayload) => Promise<SubmitResponse>;
  },
): Promise<void> {
  const item = await api.nextItem();
  if (item.complete) {
    renderCompletion(root, item.verdict, item.token);
    return;
  }
  new AnnotationScreen(root, item, (body) => api.submit(body), () => {
    void runAnnotator(root, api);
  });
}
