import { beforeEach, describe, expect, it, vi } from "vitest";

import { AnnotationScreen } from "../src/annotate";
import type { NextItemPayload, SubmitPayload, SubmitResponse } from "../src/types";

const TARGET = "Rychlá hnědá liška skáče.";

function makePayload(overrides: Partial<NextItemPayload> = {}): NextItemPayload {
  return {
    complete: false,
    protocol: "ESA",
    document_index: 0,
    instructions: "Mark the errors.",
    aliases: ["sys1"],
    segments: [
      {
        src: { kind: "text", value: "The quick brown fox jumps." },
        ref: null,
        outputs: { sys1: { kind: "text", value: TARGET } },
      },
    ],
    sliders: [{ name: "Quality", anchors: ["0: broken", "100: perfect"] }],
    progress: { done: 0, total: 3 },
    flags: {
      granularity_toggle: true,
      alignment_hover: false,
      postedit: false,
      redo: false,
      contrastive: false,
      skip_allowed: false,
    },
    ...overrides,
  };
}

function mount(
  payload: NextItemPayload,
  submit: (body: SubmitPayload) => Promise<SubmitResponse> = async () => ({
    status: "accepted",
  }),
) {
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app")!;
  const accepted = vi.fn();
  const screen = new AnnotationScreen(root, payload, submit, accepted);
  return { root, screen, accepted };
}

function clickCp(root: HTMLElement, alias: string, index: number): void {
  const block = root.querySelector<HTMLElement>(`.output-block[data-alias="${alias}"]`)!;
  const node = block.querySelector<HTMLElement>(`.cp[data-i="${index}"]`)!;
  node.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("span contract (criterion 12)", () => {
  it("character-mode clicks at offsets 1 and 5 submit span (1,5)", () => {
    const { root, screen } = mount(makePayload());
    screen.granularity = "character";
    for (const output of root.querySelectorAll(".output-block")) void output;
    (root.querySelector(".granularity-toggle select") as HTMLSelectElement).value = "character";
    root
      .querySelector(".granularity-toggle select")!
      .dispatchEvent(new Event("change", { bubbles: true }));

    clickCp(root, "sys1", 1);
    clickCp(root, "sys1", 5);

    const body = screen.collect();
    expect(body.outputs.sys1.segments[0].spans).toEqual([
      { start_i: 1, end_i: 5, severity: "minor", origin: "human" },
    ]);
    expect(body.events.filter((e) => e.kind === "span_create")).toHaveLength(1);
  });

  it("word-mode clicks snap to word boundaries", () => {
    const { root, screen } = mount(makePayload());
    expect(screen.granularity).toBe("word");
    clickCp(root, "sys1", 2); // inside "Rychlá"
    clickCp(root, "sys1", 9); // inside "hnědá"
    const spans = screen.collect().outputs.sys1.segments[0].spans;
    expect(spans).toEqual([{ start_i: 0, end_i: 11, severity: "minor", origin: "human" }]);
  });

  it("deleting a prefilled span emits span_delete with origin=prefilled", () => {
    const payload = makePayload({ protocol: "ESA^AI" });
    payload.segments[0].outputs.sys1.prefilled_spans = [
      { start_i: 7, end_i: 11, severity: "minor", origin: "prefilled" },
    ];
    const { root, screen } = mount(payload);

    const block = root.querySelector('.output-block[data-alias="sys1"]')!;
    const prefilledCp = block.querySelector('.cp[data-i="8"]')!;
    expect(prefilledCp.classList.contains("span-prefilled")).toBe(true);

    (block.querySelector(".span-list .delete-span") as HTMLButtonElement).click();

    const deletions = screen.events.filter((e) => e.kind === "span_delete");
    expect(deletions).toHaveLength(1);
    expect(deletions[0].payload).toMatchObject({ start_i: 7, end_i: 11, origin: "prefilled" });
    expect(screen.collect().outputs.sys1.segments[0].spans).toEqual([]);
  });

  it("score slider movements are captured per output", () => {
    const { root, screen } = mount(makePayload());
    const slider = root.querySelector(".score-slider") as HTMLInputElement;
    slider.value = "83";
    slider.dispatchEvent(new Event("input", { bubbles: true }));
    expect(screen.collect().outputs.sys1.segments[0].score).toBe(83);
    expect(screen.events.some((e) => e.kind === "score_set" && e.payload.score === 83)).toBe(true);
  });

  it("the missing sentinel toggles an omission marker", () => {
    const { root, screen } = mount(makePayload());
    (root.querySelector(".missing-chip") as HTMLElement).dispatchEvent(
      new MouseEvent("click", { bubbles: true }),
    );
    expect(screen.collect().outputs.sys1.segments[0].missing).toBe(true);
  });
});

describe("tutorial gating (criterion 13)", () => {
  it("blocked submissions show the warning and do not advance", async () => {
    const submit = vi.fn(async (): Promise<SubmitResponse> => ({
      status: "blocked",
      warnings: ["Please set score between 70-80."],
    }));
    const { root, screen, accepted } = mount(makePayload(), submit);

    await screen.submit();

    const banner = root.querySelector(".tutorial-banner")!;
    expect(banner.classList.contains("hidden")).toBe(false);
    expect(banner.textContent).toContain("Please set score between 70-80.");
    expect(accepted).not.toHaveBeenCalled();
    expect(root.querySelector(".skip-tutorial")).toBeNull(); // skip not allowed here
  });

  it("advances once the conditions are met", async () => {
    let calls = 0;
    const submit = async (): Promise<SubmitResponse> => {
      calls += 1;
      return calls === 1
        ? { status: "blocked", warnings: ["w"] }
        : { status: "accepted" };
    };
    const { screen, accepted } = mount(makePayload(), submit);
    await screen.submit();
    expect(accepted).not.toHaveBeenCalled();
    await screen.submit();
    expect(accepted).toHaveBeenCalledTimes(1);
  });

  it("skip button appears when allowed and resubmits with skip_tutorial", async () => {
    const bodies: SubmitPayload[] = [];
    const submit = async (body: SubmitPayload): Promise<SubmitResponse> => {
      bodies.push(body);
      return bodies.length === 1
        ? { status: "blocked", warnings: ["w"] }
        : { status: "accepted" };
    };
    const payload = makePayload();
    payload.flags.skip_allowed = true;
    const { root, accepted, screen } = mount(payload, submit);

    await screen.submit();
    const skip = root.querySelector(".skip-tutorial") as HTMLButtonElement;
    expect(skip).not.toBeNull();
    skip.click();
    await vi.waitFor(() => expect(accepted).toHaveBeenCalled());

    expect(bodies[0].skip_tutorial).toBeUndefined();
    expect(bodies[1].skip_tutorial).toBe(true);
    expect(bodies[1].events.some((e) => e.kind === "tutorial_skip")).toBe(true);
  });
});

describe("model blindness", () => {
  it("submissions reference aliases only", () => {
    const payload = makePayload({ aliases: ["sys1", "sys2"] });
    payload.segments[0].outputs.sys2 = { kind: "text", value: "Jiný překlad lišky." };
    payload.flags.contrastive = true;
    const { screen } = mount(payload);
    const body = screen.collect();
    expect(Object.keys(body.outputs).sort()).toEqual(["sys1", "sys2"]);
  });
});
