// Manager dashboard: progress and attention tables, annotation browser,
// task redistribution, and the explicitly gated results view. Rankings are
// fetched only when the manager presses the button; nothing result-shaped
// exists in the DOM before that.

import type { DashboardPayload, RankingReport } from "./types";

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

function formatSeconds(value: number | null): string {
  return value === null ? "n/a" : `${value.toFixed(1)}s`;
}

function formatRate(value: number | null): string {
  return value === null ? "n/a" : `${Math.round(value * 100)}%`;
}

export function renderProgressTable(data: DashboardPayload): HTMLElement {
  const table = el("table", "progress-table");
  const head = el("tr");
  for (const title of ["Annotator", "Progress", "Time/item", "Attention", "Tutorial fails"]) {
    head.appendChild(el("th", undefined, title));
  }
  table.appendChild(head);
  for (const [user, row] of Object.entries(data.users)) {
    const tr = el("tr");
    tr.appendChild(el("td", "user-id", user));
    tr.appendChild(el("td", undefined, `${row.done}/${row.total}`));
    tr.appendChild(el("td", undefined, formatSeconds(row.mean_seconds_per_item)));
    tr.appendChild(
      el("td", undefined,
         row.attention_seen ? `${formatRate(row.attention_pass_rate)} of ${row.attention_seen}` : "n/a"),
    );
    tr.appendChild(el("td", undefined, String(row.tutorial_attempts)));
    table.appendChild(tr);
  }
  return table;
}

export function renderRecordBrowser(data: DashboardPayload): HTMLElement {
  const browser = el("div", "record-browser");
  browser.appendChild(el("h3", undefined, `Annotations (${data.records.length})`));
  for (const record of data.records) {
    const details = el("details", "record");
    const superseded = record["superseded_by"] !== null ? " (superseded)" : "";
    details.appendChild(
      el("summary", undefined,
         `${record["user"]} - document ${record["doc"]} - ${record["model"]}${superseded}`),
    );
    const pre = el("pre", "record-json");
    pre.textContent = JSON.stringify(record, null, 2);
    details.appendChild(pre);
    browser.appendChild(details);
  }
  return browser;
}

/** Ranking rows in descending mean order with a horizontal separation line
 * between adjacent models the significance test tells apart. */
export function renderRanking(report: RankingReport): HTMLElement {
  const container = el("div", "ranking");
  if (report.bias_disclaimer && report.bias_disclaimer_text) {
    container.appendChild(el("div", "bias-disclaimer", report.bias_disclaimer_text));
  }
  const separations = new Set(report.separations);
  const list = el("div", "ranking-rows");
  report.rows.forEach((row, i) => {
    const line = el("div", "ranking-row");
    line.appendChild(el("span", "rank", `${i + 1}.`));
    line.appendChild(el("span", "model", row.model));
    line.appendChild(el("span", "mean", row.mean.toFixed(1)));
    line.appendChild(el("span", "count", `n=${row.n}`));
    list.appendChild(line);
    if (separations.has(i)) {
      const hr = el("hr", "separation-line");
      hr.title = `p < ${report.alpha}`;
      list.appendChild(hr);
    }
  });
  container.appendChild(list);
  container.appendChild(
    el("div", "alpha-note", `Lines separate models with a paired two-sided p below ${report.alpha}.`),
  );
  return container;
}

export interface DashboardApi {
  dashboard: () => Promise<DashboardPayload>;
  revealResults: () => Promise<RankingReport>;
  redistribute: (fromUser: string, toUser: string, documents: number[]) => Promise<unknown>;
  exportUrl: () => string;
}

export class DashboardScreen {
  private resultsContainer: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: DashboardApi,
  ) {
    this.resultsContainer = el("div", "results-container");
  }

  async load(): Promise<void> {
    const data = await this.api.dashboard();
    this.root.textContent = "";
    const screen = el("div", "dashboard-screen");
    screen.appendChild(el("h2", undefined, `Campaign ${data.campaign_id}`));
    screen.appendChild(
      el("div", "campaign-meta",
         `${data.protocol} protocol, ${data.assignment} assignment - ` +
         `${data.items_done}/${data.items_total} items done`),
    );
    if (data.bias_disclaimer) {
      screen.appendChild(el("div", "bias-disclaimer", data.bias_disclaimer));
    }
    screen.appendChild(renderProgressTable(data));

    if (data.assignment === "task-based") {
      screen.appendChild(this.renderRedistributeForm(Object.keys(data.users)));
    }

    const exportLink = el("a", "export-link", "Download annotations (JSON)") as HTMLAnchorElement;
    exportLink.href = this.api.exportUrl();
    screen.appendChild(exportLink);

    // Results stay out of the DOM until explicitly requested, so a manager
    // glancing at progress is never nudged by mid-campaign numbers.
    const reveal = el("button", "show-results", "Show results") as HTMLButtonElement;
    reveal.addEventListener("click", () => void this.reveal());
    screen.appendChild(reveal);
    screen.appendChild(this.resultsContainer);

    screen.appendChild(renderRecordBrowser(data));
    this.root.appendChild(screen);
  }

  private async reveal(): Promise<void> {
    const report = await this.api.revealResults();
    this.resultsContainer.textContent = "";
    this.resultsContainer.appendChild(renderRanking(report));
  }

  private renderRedistributeForm(users: string[]): HTMLElement {
    const form = el("div", "redistribute-form");
    form.appendChild(el("h3", undefined, "Redistribute task documents"));
    const from = el("select", "from-user") as HTMLSelectElement;
    const to = el("select", "to-user") as HTMLSelectElement;
    for (const user of users) {
      for (const select of [from, to]) {
        const option = el("option", undefined, user) as HTMLOptionElement;
        option.value = user;
        select.appendChild(option);
      }
    }
    const docs = el("input", "doc-indices") as HTMLInputElement;
    docs.placeholder = "document indices, e.g. 3,4,5";
    const apply = el("button", "apply-redistribute", "Move") as HTMLButtonElement;
    const status = el("span", "redistribute-status");
    apply.addEventListener("click", () => {
      const indices = docs.value
        .split(",")
        .map((part) => Number.parseInt(part.trim(), 10))
        .filter((n) => Number.isFinite(n));
      this.api
        .redistribute(from.value, to.value, indices)
        .then(() => {
          status.textContent = "moved";
          return this.load();
        })
        .catch((error: Error) => {
          status.textContent = error.message;
        });
    });
    for (const node of [from, to, docs, apply, status]) form.appendChild(node);
    return form;
  }
}
