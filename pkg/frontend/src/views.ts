import { ConsoleState } from "./state.js";

export const VIEW_ORDER = ["front", "side", "top"] as const;

// Single DOM skeleton shared by index.html (via main.ts) and the tests.
export function buildSkeleton(): string {
  return `
  <header class="bar">
    <span id="session-label">no session</span>
    <span id="remaining"></span>
    <span id="accuracy-badge"></span>
  </header>
  <div id="banner" class="banner" hidden></div>
  <div id="error" class="error" hidden></div>
  <main class="columns">
    <section id="object-panel">
      <div id="prediction-badge" class="badge">&mdash;</div>
      <div id="depth-row">
        ${VIEW_ORDER.map(
          (v) => `
        <figure class="view" id="view-${v}">
          <img id="depth-${v}" alt="${v} depth view" />
          <figcaption>${v} <span id="entropy-${v}"></span></figcaption>
        </figure>`,
        ).join("")}
      </div>
      <figure class="view color-view" id="color-figure">
        <img id="color-view" alt="selected color view" />
        <figcaption id="color-caption"></figcaption>
      </figure>
    </section>
    <section id="side-panel">
      <form id="label-form">
        <input id="label-input" placeholder="category label" autocomplete="off" />
        <button id="teach-btn" type="button">Teach</button>
        <button id="correct-btn" type="button">Correct</button>
        <button id="next-btn" type="button">Next</button>
      </form>
      <table id="category-table">
        <thead><tr><th>category</th><th>instances</th></tr></thead>
        <tbody></tbody>
      </table>
      <svg id="accuracy-chart" viewBox="0 0 260 80" width="260" height="80">
        <polyline id="accuracy-line" fill="none" stroke="#0877bd" stroke-width="2" />
        <text id="accuracy-last" x="255" y="12" text-anchor="end" font-size="10"></text>
      </svg>
    </section>
  </main>`;
}

function byId<T extends HTMLElement>(root: ParentNode, id: string): T {
  const el = root.querySelector(`#${id}`);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const PLACEHOLDER =
  "data:image/svg+xml," +
  encodeURIComponent(
    '<svg xmlns="http://www.w3.org/2000/svg" width="96" height="96">' +
      '<rect width="96" height="96" fill="#eee"/>' +
      '<text x="48" y="52" text-anchor="middle" font-size="10">no image</text></svg>',
  );

export function render(root: ParentNode, state: ConsoleState): void {
  byId(root, "session-label").textContent = state.sessionId
    ? `session ${state.sessionId}`
    : "no session";
  byId(root, "remaining").textContent = `${state.remaining} views left`;
  byId(root, "accuracy-badge").textContent =
    `window accuracy ${state.windowAccuracy.toFixed(3)} ` +
    `(${state.correctCount}/${state.asks})`;

  renderBanner(root, state);
  renderObjectPanel(root, state);
  renderCategories(root, state);
  renderChart(root, state);
  renderControls(root, state);
}

function renderBanner(root: ParentNode, state: ConsoleState): void {
  const banner = byId<HTMLDivElement>(root, "banner");
  banner.hidden = state.banner === null;
  banner.textContent = state.banner ?? "";
  const error = byId<HTMLDivElement>(root, "error");
  error.hidden = state.error === null;
  error.textContent = state.error ?? "";
}

export function renderObjectPanel(root: ParentNode, state: ConsoleState): void {
  const badge = byId<HTMLDivElement>(root, "prediction-badge");
  const current = state.current;
  if (!current) {
    badge.textContent = "no object - press Next";
    badge.className = "badge idle";
  } else if (current.prediction.label === null) {
    badge.textContent = "UNKNOWN";
    badge.className = "badge unknown";
  } else {
    const distance = current.prediction.distance;
    badge.textContent =
      `${current.prediction.label}` +
      (distance === null ? "" : ` (distance ${distance.toFixed(4)})`);
    badge.className = "badge known";
  }

  for (const view of VIEW_ORDER) {
    const img = byId<HTMLImageElement>(root, `depth-${view}`);
    const b64 = current?.depth_views?.[view];
    img.src = b64 ? `data:image/png;base64,${b64}` : PLACEHOLDER;
    img.dataset.placeholder = b64 ? "" : "1";
    img.title = b64 ? "" : "image missing; click to retry";
    const entropy = current?.entropy.entropies[view];
    byId(root, `entropy-${view}`).textContent =
      entropy === null || entropy === undefined ? "" : `H=${entropy.toFixed(2)}`;
    byId(root, `view-${view}`).classList.toggle(
      "selected",
      current?.selected_view === view,
    );
  }
  const colorImg = byId<HTMLImageElement>(root, "color-view");
  colorImg.src = current?.color_view
    ? `data:image/png;base64,${current.color_view}`
    : PLACEHOLDER;
  colorImg.dataset.placeholder = current?.color_view ? "" : "1";
  colorImg.title = current?.color_view ? "" : "image missing; click to retry";
  const selectedEntropy = current
    ? current.entropy.entropies[current.selected_view]
    : null;
  byId(root, "color-caption").textContent = current
    ? `${current.selected_view} (max entropy` +
      (selectedEntropy == null ? ")" : ` H=${selectedEntropy.toFixed(2)})`)
    : "";
}

export function renderCategories(root: ParentNode, state: ConsoleState): void {
  const tbody = byId<HTMLTableSectionElement>(root, "category-table")
    .querySelector("tbody")!;
  tbody.innerHTML = "";
  for (const { label, instances } of state.categories) {
    const row = tbody.ownerDocument.createElement("tr");
    const name = tbody.ownerDocument.createElement("td");
    name.textContent = label;
    const count = tbody.ownerDocument.createElement("td");
    count.textContent = String(instances);
    row.append(name, count);
    tbody.append(row);
  }
}

export function renderChart(root: ParentNode, state: ConsoleState): void {
  const line = byId<SVGPolylineElement & HTMLElement>(root, "accuracy-line");
  const series = state.accuracySeries;
  const width = 260;
  const height = 80;
  const step = series.length > 1 ? width / (series.length - 1) : 0;
  line.setAttribute(
    "points",
    series
      .map((v, i) => `${(i * step).toFixed(1)},${(height - v * height).toFixed(1)}`)
      .join(" "),
  );
  byId(root, "accuracy-last").textContent = series.length
    ? series[series.length - 1].toFixed(3)
    : "";
}

function renderControls(root: ParentNode, state: ConsoleState): void {
  const hasObject = state.current !== null && !state.busy;
  byId<HTMLButtonElement>(root, "teach-btn").disabled =
    !hasObject || state.current!.consumed;
  byId<HTMLButtonElement>(root, "correct-btn").disabled =
    !hasObject || state.current!.consumed || state.current!.prediction.label === null;
  byId<HTMLButtonElement>(root, "next-btn").disabled =
    state.busy || state.sessionId === null;
}
