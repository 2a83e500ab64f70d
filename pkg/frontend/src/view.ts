// Rendering: every panel is a pure projection of the received action
// sequence. The transcript orders bubbles by server action index, the tree
// and query panels are rebuilt wholesale from the latest snapshot.

import type {
  GroundPayload,
  QueryPayload,
  ResultPayload,
  ServerMessage,
  SpeakPayload,
  TreeNodePayload,
} from "./protocol.js";

const FACET_LABELS: [keyof QueryPayload, string][] = [
  ["major_categories", "Major"],
  ["subcategories", "Sub"],
  ["minor_categories", "Minor"],
  ["other", "Other"],
];

export class ConsoleView {
  readonly transcript: HTMLElement;
  readonly indicators: HTMLElement;
  readonly tree: HTMLElement;
  readonly query: HTMLElement;
  readonly results: HTMLElement;
  readonly status: HTMLElement;

  constructor(root: HTMLElement) {
    root.innerHTML = `
      <div class="panel transcript-panel">
        <h2>Conversation</h2>
        <div class="indicators"></div>
        <div class="transcript"></div>
      </div>
      <div class="panel side">
        <h2>Common ground</h2>
        <div class="tree"><p class="empty">nothing grounded yet</p></div>
        <h2>Current query</h2>
        <div class="query"><p class="empty">empty query</p></div>
        <h2>Matches</h2>
        <div class="results"><p class="empty">no results</p></div>
      </div>
      <div class="status"></div>`;
    this.transcript = root.querySelector(".transcript") as HTMLElement;
    this.indicators = root.querySelector(".indicators") as HTMLElement;
    this.tree = root.querySelector(".tree") as HTMLElement;
    this.query = root.querySelector(".query") as HTMLElement;
    this.results = root.querySelector(".results") as HTMLElement;
    this.status = root.querySelector(".status") as HTMLElement;
  }

  setStatus(text: string, cssClass: "ok" | "warn" = "ok"): void {
    this.status.textContent = text;
    this.status.className = `status ${cssClass}`;
  }

  addUserUtterance(text: string): void {
    const bubble = document.createElement("div");
    bubble.className = "bubble user";
    bubble.textContent = text;
    this.transcript.appendChild(bubble);
  }

  applyAction(message: ServerMessage): void {
    switch (message.type) {
      case "speak":
        this.renderSpeak(message.idx, message.payload as SpeakPayload);
        break;
      case "nod":
        this.renderIndicator("nod", "(nod)");
        break;
      case "backchannel": {
        const token = (message.payload as { token: string }).token;
        this.renderIndicator("backchannel", `“${token}”`);
        break;
      }
      case "query_update":
        this.renderQuery(message.payload as QueryPayload);
        break;
      case "ground_update":
        this.renderTree(message.payload as GroundPayload);
        break;
      case "results_update":
        this.renderResults(
          (message.payload as { results: ResultPayload[] }).results,
        );
        break;
      default:
        console.warn("ignoring unknown server message", message.type);
    }
  }

  private renderSpeak(idx: number, payload: SpeakPayload): void {
    const bubble = document.createElement("div");
    bubble.className = "bubble system";
    bubble.dataset.idx = String(idx);
    const text = document.createElement("span");
    text.className = "text";
    text.textContent = payload.text;
    const badges = document.createElement("span");
    badges.className = "badges";
    badges.innerHTML = `<span class="badge expression">${payload.expression}</span><span class="badge motion">${payload.motion}</span>`;
    bubble.append(text, badges);

    // Keep the transcript ordered by action index even if frames arrive odd.
    const siblings = Array.from(
      this.transcript.querySelectorAll<HTMLElement>(".bubble.system"),
    );
    const after = siblings.find((el) => Number(el.dataset.idx) > idx);
    if (after) {
      this.transcript.insertBefore(bubble, after);
    } else {
      this.transcript.appendChild(bubble);
    }
  }

  private renderIndicator(kind: "nod" | "backchannel", label: string): void {
    const chip = document.createElement("span");
    chip.className = `indicator ${kind}`;
    chip.textContent = label;
    this.indicators.appendChild(chip);
    setTimeout(() => chip.remove(), 4000);
  }

  private renderQuery(payload: QueryPayload): void {
    this.query.innerHTML = "";
    let any = false;
    for (const [key, label] of FACET_LABELS) {
      const values = payload[key];
      if (!values.length) {
        continue;
      }
      any = true;
      const row = document.createElement("div");
      row.className = `facet facet-${key}`;
      row.innerHTML =
        `<span class="facet-name">${label}</span>` +
        values.map((v) => `<span class="chip">${escapeHtml(v)}</span>`).join("");
      this.query.appendChild(row);
    }
    if (!any) {
      this.query.innerHTML = '<p class="empty">empty query</p>';
    }
  }

  private renderTree(payload: GroundPayload): void {
    this.tree.innerHTML = "";
    const active = payload.active_path[payload.active_path.length - 1];
    const list = this.renderNode(payload.root, active);
    if (payload.root.children.length === 0) {
      this.tree.innerHTML = '<p class="empty">nothing grounded yet</p>';
    } else {
      this.tree.appendChild(list);
    }
  }

  private renderNode(node: TreeNodePayload, activeKey: string): HTMLElement {
    const item = document.createElement("li");
    item.className = node.topic_key === activeKey ? "topic active" : "topic";
    const name = document.createElement("span");
    name.className = "topic-key";
    name.textContent = node.topic_key;
    item.appendChild(name);
    if (node.preferences.length) {
      const prefs = document.createElement("ul");
      prefs.className = "preferences";
      for (const pref of node.preferences) {
        const leaf = document.createElement("li");
        leaf.className = "preference";
        leaf.textContent = `${pref.facet}: ${pref.value}`;
        prefs.appendChild(leaf);
      }
      item.appendChild(prefs);
    }
    if (node.children.length) {
      const children = document.createElement("ul");
      children.className = "topics";
      for (const child of node.children) {
        children.appendChild(this.renderNode(child, activeKey));
      }
      item.appendChild(children);
    }
    const wrapper = document.createElement("ul");
    wrapper.className = "topics";
    wrapper.appendChild(item);
    return wrapper;
  }

  private renderResults(results: ResultPayload[]): void {
    this.results.innerHTML = "";
    if (!results.length) {
      this.results.innerHTML = '<p class="empty">no results</p>';
      return;
    }
    for (const result of results) {
      const card = document.createElement("div");
      card.className = "result";
      card.innerHTML =
        `<div class="result-head"><span class="result-name">${escapeHtml(result.name)}</span>` +
        `<span class="score">${result.score}</span></div>` +
        `<p class="result-desc">${escapeHtml(result.description)}</p>` +
        `<p class="result-meta">${escapeHtml(result.opening_hours)}${
          result.fee ? " · " + escapeHtml(result.fee) : ""
        }</p>`;
      this.results.appendChild(card);
    }
  }
}

function escapeHtml(value: string): string {
  return value
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;");
}
