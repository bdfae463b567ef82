// The integrated screen: sharing controls, peer list and the live event
// feed are all mounted at once - no navigating away to see what happened.
// The feedback banner renders top-center straight from the share
// response body; nothing is fetched twice to show it.

import type { ApiClient } from "./api.js";
import { ApiError } from "./api.js";
import { assignPeerColor } from "./colors.js";
import { EventFeed } from "./feed.js";
import type {
  ConnectionState,
  EventRecord,
  Feedback,
  Mode,
  PeerInfo,
  ShareEntry,
} from "./types.js";

// Consequence preview shown while choosing a mode, before anything is sent.
const MODE_PREVIEW: Record<Mode, string> = {
  read: "Peers will be able to see this file and copy it.",
  write: "Peers will be able to copy this file AND replace its content.",
  full: "Peers will be able to copy, replace AND delete this file from your machine.",
};

export interface StreamHandle {
  start(): void;
  stop(): void;
}

export type StreamFactory = (
  onEvent: (record: EventRecord) => void,
  onState: (state: ConnectionState) => void,
) => StreamHandle;

export class Dashboard {
  readonly banner: HTMLElement;
  readonly sharesRegion: HTMLElement;
  readonly peersRegion: HTMLElement;
  readonly eventsRegion: HTMLElement;
  readonly connection: HTMLElement;
  readonly feed: EventFeed;
  readonly form: HTMLFormElement;
  readonly pathInput: HTMLInputElement;
  readonly modeSelect: HTMLSelectElement;
  readonly preview: HTMLElement;
  readonly formError: HTMLElement;
  readonly confirmRow: HTMLElement;
  readonly confirmCancel: HTMLButtonElement;
  readonly confirmProceed: HTMLButtonElement;

  private shareRows = new Map<string, HTMLElement>();
  private eventCounts = new Map<string, number>();
  private stream: StreamHandle;

  constructor(
    root: HTMLElement,
    private api: ApiClient,
    makeStream: StreamFactory,
  ) {
    root.innerHTML = "";
    const header = el("header", "top-bar");
    header.append(el("h1", "", "peershare"));
    this.connection = el("span", "connection state-connecting", "connecting…");
    this.connection.id = "connection";
    header.append(this.connection);

    this.banner = el("div", "banner empty");
    this.banner.id = "banner";

    const main = el("main", "regions");
    this.sharesRegion = region("shares-region", "Your shares");
    this.peersRegion = region("peers-region", "Peers on this network");
    this.eventsRegion = region("events-region", "What is happening");
    main.append(this.sharesRegion, this.peersRegion, this.eventsRegion);

    root.append(header, this.banner, main);

    // share form ---------------------------------------------------
    this.form = document.createElement("form");
    this.form.className = "share-form";
    this.pathInput = document.createElement("input");
    this.pathInput.type = "text";
    this.pathInput.placeholder = "/path/to/file (or drop a file here)";
    this.pathInput.name = "path";
    this.modeSelect = document.createElement("select");
    this.modeSelect.name = "mode";
    for (const mode of ["read", "write", "full"] as Mode[]) {
      const option = document.createElement("option");
      option.value = mode;
      option.textContent = mode;
      this.modeSelect.append(option);
    }
    this.modeSelect.value = "read"; // the safe default
    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "Share";
    this.preview = el("p", "mode-preview", MODE_PREVIEW.read);
    this.formError = el("p", "form-error");
    this.confirmRow = el("div", "full-confirm hidden");
    this.confirmRow.append(
      el("span", "", "Full control lets peers DELETE this file from your machine. Continue?"),
    );
    this.confirmCancel = button("Cancel", "cancel");
    this.confirmProceed = button("Share with full control", "proceed danger");
    this.confirmRow.append(this.confirmCancel, this.confirmProceed);

    this.form.append(this.pathInput, this.modeSelect, submit);
    this.sharesRegion.append(this.form, this.preview, this.confirmRow, this.formError);
    const shareList = el("ul", "share-list");
    shareList.id = "share-list";
    this.sharesRegion.append(shareList);

    this.modeSelect.addEventListener("change", () => {
      this.preview.textContent = MODE_PREVIEW[this.modeSelect.value as Mode];
      this.hideConfirm();
    });
    this.form.addEventListener("submit", (evt) => {
      evt.preventDefault();
      void this.submitShare();
    });
    this.confirmCancel.addEventListener("click", (evt) => {
      evt.preventDefault();
      this.hideConfirm();
    });
    this.confirmProceed.addEventListener("click", (evt) => {
      evt.preventDefault();
      this.hideConfirm();
      void this.performShare();
    });
    this.wireDragAndDrop();

    // peers --------------------------------------------------------
    const peerList = el("ul", "peer-list");
    peerList.id = "peer-list";
    this.peersRegion.append(peerList);

    // event feed ---------------------------------------------------
    this.feed = new EventFeed(this.eventsRegion, (shareId) =>
      this.bumpShareActivity(shareId),
    );
    const earlier = button("Load earlier events", "load-earlier");
    earlier.addEventListener("click", (evt) => {
      evt.preventDefault();
      void this.loadEarlier();
    });
    this.eventsRegion.append(earlier);

    this.stream = makeStream(
      (record) => this.onEvent(record),
      (state) => this.onConnectionState(state),
    );
    this.stream.start();
  }

  destroy(): void {
    this.stream.stop();
  }

  // ── sharing ──────────────────────────────────────────────────

  /** Submit the form; full mode inserts an explicit confirmation step. */
  async submitShare(): Promise<void> {
    this.formError.textContent = "";
    if (!this.pathInput.value) {
      this.formError.textContent = "enter the path of the file to share";
      return;
    }
    if (this.modeSelect.value === "full") {
      this.confirmRow.classList.remove("hidden");
      this.confirmCancel.focus(); // backing out is the default
      return;
    }
    await this.performShare();
  }

  private async performShare(): Promise<void> {
    try {
      const response = await this.api.createShare(
        this.pathInput.value,
        this.modeSelect.value as Mode,
      );
      // the banner content comes from this response alone
      this.showBanner(response.feedback);
      this.upsertShareRow(response.share);
      this.pathInput.value = "";
    } catch (err) {
      this.formError.textContent =
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    }
  }

  showBanner(feedback: Feedback): void {
    this.banner.classList.remove("empty", "severity-info", "severity-caution", "severity-danger");
    this.banner.classList.add(`severity-${feedback.severity}`);
    this.banner.innerHTML = "";
    this.banner.append(el("strong", "", feedback.headline));
    const list = document.createElement("ul");
    for (const capability of feedback.capabilities) {
      const item = document.createElement("li");
      item.dataset.tag = capability.tag;
      item.textContent = capability.text;
      list.append(item);
    }
    this.banner.append(list);
  }

  private hideConfirm(): void {
    this.confirmRow.classList.add("hidden");
  }

  private wireDragAndDrop(): void {
    this.sharesRegion.addEventListener("dragover", (evt) => {
      evt.preventDefault();
      this.sharesRegion.classList.add("drop-target");
    });
    this.sharesRegion.addEventListener("dragleave", () => {
      this.sharesRegion.classList.remove("drop-target");
    });
    this.sharesRegion.addEventListener("drop", (evt) => {
      evt.preventDefault();
      this.sharesRegion.classList.remove("drop-target");
      const file = evt.dataTransfer?.files?.[0];
      if (!file) {
        return;
      }
      // browsers only reveal a real path in embedded shells; otherwise
      // prefill the name and let the owner complete the path
      const path = (file as File & { path?: string }).path;
      this.pathInput.value = path ?? file.name;
      this.pathInput.focus();
    });
  }

  // ── shares list ──────────────────────────────────────────────

  renderShares(shares: ShareEntry[]): void {
    const list = this.sharesRegion.querySelector("#share-list") as HTMLElement;
    list.innerHTML = "";
    this.shareRows.clear();
    for (const share of shares) {
      this.upsertShareRow(share);
    }
  }

  upsertShareRow(share: ShareEntry): void {
    const list = this.sharesRegion.querySelector("#share-list") as HTMLElement;
    let row = this.shareRows.get(share.share_id);
    if (!row) {
      row = el("li", "share-row");
      row.dataset.shareId = share.share_id;
      list.append(row);
      this.shareRows.set(share.share_id, row);
    }
    row.innerHTML = "";
    const badge = el("span", `mode-badge mode-${share.mode}`, share.mode);
    const name = el("span", "share-name", share.display_name);
    const count = el(
      "span",
      "share-activity",
      `${this.eventCounts.get(share.share_id) ?? 0} events`,
    );
    row.append(badge, name, count);
  }

  private bumpShareActivity(shareId: string): void {
    this.eventCounts.set(shareId, (this.eventCounts.get(shareId) ?? 0) + 1);
    const row = this.shareRows.get(shareId);
    if (row) {
      const count = row.querySelector(".share-activity");
      if (count) {
        count.textContent = `${this.eventCounts.get(shareId)} events`;
      }
    }
  }

  // ── peers ────────────────────────────────────────────────────

  renderPeers(peers: PeerInfo[]): void {
    const list = this.peersRegion.querySelector("#peer-list") as HTMLElement;
    list.innerHTML = "";
    for (const peer of peers) {
      const row = el("li", "peer-row");
      row.dataset.peerId = peer.peer_id;
      const swatch = el("span", "peer-swatch");
      swatch.style.backgroundColor = assignPeerColor(peer.peer_id);
      row.append(
        swatch,
        el("span", "peer-name", peer.name),
        el("span", "peer-addr", `${peer.address}:${peer.port}`),
        el("span", "peer-shares", `${peer.share_count} shares`),
      );
      list.append(row);
    }
    if (peers.length === 0) {
      list.append(el("li", "peer-row empty", "no peers discovered yet"));
    }
  }

  // ── events ───────────────────────────────────────────────────

  onEvent(record: EventRecord): void {
    this.feed.append(record);
  }

  async loadEarlier(count = 50): Promise<void> {
    const earliest = this.feed.earliestSeq;
    if (earliest === null || earliest <= 1) {
      return;
    }
    const since = Math.max(0, earliest - 1 - count);
    const limit = earliest - 1 - since;
    const records = await this.api.listEvents(since, limit);
    this.feed.prepend(records);
  }

  onConnectionState(state: ConnectionState): void {
    this.connection.className = `connection state-${state}`;
    this.connection.textContent =
      state === "live" ? "live" : state === "connecting" ? "connecting…" : "disconnected — reconnecting…";
  }

  async refresh(): Promise<void> {
    const [shares, peers] = await Promise.all([this.api.listShares(), this.api.listPeers()]);
    this.renderShares(shares);
    this.renderPeers(peers);
  }
}

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

function button(label: string, className: string): HTMLButtonElement {
  const node = document.createElement("button");
  node.type = "button";
  node.className = className;
  node.textContent = label;
  return node;
}

function region(id: string, title: string): HTMLElement {
  const section = el("section", "region");
  section.id = id;
  section.append(el("h2", "", title));
  return section;
}
