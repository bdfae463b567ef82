// The live event feed: one tinted row per record, denied attempts
// visually distinct, capped at the most recent 500 rows with on-demand
// backfill through the since/limit query API.

import { assignPeerColor } from "./colors.js";
import type { EventRecord } from "./types.js";

export const FEED_CAP = 500;

const VERBS: Record<string, (e: EventRecord) => string> = {
  list: (e) => `${who(e)} browsed your shared files`,
  get: (e) => `${who(e)} copied "${where(e)}"`,
  put: (e) => `${who(e)} replaced the content of "${where(e)}"`,
  delete: (e) => `${who(e)} deleted "${where(e)}" from this machine`,
  share_added: (e) => `you shared "${where(e)}" (${e.detail})`,
  share_removed: (e) => `you stopped sharing "${where(e)}"`,
  mode_changed: (e) => `you changed sharing of "${where(e)}" (${e.detail})`,
  peer_joined: (e) => `${who(e)} appeared on the network`,
  peer_left: (e) => `${who(e)} left the network`,
  malformed: (e) => `a malformed request arrived from ${who(e)}`,
};

const BLOCKED: Record<string, (e: EventRecord) => string> = {
  list: (e) => `${who(e)} was blocked from browsing your shared files`,
  get: (e) => `${who(e)} was blocked from copying "${where(e)}"`,
  put: (e) => `${who(e)} was blocked from replacing "${where(e)}"`,
  delete: (e) => `${who(e)} was blocked from deleting "${where(e)}"`,
};

function who(e: EventRecord): string {
  if (e.peer_id === "local") {
    return "you";
  }
  return e.peer_name || e.peer_id || "someone";
}

function where(e: EventRecord): string {
  return e.share_name || e.share_id;
}

export function describeEvent(e: EventRecord): string {
  if (e.outcome === "denied" && BLOCKED[e.what]) {
    return BLOCKED[e.what](e);
  }
  const verb = VERBS[e.what];
  return verb ? verb(e) : `${who(e)}: ${e.what} ${e.detail}`.trim();
}

export class EventFeed {
  private list: HTMLElement;
  private seqs = new Set<number>();
  earliestSeq: number | null = null;

  constructor(
    container: HTMLElement,
    private onShareActivity?: (shareId: string) => void,
  ) {
    this.list = document.createElement("ol");
    this.list.className = "event-feed";
    container.appendChild(this.list);
  }

  get rowCount(): number {
    return this.list.children.length;
  }

  /** Append a live record (newest last). Ignores duplicates. */
  append(record: EventRecord): void {
    if (this.seqs.has(record.seq)) {
      return;
    }
    this.list.appendChild(this.render(record));
    this.seqs.add(record.seq);
    if (this.earliestSeq === null || record.seq < this.earliestSeq) {
      this.earliestSeq = record.seq;
    }
    while (this.list.children.length > FEED_CAP) {
      this.list.removeChild(this.list.firstChild as Node);
    }
    if (record.share_id && this.onShareActivity) {
      this.onShareActivity(record.share_id);
    }
    this.list.scrollTop = this.list.scrollHeight;
  }

  /** Insert older records (backfill) at the top, oldest first. */
  prepend(records: EventRecord[]): void {
    for (const record of [...records].reverse()) {
      if (this.seqs.has(record.seq)) {
        continue;
      }
      this.list.insertBefore(this.render(record), this.list.firstChild);
      this.seqs.add(record.seq);
      if (this.earliestSeq === null || record.seq < this.earliestSeq) {
        this.earliestSeq = record.seq;
      }
    }
  }

  /** Displayed seqs, in DOM order. */
  displayedSeqs(): number[] {
    return Array.from(this.list.children).map((row) =>
      Number((row as HTMLElement).dataset.seq),
    );
  }

  private render(record: EventRecord): HTMLElement {
    const row = document.createElement("li");
    row.className = `event-row outcome-${record.outcome}`;
    if (record.outcome === "denied") {
      row.classList.add("denied");
    }
    row.dataset.seq = String(record.seq);
    row.dataset.peer = record.peer_id;
    row.style.borderLeftColor = assignPeerColor(record.peer_id);

    const when = document.createElement("time");
    when.textContent = record.when.replace("T", " ").slice(0, 19);
    const text = document.createElement("span");
    text.className = "event-text";
    text.textContent = describeEvent(record);
    row.append(when, text);
    return row;
  }
}
