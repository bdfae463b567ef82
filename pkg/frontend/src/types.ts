// Shapes of the daemon's /v1 JSON bodies.

export type Mode = "read" | "write" | "full";
export type Severity = "info" | "caution" | "danger";

export interface ShareEntry {
  share_id: string;
  path: string;
  display_name: string;
  mode: Mode;
  size_bytes: number;
  created_at: string;
  modified_at: string;
}

export interface Capability {
  tag: string;
  text: string;
}

export interface Feedback {
  headline: string;
  capabilities: Capability[];
  severity: Severity;
}

export interface ShareResponse {
  share: ShareEntry;
  feedback: Feedback;
}

export interface PeerInfo {
  peer_id: string;
  name: string;
  address: string;
  port: number;
  share_count: number;
  last_seen_age: number;
}

export interface EventRecord {
  seq: number;
  when: string;
  what: string;
  outcome: string;
  share_id: string;
  share_name: string;
  peer_id: string;
  peer_name: string;
  detail: string;
}

export type ConnectionState = "connecting" | "live" | "disconnected";
