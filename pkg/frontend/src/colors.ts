// Stable per-peer colors: the same actor is always drawn the same way,
// so the feed can be scanned by color alone.

// 12 visually distinct hues (same lightness band so text stays readable).
export const PEER_PALETTE = [
  "#e6194b", "#3cb44b", "#b08f00", "#4363d8", "#f58231", "#911eb4",
  "#2a9d8f", "#d4417c", "#7a9e21", "#8b5a2b", "#008080", "#9a6fdb",
] as const;

// Reserved for the owner's own actions; deliberately outside the palette.
export const LOCAL_COLOR = "#6b7280";

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

export function assignPeerColor(peerId: string): string {
  if (peerId === "local" || peerId === "") {
    return LOCAL_COLOR;
  }
  return PEER_PALETTE[fnv1a(peerId) % PEER_PALETTE.length];
}
