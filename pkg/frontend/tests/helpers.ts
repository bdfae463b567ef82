import type { EventRecord } from "../src/types.js";

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function record(overrides: Partial<EventRecord> = {}): EventRecord {
  return {
    seq: 1,
    when: "2026-08-09T10:00:00.000000Z",
    what: "get",
    outcome: "allowed",
    share_id: "s1",
    share_name: "report.pdf",
    peer_id: "aabbccdd".repeat(4),
    peer_name: "bob",
    detail: "",
    ...overrides,
  };
}

/** A Response whose body streams the given text chunks then closes. */
export function streamingResponse(chunks: string[]): Response {
  const encoder = new TextEncoder();
  const stream = new ReadableStream<Uint8Array>({
    start(controller) {
      for (const chunk of chunks) {
        controller.enqueue(encoder.encode(chunk));
      }
      controller.close();
    },
  });
  return new Response(stream, { status: 200 });
}
