// jsdom has no WebSocket; use the ws client, which implements the
// browser-style onopen/onmessage/onclose surface.
import { WebSocket as NodeWebSocket } from "ws";

if (typeof globalThis.WebSocket === "undefined") {
  (globalThis as Record<string, unknown>).WebSocket = NodeWebSocket;
}
