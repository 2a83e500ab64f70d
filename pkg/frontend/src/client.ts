// Engine connection: one session per client, one shared sequence counter
// for everything the client sends.

import type { AckKind, ClientMessage, ServerMessage } from "./protocol.js";
import { parseServerMessage } from "./protocol.js";

export interface EngineClientOptions {
  onAction: (message: ServerMessage) => void;
  onStatus?: (state: "connected" | "disconnected") => void;
  now?: () => number;
}

export class EngineClient {
  session = "";
  private socket: WebSocket | null = null;
  private seq = 0;
  private now: () => number;

  constructor(
    private baseUrl: string,
    private options: EngineClientOptions,
  ) {
    this.now = options.now ?? (() => Date.now());
  }

  nextSeq(): number {
    return ++this.seq;
  }

  async connect(): Promise<void> {
    const response = await fetch(`${this.baseUrl}/sessions`, { method: "POST" });
    if (!response.ok) {
      throw new Error(`session creation failed: ${response.status}`);
    }
    this.session = ((await response.json()) as { session: string }).session;

    const wsUrl = this.baseUrl.replace(/^http/, "ws") + "/ws";
    await new Promise<void>((resolve, reject) => {
      const socket = new WebSocket(wsUrl);
      socket.onopen = () => {
        this.socket = socket;
        this.options.onStatus?.("connected");
        resolve();
      };
      socket.onerror = () => reject(new Error("websocket connection failed"));
      socket.onclose = () => {
        this.socket = null;
        this.options.onStatus?.("disconnected");
      };
      socket.onmessage = (event: MessageEvent) => {
        const raw =
          typeof event.data === "string" ? event.data : String(event.data);
        const message = parseServerMessage(raw);
        if (message && message.session === this.session) {
          this.options.onAction(message);
        }
      };
    });
  }

  get connected(): boolean {
    return this.socket !== null;
  }

  close(): void {
    this.socket?.close();
    this.socket = null;
  }

  send(message: ClientMessage): void {
    if (!this.socket) {
      throw new Error("not connected");
    }
    this.socket.send(JSON.stringify(message));
  }

  sendAsr(type: "asr_partial" | "asr_final", text: string, seq: number, t_ms: number): void {
    this.send({ type, session: this.session, text, seq, t_ms });
  }

  sendAck(kind: AckKind): void {
    this.send({
      type: "ack",
      session: this.session,
      kind,
      seq: this.nextSeq(),
      t_ms: this.now(),
    });
  }
}
