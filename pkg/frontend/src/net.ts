// Websocket client with reconnect and an offline command queue: gestures
// made while disconnected are flushed, in order, when the socket returns.

import { parseServerMessage, serializeCommand, type Command, type ServerMessage } from "./protocol.js";

export interface SocketHooks {
  onMessage: (msg: ServerMessage) => void;
  onSchemaMismatch: () => void;
  onConnected: () => void;
  onDisconnected: () => void;
  onQueuedOffline: (cmd: Command) => void;
  onFlushed: () => void;
}

export class SocketClient {
  private ws: WebSocket | null = null;
  private queue: Command[] = [];
  private closed = false;

  constructor(private url: string, private hooks: SocketHooks, private reconnectMs = 1000) {}

  connect(): void {
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => {
      this.hooks.onConnected();
      const pending = this.queue.splice(0);
      for (const cmd of pending) this.ws!.send(serializeCommand(cmd));
      if (pending.length) this.hooks.onFlushed();
    };
    this.ws.onmessage = (ev) => {
      const msg = parseServerMessage(String(ev.data));
      if (msg === null) {
        this.hooks.onSchemaMismatch();
        return;
      }
      this.hooks.onMessage(msg);
    };
    this.ws.onclose = () => {
      this.hooks.onDisconnected();
      this.ws = null;
      if (!this.closed) setTimeout(() => this.connect(), this.reconnectMs);
    };
    this.ws.onerror = () => this.ws?.close();
  }

  send(cmd: Command): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(serializeCommand(cmd));
    } else {
      this.queue.push(cmd);
      this.hooks.onQueuedOffline(cmd);
    }
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
