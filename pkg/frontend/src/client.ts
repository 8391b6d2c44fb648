// Request/response correlation and the event stream over a Transport.

import {
  EventEnvelope,
  ServerMessage,
  SessionEventMsg,
  StateResult,
  encodeRequest,
  isEvent,
  parseServerMessage,
} from "./protocol.js";
import { Transport } from "./transport.js";

export class ServiceError extends Error {
  constructor(public readonly code: string, message: string) {
    super(message);
  }
}

interface Pending {
  resolve: (result: any) => void;
  reject: (err: Error) => void;
}

export class SessionClient {
  private nextId = 1;
  private pending = new Map<number, Pending>();
  private eventHandler: ((ev: SessionEventMsg) => void) | null = null;

  constructor(private readonly transport: Transport) {
    transport.onMessage((text) => this.dispatch(parseServerMessage(text)));
  }

  onEvent(handler: (ev: SessionEventMsg) => void): void {
    this.eventHandler = handler;
  }

  private dispatch(msg: ServerMessage): void {
    if (isEvent(msg)) {
      this.eventHandler?.((msg as EventEnvelope).event);
      return;
    }
    if (msg.id === null || msg.id === undefined) {
      return; // unsolicited error, e.g. malformed input echo
    }
    const pending = this.pending.get(msg.id);
    if (!pending) {
      return;
    }
    this.pending.delete(msg.id);
    if (msg.kind === "ok") {
      pending.resolve(msg.result);
    } else {
      pending.reject(new ServiceError(msg.code, msg.message));
    }
  }

  request(kind: string, fields: Record<string, unknown> = {}): Promise<any> {
    const id = this.nextId++;
    const text = encodeRequest({ id, kind, ...fields });
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.transport.send(text);
    });
  }

  failAllPending(reason: string): void {
    for (const [, pending] of this.pending) {
      pending.reject(new ServiceError("connection-lost", reason));
    }
    this.pending.clear();
  }

  // -- typed helpers ---------------------------------------------------------

  start(conjecture: string, config?: Record<string, unknown>): Promise<any> {
    return this.request("start", config ? { conjecture, config } : { conjecture });
  }

  subscribe(): Promise<any> {
    return this.request("subscribe");
  }

  execute(command: string, args: string): Promise<any> {
    return this.request("execute", { command, args });
  }

  getState(): Promise<StateResult> {
    return this.request("get-state");
  }

  getSuggestions(): Promise<any> {
    return this.request("get-suggestions");
  }

  setFocus(label: string): Promise<any> {
    return this.request("set-focus", { label });
  }

  setConfig(fields: Record<string, unknown>): Promise<any> {
    return this.request("set-config", fields);
  }
}
