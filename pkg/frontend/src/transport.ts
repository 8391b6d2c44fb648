// Bidirectional message channels carrying one JSON text per message.

export interface Transport {
  send(text: string): void;
  onMessage(handler: (text: string) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

/** Browser transport: one protocol message per WebSocket frame. */
export class WebSocketTransport implements Transport {
  private ws: WebSocket;
  private messageHandler: ((text: string) => void) | null = null;
  private closeHandler: (() => void) | null = null;

  constructor(url: string, onOpen?: () => void) {
    this.ws = new WebSocket(url);
    this.ws.onopen = () => onOpen?.();
    this.ws.onmessage = (ev) => this.messageHandler?.(String(ev.data));
    this.ws.onclose = () => this.closeHandler?.();
    this.ws.onerror = () => {
      // the close handler drives reconnection; errors always close
    };
  }

  send(text: string): void {
    if (this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(text);
    }
  }

  onMessage(handler: (text: string) => void): void {
    this.messageHandler = handler;
  }

  onClose(handler: () => void): void {
    this.closeHandler = handler;
  }

  close(): void {
    this.ws.close();
  }
}

/** Splits a byte stream into newline-delimited messages (TCP/stdio framing). */
export class LineSplitter {
  private buffer = "";

  constructor(private readonly emit: (line: string) => void) {}

  push(chunk: string): void {
    this.buffer += chunk;
    let index: number;
    while ((index = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, index).trim();
      this.buffer = this.buffer.slice(index + 1);
      if (line.length > 0) {
        this.emit(line);
      }
    }
  }
}
