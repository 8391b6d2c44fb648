// Browser bootstrap: connect to the service, keep the panes in sync with
// the event stream, translate clicks into execute requests.

import { SessionClient, ServiceError } from "./client.js";
import {
  renderError,
  renderProof,
  renderResources,
  renderRetryBanner,
  renderStatusBar,
  renderSuggestions,
} from "./render.js";
import {
  UiSessionState,
  applyEvent,
  applyStateSnapshot,
  buildExecuteArgs,
  initialState,
} from "./state.js";
import { WebSocketTransport } from "./transport.js";

const DEFAULT_CONJECTURE = "(p:(o>o) (a:o & b:o)) => (p (b & a))";
const RETRY_DELAY_MS = 1500;

class App {
  state: UiSessionState = initialState();
  client: SessionClient | null = null;
  started = false;

  constructor(private readonly root: Document) {}

  private pane(id: string): HTMLElement {
    const el = this.root.getElementById(id);
    if (!el) {
      throw new Error(`missing pane #${id}`);
    }
    return el;
  }

  draw(): void {
    this.pane("status").innerHTML = renderStatusBar(this.state);
    this.pane("banner").innerHTML =
      renderRetryBanner(this.state.retrying) + renderError(this.state.lastError);
    this.pane("proof").innerHTML = renderProof(this.state);
    this.pane("suggestions").innerHTML = renderSuggestions(this.state);
    this.pane("resources").innerHTML = renderResources(this.state);
  }

  connect(): void {
    const scheme = location.protocol === "https:" ? "wss" : "ws";
    const url = `${scheme}://${location.host}/ws`;
    const transport = new WebSocketTransport(url, () => this.onOpen());
    this.client = new SessionClient(transport);
    this.client.onEvent((ev) => {
      this.state = applyEvent(this.state, ev);
      this.draw();
    });
    transport.onClose(() => {
      this.client?.failAllPending("connection closed");
      // sessions live per connection: the next connect starts afresh
      this.started = false;
      this.state = { ...this.state, connected: false, retrying: true };
      this.draw();
      setTimeout(() => this.connect(), RETRY_DELAY_MS);
    });
  }

  private async onOpen(): Promise<void> {
    if (!this.client) {
      return;
    }
    this.state = { ...this.state, connected: true, retrying: false };
    try {
      if (!this.started) {
        const input = this.root.getElementById("conjecture") as HTMLInputElement | null;
        const conjecture = input?.value?.trim() || DEFAULT_CONJECTURE;
        await this.client.start(conjecture);
        this.started = true;
      }
      await this.client.subscribe();
      // resynchronize from a fresh snapshot (covers reconnects)
      const snap = await this.client.getState();
      this.state = applyStateSnapshot(this.state, snap);
      this.state.lastError = null;
    } catch (err) {
      this.state.lastError = err instanceof Error ? err.message : String(err);
    }
    this.draw();
  }

  private collectEdits(index: number): Record<string, string> {
    const edits: Record<string, string> = {};
    this.root
      .querySelectorAll<HTMLInputElement>(`input[data-entry="${index}"]`)
      .forEach((input) => {
        if (input.value.trim()) {
          edits[input.dataset.slot as string] = input.value.trim();
        }
      });
    return edits;
  }

  async executeSuggestion(index: number): Promise<void> {
    if (!this.client) {
      return;
    }
    const entry = this.state.suggestions[index];
    if (!entry) {
      return;
    }
    try {
      const args = buildExecuteArgs(entry, this.collectEdits(index));
      // clear the list until events for the new epoch arrive
      this.state = { ...this.state, suggestions: [], awaitingSuggestions: true };
      this.draw();
      await this.client.execute(entry.command, args);
      this.state.lastError = null;
    } catch (err) {
      if (err instanceof ServiceError) {
        this.state.lastError = `${err.code}: ${err.message}`;
      } else {
        this.state.lastError = err instanceof Error ? err.message : String(err);
      }
      this.draw();
    }
  }

  wireEvents(): void {
    this.pane("suggestions").addEventListener("click", (ev) => {
      const target = ev.target as HTMLElement;
      if (target.dataset.role === "execute") {
        void this.executeSuggestion(Number(target.dataset.index));
      }
    });
    const restart = this.root.getElementById("restart");
    restart?.addEventListener("click", () => {
      this.started = false;
      this.state = initialState();
      this.state.connected = true;
      void this.onOpen();
    });
  }
}

export function boot(): void {
  const app = new App(document);
  app.wireEvents();
  app.draw();
  app.connect();
}

if (typeof document !== "undefined" && document.getElementById("proof")) {
  boot();
}
