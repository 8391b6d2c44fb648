// End-to-end against the real service in serve mode: connect, click the
// elected equality-substitution suggestion, watch the new subgoal appear
// in the proof pane, and see retirement land on the resource dashboard.

import { spawn, ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { SessionClient } from "../src/client.js";
import { SessionEventMsg } from "../src/protocol.js";
import { renderProof, renderResources } from "../src/render.js";
import {
  UiSessionState,
  applyEvent,
  applyStateSnapshot,
  buildExecuteArgs,
  initialState,
} from "../src/state.js";
import { TcpTransport } from "./tcp-transport.js";

const PYTHON = process.env.PYTHON ?? "python3";
const CONJECTURE = "(p:(o>o) (a:o & b:o)) => (p (b & a))";

let server: ChildProcess;
let port = 0;

function startServer(): Promise<number> {
  return new Promise((resolve, reject) => {
    server = spawn(PYTHON, ["-m", "ndsuggest.cli", "--serve", "127.0.0.1:0"], {
      cwd: new URL("../..", import.meta.url).pathname,
      stdio: ["ignore", "pipe", "pipe"],
    });
    let buffer = "";
    const timer = setTimeout(() => reject(new Error("server did not start")), 15000);
    server.stdout!.setEncoding("utf-8");
    server.stdout!.on("data", (chunk: string) => {
      buffer += chunk;
      const match = buffer.match(/listening on [\d.]+:(\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(Number(match[1]));
      }
    });
    server.stderr!.setEncoding("utf-8");
    server.stderr!.on("data", () => {});
    server.on("error", reject);
  });
}

beforeAll(async () => {
  port = await startServer();
}, 20000);

afterAll(() => {
  server?.kill();
});

/** Minimal headless stand-in for the browser app: client + reducer. */
class HeadlessUi {
  state: UiSessionState = initialState();
  events: SessionEventMsg[] = [];

  constructor(public readonly client: SessionClient) {
    client.onEvent((ev) => {
      this.events.push(ev);
      this.state = applyEvent(this.state, ev);
    });
  }

  async waitFor(pred: (ui: HeadlessUi) => boolean, ms = 10000): Promise<void> {
    const deadline = Date.now() + ms;
    while (Date.now() < deadline) {
      if (pred(this)) {
        return;
      }
      await new Promise((r) => setTimeout(r, 20));
    }
    throw new Error("condition not reached");
  }

  /** What the user does: click a suggestion's run button. */
  async clickSuggestion(command: string, edits: Record<string, string> = {}): Promise<void> {
    const entry = this.state.suggestions.find((e) => e.command === command);
    expect(entry, `no ${command} suggestion on screen`).toBeDefined();
    const args = buildExecuteArgs(entry!, edits);
    this.state = { ...this.state, suggestions: [], awaitingSuggestions: true };
    await this.client.execute(entry!.command, args);
  }
}

describe("serve-mode round trip", () => {
  it("click-to-execute reproduces the equation subgoal and the dashboard shows retirement", async () => {
    const transport = new TcpTransport("127.0.0.1", port);
    await transport.connected;
    const client = new SessionClient(transport);
    const ui = new HeadlessUi(client);
    try {
      await client.start(CONJECTURE);
      await client.subscribe();
      const snap = await client.getState();
      ui.state = applyStateSnapshot(ui.state, snap);

      expect(renderProof(ui.state)).toContain("C () |- (p (a &amp; b)) =&gt; (p (b &amp; a)) Open");
      expect(ui.state.suggestions[0].command).toBe("ImpI");

      await ui.clickSuggestion("ImpI");
      await ui.waitFor((u) => u.state.epoch === 2 && u.state.suggestions.length > 0);

      // the elected equality-substitution entry carries the full argument map
      const eqsubst = ui.state.suggestions.find((e) => e.command === "EqSubst");
      expect(eqsubst?.args).toBe("EqSubst{u:L1,eq:~,s:L2,pl:[1]}");

      await ui.clickSuggestion("EqSubst");
      await ui.waitFor((u) => u.state.epoch === 3 && !u.state.awaitingSuggestions);

      // walkthrough checkpoint: the equation line appears in the proof pane
      const pane = renderProof(ui.state);
      expect(pane).toContain("L3 (L1) |- (b &amp; a) = (a &amp; b) Open");
      expect(pane).toContain('class="proof-line open"');

      // the third unproductive epoch retires the equality scanner; the
      // report that arrives with this same epoch already reflects it
      await ui.waitFor((u) =>
        u.state.resources.agents.some((a) => a.agent === "EqSubst/find-eq" && a.retired),
      );
      const dashboard = renderResources(ui.state);
      expect(dashboard).toContain('class="agent retired"');
      expect(dashboard).toContain("EqSubst/find-eq");
      const reportEpochs = ui.events
        .filter((e) => e.kind === "resource-report")
        .map((e) => e.epoch);
      expect(reportEpochs).toContain(3);
    } finally {
      transport.close();
    }
  }, 30000);

  it("a forced threshold change retires agents within one report cycle", async () => {
    const transport = new TcpTransport("127.0.0.1", port);
    await transport.connected;
    const client = new SessionClient(transport);
    const ui = new HeadlessUi(client);
    try {
      await client.start(CONJECTURE);
      await client.subscribe();
      ui.state = applyStateSnapshot(ui.state, await client.getState());
      expect(ui.state.resources.agents.every((a) => !a.retired)).toBe(true);

      // the user turns the global complexity value below every baseline
      await client.setConfig({ threshold: 0.4 });
      await ui.waitFor((u) =>
        u.state.resources.agents.length > 0 &&
        u.state.resources.agents.every((a) => a.retired),
      );
      expect(ui.state.resources.threshold).toBe(0.4);
      expect(renderResources(ui.state)).toContain('class="agent retired"');
    } finally {
      transport.close();
    }
  }, 30000);

  it("reconnection resynchronizes from a fresh snapshot", async () => {
    const t1 = new TcpTransport("127.0.0.1", port);
    await t1.connected;
    const c1 = new SessionClient(t1);
    await c1.start(CONJECTURE);
    await c1.execute("ImpI", "ImpI{c:C}");
    t1.close();

    // a second connection is a fresh session: the client restarts and
    // resyncs exactly as the browser app does on reconnect
    const t2 = new TcpTransport("127.0.0.1", port);
    await t2.connected;
    const c2 = new SessionClient(t2);
    const ui = new HeadlessUi(c2);
    try {
      await c2.start(CONJECTURE);
      await c2.subscribe();
      ui.state = applyStateSnapshot(ui.state, await c2.getState());
      expect(ui.state.epoch).toBe(1);
      expect(renderProof(ui.state)).toContain("Open");
    } finally {
      t2.close();
    }
  }, 30000);
});
