/**
 * End-to-end run against the real session service over TCP: spawns the
 * Python server, drives a full session through the client, and checks that
 * the detector outcomes it reports are consistent with the revealed ground
 * truth.  Skipped automatically when python3 or the package is unavailable.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, spawnSync, ChildProcess } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { SessionClient } from "../src/session.js";
import { TcpTransport } from "../src/tcp.js";

const PORT = 8971;

function serverAvailable(): boolean {
  const probe = spawnSync("python3", ["-c", "import blicket.service"]);
  return probe.status === 0;
}

function waitFor(predicate: () => boolean, timeoutMs: number): Promise<void> {
  const start = Date.now();
  return new Promise((resolve, reject) => {
    const poll = () => {
      if (predicate()) return resolve();
      if (Date.now() - start > timeoutMs) return reject(new Error("timed out"));
      setTimeout(poll, 50);
    };
    poll();
  });
}

async function settle(client: SessionClient, what: (v: ReturnType<SessionClient["view"]>) => boolean) {
  await waitFor(() => what(client.view()), 5000);
}

describe.skipIf(!serverAvailable())("against the live service", () => {
  let server: ChildProcess;
  let tempDir: string;
  let tracePath: string;

  beforeAll(async () => {
    tempDir = fs.mkdtempSync(path.join(os.tmpdir(), "blicket-it-"));
    tracePath = path.join(tempDir, "traces.jsonl");
    server = spawn(
      "python3",
      ["-m", "blicket.cli", "serve", "--port", String(PORT), "--traces", tracePath],
      { stdio: "ignore" },
    );
    // wait for the port to accept connections
    const start = Date.now();
    for (;;) {
      try {
        const t = await TcpTransport.connect("127.0.0.1", PORT);
        t.close();
        return;
      } catch {
        if (Date.now() - start > 10000) throw new Error("service never came up");
        await new Promise((r) => setTimeout(r, 100));
      }
    }
  }, 15000);

  afterAll(() => {
    server?.kill();
    fs.rmSync(tempDir, { recursive: true, force: true });
  });

  it("runs a full session and writes a trace", async () => {
    const transport = await TcpTransport.connect("127.0.0.1", PORT);
    const client = new SessionClient(transport);

    client.start({ kind: "conjunctive", given: true }, 3);
    await settle(client, (v) => v.demos.length > 0);
    while (client.view().phase === "demo") {
      client.nextDemo();
    }

    // probe each singleton, then the full set; a conjunctive machine can
    // never light for a single object
    const lights: Record<string, string> = {};
    for (const object of ["A", "B", "C"] as const) {
      client.toggle(object);
      await settle(client, (v) => v.placed.includes(object));
      client.check();
      await settle(client, (v) => v.light !== "unknown");
      lights[object] = client.view().light;
      client.toggle(object);
      await settle(client, (v) => !v.placed.includes(object));
    }
    expect(Object.values(lights)).toEqual(["off", "off", "off"]);

    for (const object of ["A", "B", "C"] as const) {
      client.toggle(object);
      await settle(client, (v) => v.placed.includes(object));
    }
    client.check();
    await settle(client, (v) => v.light !== "unknown");
    expect(client.view().light).toBe("on");

    client.beginTest();
    client.answer("blickets", { A: true, B: true, C: false });
    client.answer("final_combo", ["A", "B"]);
    client.finish({ blickets: { A: true, B: true, C: false }, final_combo: ["A", "B"] });
    await settle(client, (v) => v.phase === "done");

    const truth = client.view().groundTruth;
    expect(truth).toMatch(/^[ABC]{2}-con$/);
    transport.close();

    await waitFor(() => fs.existsSync(tracePath), 5000);
    const lines = fs.readFileSync(tracePath, "utf8").trim().split("\n");
    const trace = JSON.parse(lines[lines.length - 1] ?? "");
    expect(trace.v).toBe(1);
    expect(trace.ground_truth).toBe(truth);
    expect(trace.condition).toEqual({ kind: "conjunctive", given: true });
    expect(trace.events.filter((e: { kind: string }) => e.kind === "check")).toHaveLength(4);
  }, 20000);
});
