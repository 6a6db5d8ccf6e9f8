/**
 * Client-side session state machine.
 *
 * Phases: Demo -> Explore -> Test -> Done.  The demo phase steps through the
 * scripts the server sent for the condition; exploration forwards gestures
 * as wire events and mirrors the server's acked state (optimistic placements
 * are rolled back on an error reply); the test phase collects the blicket
 * judgments and the final combination and finishes the session.
 */

import {
  Answers,
  ClientEvent,
  Condition,
  DemoScript,
  LightState,
  ObjectLabel,
  PublicState,
  ServerMessage,
  Transport,
} from "./protocol.js";

export type Phase = "demo" | "explore" | "test" | "done";

export interface SessionView {
  phase: Phase;
  placed: ObjectLabel[];
  light: LightState;
  demos: DemoScript[];
  demoIndex: number;
  pendingQuestion: string | null;
  checkCount: number;
  groundTruth: string | null;
  lastError: string | null;
}

type Listener = (view: SessionView) => void;

export class SessionClient {
  private transport: Transport;
  private sessionId: string | null = null;
  private phase: Phase = "demo";
  private placed: ObjectLabel[] = [];
  private light: LightState = "unknown";
  private demos: DemoScript[] = [];
  private demoIndex = 0;
  private pendingQuestion: string | null = null;
  private checkCount = 0;
  private groundTruth: string | null = null;
  private lastError: string | null = null;
  private listeners: Listener[] = [];
  private pendingPlacement: ObjectLabel[] | null = null;

  constructor(transport: Transport) {
    this.transport = transport;
    transport.onMessage((message) => this.handle(message));
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  view(): SessionView {
    return {
      phase: this.phase,
      placed: [...this.placed],
      light: this.light,
      demos: this.demos,
      demoIndex: this.demoIndex,
      pendingQuestion: this.pendingQuestion,
      checkCount: this.checkCount,
      groundTruth: this.groundTruth,
      lastError: this.lastError,
    };
  }

  start(condition: Condition, seed?: number): void {
    this.transport.send({ type: "create_session", condition, seed });
  }

  /** Advance the demonstration; participant input never affects outcomes. */
  nextDemo(): void {
    if (this.phase !== "demo") return;
    const script = this.demos[this.demoIndex];
    if (script !== undefined) {
      this.sendEvent({ kind: "demo", id: script.script_id });
      this.demoIndex += 1;
    }
    if (this.demoIndex >= this.demos.length) {
      this.phase = "explore";
    }
    this.notify();
  }

  /** Toggle an object on or off the detector. */
  toggle(object: ObjectLabel): void {
    if (this.phase !== "explore") return;
    const placing = !this.placed.includes(object);
    // optimistic update, rolled back if the server rejects the event
    this.pendingPlacement = [...this.placed];
    if (placing) {
      this.placed.push(object);
    } else {
      this.placed = this.placed.filter((o) => o !== object);
    }
    this.light = "unknown";
    this.sendEvent({ kind: placing ? "place" : "remove", object });
    this.notify();
  }

  /** Press the check mark; the outcome arrives from the server. */
  check(): void {
    if (this.phase !== "explore") return;
    this.sendEvent({ kind: "check" });
  }

  beginTest(): void {
    if (this.phase !== "explore") return;
    this.phase = "test";
    this.pendingQuestion = "blickets";
    this.notify();
  }

  answer(questionId: string, payload: unknown): void {
    if (this.phase !== "test") return;
    this.sendEvent({ kind: "answer", id: questionId, payload });
    this.pendingQuestion = questionId === "blickets" ? "final_combo" : null;
    this.notify();
  }

  finish(answers: Answers): void {
    if (this.sessionId === null) return;
    this.transport.send({ type: "finish", session_id: this.sessionId, answers });
  }

  private sendEvent(event: ClientEvent): void {
    if (this.sessionId === null) {
      throw new Error("no session yet");
    }
    this.transport.send({ type: "event", session_id: this.sessionId, event });
  }

  private handle(message: ServerMessage): void {
    switch (message.type) {
      case "session_created":
        this.sessionId = message.session_id;
        this.demos = message.demos;
        this.phase = this.demos.length > 0 ? "demo" : "explore";
        this.applyState(message.state);
        break;
      case "session_resumed":
      case "state":
        this.applyState(message.state);
        this.pendingPlacement = null;
        break;
      case "check_result":
        this.applyState(message.state);
        this.light = message.outcome;
        this.checkCount += 1;
        break;
      case "ack":
        break;
      case "finished":
        this.phase = "done";
        this.groundTruth = message.ground_truth ?? null;
        break;
      case "error":
        this.lastError = `${message.code}: ${message.message}`;
        if (this.pendingPlacement !== null) {
          this.placed = this.pendingPlacement; // roll back the optimism
          this.pendingPlacement = null;
        }
        break;
    }
    this.notify();
  }

  private applyState(state: PublicState): void {
    this.placed = [...state.on_detector];
    this.light = state.light;
  }

  private notify(): void {
    const view = this.view();
    for (const listener of this.listeners) {
      listener(view);
    }
  }
}
