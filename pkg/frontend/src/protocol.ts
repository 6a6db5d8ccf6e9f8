/**
 * Wire protocol shared with the session service: one JSON object per line
 * over a persistent bidirectional connection.  The client never computes
 * detector outcomes itself — the light state only ever comes from the
 * server's check_result messages.
 */

export type ObjectLabel = "A" | "B" | "C";
export type Outcome = "on" | "off";
export type LightState = Outcome | "unknown";

export interface Condition {
  kind: "disjunctive" | "conjunctive";
  given: boolean;
}

export interface DemoStep {
  order: ObjectLabel[];
  lights: boolean;
}

export interface DemoScript {
  script_id: string;
  machine: string;
  structure: string;
  steps: DemoStep[];
}

export interface PublicState {
  on_detector: ObjectLabel[];
  light: LightState;
  steps: number;
}

export type ClientEvent =
  | { kind: "place" | "remove"; object: ObjectLabel }
  | { kind: "check" }
  | { kind: "demo" | "question" | "answer"; id?: string; payload?: unknown };

export type ClientMessage =
  | {
      type: "create_session";
      condition: Condition;
      ground_truth?: string;
      seed?: number;
      session_id?: string;
    }
  | { type: "resume_session"; session_id: string }
  | { type: "event"; session_id: string; event: ClientEvent }
  | { type: "finish"; session_id: string; answers?: Answers };

export interface Answers {
  blickets?: Record<ObjectLabel, boolean>;
  final_combo?: ObjectLabel[];
  free_text?: string;
}

export type ServerMessage =
  | {
      type: "session_created";
      session_id: string;
      condition: Condition;
      demos: DemoScript[];
      state: PublicState;
      session_cap_s: number;
    }
  | { type: "session_resumed"; session_id: string; state: PublicState; events: number }
  | { type: "state"; session_id: string; state: PublicState }
  | { type: "check_result"; session_id: string; outcome: Outcome; state: PublicState }
  | { type: "ack"; session_id: string }
  | { type: "finished"; session_id: string; ground_truth?: string; reason?: string }
  | { type: "error"; code: string; message: string };

/** Transport the client speaks over; implementations frame NDJSON. */
export interface Transport {
  send(message: ClientMessage): void;
  onMessage(handler: (message: ServerMessage) => void): void;
  close(): void;
}

/**
 * Incremental NDJSON decoder: feed arbitrary chunks, get whole messages.
 * Partial lines are buffered until their newline arrives.
 */
export class LineDecoder {
  private buffer = "";

  feed(chunk: string): ServerMessage[] {
    this.buffer += chunk;
    const messages: ServerMessage[] = [];
    let index: number;
    while ((index = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, index).trim();
      this.buffer = this.buffer.slice(index + 1);
      if (line.length > 0) {
        messages.push(JSON.parse(line) as ServerMessage);
      }
    }
    return messages;
  }
}

export function encodeMessage(message: ClientMessage): string {
  return JSON.stringify(message) + "\n";
}
