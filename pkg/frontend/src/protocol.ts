/**
 * Message types of the simulator's control protocol, plus parsing and
 * command builders. One JSON object per WebSocket text message.
 */

export interface StateMessage {
  type: "state";
  seq: number;
  speed_mph: number;
  speed_raw: number;
  doors: boolean[];
  blinker_left: boolean;
  blinker_right: boolean;
}

export interface FrameMessage {
  type: "frame";
  seq: number;
  ts: number;
  id: string;
  dlc: number;
  data: string;
  rtr?: boolean;
}

export interface AttackStatusMessage {
  type: "attack_status";
  seq: number;
  running: boolean;
  frames_sent: number;
  message: string;
}

export interface ErrorMessage {
  type: "error";
  seq: number;
  message: string;
}

export type ServerMessage =
  | StateMessage
  | FrameMessage
  | AttackStatusMessage
  | ErrorMessage;

export interface AttackOptions {
  filemap: string;
  rate: number;
  seed: number;
  outOfRange: number;
}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null;
}

/** Parse one incoming line; null for junk or unknown message types. */
export function parseServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (!isRecord(raw) || typeof raw.type !== "string") return null;
  switch (raw.type) {
    case "state":
      if (
        typeof raw.speed_mph === "number" &&
        typeof raw.speed_raw === "number" &&
        Array.isArray(raw.doors) &&
        raw.doors.length === 4
      ) {
        return {
          type: "state",
          seq: Number(raw.seq ?? 0),
          speed_mph: raw.speed_mph,
          speed_raw: raw.speed_raw,
          doors: raw.doors.map(Boolean),
          blinker_left: Boolean(raw.blinker_left),
          blinker_right: Boolean(raw.blinker_right),
        };
      }
      return null;
    case "frame":
      if (
        typeof raw.ts === "number" &&
        typeof raw.id === "string" &&
        typeof raw.dlc === "number" &&
        typeof raw.data === "string"
      ) {
        return {
          type: "frame",
          seq: Number(raw.seq ?? 0),
          ts: raw.ts,
          id: raw.id,
          dlc: raw.dlc,
          data: raw.data,
          rtr: raw.rtr === true ? true : undefined,
        };
      }
      return null;
    case "attack_status":
      return {
        type: "attack_status",
        seq: Number(raw.seq ?? 0),
        running: Boolean(raw.running),
        frames_sent: Number(raw.frames_sent ?? 0),
        message: String(raw.message ?? ""),
      };
    case "error":
      return {
        type: "error",
        seq: Number(raw.seq ?? 0),
        message: String(raw.message ?? ""),
      };
    default:
      return null;
  }
}

/** Outgoing command payloads; every call maps to one user gesture. */
export const commands = {
  accelerate(): string {
    return JSON.stringify({ type: "accelerate" });
  },
  door(index: number): string {
    if (!Number.isInteger(index) || index < 0 || index > 3) {
      throw new Error(`door index ${index} outside 0..3`);
    }
    return JSON.stringify({ type: "door", index });
  },
  blinker(side: "left" | "right", on: boolean): string {
    return JSON.stringify({ type: "blinker", side, on });
  },
  attackStart(options: AttackOptions): string {
    return JSON.stringify({
      type: "attack_start",
      filemap: options.filemap,
      rate: options.rate,
      seed: options.seed,
      out_of_range: options.outOfRange,
    });
  },
  attackStop(): string {
    return JSON.stringify({ type: "attack_stop" });
  },
};
