/**
 * Panel view model: a pure fold of the incoming message stream plus the
 * connection flag. Rendering reads this and nothing else, so replaying
 * the same stream always reproduces the same view.
 */

import type { ServerMessage, StateMessage } from "./protocol.js";

export interface VehicleView {
  speedMph: number;
  speedRaw: number;
  doors: boolean[];
  blinkerLeft: boolean;
  blinkerRight: boolean;
}

export interface FeedEntry {
  ts: number;
  id: string;
  dlc: number;
  data: string;
}

export interface IdRow {
  id: string;
  timestamp: number;
  intervalMs: number | null;
  dlc: number;
  data: string;
}

export interface AttackView {
  running: boolean;
  framesSent: number;
  message: string;
}

export const FEED_CAP_DEFAULT = 200;

function initialVehicle(): VehicleView {
  return {
    speedMph: 0,
    speedRaw: 0,
    doors: [false, false, false, false],
    blinkerLeft: false,
    blinkerRight: false,
  };
}

export class PanelModel {
  connected = false;
  vehicle: VehicleView = initialVehicle();
  /** Newest-first, bounded at feedCap. */
  feed: FeedEntry[] = [];
  rows = new Map<string, IdRow>();
  attack: AttackView = { running: false, framesSent: 0, message: "" };
  lastError: string | null = null;
  lastSeq = 0;

  constructor(readonly feedCap: number = FEED_CAP_DEFAULT) {}

  apply(message: ServerMessage): void {
    this.lastSeq = message.seq;
    switch (message.type) {
      case "state":
        this.vehicle = stateToView(message);
        break;
      case "frame": {
        this.feed.unshift({
          ts: message.ts,
          id: message.id,
          dlc: message.dlc,
          data: message.data,
        });
        if (this.feed.length > this.feedCap) {
          this.feed.length = this.feedCap;
        }
        const previous = this.rows.get(message.id);
        this.rows.set(message.id, {
          id: message.id,
          timestamp: message.ts,
          intervalMs: previous ? (message.ts - previous.timestamp) * 1000 : null,
          dlc: message.dlc,
          data: message.data,
        });
        break;
      }
      case "attack_status":
        this.attack = {
          running: message.running,
          framesSent: message.frames_sent,
          message: message.message,
        };
        break;
      case "error":
        this.lastError = message.message;
        break;
    }
  }

  setConnected(connected: boolean): void {
    this.connected = connected;
    if (!connected) {
      this.attack = { ...this.attack, running: false };
    }
  }

  /** Fresh fold; used when a reconnect starts a new stream. */
  reset(): void {
    this.vehicle = initialVehicle();
    this.feed = [];
    this.rows.clear();
    this.attack = { running: false, framesSent: 0, message: "" };
    this.lastError = null;
    this.lastSeq = 0;
  }

  sortedRows(): IdRow[] {
    return [...this.rows.values()].sort((a, b) => a.id.localeCompare(b.id));
  }
}

function stateToView(message: StateMessage): VehicleView {
  return {
    speedMph: message.speed_mph,
    speedRaw: message.speed_raw,
    doors: [...message.doors],
    blinkerLeft: message.blinker_left,
    blinkerRight: message.blinker_right,
  };
}
