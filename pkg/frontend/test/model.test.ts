import { describe, expect, it } from "vitest";

import { PanelModel } from "../src/model.js";
import type { FrameMessage, ServerMessage, StateMessage } from "../src/protocol.js";

let seq = 0;

function state(overrides: Partial<StateMessage> = {}): StateMessage {
  return {
    type: "state",
    seq: ++seq,
    speed_mph: 0,
    speed_raw: 0,
    doors: [false, false, false, false],
    blinker_left: false,
    blinker_right: false,
    ...overrides,
  };
}

function frame(ts: number, id = "244", data = "0000000000"): FrameMessage {
  return { type: "frame", seq: ++seq, ts, id, dlc: data.length / 2, data };
}

describe("PanelModel", () => {
  it("renders the latest state message's speed", () => {
    const model = new PanelModel();
    model.apply(state({ speed_mph: 49.86, speed_raw: 174 }));
    model.apply(state({ speed_mph: 240, speed_raw: 39321 }));
    expect(model.vehicle.speedMph).toBe(240);
    expect(model.vehicle.speedRaw).toBe(39321);
  });

  it("keeps the feed newest-first and bounded", () => {
    const model = new PanelModel(5);
    for (let i = 0; i < 12; i++) {
      model.apply(frame(i / 100));
    }
    expect(model.feed).toHaveLength(5);
    expect(model.feed[0].ts).toBeCloseTo(0.11);
    expect(model.feed[4].ts).toBeCloseTo(0.07);
  });

  it("computes per-identifier intervals like a sniffer", () => {
    const model = new PanelModel();
    model.apply(frame(1.0, "188", "000000"));
    model.apply(frame(1.1, "244"));
    model.apply(frame(1.35, "244"));
    model.apply(frame(1.5, "188", "010000"));
    const rows = model.sortedRows();
    expect(rows.map((r) => r.id)).toEqual(["188", "244"]);
    expect(rows[0].intervalMs).toBeCloseTo(500);
    expect(rows[1].intervalMs).toBeCloseTo(250);
  });

  it("first frame of an identifier has no interval", () => {
    const model = new PanelModel();
    model.apply(frame(2.0));
    expect(model.sortedRows()[0].intervalMs).toBeNull();
  });

  it("tracks attack status and errors", () => {
    const model = new PanelModel();
    model.apply({
      type: "attack_status",
      seq: ++seq,
      running: true,
      frames_sent: 42,
      message: "Flooding",
    });
    expect(model.attack).toEqual({ running: true, framesSent: 42, message: "Flooding" });
    model.apply({ type: "error", seq: ++seq, message: "unknown interface" });
    expect(model.lastError).toBe("unknown interface");
  });

  it("is a pure fold: replaying a stream reproduces the identical view", () => {
    const stream: ServerMessage[] = [
      state({ speed_mph: 7.16, speed_raw: 25 }),
      frame(0.5),
      frame(0.75),
      state({ speed_mph: 14.33, speed_raw: 50, blinker_left: true }),
      {
        type: "attack_status",
        seq: ++seq,
        running: true,
        frames_sent: 3,
        message: "Flooding",
      },
      frame(0.9, "188", "010000"),
    ];
    const a = new PanelModel();
    const b = new PanelModel();
    for (const message of stream) a.apply(message);
    for (const message of stream) b.apply(message);
    expect(JSON.parse(JSON.stringify(a))).toEqual(JSON.parse(JSON.stringify(b)));
    expect([...a.rows.entries()]).toEqual([...b.rows.entries()]);
  });

  it("reset gives back the initial view for a reconnect", () => {
    const model = new PanelModel();
    model.apply(state({ speed_mph: 100, speed_raw: 349 }));
    model.apply(frame(1.23));
    model.reset();
    expect(model.vehicle.speedMph).toBe(0);
    expect(model.feed).toHaveLength(0);
    expect(model.sortedRows()).toHaveLength(0);
  });

  it("marks the attack not running when the connection drops", () => {
    const model = new PanelModel();
    model.apply({
      type: "attack_status",
      seq: ++seq,
      running: true,
      frames_sent: 1,
      message: "Flooding",
    });
    model.setConnected(false);
    expect(model.attack.running).toBe(false);
  });
});
