import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { HoldRepeater } from "../src/repeater.js";

describe("HoldRepeater", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("fires immediately on press, then 10 times per second while held", () => {
    const fired: number[] = [];
    const repeater = new HoldRepeater(() => fired.push(Date.now()), 10);
    repeater.press();
    expect(fired).toHaveLength(1);
    vi.advanceTimersByTime(1000);
    expect(fired).toHaveLength(11);
    repeater.release();
    vi.advanceTimersByTime(1000);
    expect(fired).toHaveLength(11);
  });

  it("ignores repeated presses while already held", () => {
    let count = 0;
    const repeater = new HoldRepeater(() => count++, 10);
    repeater.press();
    repeater.press();
    expect(count).toBe(1);
    expect(repeater.held).toBe(true);
    repeater.release();
    expect(repeater.held).toBe(false);
  });

  it("release without press is a no-op", () => {
    const repeater = new HoldRepeater(() => {}, 10);
    expect(() => repeater.release()).not.toThrow();
  });

  it("rejects a non-positive rate", () => {
    expect(() => new HoldRepeater(() => {}, 0)).toThrow();
  });
});
