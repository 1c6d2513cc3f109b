/**
 * Hold-to-repeat: fire once on press, then at a fixed rate while held.
 * Mirrors holding the simulator's Accelerate button.
 */

export class HoldRepeater {
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly action: () => void,
    private readonly rateHz: number = 10,
  ) {
    if (rateHz <= 0) throw new Error("rateHz must be positive");
  }

  press(): void {
    if (this.timer !== null) return;
    this.action();
    this.timer = setInterval(this.action, 1000 / this.rateHz);
  }

  release(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  get held(): boolean {
    return this.timer !== null;
  }
}
