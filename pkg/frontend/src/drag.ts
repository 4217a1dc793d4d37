/**
 * Pointer-drag throttling: set_target messages go out at most once per
 * service tick, and the final pointer position is never lost -- it stays
 * pending until the next flush.  Time is an explicit argument so the policy
 * is a pure function of (events, clock).
 */

export class DragThrottle {
  private readonly intervalMs: number;
  private lastSentAt = -Infinity;
  private pending: number[] | null = null;

  constructor(
    private readonly send: (pos: number[]) => void,
    tickRate: number,
  ) {
    if (!(tickRate > 0)) throw new RangeError(`tick rate must be > 0, got ${tickRate}`);
    this.intervalMs = 1000 / tickRate;
  }

  /** New pointer position at time nowMs; returns true if sent immediately. */
  offer(pos: number[], nowMs: number): boolean {
    if (nowMs - this.lastSentAt >= this.intervalMs) {
      this.lastSentAt = nowMs;
      this.pending = null;
      this.send(pos);
      return true;
    }
    this.pending = pos.slice();
    return false;
  }

  /** Called from the render loop; sends a stashed position once it is due. */
  flush(nowMs: number): boolean {
    if (this.pending === null || nowMs - this.lastSentAt < this.intervalMs) {
      return false;
    }
    const pos = this.pending;
    this.pending = null;
    this.lastSentAt = nowMs;
    this.send(pos);
    return true;
  }

  get hasPending(): boolean {
    return this.pending !== null;
  }
}
