import { describe, expect, it } from "vitest";

import { SessionInfo, StateSnapshot } from "../src/protocol.js";
import { RingBuffer, segmentWeights, ViewState } from "../src/view.js";

function info(over: Partial<SessionInfo> = {}): SessionInfo {
  return {
    id: "s1", dimension: 2, kind: "arm", partition: [0, 1, 2, 3],
    total_length: 3, boundary_radius: 2.94, tick_rate: 60, paced: false,
    k: 4, v_max: 2, tol_singular: 3e-8, head: [1.5, 0], margin: 1.125,
    status: "running", ...over,
  };
}

const a = Math.acos(0.25);
function snap(over: Partial<StateSnapshot> = {}): StateSnapshot {
  return {
    type: "state", t: 0, head: [1.5, 0],
    segments: [[Math.cos(a), Math.sin(a)], [1, 0], [Math.cos(a), -Math.sin(a)]],
    energy: 0, margin: 1.125, status: "running", clamped: false,
    w: [0, 0], axis: null, ...over,
  };
}

describe("ring buffer", () => {
  it("keeps chronological order and wraps at capacity", () => {
    const rb = new RingBuffer(4);
    for (let i = 0; i < 6; i++) rb.push(i);
    expect(rb.size).toBe(4);
    expect(rb.values()).toEqual([2, 3, 4, 5]);
    expect(rb.last()).toBe(5);
  });

  it("rejects a zero capacity", () => {
    expect(() => new RingBuffer(0)).toThrow(RangeError);
  });
});

describe("segment weights", () => {
  it("uses segment lengths for arm rows", () => {
    expect(segmentWeights([0, 1, 3], 2)).toEqual([1, 2]);
  });

  it("builds per-segment trapezoid weights for sampled rows", () => {
    // one segment of length 2 with 3 samples: 2 * [1,2,1] / 4
    expect(segmentWeights([0, 2], 3)).toEqual([0.5, 1, 0.5]);
  });

  it("rejects row counts that fit no layout", () => {
    expect(() => segmentWeights([0, 1, 2], 5)).toThrow();
  });
});

describe("view state", () => {
  it("draws the arm as cumulative weighted segments ending at the head", () => {
    const v = new ViewState(info());
    v.update(snap());
    const line = v.polyline();
    expect(line).toHaveLength(4);
    expect(line[0]).toEqual([0, 0]);
    const end = line[3];
    expect(Math.hypot(end[0] - 1.5, end[1] - 0)).toBeLessThan(1e-12);
  });

  it("projects onto the selected coordinate plane for d=3", () => {
    const v = new ViewState(info({
      dimension: 3, partition: [0, 1], total_length: 1, boundary_radius: 0.98,
      head: [0, 0, 1],
    }));
    v.update(snap({ head: [0, 0, 1], segments: [[0, 0, 1]], w: [0, 0, 0] }));
    expect(v.project([1, 2, 3])).toEqual([1, 2]);
    v.selectPlane(0, 2);
    expect(v.project([1, 2, 3])).toEqual([1, 3]);
    expect(v.polyline()[1]).toEqual([0, 1]);
  });

  it("rejects degenerate plane choices", () => {
    const v = new ViewState(info({ dimension: 3 }));
    expect(() => v.selectPlane(1, 1)).toThrow(RangeError);
    expect(() => v.selectPlane(0, 3)).toThrow(RangeError);
    expect(() => v.selectPlane(-1, 1)).toThrow(RangeError);
  });

  it("rejects snapshots from another dimension", () => {
    const v = new ViewState(info());
    expect(() => v.update(snap({ head: [0, 0, 1], segments: [[0, 0, 1]] }))).toThrow();
  });

  it("pins the marker to the boundary radius when clamped", () => {
    const v = new ViewState(info());
    v.setTarget([9, 0]);
    v.update(snap({ clamped: true }));
    const m = v.markerPos()!;
    expect(Math.hypot(m[0], m[1])).toBeCloseTo(2.94, 12);
    // inside the ball nothing is pinned even if the flag lingers
    v.setTarget([1, 1]);
    expect(v.markerPos()).toEqual([1, 1]);
  });

  it("tracks gauge histories including head-target error", () => {
    const v = new ViewState(info());
    v.setTarget([1.5, 1]);
    v.update(snap({ energy: 0.5, margin: 0.9 }));
    expect(v.energy.last()).toBe(0.5);
    expect(v.margin.last()).toBe(0.9);
    expect(v.error.last()).toBeCloseTo(1.0, 12);
  });

  it("exposes the uncontrollable axis only while singular-stopped", () => {
    const v = new ViewState(info());
    v.update(snap());
    expect(v.axisLine()).toBeNull();
    v.update(snap({ status: "singular-stopped", axis: [0, 1], w: [0, 0] }));
    const [p, q] = v.axisLine()!;
    expect(p[0]).toBeCloseTo(0, 15);
    expect(p[1]).toBeCloseTo(-3, 15);
    expect(q[0]).toBeCloseTo(0, 15);
    expect(q[1]).toBeCloseTo(3, 15);
  });

  it("flags stale state on disconnect only once something was rendered", () => {
    const fresh = new ViewState(info());
    fresh.markDisconnected();
    expect(fresh.stale).toBe(false);
    expect(fresh.connected).toBe(false);
    const seen = new ViewState(info());
    seen.update(snap());
    seen.markDisconnected();
    expect(seen.stale).toBe(true);
    seen.markConnected();
    seen.update(snap());
    expect(seen.stale).toBe(false);
    expect(seen.connected).toBe(true);
  });
});
