/**
 * View state: the single validated snapshot plus everything derived from it.
 *
 * Geometry is dimension-generic; the screen sees an orthographic projection
 * onto a selectable coordinate plane (the identity for d=2).  The arm is
 * drawn as the polyline of partial sums of weighted segment vectors -- the
 * shape itself, starting at the origin and ending at the head.  Gauge
 * histories live in fixed-size ring buffers so a long session never grows.
 */

import { ProtocolError, SessionInfo, StateSnapshot } from "./protocol.js";

export class RingBuffer {
  private readonly data: Float64Array;
  private n = 0;
  private next = 0;

  constructor(readonly capacity: number) {
    if (!Number.isInteger(capacity) || capacity <= 0) {
      throw new RangeError(`capacity must be a positive int, got ${capacity}`);
    }
    this.data = new Float64Array(capacity);
  }

  get size(): number {
    return this.n;
  }

  push(x: number): void {
    this.data[this.next] = x;
    this.next = (this.next + 1) % this.capacity;
    if (this.n < this.capacity) this.n += 1;
  }

  last(): number | undefined {
    if (this.n === 0) return undefined;
    return this.data[(this.next - 1 + this.capacity) % this.capacity];
  }

  /** Chronological copy, oldest first. */
  values(): number[] {
    const out = new Array<number>(this.n);
    const start = this.n < this.capacity ? 0 : this.next;
    for (let i = 0; i < this.n; i++) {
      out[i] = this.data[(start + i) % this.capacity];
    }
    return out;
  }
}

/**
 * Quadrature weights matching the service's head integral, inferred from the
 * row count: N rows means an arm (weights = segment lengths), N*M rows means
 * M trapezoid samples per segment.  Display-only; gauss-sampled sessions come
 * out slightly off but the head dot is always drawn from the snapshot.
 */
export function segmentWeights(partition: number[], rows: number): number[] {
  const n = partition.length - 1;
  const lengths = Array.from({ length: n }, (_, i) => partition[i + 1] - partition[i]);
  if (rows === n) return lengths;
  if (rows % n !== 0) {
    throw new ProtocolError(`${rows} segment rows do not fit ${n} segments`);
  }
  const m = rows / n;
  if (m < 2) throw new ProtocolError("sampled layout needs >= 2 samples");
  const out: number[] = [];
  for (const len of lengths) {
    for (let j = 0; j < m; j++) {
      const edge = j === 0 || j === m - 1;
      out.push((len * (edge ? 1 : 2)) / (2 * (m - 1)));
    }
  }
  return out;
}

function dist(a: number[], b: number[]): number {
  let s = 0;
  for (let i = 0; i < a.length; i++) s += (a[i] - b[i]) ** 2;
  return Math.sqrt(s);
}

const GAUGE_CAPACITY = 512;

export class ViewState {
  snapshot: StateSnapshot | null = null;
  /** Latest requested target, full-dimensional world coordinates. */
  target: number[] | null = null;
  plane: [number, number] = [0, 1];
  connected = true;
  stale = false;

  readonly energy = new RingBuffer(GAUGE_CAPACITY);
  readonly margin = new RingBuffer(GAUGE_CAPACITY);
  readonly error = new RingBuffer(GAUGE_CAPACITY);

  constructor(readonly info: SessionInfo) {}

  get dimension(): number {
    return this.info.dimension;
  }

  selectPlane(i: number, j: number): void {
    const d = this.dimension;
    if (
      !Number.isInteger(i) || !Number.isInteger(j) ||
      i < 0 || j < 0 || i >= d || j >= d || i === j
    ) {
      throw new RangeError(`plane (${i}, ${j}) is not a coordinate pair in d=${d}`);
    }
    this.plane = [i, j];
  }

  update(snap: StateSnapshot): void {
    if (snap.head.length !== this.dimension) {
      throw new ProtocolError(
        `snapshot dimension ${snap.head.length} != session dimension ${this.dimension}`,
      );
    }
    this.snapshot = snap;
    this.stale = false;
    this.energy.push(snap.energy);
    this.margin.push(snap.margin);
    this.error.push(this.target === null ? 0 : dist(snap.head, this.target));
  }

  setTarget(pos: number[]): void {
    this.target = pos.slice();
  }

  markDisconnected(): void {
    this.connected = false;
    this.stale = this.snapshot !== null;
  }

  markConnected(): void {
    this.connected = true;
  }

  project(v: number[]): [number, number] {
    return [v[this.plane[0]], v[this.plane[1]]];
  }

  /** Arm shape: origin followed by partial sums of weighted segments. */
  polyline(): [number, number][] {
    if (this.snapshot === null) return [];
    const segs = this.snapshot.segments;
    const w = segmentWeights(this.info.partition, segs.length);
    const d = this.dimension;
    const acc = new Array<number>(d).fill(0);
    const pts: [number, number][] = [this.project(acc)];
    for (let q = 0; q < segs.length; q++) {
      for (let i = 0; i < d; i++) acc[i] += w[q] * segs[q][i];
      pts.push(this.project(acc));
    }
    return pts;
  }

  headPoint(): [number, number] | null {
    return this.snapshot === null ? null : this.project(this.snapshot.head);
  }

  /**
   * Where to draw the target marker.  When the service reports the clamp,
   * the marker pins to the boundary sphere along the requested ray -- the
   * same rule the service applies, so marker and effective target agree.
   */
  markerPos(): [number, number] | null {
    if (this.target === null) return null;
    let pos = this.target;
    if (this.snapshot?.clamped) {
      const r = Math.hypot(...pos);
      if (r > this.info.boundary_radius) {
        pos = pos.map((x) => (x * this.info.boundary_radius) / r);
      }
    }
    return this.project(pos);
  }

  /** The uncontrollable line through the origin while singular-stopped. */
  axisLine(): [[number, number], [number, number]] | null {
    const snap = this.snapshot;
    if (snap === null || snap.status !== "singular-stopped" || snap.axis === null) {
      return null;
    }
    const L = this.info.total_length;
    const a = this.project(snap.axis);
    return [
      [-L * a[0], -L * a[1]],
      [L * a[0], L * a[1]],
    ];
  }
}
