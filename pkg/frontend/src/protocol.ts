/**
 * Wire protocol spoken by the charm service.
 *
 * The UI renders only snapshots that pass these guards; anything malformed
 * becomes a ProtocolError instead of a half-drawn frame.  Shapes mirror the
 * service exactly: snapshots are {type:"state", t, head, segments, energy,
 * margin, status, clamped, w, axis} and protocol failures come back as
 * {type:"error", error, echo}.
 */

export type SessionStatus = "running" | "paused" | "singular-stopped";

export interface StateSnapshot {
  type: "state";
  t: number;
  head: number[];
  segments: number[][];
  energy: number;
  margin: number;
  status: SessionStatus;
  clamped: boolean;
  w: number[];
  axis: number[] | null;
}

export interface ErrorMessage {
  type: "error";
  error: string;
  echo?: unknown;
}

export type ServerMessage = StateSnapshot | ErrorMessage;

export type ClientMessage =
  | { type: "set_target"; pos: number[] }
  | { type: "pause" }
  | { type: "resume" }
  | { type: "set_params"; k?: number; v_max?: number }
  | { type: "tick"; count: number };

export interface SessionInfo {
  id: string;
  dimension: number;
  kind: "arm" | "sampled";
  partition: number[];
  total_length: number;
  boundary_radius: number;
  tick_rate: number;
  paced: boolean;
  k: number;
  v_max: number;
  tol_singular: number;
  head: number[];
  margin: number;
  status: SessionStatus;
}

export class ProtocolError extends Error {}

const STATUSES: ReadonlySet<string> = new Set([
  "running",
  "paused",
  "singular-stopped",
]);

function isNum(x: unknown): x is number {
  return typeof x === "number" && Number.isFinite(x);
}

function isVec(x: unknown, len?: number): x is number[] {
  return (
    Array.isArray(x) &&
    x.length > 0 &&
    (len === undefined || x.length === len) &&
    x.every(isNum)
  );
}

function fail(where: string, what: string): never {
  throw new ProtocolError(`${where}: ${what}`);
}

export function validateSnapshot(x: unknown): StateSnapshot {
  if (typeof x !== "object" || x === null || Array.isArray(x)) {
    fail("snapshot", "not an object");
  }
  const o = x as Record<string, unknown>;
  if (o.type !== "state") fail("snapshot.type", `expected "state", got ${JSON.stringify(o.type)}`);
  if (!isNum(o.t) || o.t < 0) fail("snapshot.t", "not a finite time");
  if (!isVec(o.head)) fail("snapshot.head", "not a numeric vector");
  const d = o.head.length;
  if (
    !Array.isArray(o.segments) ||
    o.segments.length === 0 ||
    !o.segments.every((row) => isVec(row, d))
  ) {
    fail("snapshot.segments", `not a non-empty list of ${d}-vectors`);
  }
  if (!isNum(o.energy)) fail("snapshot.energy", "not finite");
  if (!isNum(o.margin)) fail("snapshot.margin", "not finite");
  if (typeof o.status !== "string" || !STATUSES.has(o.status)) {
    fail("snapshot.status", `unknown status ${JSON.stringify(o.status)}`);
  }
  if (typeof o.clamped !== "boolean") fail("snapshot.clamped", "not a bool");
  if (!isVec(o.w, d)) fail("snapshot.w", `not a ${d}-vector`);
  if (o.axis !== null && !isVec(o.axis, d)) {
    fail("snapshot.axis", `neither null nor a ${d}-vector`);
  }
  return o as unknown as StateSnapshot;
}

export function parseServerMessage(text: string): ServerMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (e) {
    fail("server message", `not JSON (${(e as Error).message})`);
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    fail("server message", "not an object");
  }
  const o = raw as Record<string, unknown>;
  if (o.type === "state") return validateSnapshot(o);
  if (o.type === "error") {
    if (typeof o.error !== "string") fail("error message", "missing error text");
    return o as unknown as ErrorMessage;
  }
  fail("server message", `unknown type ${JSON.stringify(o.type)}`);
}

export function validateSessionInfo(x: unknown): SessionInfo {
  if (typeof x !== "object" || x === null) fail("session info", "not an object");
  const o = x as Record<string, unknown>;
  if (typeof o.id !== "string" || !o.id) fail("info.id", "missing");
  if (!isNum(o.dimension) || o.dimension < 2) fail("info.dimension", "bad");
  if (o.kind !== "arm" && o.kind !== "sampled") fail("info.kind", "bad");
  if (!isVec(o.partition) || o.partition.length < 2) fail("info.partition", "bad");
  for (const key of [
    "total_length",
    "boundary_radius",
    "tick_rate",
    "k",
    "v_max",
    "tol_singular",
    "margin",
  ]) {
    if (!isNum(o[key])) fail(`info.${key}`, "not finite");
  }
  if (typeof o.paced !== "boolean") fail("info.paced", "not a bool");
  if (!isVec(o.head, o.dimension as number)) fail("info.head", "bad");
  if (typeof o.status !== "string" || !STATUSES.has(o.status)) {
    fail("info.status", "bad");
  }
  return o as unknown as SessionInfo;
}
