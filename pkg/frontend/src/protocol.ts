// Wire protocol (version 1): one JSON envelope per frame, newline-
// terminated. Mirrors the relay's docs/protocol.md frame for frame.

export const PROTOCOL_VERSION = 1;

export type Band = "low" | "mid" | "high";
export type Shape = "circle" | "diamond";
export type AnimoColor = "yellow" | "red" | "white" | "blue" | "green";

export type Kind =
  | "hello"
  | "paired"
  | "send_animo"
  | "animo_delivered"
  | "mark_read"
  | "read_ack"
  | "expired"
  | "error";

const KINDS: ReadonlySet<string> = new Set([
  "hello", "paired", "send_animo", "animo_delivered",
  "mark_read", "read_ack", "expired", "error",
]);

export interface AnimoState {
  animo_id: string;
  color: AnimoColor;
  band: Band;
  shape: Shape;
  computed_at: number;
}

export interface CatalogEntry {
  id: string;
  motion_name: string;
  energy_band: Band;
  category_tag: string;
}

export interface Envelope {
  v: number;
  kind: Kind;
  msg_id: string | null;
  sender: string | null;
  ts: number;
  payload: Record<string, unknown>;
}

export class ProtocolError extends Error {
  constructor(readonly code: string, detail: string) {
    super(detail);
    this.name = "ProtocolError";
  }
}

export const BAND_COLORS: Record<Band, readonly AnimoColor[]> = {
  high: ["yellow", "red"],
  mid: ["white"],
  low: ["blue", "green"],
};

export function stateViolation(state: AnimoState): string | null {
  if (!BAND_COLORS[state.band]) return `unknown band ${state.band}`;
  if (!BAND_COLORS[state.band].includes(state.color)) {
    return `color ${state.color} illegal for band ${state.band}`;
  }
  if (state.shape !== "circle" && state.shape !== "diamond") {
    return `unknown shape ${state.shape}`;
  }
  return null;
}

export function makeEnvelope(
  kind: Kind,
  payload: Record<string, unknown> = {},
  opts: { msgId?: string | null; sender?: string | null; ts?: number } = {},
): Envelope {
  return {
    v: PROTOCOL_VERSION,
    kind,
    msg_id: opts.msgId ?? null,
    sender: opts.sender ?? null,
    ts: opts.ts ?? 0,
    payload,
  };
}

export function encode(env: Envelope): string {
  if (env.kind === "send_animo" || env.kind === "animo_delivered") {
    const reason = stateViolation(stateFromPayload(env.payload));
    if (reason) throw new ProtocolError("invariant_violation", reason);
  }
  return (
    JSON.stringify({
      v: env.v, kind: env.kind, msg_id: env.msg_id,
      sender: env.sender, ts: env.ts, payload: env.payload,
    }) + "\n"
  );
}

export function decode(frame: string): Envelope {
  let obj: unknown;
  const text = frame.trim();
  if (!text) throw new ProtocolError("malformed_frame", "empty frame");
  try {
    obj = JSON.parse(text);
  } catch (err) {
    throw new ProtocolError("malformed_frame", `invalid json: ${err}`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new ProtocolError("malformed_frame", "frame is not an object");
  }
  const rec = obj as Record<string, unknown>;
  if (typeof rec.v !== "number") {
    throw new ProtocolError("malformed_frame", "missing version field 'v'");
  }
  if (rec.v !== PROTOCOL_VERSION) {
    throw new ProtocolError("unsupported_version", `version ${rec.v} not supported`);
  }
  if (typeof rec.kind !== "string" || !KINDS.has(rec.kind)) {
    throw new ProtocolError("unknown_kind", `unknown kind ${String(rec.kind)}`);
  }
  const payload =
    typeof rec.payload === "object" && rec.payload !== null && !Array.isArray(rec.payload)
      ? (rec.payload as Record<string, unknown>)
      : {};
  const env: Envelope = {
    v: rec.v,
    kind: rec.kind as Kind,
    msg_id: typeof rec.msg_id === "string" ? rec.msg_id : null,
    sender: typeof rec.sender === "string" ? rec.sender : null,
    ts: typeof rec.ts === "number" ? rec.ts : 0,
    payload,
  };
  if (env.kind === "send_animo" || env.kind === "animo_delivered") {
    const reason = stateViolation(stateFromPayload(payload));
    if (reason) throw new ProtocolError("invariant_violation", reason);
  }
  return env;
}

export function stateFromPayload(payload: Record<string, unknown>): AnimoState {
  const { animo_id, color, band, shape, computed_at } = payload;
  if (
    typeof animo_id !== "string" || typeof color !== "string" ||
    typeof band !== "string" || typeof shape !== "string" ||
    typeof computed_at !== "number"
  ) {
    throw new ProtocolError("invariant_violation", "bad animo state payload");
  }
  return {
    animo_id,
    color: color as AnimoColor,
    band: band as Band,
    shape: shape as Shape,
    computed_at,
  };
}

export function statePayload(state: AnimoState): Record<string, unknown> {
  return { ...state };
}
