// Client-side heart-rate -> band pipeline. The watch computes its own
// animo locally; the relay only sees the states it is asked to send.

import type { AnimoColor, Band, CatalogEntry } from "./protocol.js";
import { BAND_COLORS } from "./protocol.js";

export const T_LOW = 1 / 3;
export const T_HIGH = 2 / 3;
export const DEFAULT_ALPHA = 0.3;
export const NOTIFY_GAP_SECS = 600;

export function ema(prev: number | null, bpm: number, alpha = DEFAULT_ALPHA): number {
  if (alpha <= 0 || alpha > 1) throw new Error(`alpha out of range: ${alpha}`);
  return prev === null ? bpm : alpha * bpm + (1 - alpha) * prev;
}

export function arousalValue(bpm: number, lowBpm: number, highBpm: number): number {
  const v = (bpm - lowBpm) / (highBpm - lowBpm);
  return Math.min(1, Math.max(0, v));
}

export function bandOf(value: number, tLow = T_LOW, tHigh = T_HIGH): Band {
  if (value < tLow) return "low";
  if (value > tHigh) return "high";
  return "mid";
}

export function pickAnimo(
  band: Band,
  catalog: readonly CatalogEntry[],
  rand: () => number = Math.random,
): CatalogEntry {
  const matching = catalog.filter((c) => c.energy_band === band);
  if (matching.length === 0) throw new Error(`no catalog entry for band ${band}`);
  return matching[Math.floor(rand() * matching.length)];
}

export function pickColor(band: Band, rand: () => number = Math.random): AnimoColor {
  const palette = BAND_COLORS[band];
  return palette[Math.floor(rand() * palette.length)];
}

export interface HrSample {
  userId: string;
  timestamp: number;
  bpm: number;
}

// Heart-rate CSV (header: user_id,timestamp,bpm), same format the
// relay-side tooling ingests. Optionally filters to one user; enforces
// the plausibility gate and strictly increasing per-user timestamps.
export function parseHrCsv(text: string, userId?: string): HrSample[] {
  const lines = text.split(/\r?\n/).filter((l) => l.trim() !== "");
  if (lines.length === 0 || lines[0].trim() !== "user_id,timestamp,bpm") {
    throw new Error("expected csv header user_id,timestamp,bpm");
  }
  const samples: HrSample[] = [];
  const lastTs = new Map<string, number>();
  for (let i = 1; i < lines.length; i++) {
    const cols = lines[i].split(",");
    if (cols.length !== 3) throw new Error(`bad csv row ${i + 1}`);
    const [uid, tsRaw, bpmRaw] = cols;
    const timestamp = Number(tsRaw);
    const bpm = Number(bpmRaw);
    if (!Number.isFinite(timestamp) || !Number.isFinite(bpm)) {
      throw new Error(`bad numbers in csv row ${i + 1}`);
    }
    if (bpm <= 20 || bpm >= 250) throw new Error(`implausible bpm ${bpm} in row ${i + 1}`);
    const prev = lastTs.get(uid);
    if (prev !== undefined && timestamp <= prev) {
      throw new Error(`timestamps for ${uid} not strictly increasing at row ${i + 1}`);
    }
    lastTs.set(uid, timestamp);
    if (userId === undefined || uid === userId) {
      samples.push({ userId: uid, timestamp, bpm });
    }
  }
  return samples;
}

// Should a band transition buzz the wrist? Debounced so two buzzes are
// never closer than minGap seconds.
export function shouldNotify(
  prevBand: Band,
  nextBand: Band,
  lastNotify: number | null,
  now: number,
  minGap = NOTIFY_GAP_SECS,
): boolean {
  if (prevBand === nextBand) return false;
  return lastNotify === null || now - lastNotify >= minGap;
}
