// The single peek slot: one incoming animo at a time, newest wins,
// auto-clears exactly ttl seconds after delivery unless tapped first.

import type { AnimoState } from "./protocol.js";

export interface PeekView {
  state: AnimoState;
  msgId: string;
  sender: string;
  shownAt: number;    // seconds
  expiresAt: number;  // seconds
}

export interface PeekDeps {
  now(): number; // seconds
  onChange(peek: PeekView | null): void;
}

export class PeekSlot {
  current: PeekView | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(private deps: PeekDeps) {}

  show(state: AnimoState, msgId: string, sender: string, ttlSecs: number): void {
    this.cancelTimer();
    const shownAt = this.deps.now();
    this.current = { state, msgId, sender, shownAt, expiresAt: shownAt + ttlSecs };
    this.timer = setTimeout(() => this.expire(), ttlSecs * 1000);
    this.deps.onChange(this.current);
  }

  // Returns the msgId to mark read, or null if there is nothing to tap.
  tap(): string | null {
    if (this.current === null) return null;
    const msgId = this.current.msgId;
    this.clear();
    return msgId;
  }

  // Server-driven clear (an expired envelope for the shown message).
  serverExpired(msgId: string): void {
    if (this.current !== null && this.current.msgId === msgId) {
      this.clear();
    }
  }

  clear(): void {
    this.cancelTimer();
    if (this.current !== null) {
      this.current = null;
      this.deps.onChange(null);
    }
  }

  private expire(): void {
    this.timer = null;
    if (this.current !== null) {
      this.current = null;
      this.deps.onChange(null);
    }
  }

  private cancelTimer(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }
}
