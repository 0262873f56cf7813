// Watch-face controller: socket wiring and view state, no DOM. The
// browser bootstrap (main.ts) renders whatever view() says; tests drive
// this class with fake sockets and fake timers.
//
// Sharing is explicit: the only frames this controller ever originates
// are the hello handshake, a send_animo per own-animo tap, and a
// mark_read per peek tap. Nothing is sent on a timer.

import {
  ema,
  arousalValue,
  bandOf,
  pickAnimo,
  pickColor,
  shouldNotify,
} from "./engine.js";
import { PeekSlot, type PeekView } from "./peek.js";
import {
  decode,
  encode,
  makeEnvelope,
  statePayload,
  stateFromPayload,
  ProtocolError,
  type AnimoState,
  type Band,
  type CatalogEntry,
  type Envelope,
  type Shape,
} from "./protocol.js";

export type Connection = "connecting" | "waiting_for_partner" | "paired" | "disconnected";

export interface SocketLike {
  send(data: string): void;
}

export interface WatchDeps {
  now?: () => number; // seconds
  vibrate?: (ms: number) => void;
  rand?: () => number;
  onChange?: (view: WatchView) => void;
}

export interface WatchView {
  userId: string;
  connection: Connection;
  shape: Shape | null;
  partnerId: string | null;
  ttlSecs: number | null;
  own: AnimoState | null;
  bpm: number;
  smoothedBpm: number | null;
  band: Band | null;
  peek: PeekView | null;
  playing: AnimoState | null;
  lastError: string | null;
  lastVibrateAt: number | null;
}

const PLAY_SECS = 2.5;

export class WatchController {
  readonly peek: PeekSlot;
  private socket: SocketLike | null = null;
  private connection: Connection = "connecting";
  private shape: Shape | null = null;
  private partnerId: string | null = null;
  private ttlSecs: number | null = null;
  private catalog: CatalogEntry[] = [];
  private own: AnimoState | null = null;
  private bpm = 70;
  private smoothed: number | null = null;
  private band: Band | null = null;
  private playing: AnimoState | null = null;
  private playTimer: ReturnType<typeof setTimeout> | null = null;
  private lastError: string | null = null;
  private lastVibrateAt: number | null = null;
  private lastBandBuzz: number | null = null;

  private readonly now: () => number;
  private readonly vibrateFn: (ms: number) => void;
  private readonly rand: () => number;
  private readonly onChange: (view: WatchView) => void;

  constructor(
    readonly userId: string,
    readonly token: string,
    private baselines: { lowBpm: number; highBpm: number } = { lowBpm: 60, highBpm: 100 },
    deps: WatchDeps = {},
  ) {
    this.now = deps.now ?? (() => Date.now() / 1000);
    this.vibrateFn = deps.vibrate ?? (() => {});
    this.rand = deps.rand ?? Math.random;
    this.onChange = deps.onChange ?? (() => {});
    this.peek = new PeekSlot({ now: this.now, onChange: () => this.emit() });
  }

  view(): WatchView {
    return {
      userId: this.userId,
      connection: this.connection,
      shape: this.shape,
      partnerId: this.partnerId,
      ttlSecs: this.ttlSecs,
      own: this.own,
      bpm: this.bpm,
      smoothedBpm: this.smoothed,
      band: this.band,
      peek: this.peek.current,
      playing: this.playing,
      lastError: this.lastError,
      lastVibrateAt: this.lastVibrateAt,
    };
  }

  // --- socket lifecycle -------------------------------------------------

  attach(socket: SocketLike): void {
    this.socket = socket;
    this.connection = "connecting";
    socket.send(
      encode(
        makeEnvelope("hello", { user_id: this.userId, token: this.token }, { ts: this.now() }),
      ),
    );
    this.emit();
  }

  disconnected(): void {
    this.socket = null;
    this.connection = "disconnected";
    this.emit();
  }

  handleFrame(frame: string): void {
    let env: Envelope;
    try {
      env = decode(frame);
    } catch (err) {
      if (err instanceof ProtocolError) {
        this.lastError = `bad frame from server: ${err.code}`;
        this.emit();
        return;
      }
      throw err;
    }
    switch (env.kind) {
      case "hello":
        if (this.connection === "connecting") this.connection = "waiting_for_partner";
        break;
      case "paired": {
        const p = env.payload;
        this.connection = "paired";
        this.shape = p.shape as Shape;
        this.partnerId = (p.partner_id as string) ?? null;
        this.ttlSecs = (p.ttl_secs as number) ?? null;
        this.catalog = Array.isArray(p.catalog) ? (p.catalog as CatalogEntry[]) : [];
        this.refreshOwn(true);
        break;
      }
      case "animo_delivered": {
        if (env.msg_id === null) break;
        const state = stateFromPayload(env.payload);
        // countdown always runs on the handshake-advertised ttl
        const ttl = this.ttlSecs ?? 10;
        this.peek.show(state, env.msg_id, env.sender ?? "", ttl);
        if (env.payload.vibrate) this.vibrate(200);
        break;
      }
      case "expired":
        if (env.msg_id !== null) this.peek.serverExpired(env.msg_id);
        break;
      case "read_ack":
        break; // nothing to update; the animation is already playing
      case "error": {
        const code = String(env.payload.code ?? "error");
        this.lastError = code;
        if (code === "expired_message" && env.msg_id !== null) {
          this.peek.serverExpired(env.msg_id);
        }
        break;
      }
      default:
        this.lastError = `unexpected ${env.kind} from server`;
    }
    this.emit();
  }

  // --- own animo ---------------------------------------------------------

  setBpm(bpm: number): void {
    this.bpm = bpm;
  }

  // Advance the engine one sample (the bootstrap calls this ~1/s).
  tick(): void {
    this.smoothed = ema(this.smoothed, this.bpm);
    const value = arousalValue(this.smoothed, this.baselines.lowBpm, this.baselines.highBpm);
    const next = bandOf(value);
    if (next !== this.band) {
      const prev = this.band;
      this.band = next;
      this.refreshOwn(false);
      if (prev !== null && this.own !== null) {
        const t = this.now();
        if (shouldNotify(prev, next, this.lastBandBuzz, t)) {
          this.lastBandBuzz = t;
          this.vibrate(120);
        }
      }
    }
    this.emit();
  }

  private refreshOwn(force: boolean): void {
    if (this.shape === null || this.catalog.length === 0 || this.band === null) return;
    if (!force && this.own !== null && this.own.band === this.band) return;
    const spec = pickAnimo(this.band, this.catalog, this.rand);
    this.own = {
      animo_id: spec.id,
      color: pickColor(this.band, this.rand),
      band: this.band,
      shape: this.shape,
      computed_at: this.now(),
    };
  }

  // --- taps (the only way frames leave this watch) -------------------------

  tapOwn(): boolean {
    if (this.socket === null || this.connection !== "paired" || this.own === null) {
      this.lastError = "not connected";
      this.emit();
      return false;
    }
    this.socket.send(
      encode(
        makeEnvelope("send_animo", statePayload(this.own), {
          sender: this.userId,
          ts: this.now(),
        }),
      ),
    );
    this.emit();
    return true;
  }

  tapPeek(): boolean {
    const current = this.peek.current;
    const msgId = this.peek.tap();
    if (msgId === null || current === null) return false;
    if (this.socket !== null) {
      this.socket.send(encode(makeEnvelope("mark_read", {}, { msgId, ts: this.now() })));
    }
    this.playing = current.state;
    if (this.playTimer !== null) clearTimeout(this.playTimer);
    this.playTimer = setTimeout(() => {
      this.playing = null;
      this.playTimer = null;
      this.emit();
    }, PLAY_SECS * 1000);
    this.emit();
    return true;
  }

  clearError(): void {
    this.lastError = null;
    this.emit();
  }

  // Catalog lookup for rendering; null when the id is unknown.
  motionOf(animoId: string): string | null {
    const spec = this.catalog.find((c) => c.id === animoId);
    return spec ? spec.motion_name : null;
  }

  private vibrate(ms: number): void {
    this.lastVibrateAt = this.now();
    this.vibrateFn(ms);
  }

  private emit(): void {
    this.onChange(this.view());
  }
}
