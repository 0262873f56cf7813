// Canvas rendering: each catalog animo is a small parametric motion;
// band sets the tempo (high is frantic, low is languid). Unknown ids
// fall back to a static shape with a warning badge.

import type { AnimoState, Band } from "./protocol.js";

export const COLOR_HEX: Record<string, string> = {
  yellow: "#ffd447",
  red: "#ff5349",
  white: "#f2f2f2",
  blue: "#4a90d9",
  green: "#58c08b",
};

const TEMPO: Record<Band, number> = { high: 1.8, mid: 1.0, low: 0.55 };

interface Pose {
  dx: number;
  dy: number;
  rot: number;
  scale: number;
  alpha: number;
  ring?: number; // 0..1 expanding ripple ring
}

type Motion = (p: number) => Pose; // p: phase in seconds (tempo-scaled)

const still: Pose = { dx: 0, dy: 0, rot: 0, scale: 1, alpha: 1 };

const MOTIONS: Record<string, Motion> = {
  bounce: (p) => ({ ...still, dy: -Math.abs(Math.sin(p * Math.PI * 2)) * 0.22 }),
  spin: (p) => ({ ...still, rot: p * Math.PI * 2 }),
  pop: (p) => ({ ...still, scale: 1 + 0.18 * Math.max(0, Math.sin(p * Math.PI * 2)) ** 3 }),
  shake: (p) => ({ ...still, dx: 0.08 * Math.sin(p * Math.PI * 14) }),
  jitter: (p) => ({
    ...still,
    dx: 0.05 * Math.sin(p * 37.7) + 0.03 * Math.sin(p * 91.3),
    dy: 0.05 * Math.cos(p * 53.1),
  }),
  flicker: (p) => ({ ...still, alpha: 0.55 + 0.45 * Math.abs(Math.sin(p * Math.PI * 6)) }),
  sway: (p) => ({ ...still, dx: 0.16 * Math.sin(p * Math.PI), rot: 0.12 * Math.sin(p * Math.PI) }),
  drift: (p) => ({ ...still, dx: 0.12 * Math.sin(p * 1.1), dy: 0.1 * Math.sin(p * 0.7 + 1.3) }),
  "slow breathe": (p) => ({ ...still, scale: 1 + 0.08 * Math.sin(p * Math.PI) }),
  slump: (p) => ({ ...still, dy: 0.1 + 0.05 * Math.sin(p * 0.9), scale: 0.95 }),
  wilt: (p) => ({ ...still, rot: 0.25 + 0.1 * Math.sin(p * 0.8), dy: 0.08 }),
  "fade pulse": (p) => ({ ...still, alpha: 0.45 + 0.4 * (0.5 + 0.5 * Math.sin(p * Math.PI)) }),
  "rapid ripple": (p) => ({ ...still, ring: (p * 1.6) % 1 }),
  "slow ripple": (p) => ({ ...still, ring: (p * 0.6) % 1 }),
  wobble: (p) => ({ ...still, rot: 0.18 * Math.sin(p * Math.PI * 2.4) }),
  orbit: (p) => ({ ...still, dx: 0.12 * Math.cos(p * Math.PI), dy: 0.12 * Math.sin(p * Math.PI) }),
  hover: (p) => ({ ...still, dy: -0.06 + 0.04 * Math.sin(p * Math.PI * 1.6) }),
  sweep: (p) => ({ ...still, dx: 0.2 * (((p * 0.7) % 2 < 1 ? (p * 0.7) % 1 : 1 - ((p * 0.7) % 1)) - 0.5) }),
  "fast spin": (p) => ({ ...still, rot: p * Math.PI * 3 }),
  "pop burst": (p) => ({ ...still, scale: 1 + 0.18 * Math.max(0, Math.sin(p * Math.PI * 2)) ** 3 }),
};

function shapePath(ctx: CanvasRenderingContext2D, shape: string, r: number): void {
  ctx.beginPath();
  if (shape === "diamond") {
    ctx.moveTo(0, -r);
    ctx.lineTo(r, 0);
    ctx.lineTo(0, r);
    ctx.lineTo(-r, 0);
    ctx.closePath();
  } else {
    ctx.arc(0, 0, r, 0, Math.PI * 2);
  }
}

export function drawAnimo(
  ctx: CanvasRenderingContext2D,
  cx: number,
  cy: number,
  size: number,
  state: AnimoState,
  motionName: string | null,
  timeMs: number,
): void {
  const motion = motionName !== null ? MOTIONS[motionName] : undefined;
  const phase = (timeMs / 1000) * TEMPO[state.band];
  const pose = motion ? motion(phase) : still;
  const r = size * 0.32 * pose.scale;
  const color = COLOR_HEX[state.color] ?? "#999";

  ctx.save();
  ctx.translate(cx + pose.dx * size, cy + pose.dy * size);
  ctx.rotate(pose.rot);
  ctx.globalAlpha = pose.alpha;

  if (pose.ring !== undefined) {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.globalAlpha = (1 - pose.ring) * 0.8 * pose.alpha;
    shapePath(ctx, state.shape, r * (0.8 + pose.ring * 0.9));
    ctx.stroke();
    ctx.globalAlpha = pose.alpha;
  }

  ctx.fillStyle = color;
  ctx.shadowColor = color;
  ctx.shadowBlur = size * 0.08;
  shapePath(ctx, state.shape, r);
  ctx.fill();
  ctx.restore();

  if (motion === undefined) {
    // unknown animo id: static shape plus a warning badge
    ctx.save();
    ctx.fillStyle = "#e0a030";
    ctx.font = `${Math.round(size * 0.16)}px system-ui, sans-serif`;
    ctx.textAlign = "center";
    ctx.fillText("?", cx + size * 0.3, cy - size * 0.28);
    ctx.restore();
  }
}

export function drawCountdown(
  ctx: CanvasRenderingContext2D,
  cx: number,
  cy: number,
  radius: number,
  remaining: number, // 0..1
): void {
  ctx.save();
  ctx.strokeStyle = "rgba(255,255,255,0.75)";
  ctx.lineWidth = 3;
  ctx.beginPath();
  ctx.arc(cx, cy, radius, -Math.PI / 2, -Math.PI / 2 + Math.PI * 2 * remaining);
  ctx.stroke();
  ctx.restore();
}
