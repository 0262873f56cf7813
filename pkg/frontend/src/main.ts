// Browser bootstrap: wires the controller to a real websocket, the
// canvases, the heart-rate dial, and the vibration/shudder cue.

import { drawAnimo, drawCountdown } from "./render.js";
import { WatchController } from "./watch.js";

const params = new URLSearchParams(location.search);
const userId = params.get("user_id") ?? `guest-${Math.floor(Math.random() * 1e4)}`;
const token = params.get("token") ?? "demo";
const wsHost = params.get("ws") ?? `${location.hostname || "localhost"}:7465`;
const lowBpm = Number(params.get("low") ?? 60);
const highBpm = Number(params.get("high") ?? 100);

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;
const ownCanvas = $<HTMLCanvasElement>("own");
const peekCanvas = $<HTMLCanvasElement>("peek");
const statusDot = $<HTMLSpanElement>("status-dot");
const statusText = $<HTMLSpanElement>("status-text");
const toast = $<HTMLDivElement>("toast");
const dial = $<HTMLInputElement>("dial");
const bpmLabel = $<HTMLSpanElement>("bpm-label");
const face = $<HTMLDivElement>("face");

let lastShudder = 0;

const controller = new WatchController(
  userId,
  token,
  { lowBpm, highBpm },
  {
    vibrate(ms) {
      navigator.vibrate?.(ms);
      face.classList.remove("shudder");
      void face.offsetWidth; // restart the css animation
      face.classList.add("shudder");
      lastShudder = performance.now();
    },
    onChange(view) {
      statusText.textContent =
        view.connection === "paired"
          ? `${view.userId} (${view.shape}) + ${view.partnerId}`
          : view.connection.replaceAll("_", " ");
      statusDot.className = `dot ${view.connection}`;
      if (view.lastError !== null) {
        toast.textContent = view.lastError.replaceAll("_", " ");
        toast.classList.add("visible");
        setTimeout(() => toast.classList.remove("visible"), 2500);
        controller.clearError();
      }
    },
  },
);

function connect(): void {
  const ws = new WebSocket(`ws://${wsHost}/?user_id=${encodeURIComponent(userId)}&token=${encodeURIComponent(token)}`);
  ws.onopen = () => controller.attach({ send: (data) => ws.send(data) });
  ws.onmessage = (ev) => controller.handleFrame(String(ev.data));
  ws.onclose = () => {
    controller.disconnected();
    setTimeout(connect, 3000); // keep trying; this is a demo rig
  };
}
connect();

dial.addEventListener("input", () => {
  controller.setBpm(Number(dial.value));
  bpmLabel.textContent = `${dial.value} bpm`;
});
setInterval(() => controller.tick(), 1000);

// Optional recorded stream: ?csv=<url> replays a heart-rate csv at its
// own timestamps (scaled by ?csv_speed=) instead of the manual dial.
const csvUrl = params.get("csv");
if (csvUrl !== null) {
  const speed = Number(params.get("csv_speed") ?? 1);
  import("./engine.js").then(async ({ parseHrCsv }) => {
    try {
      const text = await (await fetch(csvUrl)).text();
      const rows = parseHrCsv(text, params.get("user_id") ?? undefined);
      const all = rows.length > 0 ? rows : parseHrCsv(text);
      if (all.length === 0) throw new Error("csv has no rows for this user");
      dial.disabled = true;
      const t0 = all[0].timestamp;
      for (const row of all) {
        setTimeout(() => {
          controller.setBpm(row.bpm);
          bpmLabel.textContent = `${Math.round(row.bpm)} bpm (stream)`;
        }, ((row.timestamp - t0) * 1000) / speed);
      }
    } catch (err) {
      toast.textContent = String(err);
      toast.classList.add("visible");
      setTimeout(() => toast.classList.remove("visible"), 4000);
    }
  });
}

ownCanvas.addEventListener("click", () => controller.tapOwn());
peekCanvas.addEventListener("click", () => controller.tapPeek());

function paint(timeMs: number): void {
  const view = controller.view();

  const octx = ownCanvas.getContext("2d")!;
  octx.clearRect(0, 0, ownCanvas.width, ownCanvas.height);
  const showing = view.playing ?? view.own;
  if (showing !== null) {
    const motion = controller.motionOf(showing.animo_id);
    drawAnimo(octx, ownCanvas.width / 2, ownCanvas.height / 2, ownCanvas.width, showing, motion, timeMs);
  } else {
    octx.fillStyle = "#555";
    octx.font = "14px system-ui, sans-serif";
    octx.textAlign = "center";
    octx.fillText("waiting…", ownCanvas.width / 2, ownCanvas.height / 2);
  }

  const pctx = peekCanvas.getContext("2d")!;
  pctx.clearRect(0, 0, peekCanvas.width, peekCanvas.height);
  if (view.peek !== null && view.playing === null) {
    peekCanvas.classList.add("active");
    const motion = controller.motionOf(view.peek.state.animo_id);
    drawAnimo(pctx, peekCanvas.width / 2, peekCanvas.height / 2, peekCanvas.width, view.peek.state, motion, timeMs);
    const total = view.peek.expiresAt - view.peek.shownAt;
    const remaining = Math.max(0, (view.peek.expiresAt - Date.now() / 1000) / total);
    drawCountdown(pctx, peekCanvas.width / 2, peekCanvas.height / 2, peekCanvas.width / 2 - 4, remaining);
  } else {
    peekCanvas.classList.remove("active");
  }

  if (face.classList.contains("shudder") && performance.now() - lastShudder > 400) {
    face.classList.remove("shudder");
  }
  requestAnimationFrame(paint);
}
requestAnimationFrame(paint);
