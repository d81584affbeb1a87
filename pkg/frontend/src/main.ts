// Browser entry point: wires DOM events to the input sampler, streams
// input frames to the server, and renders the latest snapshot each frame.

import { SessionClient } from "./client.js";
import { InputSampler } from "./input.js";
import { Camera, renderSnapshot } from "./render.js";
import {
  DEFAULT_SETTINGS,
  Settings,
  loadSettings,
  locomotionMode,
  saveSettings,
} from "./settings.js";
import { connectWebSocket } from "./transport.js";

const INPUT_RATE_HZ = 30;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function start(): Promise<void> {
  const canvas = el<HTMLCanvasElement>("view");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("no 2d context");
  const banner = el<HTMLDivElement>("banner");
  const badge = el<HTMLSpanElement>("multiplier");
  const settings: Settings = loadSettings(window.localStorage);

  const camera: Camera = { x: 0, z: 0, zoom: settings.zoom };
  let follow = true;

  const form = {
    address: el<HTMLInputElement>("address"),
    name: el<HTMLInputElement>("name"),
    join: el<HTMLButtonElement>("join"),
    mode: el<HTMLSelectElement>("mode"),
    stuttered: el<HTMLInputElement>("stuttered"),
    transition: el<HTMLSelectElement>("transition"),
    dragScale: el<HTMLInputElement>("dragscale"),
  };
  form.mode.value = settings.inputMode;
  form.stuttered.checked = settings.stuttered;
  form.transition.value = settings.transitionKind;
  form.dragScale.value = String(settings.dragScale);

  const sampler = new InputSampler(settings);
  let client: SessionClient | null = null;
  let sendTimer: number | null = null;

  function persist(): void {
    settings.zoom = camera.zoom;
    saveSettings(window.localStorage, settings);
  }

  function applyForm(): void {
    settings.inputMode = form.mode.value as Settings["inputMode"];
    settings.stuttered = form.stuttered.checked;
    settings.transitionKind =
      form.transition.value as Settings["transitionKind"];
    const scale = parseFloat(form.dragScale.value);
    settings.dragScale = Number.isFinite(scale) && scale > 0
      ? scale : DEFAULT_SETTINGS.dragScale;
    persist();
  }
  for (const input of [form.mode, form.stuttered, form.transition, form.dragScale]) {
    input.addEventListener("change", applyForm);
  }

  form.join.addEventListener("click", async () => {
    applyForm();
    banner.textContent = "connecting...";
    try {
      const transport = await connectWebSocket(form.address.value);
      client = new SessionClient(transport, {
        onError: (message) => { banner.textContent = message; },
        onClose: (reason) => {
          banner.textContent = `disconnected: ${reason}`;
          if (sendTimer !== null) window.clearInterval(sendTimer);
          sendTimer = null;
          client = null;
        },
      });
      await client.join(form.name.value || "web", {
        locomotion_mode: locomotionMode(settings),
      });
      banner.textContent = `joined as #${client.userId}`;
      sendTimer = window.setInterval(() => {
        client?.sendInput(sampler.sample());
      }, 1000 / INPUT_RATE_HZ);
    } catch (err) {
      banner.textContent = String(err);
    }
  });

  window.addEventListener("keydown", (event) => {
    if (event.code === "ArrowLeft") camera.x -= 1;
    else if (event.code === "ArrowRight") camera.x += 1;
    else if (event.code === "ArrowUp") camera.z += 1;
    else if (event.code === "ArrowDown") camera.z -= 1;
    else if (event.code === "Equal") { camera.zoom *= 1.2; persist(); }
    else if (event.code === "Minus") { camera.zoom /= 1.2; persist(); }
    else if (event.code === "KeyF") follow = !follow;
    else sampler.keyDown(event.code);
    if (["ArrowLeft", "ArrowRight", "ArrowUp", "ArrowDown"].includes(event.code)) {
      follow = false;
    }
  });
  window.addEventListener("keyup", (event) => sampler.keyUp(event.code));
  canvas.addEventListener("mousedown", (event) =>
    sampler.mouseDown(event.offsetX, event.offsetY));
  canvas.addEventListener("mousemove", (event) =>
    sampler.mouseMove(event.offsetX, event.offsetY));
  window.addEventListener("mouseup", () => sampler.mouseUp());
  canvas.addEventListener("wheel", (event) => {
    event.preventDefault();
    sampler.wheel(event.deltaY);
  }, { passive: false });

  function frame(): void {
    const snapshot = client?.latestSnapshot ?? null;
    if (follow && snapshot && client?.userId !== null) {
      const me = snapshot.users.find((u) => u.user_id === client?.userId);
      if (me) {
        camera.x = me.rig.origin.position[0];
        camera.z = me.rig.origin.position[2];
      }
    }
    renderSnapshot(ctx as unknown as import("./render.js").Canvas2DLike,
      snapshot, camera, {
        width: canvas.width,
        height: canvas.height,
        localUserId: client?.userId ?? null,
      });
    badge.textContent = `${sampler.multiplierBadge().toFixed(1)}x`;
    window.requestAnimationFrame(frame);
  }
  window.requestAnimationFrame(frame);
}

start().catch((err) => {
  const banner = document.getElementById("banner");
  if (banner) banner.textContent = String(err);
});
