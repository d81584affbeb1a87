// Top-down 2D renderer. Pure function of (view state, camera, canvas size):
// avatars are oriented wedge markers, rigs are rings, ghosts are circles
// whose opacity is the server-sent alpha, dissolve draws both endpoints
// with complementary opacity plus the matter stream, and a discrepancy
// line ties every rig to its avatar. Only entities present in the latest
// snapshot are drawn.

import { PoseData, SnapshotPayload, SnapshotUser } from "./protocol.js";

// The subset of CanvasRenderingContext2D the renderer touches; tests feed a
// recording stub instead of a real canvas.
export interface Canvas2DLike {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  globalAlpha: number;
  lineWidth: number;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  save(): void;
  restore(): void;
}

export interface Camera {
  x: number; // world X at screen center
  z: number; // world Z at screen center
  zoom: number; // pixels per meter
}

export interface RenderOptions {
  width: number;
  height: number;
  localUserId: number | null;
}

const COLORS = ["#4cc9f0", "#f4a261", "#90be6d", "#f72585", "#b5838d", "#ffd166"];

function userColor(userId: number): string {
  return COLORS[userId % COLORS.length];
}

export function worldToScreen(
  camera: Camera, opts: RenderOptions, x: number, z: number,
): [number, number] {
  return [
    (x - camera.x) * camera.zoom + opts.width / 2,
    opts.height / 2 - (z - camera.z) * camera.zoom,
  ];
}

function drawMarker(
  ctx: Canvas2DLike, camera: Camera, opts: RenderOptions,
  pose: PoseData, color: string, alpha: number, radius = 0.4,
): void {
  const [sx, sy] = worldToScreen(camera, opts, pose.position[0], pose.position[2]);
  const r = radius * camera.zoom;
  // Wedge pointing along yaw (screen up = +Z = yaw 0).
  const heading = pose.yaw;
  const tip: [number, number] = [
    sx + Math.sin(heading) * r * 1.4, sy - Math.cos(heading) * r * 1.4];
  const left: [number, number] = [
    sx + Math.sin(heading + 2.5) * r, sy - Math.cos(heading + 2.5) * r];
  const right: [number, number] = [
    sx + Math.sin(heading - 2.5) * r, sy - Math.cos(heading - 2.5) * r];
  ctx.save();
  ctx.globalAlpha = alpha;
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.moveTo(tip[0], tip[1]);
  ctx.lineTo(left[0], left[1]);
  ctx.lineTo(right[0], right[1]);
  ctx.closePath();
  ctx.fill();
  ctx.restore();
}

function drawRing(
  ctx: Canvas2DLike, camera: Camera, opts: RenderOptions,
  x: number, z: number, color: string, radius: number, alpha = 1.0,
): void {
  const [sx, sy] = worldToScreen(camera, opts, x, z);
  ctx.save();
  ctx.globalAlpha = alpha;
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(sx, sy, radius * camera.zoom, 0, Math.PI * 2);
  ctx.stroke();
  ctx.restore();
}

function drawLine(
  ctx: Canvas2DLike, camera: Camera, opts: RenderOptions,
  ax: number, az: number, bx: number, bz: number,
  color: string, alpha = 1.0, width = 1,
): void {
  const [sx, sy] = worldToScreen(camera, opts, ax, az);
  const [ex, ey] = worldToScreen(camera, opts, bx, bz);
  ctx.save();
  ctx.globalAlpha = alpha;
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  ctx.moveTo(sx, sy);
  ctx.lineTo(ex, ey);
  ctx.stroke();
  ctx.restore();
}

function drawTransition(
  ctx: Canvas2DLike, camera: Camera, opts: RenderOptions,
  user: SnapshotUser, color: string,
): void {
  const tr = user.transition;
  if (!tr) return;
  for (const ghost of tr.ghosts) {
    if (ghost.alpha <= 0) continue; // expired images vanish
    drawRing(ctx, camera, opts,
      ghost.pose.position[0], ghost.pose.position[2], color, 0.35, ghost.alpha);
  }
  if (tr.kind === "dissolve") {
    // Two endpoints with complementary opacity plus the matter stream.
    drawMarker(ctx, camera, opts, tr.primary, color, tr.dissolve_in_alpha);
    if (tr.stream) {
      drawLine(ctx, camera, opts,
        tr.stream.from[0], tr.stream.from[2],
        tr.stream.to[0], tr.stream.to[2], color, 0.6, 2);
    }
  } else {
    drawMarker(ctx, camera, opts, tr.primary, color, 1.0);
  }
  if (tr.user_ghost) {
    drawMarker(ctx, camera, opts, tr.user_ghost, color, 0.35);
  }
}

export function renderSnapshot(
  ctx: Canvas2DLike,
  snapshot: SnapshotPayload | null,
  camera: Camera,
  opts: RenderOptions,
): void {
  ctx.save();
  ctx.globalAlpha = 1.0;
  ctx.fillStyle = "#101418";
  ctx.fillRect(0, 0, opts.width, opts.height);
  ctx.restore();
  if (!snapshot) return;

  for (const user of snapshot.users) {
    const color = userColor(user.user_id);
    const rig = user.rig.origin;
    const avatar = user.avatar.pose;

    // Discrepancy line between the rig and its avatar.
    drawLine(ctx, camera, opts,
      rig.position[0], rig.position[2],
      avatar.position[0], avatar.position[2], color, 0.4, 1);

    drawRing(ctx, camera, opts, rig.position[0], rig.position[2], color, 0.25,
      user.user_id === opts.localUserId ? 1.0 : 0.7);

    if (user.transition) {
      drawTransition(ctx, camera, opts, user, color);
    } else {
      drawMarker(ctx, camera, opts, avatar, color, 1.0);
    }
  }
}
