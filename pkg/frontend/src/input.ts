// Keyboard/mouse emulation of the VR controllers.
//
// Joystick mode: WASD tilts the left stick, Q/E (or a right-button drag)
// deflect the right stick X for turning. PushPull mode: holding the left
// mouse button grabs with the left hand and dragging moves it in the rig's
// XZ plane at dragScale meters per pixel; the scroll wheel raises and
// lowers the hand, which drives the server-side velocity multiplier.

import { locomotionMode, Settings } from "./settings.js";

// Server defaults used only for the local multiplier badge and the wheel
// clamp range; the authoritative values live server-side.
export const CHEST_HEIGHT = 1.35;
export const HIP_HEIGHT = 0.95;
export const MAX_MULTIPLIER = 4.0;
const HAND_MAX_HEIGHT = 1.75;
const WHEEL_STEP = 0.05; // meters of hand height per wheel notch

const REST_HAND: [number, number, number] = [-0.25, CHEST_HEIGHT, 0.3];

export interface InputFramePayload {
  t: number;
  left_stick: [number, number];
  right_stick: [number, number];
  left_hand: { position: [number, number, number]; yaw: number; pitch: number; roll: number };
  right_hand: { position: [number, number, number]; yaw: number; pitch: number; roll: number };
  left_grab: boolean;
  right_grab: boolean;
  locomotion_mode: string;
  transition_kind: string;
  [key: string]: unknown;
}

export class InputSampler {
  private keys = new Set<string>();
  private dragging = false;
  private dragOrigin: [number, number] = [0, 0];
  private dragCurrent: [number, number] = [0, 0];
  private handHeight = CHEST_HEIGHT;
  private handBase: [number, number, number] = [...REST_HAND];
  private started = 0;
  private clock: () => number;

  constructor(private settings: Settings, clock?: () => number) {
    this.clock = clock ?? (() => Date.now() / 1000);
    this.started = this.clock();
  }

  keyDown(code: string): void {
    this.keys.add(code);
  }

  keyUp(code: string): void {
    this.keys.delete(code);
  }

  mouseDown(x: number, y: number): void {
    this.dragging = true;
    this.dragOrigin = [x, y];
    this.dragCurrent = [x, y];
  }

  mouseMove(x: number, y: number): void {
    if (this.dragging) this.dragCurrent = [x, y];
  }

  mouseUp(): void {
    this.dragging = false;
  }

  /** Wheel notches adjust the hand height; negative deltaY raises. */
  wheel(deltaY: number): void {
    this.handHeight -= Math.sign(deltaY) * WHEEL_STEP;
    this.handHeight = Math.min(HAND_MAX_HEIGHT, Math.max(HIP_HEIGHT, this.handHeight));
  }

  get currentHandHeight(): number {
    return this.handHeight;
  }

  /** Local display value of the dynamic pushpull multiplier. */
  multiplierBadge(): number {
    if (this.handHeight >= CHEST_HEIGHT) return 1.0;
    if (this.handHeight <= HIP_HEIGHT) return MAX_MULTIPLIER;
    const frac = (CHEST_HEIGHT - this.handHeight) / (CHEST_HEIGHT - HIP_HEIGHT);
    return 1.0 + (MAX_MULTIPLIER - 1.0) * frac;
  }

  private leftStick(): [number, number] {
    let x = 0;
    let y = 0;
    if (this.keys.has("KeyW")) y += 1;
    if (this.keys.has("KeyS")) y -= 1;
    if (this.keys.has("KeyD")) x += 1;
    if (this.keys.has("KeyA")) x -= 1;
    return [Math.max(-1, Math.min(1, x)), Math.max(-1, Math.min(1, y))];
  }

  private rightStickX(): number {
    let x = 0;
    if (this.keys.has("KeyE")) x += 1;
    if (this.keys.has("KeyQ")) x -= 1;
    return x;
  }

  sample(): InputFramePayload {
    const joystick = this.settings.inputMode === "joystick-emu";
    const scale = this.settings.dragScale;
    let leftHand: [number, number, number] = [
      this.handBase[0], this.handHeight, this.handBase[2]];
    let grab = false;
    if (!joystick && this.dragging) {
      grab = true;
      // Screen right = +X, screen up = forward (+Z).
      const dx = (this.dragCurrent[0] - this.dragOrigin[0]) * scale;
      const dz = (this.dragOrigin[1] - this.dragCurrent[1]) * scale;
      leftHand = [
        this.handBase[0] + dx, this.handHeight, this.handBase[2] + dz];
    }
    return {
      t: this.clock() - this.started,
      left_stick: joystick ? this.leftStick() : [0, 0],
      right_stick: [joystick ? this.rightStickX() : 0, 0],
      left_hand: { position: leftHand, yaw: 0, pitch: 0, roll: 0 },
      right_hand: { position: [0.25, 1.0, 0.3], yaw: 0, pitch: 0, roll: 0 },
      left_grab: grab,
      right_grab: false,
      locomotion_mode: locomotionMode(this.settings),
      transition_kind: this.settings.transitionKind,
    };
  }
}
