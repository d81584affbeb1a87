// Wire protocol: 4-byte big-endian length prefix + canonical UTF-8 JSON body.
// Mirrors docs/protocol.md in the repository root; the client never
// interprets fields it does not know.

export type MessageType =
  | "Hello"
  | "Welcome"
  | "InputFrame"
  | "Snapshot"
  | "Event"
  | "Goodbye";

const MESSAGE_TYPES = new Set<string>([
  "Hello", "Welcome", "InputFrame", "Snapshot", "Event", "Goodbye",
]);

export interface WireMessage {
  type: MessageType;
  seq: number;
  session_tick: number;
  payload: Record<string, unknown>;
}

export interface PoseData {
  position: [number, number, number];
  yaw: number;
  pitch: number;
  roll: number;
}

export interface GhostData {
  pose: PoseData;
  alpha: number;
  expiry: string;
}

export interface TransitionData {
  kind: string;
  elapsed: number;
  complete: boolean;
  primary: PoseData;
  target: [number, number, number];
  ghosts: GhostData[];
  dissolve_in_alpha: number;
  dissolve_out_alpha: number;
  stream: { from: [number, number, number]; to: [number, number, number] } | null;
  user_ghost: PoseData | null;
  trail: PoseData | null;
  visible_to_owner: boolean;
}

export interface SnapshotUser {
  user_id: number;
  name: string;
  rig: {
    origin: PoseData;
    head: PoseData;
    left_hand: PoseData;
    right_hand: PoseData;
    user_height: number;
  };
  avatar: {
    pose: PoseData;
    zone: string;
    strafe_weight: number;
    imitation_weight: number;
  };
  transition: TransitionData | null;
  last_teleport_seq: number;
}

export interface SnapshotPayload {
  session_tick: number;
  users: SnapshotUser[];
}

export class MalformedFrame extends Error {}
export class UnknownType extends Error {}

const encoder = new TextEncoder();
const decoder = new TextDecoder("utf-8", { fatal: true });

export function encodeMessage(msg: WireMessage): Uint8Array {
  if (!MESSAGE_TYPES.has(msg.type)) {
    throw new UnknownType(`cannot encode message type ${msg.type}`);
  }
  const body = encoder.encode(JSON.stringify({
    type: msg.type,
    seq: msg.seq,
    session_tick: msg.session_tick,
    payload: msg.payload,
  }));
  const frame = new Uint8Array(4 + body.length);
  new DataView(frame.buffer).setUint32(0, body.length, false);
  frame.set(body, 4);
  return frame;
}

function decodeBody(body: Uint8Array): WireMessage {
  let data: unknown;
  try {
    data = JSON.parse(decoder.decode(body));
  } catch (err) {
    throw new MalformedFrame(`undecodable frame body: ${err}`);
  }
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    throw new MalformedFrame("frame body is not a JSON object");
  }
  const record = data as Record<string, unknown>;
  const type = record["type"];
  if (typeof type !== "string" || !MESSAGE_TYPES.has(type)) {
    throw new UnknownType(`unknown message type ${String(type)}`);
  }
  const seq = record["seq"];
  const tick = record["session_tick"];
  if (!Number.isInteger(seq) || !Number.isInteger(tick)) {
    throw new MalformedFrame("seq and session_tick must be integers");
  }
  const payload = record["payload"] ?? {};
  if (typeof payload !== "object" || payload === null || Array.isArray(payload)) {
    throw new MalformedFrame("payload must be an object");
  }
  return {
    type: type as MessageType,
    seq: seq as number,
    session_tick: tick as number,
    payload: payload as Record<string, unknown>,
  };
}

/** Incremental framer: feed arbitrary byte chunks, collect whole messages. */
export class FrameDecoder {
  private buffer = new Uint8Array(0);

  feed(chunk: Uint8Array): WireMessage[] {
    const merged = new Uint8Array(this.buffer.length + chunk.length);
    merged.set(this.buffer, 0);
    merged.set(chunk, this.buffer.length);
    this.buffer = merged;

    const out: WireMessage[] = [];
    for (;;) {
      if (this.buffer.length < 4) break;
      const view = new DataView(
        this.buffer.buffer, this.buffer.byteOffset, this.buffer.byteLength);
      const length = view.getUint32(0, false);
      if (length > 16 * 1024 * 1024) {
        throw new MalformedFrame(`declared length ${length} exceeds limit`);
      }
      if (this.buffer.length < 4 + length) break;
      const body = this.buffer.subarray(4, 4 + length);
      out.push(decodeBody(body));
      this.buffer = this.buffer.slice(4 + length);
    }
    return out;
  }

  reset(): void {
    this.buffer = new Uint8Array(0);
  }
}
