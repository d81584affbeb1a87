// Session client state machine: handshake, snapshot intake, input frames.
// The client never simulates; it renders whatever the latest snapshot says
// and forgets everything on disconnect, resuming from the next Welcome.

import {
  FrameDecoder,
  MalformedFrame,
  SnapshotPayload,
  UnknownType,
  WireMessage,
  encodeMessage,
} from "./protocol.js";
import { Transport } from "./transport.js";

export class ProtocolVersionMismatch extends Error {}

export interface ClientEvents {
  onSnapshot?: (snapshot: SnapshotPayload) => void;
  onEvent?: (events: Record<string, unknown>[]) => void;
  onError?: (message: string) => void;
  onClose?: (reason: string) => void;
}

export class SessionClient {
  userId: number | null = null;
  latestSnapshot: SnapshotPayload | null = null;
  lastError: string | null = null;

  private decoder = new FrameDecoder();
  private seq = 0;
  private welcomeWaiters: Array<(value: void) => void> = [];

  constructor(private transport: Transport, private events: ClientEvents = {}) {
    transport.onData = (chunk) => this.receive(chunk);
    transport.onClose = (reason) => {
      this.latestSnapshot = null; // no stale entities after disconnect
      this.userId = null;
      this.events.onClose?.(reason);
    };
  }

  private nextSeq(): number {
    this.seq += 1;
    return this.seq;
  }

  private send(type: WireMessage["type"], payload: Record<string, unknown>): void {
    this.transport.send(encodeMessage({
      type,
      seq: this.nextSeq(),
      session_tick: this.latestSnapshot?.session_tick ?? 0,
      payload,
    }));
  }

  /** Hello/Welcome handshake; resolves once the Welcome snapshot arrived. */
  join(name: string, options: Record<string, unknown> = {}): Promise<void> {
    const waited = new Promise<void>((resolve, reject) => {
      this.welcomeWaiters.push(resolve);
      setTimeout(() => reject(new ProtocolVersionMismatch(
        "no Welcome from server within 10 s")), 10_000);
    });
    this.send("Hello", { name, ...options });
    return waited;
  }

  sendInput(payload: Record<string, unknown>): void {
    this.send("InputFrame", payload);
  }

  goodbye(): void {
    this.send("Goodbye", {});
    this.transport.close();
  }

  private receive(chunk: Uint8Array): void {
    let messages: WireMessage[];
    try {
      messages = this.decoder.feed(chunk);
    } catch (err) {
      // A malformed or alien server frame surfaces as a banner, never a crash.
      this.lastError = err instanceof UnknownType
        ? `protocol mismatch: ${err.message}`
        : `malformed frame: ${(err as MalformedFrame).message}`;
      this.events.onError?.(this.lastError);
      this.decoder.reset();
      return;
    }
    for (const msg of messages) {
      if (msg.type === "Welcome") {
        this.userId = msg.payload["user_id"] as number;
        this.latestSnapshot = msg.payload["snapshot"] as unknown as SnapshotPayload;
        const waiters = this.welcomeWaiters;
        this.welcomeWaiters = [];
        for (const resolve of waiters) resolve();
        this.events.onSnapshot?.(this.latestSnapshot);
      } else if (msg.type === "Snapshot") {
        this.latestSnapshot = msg.payload as unknown as SnapshotPayload;
        this.events.onSnapshot?.(this.latestSnapshot);
      } else if (msg.type === "Event") {
        const events = (msg.payload["events"] ?? []) as Record<string, unknown>[];
        this.events.onEvent?.(events);
      }
    }
  }
}
