import assert from "node:assert/strict";
import { test } from "node:test";

import { SessionClient } from "../src/client.js";
import {
  FrameDecoder,
  SnapshotPayload,
  WireMessage,
  encodeMessage,
} from "../src/protocol.js";
import { Transport } from "../src/transport.js";

class FakeTransport implements Transport {
  sent: WireMessage[] = [];
  onData: ((chunk: Uint8Array) => void) | null = null;
  onClose: ((reason: string) => void) | null = null;
  private decoder = new FrameDecoder();

  send(frame: Uint8Array): void {
    this.sent.push(...this.decoder.feed(frame));
  }

  close(): void {
    this.onClose?.("closed by client");
  }

  // Test hooks.
  deliver(msg: WireMessage): void {
    this.onData?.(encodeMessage(msg));
  }

  deliverRaw(bytes: Uint8Array): void {
    this.onData?.(bytes);
  }

  drop(): void {
    this.onClose?.("connection lost");
  }
}

function welcome(userId: number, users: unknown[] = []): WireMessage {
  return {
    type: "Welcome", seq: 0, session_tick: 0,
    payload: { user_id: userId, snapshot: { session_tick: 0, users } },
  };
}

test("join resolves on welcome and adopts the snapshot", async () => {
  const transport = new FakeTransport();
  const client = new SessionClient(transport);
  const joined = client.join("ada");
  assert.equal(transport.sent[0].type, "Hello");
  assert.equal(transport.sent[0].payload["name"], "ada");
  transport.deliver(welcome(3, [{ user_id: 3, name: "ada" }]));
  await joined;
  assert.equal(client.userId, 3);
  assert.equal(client.latestSnapshot?.users.length, 1);
});

test("snapshots replace the view state", async () => {
  const transport = new FakeTransport();
  const client = new SessionClient(transport);
  const joined = client.join("a");
  transport.deliver(welcome(0));
  await joined;
  transport.deliver({
    type: "Snapshot", seq: 2, session_tick: 5,
    payload: { session_tick: 5, users: [{ user_id: 0 }, { user_id: 1 }] },
  });
  assert.equal(client.latestSnapshot?.session_tick, 5);
  assert.equal(client.latestSnapshot?.users.length, 2);
});

test("input frames carry strictly increasing seq", async () => {
  const transport = new FakeTransport();
  const client = new SessionClient(transport);
  const joined = client.join("a");
  transport.deliver(welcome(0));
  await joined;
  client.sendInput({ left_stick: [0, 1] });
  client.sendInput({ left_stick: [0, 1] });
  client.sendInput({ left_stick: [0, 0] });
  const seqs = transport.sent.map((m) => m.seq);
  for (let i = 1; i < seqs.length; i++) {
    assert.ok(seqs[i] > seqs[i - 1], `seq ${seqs[i]} after ${seqs[i - 1]}`);
  }
});

test("disconnect clears entities; next welcome resumes rendering", async () => {
  const transport = new FakeTransport();
  let closed = "";
  const client = new SessionClient(transport, {
    onClose: (reason) => { closed = reason; },
  });
  const joined = client.join("a");
  transport.deliver(welcome(0, [{ user_id: 0 }]));
  await joined;
  assert.ok(client.latestSnapshot);
  transport.drop();
  assert.equal(closed, "connection lost");
  assert.ok(client.latestSnapshot === null); // no stale entities
  assert.ok(client.userId === null);
  const rejoined = client.join("a");
  transport.deliver(welcome(7, [{ user_id: 7 }]));
  await rejoined;
  assert.equal(client.userId, 7);
  // Widen explicitly: the compiler still believes the pre-rejoin null.
  const resumed = client.latestSnapshot as SnapshotPayload | null;
  assert.equal(resumed?.users.length, 1);
});

test("malformed server frame raises a banner, not a crash", async () => {
  const transport = new FakeTransport();
  let errorBanner = "";
  const client = new SessionClient(transport, {
    onError: (message) => { errorBanner = message; },
  });
  const joined = client.join("a");
  transport.deliver(welcome(0));
  await joined;
  const garbage = new TextEncoder().encode("{broken");
  const frame = new Uint8Array(4 + garbage.length);
  new DataView(frame.buffer).setUint32(0, garbage.length, false);
  frame.set(garbage, 4);
  transport.deliverRaw(frame);
  assert.ok(errorBanner.includes("malformed"));
  // The client keeps working afterwards.
  transport.deliver({
    type: "Snapshot", seq: 9, session_tick: 9,
    payload: { session_tick: 9, users: [] },
  });
  assert.equal(client.latestSnapshot?.session_tick, 9);
});

test("events are surfaced to the handler", async () => {
  const transport = new FakeTransport();
  const seen: unknown[] = [];
  const client = new SessionClient(transport, {
    onEvent: (events) => seen.push(...events),
  });
  const joined = client.join("a");
  transport.deliver(welcome(0));
  await joined;
  transport.deliver({
    type: "Event", seq: 4, session_tick: 1,
    payload: { events: [{ event: "teleport", user_id: 0 }] },
  });
  assert.equal(seen.length, 1);
});
