"""Live session server over TCP, with an optional WebSocket endpoint.

Connection handlers never touch the simulation: they only parse frames and
enqueue them. A single tick thread drains the queue in arrival order,
advances the session, and fans out events and snapshots. The WebSocket
endpoint carries the exact same length-prefixed wire frames as binary
message payloads, so browser clients speak the protocol verbatim.
"""

from __future__ import annotations

import base64
import hashlib
import queue
import socket
import struct
import threading
import time

from .protocol import (
    FrameDecoder,
    MalformedFrame,
    ProtocolError,
    WireMessage,
    encode_message,
)
from .scenarios import TraceFrame, save_trace
from .session import Session, SessionConfig, SessionError

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


class _Client:
    _next_id = 0
    _id_lock = threading.Lock()

    def __init__(self, conn: socket.socket, websocket: bool) -> None:
        with _Client._id_lock:
            _Client._next_id += 1
            self.client_id = _Client._next_id
        self.conn = conn
        self.websocket = websocket
        self.user_id: int | None = None
        self.alive = True
        self._send_lock = threading.Lock()

    def send_bytes(self, data: bytes) -> None:
        if not self.alive:
            return
        try:
            with self._send_lock:
                if self.websocket:
                    self.conn.sendall(_ws_wrap_binary(data))
                else:
                    self.conn.sendall(data)
        except OSError:
            self.alive = False

    def close(self) -> None:
        self.alive = False
        try:
            self.conn.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self.conn.close()
        except OSError:
            pass


def _ws_wrap_binary(payload: bytes) -> bytes:
    header = bytearray([0x82])  # FIN + binary opcode
    n = len(payload)
    if n < 126:
        header.append(n)
    elif n < 1 << 16:
        header.append(126)
        header.extend(struct.pack(">H", n))
    else:
        header.append(127)
        header.extend(struct.pack(">Q", n))
    return bytes(header) + payload


def _recv_exact(conn: socket.socket, n: int) -> bytes | None:
    buf = bytearray()
    while len(buf) < n:
        chunk = conn.recv(n - len(buf))
        if not chunk:
            return None
        buf.extend(chunk)
    return bytes(buf)


def _ws_handshake(conn: socket.socket) -> bool:
    data = bytearray()
    while b"\r\n\r\n" not in data:
        chunk = conn.recv(4096)
        if not chunk:
            return False
        data.extend(chunk)
        if len(data) > 65536:
            return False
    head = data.split(b"\r\n\r\n", 1)[0].decode("latin-1")
    key = None
    for line in head.split("\r\n")[1:]:
        name, _, value = line.partition(":")
        if name.strip().lower() == "sec-websocket-key":
            key = value.strip()
    if key is None:
        conn.sendall(b"HTTP/1.1 400 Bad Request\r\n\r\n")
        return False
    accept = base64.b64encode(
        hashlib.sha1((key + _WS_GUID).encode("ascii")).digest()).decode("ascii")
    conn.sendall(
        ("HTTP/1.1 101 Switching Protocols\r\n"
         "Upgrade: websocket\r\n"
         "Connection: Upgrade\r\n"
         f"Sec-WebSocket-Accept: {accept}\r\n\r\n").encode("ascii"))
    return True


def _ws_read_message(conn: socket.socket) -> bytes | None:
    """One complete WebSocket data message (handles continuation, ping, close)."""
    message = bytearray()
    while True:
        head = _recv_exact(conn, 2)
        if head is None:
            return None
        fin = bool(head[0] & 0x80)
        opcode = head[0] & 0x0F
        masked = bool(head[1] & 0x80)
        length = head[1] & 0x7F
        if length == 126:
            ext = _recv_exact(conn, 2)
            if ext is None:
                return None
            (length,) = struct.unpack(">H", ext)
        elif length == 127:
            ext = _recv_exact(conn, 8)
            if ext is None:
                return None
            (length,) = struct.unpack(">Q", ext)
        mask = b"\x00\x00\x00\x00"
        if masked:
            mask = _recv_exact(conn, 4)
            if mask is None:
                return None
        payload = _recv_exact(conn, length) if length else b""
        if payload is None:
            return None
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        if opcode == 0x8:  # close
            return None
        if opcode == 0x9:  # ping -> pong
            pong = bytes([0x8A, len(payload)]) + payload
            try:
                conn.sendall(pong)
            except OSError:
                return None
            continue
        if opcode == 0xA:  # pong
            continue
        message.extend(payload)
        if fin:
            return bytes(message)


class SessionServer:
    """Authoritative server: accepts clients, ticks the session, broadcasts."""

    def __init__(
        self,
        config: SessionConfig,
        host: str = "127.0.0.1",
        port: int = 0,
        ws_port: int | None = None,
        turbo: bool = False,
        max_ticks: int | None = None,
        wait_for_input: bool = False,
        record_path: str | None = None,
    ) -> None:
        self.session = Session(config)
        self.host = host
        self.turbo = turbo
        self.max_ticks = max_ticks
        self.wait_for_input = wait_for_input
        self.record_path = record_path
        self._recorded: list[TraceFrame] = []
        self._inbox: queue.Queue[tuple[_Client, WireMessage | None]] = queue.Queue()
        self._clients: list[_Client] = []
        self._clients_lock = threading.Lock()
        self._running = threading.Event()
        self._threads: list[threading.Thread] = []
        self._tick_thread: threading.Thread | None = None
        self._stop_lock = threading.Lock()
        self._stopped = False
        self._listener = self._make_listener(host, port)
        self.port = self._listener.getsockname()[1]
        self._ws_listener = None
        self.ws_port = None
        if ws_port is not None:
            self._ws_listener = self._make_listener(host, ws_port)
            self.ws_port = self._ws_listener.getsockname()[1]

    @staticmethod
    def _make_listener(host: str, port: int) -> socket.socket:
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        listener.bind((host, port))
        listener.listen(32)
        # Poll so closing the listener cannot strand a blocked accept().
        listener.settimeout(0.25)
        return listener

    def start(self) -> None:
        self._running.set()
        self._spawn(self._accept_loop, self._listener, False)
        if self._ws_listener is not None:
            self._spawn(self._accept_loop, self._ws_listener, True)
        self._tick_thread = threading.Thread(target=self._tick_loop, daemon=True)
        self._tick_thread.start()

    def _spawn(self, fn, *args) -> None:
        thread = threading.Thread(target=fn, args=args, daemon=True)
        thread.start()
        self._threads.append(thread)

    def serve_forever(self) -> None:
        """Run until stopped; only the tick thread is joined, the daemonic
        socket threads die with the process."""
        self.start()
        if self._tick_thread is not None:
            self._tick_thread.join()

    def stop(self) -> None:
        """Shut down; safe to call from any thread, blocks until the first
        caller (possibly the tick thread) has finished, trace write included."""
        with self._stop_lock:
            if self._stopped:
                return
            self._stopped = True
            self._running.clear()
            for listener in (self._listener, self._ws_listener):
                if listener is not None:
                    try:
                        listener.close()
                    except OSError:
                        pass
            with self._clients_lock:
                clients = list(self._clients)
            for client in clients:
                client.close()
            if self.record_path is not None:
                save_trace(self._recorded, self.record_path)

    def _accept_loop(self, listener: socket.socket, websocket: bool) -> None:
        while self._running.is_set():
            try:
                conn, _addr = listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            conn.settimeout(None)
            conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            client = _Client(conn, websocket)
            with self._clients_lock:
                self._clients.append(client)
            self._spawn(self._client_loop, client)

    def _client_loop(self, client: _Client) -> None:
        decoder = FrameDecoder()
        try:
            if client.websocket:
                if not _ws_handshake(client.conn):
                    client.close()
                    return
                while self._running.is_set() and client.alive:
                    data = _ws_read_message(client.conn)
                    if data is None:
                        break
                    for msg in decoder.feed(data):
                        self._inbox.put((client, msg))
            else:
                while self._running.is_set() and client.alive:
                    data = client.conn.recv(65536)
                    if not data:
                        break
                    for msg in decoder.feed(data):
                        self._inbox.put((client, msg))
        except (ProtocolError, OSError):
            pass
        finally:
            # None marks the disconnect for the tick thread.
            self._inbox.put((client, None))
            client.close()

    def _handle_hello(self, client: _Client, msg: WireMessage) -> None:
        payload = msg.payload
        join = {
            "name": str(payload.get("name", "")),
            "position": list(payload.get("position", (0.0, 0.0, 0.0))),
            "yaw": float(payload.get("yaw", 0.0)),
            "locomotion_mode": payload.get("locomotion_mode"),
        }
        try:
            user_id = self.session.join(
                name=join["name"],
                user_id=payload.get("user_id"),
                position=tuple(join["position"]),
                yaw=join["yaw"],
                locomotion_mode=join["locomotion_mode"],
            )
        except (SessionError, ValueError):
            client.send_bytes(encode_message(self.session.event_message(
                [{"event": "join_rejected"}])))
            return
        client.user_id = user_id
        if self.record_path is not None:
            if join["locomotion_mode"] is None:
                join["locomotion_mode"] = self.session.users[user_id].locomotion_mode
            self._recorded.append(TraceFrame(
                tick=self.session.tick, user_id=user_id, join=join))
        client.send_bytes(encode_message(self.session.welcome_message(user_id)))

    def _drain_inbox(self) -> list[tuple[int, WireMessage]]:
        frames: list[tuple[int, WireMessage]] = []
        while True:
            try:
                client, msg = self._inbox.get_nowait()
            except queue.Empty:
                return frames
            if msg is None or msg.type == "Goodbye":
                if client.user_id is not None:
                    if self.record_path is not None:
                        self._recorded.append(TraceFrame(
                            tick=self.session.tick, user_id=client.user_id,
                            leave=True))
                    self.session.leave(client.user_id)
                    client.user_id = None
                with self._clients_lock:
                    if client in self._clients:
                        self._clients.remove(client)
                client.close()
            elif msg.type == "Hello":
                self._handle_hello(client, msg)
            elif msg.type == "InputFrame":
                frames.append((client.user_id if client.user_id is not None
                               else -1, msg))

    def _broadcast(self, data: bytes) -> None:
        with self._clients_lock:
            clients = list(self._clients)
        for client in clients:
            if client.user_id is not None:
                client.send_bytes(data)

    def _tick_loop(self) -> None:
        dt = self.session.config.dt
        pending: list[tuple[int, WireMessage]] = []
        if self.wait_for_input:
            # Scripted runs: idle (still answering Hellos) until the first
            # input frame is staged, so tick 0 already sees it.
            while self._running.is_set():
                pending.extend(self._drain_inbox())
                if pending:
                    break
                time.sleep(0.001)
        next_deadline = time.monotonic() + dt
        while self._running.is_set():
            if self.max_ticks is not None and self.session.tick >= self.max_ticks:
                self.stop()
                return
            frames = pending + self._drain_inbox()
            pending = []
            if self.record_path is not None:
                for user_id, msg in frames:
                    if user_id >= 0:
                        self._recorded.append(TraceFrame(
                            tick=self.session.tick, user_id=user_id,
                            seq=msg.seq, payload=msg.payload))
            snapshot, events = self.session.server_tick(frames)
            if events:
                self._broadcast(encode_message(self.session.event_message(
                    events, tick=snapshot.session_tick)))
            self._broadcast(encode_message(snapshot))
            if not self.turbo:
                now = time.monotonic()
                delay = next_deadline - now
                if delay > 0:
                    time.sleep(delay)
                    next_deadline += dt
                else:
                    # Fell behind: re-anchor instead of bursting ticks.
                    next_deadline = now + dt
