"""Minimal WebSocket (RFC 6455) hub for the operator console.

No WS library is assumed: the handshake and text-frame codec are implemented
over stdlib sockets. Reader threads enqueue inbound frames for the session
loop; each client has a bounded outbound queue drained by a writer thread, so
a slow console never stalls the simulation. Snapshots may be dropped under
backpressure, acks and errors never are.
"""

from __future__ import annotations

import base64
import hashlib
import json
import queue
import socket
import struct
import threading

from . import protocol

WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
OUTBOX_SIZE = 256


class BindError(Exception):
    pass


class _Client:
    def __init__(self, client_id: int, sock: socket.socket):
        self.id = client_id
        self.sock = sock
        self.outbox: queue.Queue = queue.Queue(maxsize=OUTBOX_SIZE)
        self.alive = True
        self.sent_scene = False

    def enqueue(self, text: str, droppable: bool) -> None:
        try:
            self.outbox.put_nowait(text)
        except queue.Full:
            if droppable:
                return
            try:  # make room by discarding the oldest frame
                self.outbox.get_nowait()
            except queue.Empty:
                pass
            try:
                self.outbox.put_nowait(text)
            except queue.Full:
                pass


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("peer closed")
        buf += chunk
    return buf


def read_frame(sock: socket.socket) -> tuple[int, bytes]:
    """Read one frame; returns (opcode, payload). Raises on close/error."""
    head = _recv_exact(sock, 2)
    opcode = head[0] & 0x0F
    masked = bool(head[1] & 0x80)
    length = head[1] & 0x7F
    if length == 126:
        length = struct.unpack(">H", _recv_exact(sock, 2))[0]
    elif length == 127:
        length = struct.unpack(">Q", _recv_exact(sock, 8))[0]
    mask = _recv_exact(sock, 4) if masked else b""
    payload = _recv_exact(sock, length) if length else b""
    if masked:
        payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    return opcode, payload


def make_frame(opcode: int, payload: bytes, mask: bool = False) -> bytes:
    head = bytes([0x80 | opcode])
    length = len(payload)
    mask_bit = 0x80 if mask else 0
    if length < 126:
        head += bytes([mask_bit | length])
    elif length < 1 << 16:
        head += bytes([mask_bit | 126]) + struct.pack(">H", length)
    else:
        head += bytes([mask_bit | 127]) + struct.pack(">Q", length)
    if mask:
        key = b"\x12\x34\x56\x78"
        payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
        return head + key + payload
    return head + payload


def _handshake_server(sock: socket.socket) -> bool:
    data = b""
    while b"\r\n\r\n" not in data:
        chunk = sock.recv(4096)
        if not chunk:
            return False
        data += chunk
        if len(data) > 65536:
            return False
    headers = {}
    for line in data.split(b"\r\n")[1:]:
        if b":" in line:
            k, v = line.split(b":", 1)
            headers[k.strip().lower()] = v.strip()
    key = headers.get(b"sec-websocket-key")
    if key is None:
        sock.sendall(b"HTTP/1.1 400 Bad Request\r\n\r\n")
        return False
    accept = base64.b64encode(
        hashlib.sha1(key + WS_GUID.encode()).digest()).decode()
    sock.sendall(
        ("HTTP/1.1 101 Switching Protocols\r\n"
         "Upgrade: websocket\r\nConnection: Upgrade\r\n"
         f"Sec-WebSocket-Accept: {accept}\r\n\r\n").encode())
    return True


class WebSocketHub:
    """Accepts console connections and bridges them to the session loop."""

    def __init__(self, host: str, port: int, scene_dict: dict):
        self.scene_dict = scene_dict
        self.inbox: queue.Queue = queue.Queue()
        self.clients: dict[int, _Client] = {}
        self._lock = threading.Lock()
        self._next_id = 1
        try:
            self._server = socket.create_server((host, port))
        except OSError as e:
            raise BindError(f"cannot bind {host}:{port}: {e}") from e
        self.port = self._server.getsockname()[1]
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()

    # session-facing API ---------------------------------------------------

    def poll(self) -> list:
        out = []
        while True:
            try:
                out.append(self.inbox.get_nowait())
            except queue.Empty:
                return out

    def send(self, client_id: int, frame: dict) -> None:
        with self._lock:
            client = self.clients.get(client_id)
        if client is not None:
            client.enqueue(protocol.encode_frame(frame), droppable=False)

    def broadcast(self, frame: dict) -> None:
        droppable = frame.get("type") == "snapshot"
        with self._lock:
            clients = list(self.clients.values())
        for client in clients:
            out = frame
            first_snapshot = droppable and not client.sent_scene
            if first_snapshot:
                out = dict(frame)
                out["scene"] = self.scene_dict
                client.sent_scene = True
            # the scene-bearing snapshot must survive backpressure
            client.enqueue(protocol.encode_frame(out),
                           droppable=droppable and not first_snapshot)

    def close(self) -> None:
        try:
            self._server.close()
        except OSError:
            pass
        with self._lock:
            clients = list(self.clients.values())
        for client in clients:
            self._drop(client)

    # internals --------------------------------------------------------------

    def _accept_loop(self) -> None:
        while True:
            try:
                sock, _addr = self._server.accept()
            except OSError:
                return
            threading.Thread(target=self._serve_client, args=(sock,),
                             daemon=True).start()

    def _serve_client(self, sock: socket.socket) -> None:
        try:
            if not _handshake_server(sock):
                sock.close()
                return
        except OSError:
            sock.close()
            return
        with self._lock:
            client = _Client(self._next_id, sock)
            self._next_id += 1
            self.clients[client.id] = client
        writer = threading.Thread(target=self._write_loop, args=(client,), daemon=True)
        writer.start()
        try:
            while client.alive:
                opcode, payload = read_frame(sock)
                if opcode == 0x8:  # close
                    break
                if opcode == 0x9:  # ping
                    client.enqueue("\x00PONG" + payload.decode("utf-8", "replace"),
                                   droppable=False)
                    continue
                if opcode != 0x1:
                    continue
                try:
                    frame = protocol.decode_frame(payload.decode("utf-8"))
                except protocol.FrameError as e:
                    client.enqueue(protocol.encode_frame(
                        protocol.err(None, e.code, e.detail)), droppable=False)
                    continue
                self.inbox.put((client.id, frame))
        except (ConnectionError, OSError):
            pass
        finally:
            self._drop(client)

    def _write_loop(self, client: _Client) -> None:
        while client.alive or not client.outbox.empty():
            try:
                text = client.outbox.get(timeout=0.25)
            except queue.Empty:
                if not client.alive:
                    return
                continue
            try:
                if text.startswith("\x00PONG"):
                    client.sock.sendall(make_frame(0xA, text[5:].encode()))
                else:
                    client.sock.sendall(make_frame(0x1, text.encode()))
            except OSError:
                self._drop(client)
                return

    def _drop(self, client: _Client) -> None:
        client.alive = False
        with self._lock:
            self.clients.pop(client.id, None)
        self.inbox.put((client.id, {"type": "_disconnect"}))
        try:
            client.sock.close()
        except OSError:
            pass


# --- tiny client used by tests and scripts -----------------------------------

class WebSocketClient:
    def __init__(self, host: str, port: int, timeout: float = 5.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        key = base64.b64encode(b"hullsim-client-key16").decode()
        self.sock.sendall(
            (f"GET / HTTP/1.1\r\nHost: {host}:{port}\r\n"
             "Upgrade: websocket\r\nConnection: Upgrade\r\n"
             f"Sec-WebSocket-Key: {key}\r\nSec-WebSocket-Version: 13\r\n\r\n"
             ).encode())
        data = b""
        while b"\r\n\r\n" not in data:
            chunk = self.sock.recv(4096)
            if not chunk:
                raise ConnectionError("handshake failed")
            data += chunk
        if b"101" not in data.split(b"\r\n", 1)[0]:
            raise ConnectionError(f"handshake rejected: {data[:120]!r}")

    def send_json(self, obj: dict) -> None:
        self.sock.sendall(make_frame(
            0x1, json.dumps(obj, sort_keys=True).encode(), mask=True))

    def recv_json(self) -> dict:
        while True:
            opcode, payload = read_frame(self.sock)
            if opcode == 0x1:
                return json.loads(payload.decode("utf-8"))
            if opcode == 0x8:
                raise ConnectionError("server closed")

    def close(self) -> None:
        try:
            self.sock.sendall(make_frame(0x8, b""))
        except OSError:
            pass
        self.sock.close()
