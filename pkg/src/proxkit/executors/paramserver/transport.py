"""Blocking socket plumbing for the parameter-server roles.

Every connection is a reliable ordered byte stream carrying framed protocol
messages.  Servers run one thread per accepted connection (role fan-in is a
handful of peers at most), so handlers are plain blocking request-reply
loops against locked node state.
"""

import socket
import threading
import time

from ...errors import BindFailure, TransportError, TruncatedFrame
from .protocol import HEADER, decode_message, encode_message


def send_message(sock, msg):
    sock.sendall(encode_message(msg))


def _recv_exact(sock, n):
    chunks = []
    got = 0
    while got < n:
        chunk = sock.recv(n - got)
        if not chunk:
            if got == 0:
                return None
            raise TruncatedFrame(f"connection closed {got} bytes into a {n}-byte read")
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)


def recv_message(sock):
    """Read one framed message; None on clean EOF at a frame boundary."""
    header = _recv_exact(sock, HEADER.size)
    if header is None:
        return None
    _, length = HEADER.unpack(header)
    payload = _recv_exact(sock, length) if length else b""
    if length and payload is None:
        raise TruncatedFrame("connection closed before the declared payload")
    return decode_message(header + (payload or b""))


def connect(host, port, timeout=5.0, attempts=1, retry_delay=0.1):
    last = None
    for _ in range(attempts):
        try:
            sock = socket.create_connection((host, port), timeout=timeout)
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            return sock
        except OSError as exc:
            last = exc
            time.sleep(retry_delay)
    raise TransportError(f"cannot connect to {host}:{port}") from last


class Peer:
    """Persistent request-reply connection to one remote role."""

    def __init__(self, host, port, timeout=5.0, attempts=1, retry_delay=0.1):
        self.host = host
        self.port = port
        self.sock = connect(host, port, timeout=timeout, attempts=attempts, retry_delay=retry_delay)
        self._lock = threading.Lock()

    def request(self, msg):
        with self._lock:
            send_message(self.sock, msg)
            reply = recv_message(self.sock)
        if reply is None:
            raise TransportError(f"{self.host}:{self.port} closed the connection")
        return reply

    def send(self, msg):
        with self._lock:
            send_message(self.sock, msg)

    def close(self):
        try:
            self.sock.close()
        except OSError:
            pass


class Server:
    """Listening socket with a thread per accepted connection."""

    def __init__(self, host, port, handler, name="server"):
        self.handler = handler
        self.name = name
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            self._sock.bind((host, port))
        except OSError as exc:
            raise BindFailure(f"cannot bind {host}:{port}") from exc
        self._sock.listen(16)
        self._sock.settimeout(0.1)
        self.port = self._sock.getsockname()[1]
        self._stop = threading.Event()
        self._threads = []
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()

    def _accept_loop(self):
        while not self._stop.is_set():
            try:
                conn, addr = self._sock.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            t = threading.Thread(target=self._serve, args=(conn, addr), daemon=True)
            t.start()
            self._threads.append(t)

    def _serve(self, conn, addr):
        try:
            self.handler(conn, addr)
        except (TransportError, TruncatedFrame, OSError):
            pass
        finally:
            try:
                conn.close()
            except OSError:
                pass

    def close(self):
        self._stop.set()
        try:
            self._sock.close()
        except OSError:
            pass
        self._accept_thread.join(timeout=1.0)
