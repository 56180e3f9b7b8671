"""Wire protocol for the parameter-server executor.

Frame layout (bit-exact)::

    tag:      1 byte
    length:   8-byte little-endian unsigned payload byte count
    payload:  fields in the fixed order given per message below

Payload fields are little-endian: ids/indices/counts are 4-byte unsigned,
iteration stamps are 4-byte unsigned, losses and coordinate values are 8-byte
IEEE floats.  Host addresses travel as 4 raw bytes in dotted-quad order.

Messages (tag -> payload):

==============  ===  ======================================================
HELLO             1  node_id:u32 (0xFFFFFFFF asks the scheduler for an id)
REGISTER_MASTER   2  master_id:u32, host:4B, port:u32
ASSIGN_RANGE      3  master_id:u32, lo:u32, hi:u32, dim:u32
REQUEST_MASTERS   4  count:u32, coord:u32 * count (count=0 means "all")
MASTER_LIST       5  count:u32, then per master:
                     master_id:u32, host:4B, port:u32, lo:u32, hi:u32
PULL              6  lo:u32, hi:u32
X_SEGMENT         7  k:u32, lo:u32, hi:u32, value:f64 * (hi-lo)
PUSH              8  worker_id:u32, k_read:u32, fval:f64, nnz:u32,
                     index:u32 * nnz, value:f64 * nnz
ACK               9  empty, or master_id:u32, update_count:u32 (progress
                     report from a master to the scheduler)
START            10  empty
TERMINATE        11  empty
==============  ===  ======================================================
"""

import socket
import struct
from dataclasses import dataclass
from typing import Optional, Tuple

from ...errors import LengthMismatch, TruncatedFrame, UnknownTag

HEADER = struct.Struct("<BQ")

TAG_HELLO = 1
TAG_REGISTER_MASTER = 2
TAG_ASSIGN_RANGE = 3
TAG_REQUEST_MASTERS = 4
TAG_MASTER_LIST = 5
TAG_PULL = 6
TAG_X_SEGMENT = 7
TAG_PUSH = 8
TAG_ACK = 9
TAG_START = 10
TAG_TERMINATE = 11

ANY_ID = 0xFFFFFFFF

_U32 = struct.Struct("<I")
_F64 = struct.Struct("<d")


@dataclass(frozen=True)
class Hello:
    node_id: int = ANY_ID
    tag = TAG_HELLO


@dataclass(frozen=True)
class RegisterMaster:
    master_id: int
    host: str
    port: int
    tag = TAG_REGISTER_MASTER


@dataclass(frozen=True)
class AssignRange:
    master_id: int
    lo: int
    hi: int
    dim: int
    tag = TAG_ASSIGN_RANGE


@dataclass(frozen=True)
class RequestMasters:
    coords: Tuple[int, ...] = ()
    tag = TAG_REQUEST_MASTERS


@dataclass(frozen=True)
class MasterInfo:
    master_id: int
    host: str
    port: int
    lo: int
    hi: int


@dataclass(frozen=True)
class MasterList:
    masters: Tuple[MasterInfo, ...] = ()
    tag = TAG_MASTER_LIST


@dataclass(frozen=True)
class Pull:
    lo: int
    hi: int
    tag = TAG_PULL


@dataclass(frozen=True)
class XSegment:
    k: int
    lo: int
    hi: int
    values: Tuple[float, ...]
    tag = TAG_X_SEGMENT


@dataclass(frozen=True)
class Push:
    worker_id: int
    k_read: int
    fval: float
    indices: Tuple[int, ...]
    values: Tuple[float, ...]
    tag = TAG_PUSH


@dataclass(frozen=True)
class Ack:
    master_id: Optional[int] = None
    update_count: Optional[int] = None
    tag = TAG_ACK

    def is_progress_report(self):
        return self.master_id is not None


@dataclass(frozen=True)
class Start:
    tag = TAG_START


@dataclass(frozen=True)
class Terminate:
    tag = TAG_TERMINATE


def _pack_host(host):
    return socket.inet_aton(host)


def _unpack_host(blob):
    return socket.inet_ntoa(blob)


def _encode_payload(msg):
    if isinstance(msg, Hello):
        return _U32.pack(msg.node_id)
    if isinstance(msg, RegisterMaster):
        return _U32.pack(msg.master_id) + _pack_host(msg.host) + _U32.pack(msg.port)
    if isinstance(msg, AssignRange):
        return struct.pack("<IIII", msg.master_id, msg.lo, msg.hi, msg.dim)
    if isinstance(msg, RequestMasters):
        return _U32.pack(len(msg.coords)) + struct.pack(f"<{len(msg.coords)}I", *msg.coords)
    if isinstance(msg, MasterList):
        parts = [_U32.pack(len(msg.masters))]
        for m in msg.masters:
            parts.append(_U32.pack(m.master_id))
            parts.append(_pack_host(m.host))
            parts.append(struct.pack("<III", m.port, m.lo, m.hi))
        return b"".join(parts)
    if isinstance(msg, Pull):
        return struct.pack("<II", msg.lo, msg.hi)
    if isinstance(msg, XSegment):
        n = msg.hi - msg.lo
        if len(msg.values) != n:
            raise ValueError("segment value count must equal hi - lo")
        return struct.pack("<III", msg.k, msg.lo, msg.hi) + struct.pack(f"<{n}d", *msg.values)
    if isinstance(msg, Push):
        if len(msg.indices) != len(msg.values):
            raise ValueError("push indices and values must align")
        nnz = len(msg.indices)
        return (
            struct.pack("<II", msg.worker_id, msg.k_read)
            + _F64.pack(msg.fval)
            + _U32.pack(nnz)
            + struct.pack(f"<{nnz}I", *msg.indices)
            + struct.pack(f"<{nnz}d", *msg.values)
        )
    if isinstance(msg, Ack):
        if msg.is_progress_report():
            return struct.pack("<II", msg.master_id, msg.update_count)
        return b""
    if isinstance(msg, (Start, Terminate)):
        return b""
    raise TypeError(f"not a protocol message: {msg!r}")


def encode_message(msg):
    """Serialize a message into one framed byte string."""
    payload = _encode_payload(msg)
    return HEADER.pack(msg.tag, len(payload)) + payload


class _Reader:
    def __init__(self, payload):
        self.buf = payload
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.buf):
            raise TruncatedFrame("payload ended before a declared field")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self):
        return _U32.unpack(self.take(4))[0]

    def f64(self):
        return _F64.unpack(self.take(8))[0]

    def done(self):
        if self.pos != len(self.buf):
            raise LengthMismatch(
                f"{len(self.buf) - self.pos} trailing payload bytes after decoding"
            )


def _decode_payload(tag, payload):
    r = _Reader(payload)
    if tag == TAG_HELLO:
        msg = Hello(r.u32())
    elif tag == TAG_REGISTER_MASTER:
        msg = RegisterMaster(r.u32(), _unpack_host(r.take(4)), r.u32())
    elif tag == TAG_ASSIGN_RANGE:
        msg = AssignRange(r.u32(), r.u32(), r.u32(), r.u32())
    elif tag == TAG_REQUEST_MASTERS:
        count = r.u32()
        msg = RequestMasters(tuple(r.u32() for _ in range(count)))
    elif tag == TAG_MASTER_LIST:
        count = r.u32()
        masters = []
        for _ in range(count):
            masters.append(
                MasterInfo(r.u32(), _unpack_host(r.take(4)), r.u32(), r.u32(), r.u32())
            )
        msg = MasterList(tuple(masters))
    elif tag == TAG_PULL:
        msg = Pull(r.u32(), r.u32())
    elif tag == TAG_X_SEGMENT:
        k, lo, hi = r.u32(), r.u32(), r.u32()
        n = hi - lo
        values = struct.unpack(f"<{n}d", r.take(8 * n))
        msg = XSegment(k, lo, hi, values)
    elif tag == TAG_PUSH:
        worker_id, k_read = r.u32(), r.u32()
        fval = r.f64()
        nnz = r.u32()
        indices = struct.unpack(f"<{nnz}I", r.take(4 * nnz))
        values = struct.unpack(f"<{nnz}d", r.take(8 * nnz))
        msg = Push(worker_id, k_read, fval, indices, values)
    elif tag == TAG_ACK:
        if len(payload) == 0:
            msg = Ack()
        else:
            msg = Ack(r.u32(), r.u32())
    elif tag == TAG_START:
        msg = Start()
    elif tag == TAG_TERMINATE:
        msg = Terminate()
    else:
        raise UnknownTag(f"unknown message tag {tag}")
    r.done()
    return msg


def decode_message(buf):
    """Decode exactly one framed message from ``buf``.

    Raises :class:`TruncatedFrame` when the buffer is shorter than the
    declared frame, :class:`LengthMismatch` when it is longer or the payload
    has trailing bytes, and :class:`UnknownTag` for tags outside the set.
    """
    if len(buf) < HEADER.size:
        raise TruncatedFrame(f"frame header needs {HEADER.size} bytes, got {len(buf)}")
    tag, length = HEADER.unpack_from(buf)
    body = buf[HEADER.size :]
    if len(body) < length:
        raise TruncatedFrame(f"declared payload of {length} bytes, got {len(body)}")
    if len(body) > length:
        raise LengthMismatch(f"{len(body) - length} bytes beyond the declared payload")
    return _decode_payload(tag, body)
