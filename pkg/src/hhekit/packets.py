"""Packet encapsulation of 64-bit word payloads for the NIC path.

Header layout (little-endian), zero padded to ``header_bytes``::

    b"HP" | seq:u16 | n_words:u16 | flags:u16

flags bit 0 marks the final packet of a payload.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ParameterError

MAGIC = b"HP"
_HDR = struct.Struct("<2sHHH")
FLAG_LAST = 1
FLIT_BYTES = 8


@dataclass(frozen=True)
class PacketFormat:
    header_bytes: int = 8
    segment_words: int = 512

    def __post_init__(self):
        if self.header_bytes < _HDR.size:
            raise ParameterError(f"header needs at least {_HDR.size} bytes")
        if not 1 <= self.segment_words <= 0xFFFF:
            raise ParameterError("segment_words must be in [1, 65535]")

    def packet_count(self, words: int) -> int:
        return -(-words // self.segment_words)

    def total_bytes(self, words: int) -> int:
        return self.packet_count(words) * self.header_bytes + words * FLIT_BYTES


def encapsulate(payload, fmt: PacketFormat) -> list[bytes]:
    words = np.asarray(payload, dtype="<u8").reshape(-1)
    count = fmt.packet_count(words.size)
    if count > 0x10000:
        raise ParameterError("payload needs more than 65536 packets")
    pad = b"\0" * (fmt.header_bytes - _HDR.size)
    packets = []
    for seq in range(count):
        seg = words[seq * fmt.segment_words:(seq + 1) * fmt.segment_words]
        flags = FLAG_LAST if seq == count - 1 else 0
        packets.append(_HDR.pack(MAGIC, seq, seg.size, flags) + pad + seg.tobytes())
    return packets


def decapsulate(data: bytes | list[bytes], fmt: PacketFormat) -> np.ndarray:
    """Parse a concatenated packet stream back into its payload words."""
    if isinstance(data, (list, tuple)):
        data = b"".join(data)
    view = memoryview(data)
    pos, seq, parts, done = 0, 0, [], False
    while pos < len(view):
        if done:
            raise FormatError("data after final packet", offset=pos)
        if pos + fmt.header_bytes > len(view):
            raise FormatError("truncated packet header", offset=pos)
        magic, got_seq, n, flags = _HDR.unpack_from(view, pos)
        if magic != MAGIC:
            raise FormatError(f"bad packet magic {bytes(magic)!r}", offset=pos)
        if got_seq != seq:
            raise FormatError(f"expected sequence {seq}, found {got_seq}", offset=pos + 2)
        body = pos + fmt.header_bytes
        end = body + n * FLIT_BYTES
        if end > len(view):
            raise FormatError(f"truncated payload: need {n} words", offset=len(view))
        parts.append(np.frombuffer(view[body:end], dtype="<u8"))
        done = bool(flags & FLAG_LAST)
        pos, seq = end, seq + 1
    if parts and not done:
        raise FormatError("stream ended without a final packet", offset=pos)
    return np.concatenate(parts).astype(np.uint64) if parts else np.empty(0, dtype=np.uint64)


def write_packets(path: str | Path, packets: list[bytes]) -> None:
    Path(path).write_bytes(b"".join(packets))


def read_packets(path: str | Path, fmt: PacketFormat) -> np.ndarray:
    return decapsulate(Path(path).read_bytes(), fmt)
