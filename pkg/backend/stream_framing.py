"""
Binary framing of a coded packet stream for file and pipe round trips.

Header:  b"GSS1" | a, b, tau (u16 BE) | tau+1 dispersion entries (u16 BE) | field order (u32 BE)
Packet:  time (u32 BE) | flag (u8: 0 present, 1 erased) | n symbols when present
Symbols are one byte each over GF(2^8) and two bytes (BE) over GF(2^16).
"""

import logging
import struct
from dataclasses import dataclass
from typing import List, BinaryIO

import numpy as np

from channel_params import ChannelParams
from dispersion_engine import DispersionVector
from gss_errors import FramingError
from streaming_codec import StreamPacket

logger = logging.getLogger(__name__)

MAGIC = b"GSS1"
FLAG_PRESENT = 0
FLAG_ERASED = 1
_PACKET_HEAD = struct.Struct(">IB")


@dataclass
class FramedStream:
    params: ChannelParams
    delta_vec: DispersionVector
    field_order: int
    packets: List[StreamPacket]

    @property
    def symbol_dtype(self) -> str:
        return _symbol_dtype(self.field_order)


def _symbol_dtype(field_order: int) -> str:
    if field_order == 256:
        return ">u1"
    if field_order == 65536:
        return ">u2"
    raise FramingError(f"unsupported field order {field_order}")


def pack_header(params: ChannelParams, delta_vec: DispersionVector, field_order: int) -> bytes:
    if delta_vec.span != params.w:
        raise FramingError(f"dispersion vector has {delta_vec.span} entries, expected {params.w}")
    return (
        MAGIC
        + struct.pack(">HHH", params.a, params.b, params.tau)
        + struct.pack(f">{params.w}H", *delta_vec.entries)
        + struct.pack(">I", field_order)
    )


def pack_packet(packet: StreamPacket, n: int, field_order: int) -> bytes:
    if packet.erased:
        return _PACKET_HEAD.pack(packet.t, FLAG_ERASED)
    if len(packet.symbols) != n:
        raise FramingError(f"packet {packet.t} has {len(packet.symbols)} symbols, expected {n}")
    body = np.asarray(packet.symbols, dtype=np.int64).astype(_symbol_dtype(field_order)).tobytes()
    return _PACKET_HEAD.pack(packet.t, FLAG_PRESENT) + body


def pack_stream(stream: FramedStream) -> bytes:
    n = stream.delta_vec.n
    parts = [pack_header(stream.params, stream.delta_vec, stream.field_order)]
    parts.extend(pack_packet(packet, n, stream.field_order) for packet in stream.packets)
    return b"".join(parts)


def unpack_stream(data: bytes) -> FramedStream:
    if data[:4] != MAGIC:
        raise FramingError(f"bad magic {data[:4]!r}")
    offset = 4
    try:
        a, b, tau = struct.unpack_from(">HHH", data, offset)
        offset += 6
        entries = struct.unpack_from(f">{tau + 1}H", data, offset)
        offset += 2 * (tau + 1)
        (field_order,) = struct.unpack_from(">I", data, offset)
        offset += 4
    except struct.error as e:
        raise FramingError(f"truncated header: {e}")

    params = ChannelParams(a, b, tau)
    delta_vec = DispersionVector(entries)
    dtype = _symbol_dtype(field_order)
    n = delta_vec.n
    body_size = n * np.dtype(dtype).itemsize

    packets = []
    while offset < len(data):
        try:
            t, flag = _PACKET_HEAD.unpack_from(data, offset)
        except struct.error as e:
            raise FramingError(f"truncated packet header at byte {offset}: {e}")
        offset += _PACKET_HEAD.size
        if flag == FLAG_ERASED:
            packets.append(StreamPacket(t, None))
            continue
        if flag != FLAG_PRESENT:
            raise FramingError(f"unknown packet flag {flag} at time {t}")
        if offset + body_size > len(data):
            raise FramingError(f"truncated body for packet {t}")
        symbols = np.frombuffer(data, dtype=dtype, count=n, offset=offset).astype(int)
        offset += body_size
        packets.append(StreamPacket(t, symbols))

    logger.debug(f"Unpacked {len(packets)} packets for {params}")
    return FramedStream(params, delta_vec, field_order, packets)


def write_stream(handle: BinaryIO, stream: FramedStream) -> int:
    data = pack_stream(stream)
    handle.write(data)
    return len(data)


def read_stream(handle: BinaryIO) -> FramedStream:
    return unpack_stream(handle.read())
