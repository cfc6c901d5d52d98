"""Bit-exact wire frames exchanged between endpoints and the coordinator.

Layout (all multi-byte fields big-endian):

    sync(0xA5) | msg_type | endpoint_id:2 | seq | payload_len | payload | crc:2

The CRC is CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection) over
every byte preceding it. Sensor payloads carry the four moistures as 2-byte
words in units of 1/10000 plus a 4-byte step timestamp.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum

from ..errors import FrameIntegrityError, FrameLengthError, FramingError, UsageError

SYNC = 0xA5
MAX_PAYLOAD = 64
MOISTURE_SCALE = 10000


class MsgType(IntEnum):
    SENSOR_REPORT = 0x01
    IRRIGATION_CMD = 0x02
    ACK = 0x03
    TIMEOUT_ERROR = 0x04
    HEARTBEAT = 0x05


def crc16_ccitt_false(data: bytes) -> int:
    crc = 0xFFFF
    for byte in data:
        crc ^= byte << 8
        for _ in range(8):
            if crc & 0x8000:
                crc = ((crc << 1) ^ 0x1021) & 0xFFFF
            else:
                crc = (crc << 1) & 0xFFFF
    return crc


@dataclass(frozen=True)
class Frame:
    msg_type: MsgType
    endpoint_id: int
    seq: int
    payload: bytes = b""

    def __post_init__(self):
        if not (0 <= self.endpoint_id <= 0xFFFF):
            raise UsageError(f"endpoint_id {self.endpoint_id} does not fit in 2 bytes")
        if not (0 <= self.seq <= 0xFF):
            raise UsageError(f"seq {self.seq} does not fit in 1 byte")
        if len(self.payload) > MAX_PAYLOAD:
            raise UsageError(f"payload of {len(self.payload)} bytes exceeds {MAX_PAYLOAD}")
        object.__setattr__(self, "msg_type", MsgType(self.msg_type))


def encode_frame(f: Frame) -> bytes:
    head = struct.pack(">BBHBB", SYNC, f.msg_type, f.endpoint_id, f.seq, len(f.payload))
    body = head + f.payload
    return body + struct.pack(">H", crc16_ccitt_false(body))


def decode_frame(data: bytes) -> Frame:
    """Validates sync, length, CRC, and message type, in that order."""
    if len(data) < 8:
        raise FrameLengthError(f"frame of {len(data)} bytes is shorter than the 8-byte minimum")
    if data[0] != SYNC:
        raise FramingError(f"bad sync byte 0x{data[0]:02X}")
    payload_len = data[5]
    if len(data) != 8 + payload_len:
        raise FrameLengthError(f"expected {8 + payload_len} bytes for payload_len "
                               f"{payload_len}, got {len(data)}")
    (crc,) = struct.unpack(">H", data[-2:])
    expected = crc16_ccitt_false(data[:-2])
    if crc != expected:
        raise FrameIntegrityError(f"CRC mismatch: frame carries 0x{crc:04X}, "
                                  f"computed 0x{expected:04X}")
    msg_type, endpoint_id, seq = data[1], struct.unpack(">H", data[2:4])[0], data[4]
    try:
        mt = MsgType(msg_type)
    except ValueError:
        raise FramingError(f"unknown message type 0x{msg_type:02X}") from None
    return Frame(mt, endpoint_id, seq, bytes(data[6:6 + payload_len]))


def encode_sensor_payload(moisture, step: int) -> bytes:
    words = []
    for i, m in enumerate(moisture):
        raw = round(m * MOISTURE_SCALE)
        if not (0 <= raw <= MOISTURE_SCALE):
            raise UsageError(f"moisture{i} = {m!r} outside [0, 1]")
        words.append(raw)
    if len(words) != 4:
        raise UsageError("sensor payload needs exactly 4 moisture values")
    return struct.pack(">HHHHI", *words, step)


def decode_sensor_payload(payload: bytes) -> tuple[tuple[float, float, float, float], int]:
    if len(payload) != 12:
        raise FrameLengthError(f"sensor payload must be 12 bytes, got {len(payload)}")
    *words, step = struct.unpack(">HHHHI", payload)
    for w in words:
        if w > MOISTURE_SCALE:
            raise FrameIntegrityError(f"raw moisture word {w} exceeds {MOISTURE_SCALE}")
    return tuple(w / MOISTURE_SCALE for w in words), step


def encode_cmd_payload(open_faucet: bool) -> bytes:
    return bytes([0x01 if open_faucet else 0x00])


def decode_cmd_payload(payload: bytes) -> bool:
    if len(payload) != 1 or payload[0] not in (0x00, 0x01):
        raise FrameLengthError(f"bad irrigation command payload {payload.hex()}")
    return payload[0] == 0x01


def encode_timeout_payload(step: int) -> bytes:
    return struct.pack(">I", step)


def decode_timeout_payload(payload: bytes) -> int:
    if len(payload) != 4:
        raise FrameLengthError(f"timeout payload must be 4 bytes, got {len(payload)}")
    return struct.unpack(">I", payload)[0]
