"""Field endpoint: sensors, faucet actuator, safety timeout, ARQ retransmission."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import FrameError
from .frames import (
    Frame,
    MsgType,
    decode_cmd_payload,
    encode_sensor_payload,
    encode_timeout_payload,
)

# One original transmission plus up to four retransmissions.
MAX_TRANSMISSIONS = 5


@dataclass
class PendingFrame:
    frame: Frame
    attempts: int  # transmissions so far


@dataclass
class EndpointState:
    endpoint_id: int
    max_irrigation_steps: int = 20
    reporting_interval: int = 1
    faucet_open: bool = False
    irrigation_timer: int = 0          # full steps the faucet has been open
    next_seq: int = 0
    pending: dict[int, PendingFrame] = field(default_factory=dict)
    retransmissions: int = 0
    dropped_frames: int = 0
    malformed_frames: int = 0
    timeout_count: int = 0
    events: list[tuple[int, str, str]] = field(default_factory=list)

    def _take_seq(self) -> int:
        seq = self.next_seq
        self.next_seq = (self.next_seq + 1) & 0xFF
        return seq


def endpoint_step(state: EndpointState, inbox: list[Frame], sensor_reading,
                  now: int) -> tuple[EndpointState, list[Frame]]:
    """Advance one step: safety timer, inbox, retransmissions, sensor report.

    The safety timeout runs before command processing, so a faucet opened at
    step t closes at step t + max_irrigation_steps even if a CLOSE command
    arrives in the same step. Unacknowledged frames are retransmitted once
    per step until MAX_TRANSMISSIONS, then dropped.
    """
    outbound: list[Frame] = []
    new_frames: list[Frame] = []

    # Safety timeout fires before anything else can extend the watering.
    if state.faucet_open:
        state.irrigation_timer += 1
        if state.irrigation_timer >= state.max_irrigation_steps:
            state.faucet_open = False
            state.irrigation_timer = 0
            state.timeout_count += 1
            state.events.append((now, "timeout_error",
                                 f"faucet force-closed after {state.max_irrigation_steps} steps"))
            new_frames.append(Frame(MsgType.TIMEOUT_ERROR, state.endpoint_id,
                                    state._take_seq(), encode_timeout_payload(now)))

    for frame in inbox:
        if frame.msg_type == MsgType.ACK:
            state.pending.pop(frame.seq, None)
        elif frame.msg_type == MsgType.IRRIGATION_CMD:
            try:
                open_faucet = decode_cmd_payload(frame.payload)
            except FrameError:
                state.malformed_frames += 1
                continue
            if open_faucet and not state.faucet_open:
                state.faucet_open = True
                state.irrigation_timer = 0
                state.events.append((now, "faucet_open", f"cmd seq={frame.seq}"))
            elif not open_faucet and state.faucet_open:
                state.faucet_open = False
                state.irrigation_timer = 0
                state.events.append((now, "faucet_close", f"cmd seq={frame.seq}"))
            # Duplicates are re-acknowledged so the sender stops retrying.
            outbound.append(Frame(MsgType.ACK, state.endpoint_id, frame.seq))
        else:
            state.malformed_frames += 1

    for seq in list(state.pending):
        entry = state.pending[seq]
        if entry.attempts >= MAX_TRANSMISSIONS:
            del state.pending[seq]
            state.dropped_frames += 1
            state.events.append((now, "frame_dropped",
                                 f"{entry.frame.msg_type.name} seq={seq} unacknowledged "
                                 f"after {entry.attempts} transmissions"))
        else:
            entry.attempts += 1
            state.retransmissions += 1
            outbound.append(entry.frame)

    if now % state.reporting_interval == 0:
        new_frames.append(Frame(MsgType.SENSOR_REPORT, state.endpoint_id, state._take_seq(),
                                encode_sensor_payload(sensor_reading, now)))

    for frame in new_frames:
        state.pending[frame.seq] = PendingFrame(frame, attempts=1)
        outbound.append(frame)
    return state, outbound
