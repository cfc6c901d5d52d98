"""Gateway between the endpoint radio protocol and server topic messages.

Translates sensor frames into publish records on ``greenhouse/<id>/moisture``
and server commands on ``greenhouse/<id>/cmd`` into irrigation frames. Tracks
server heartbeats; after `failover_threshold` consecutive misses and with a
local model loaded, it computes irrigation decisions itself and tags them as
failover commands.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .controller import ControllerConfig, Decision, controller_decide
from .endpoint import MAX_TRANSMISSIONS, PendingFrame
from .frames import (
    Frame,
    MsgType,
    decode_sensor_payload,
    decode_timeout_payload,
    encode_cmd_payload,
)

DEDUP_WINDOW = 32


@dataclass(frozen=True)
class Publish:
    topic: str
    endpoint_id: int
    kind: str                      # "moisture" or "timeout"
    moisture: tuple | None = None
    report_step: int | None = None


@dataclass(frozen=True)
class Command:
    topic: str
    endpoint_id: int
    open_faucet: bool


@dataclass(frozen=True)
class Heartbeat:
    pass


@dataclass(frozen=True)
class PublishRecord:
    step: int
    topic: str
    endpoint_id: int


@dataclass(frozen=True)
class CommandRecord:
    step: int
    endpoint_id: int
    open_faucet: bool
    failover: bool


@dataclass
class CoordinatorState:
    failover_threshold: int = 3
    local_controller: ControllerConfig | None = None
    server_link_up: bool = True
    missed_heartbeats: int = 0
    last_seq: dict[int, int] = field(default_factory=dict)
    recent_seqs: dict[int, deque] = field(default_factory=dict)
    next_seq: dict[int, int] = field(default_factory=dict)
    pending: dict[tuple[int, int], PendingFrame] = field(default_factory=dict)
    believed_open: dict[int, bool] = field(default_factory=dict)
    duplicates: int = 0
    retransmissions: int = 0
    dropped_frames: int = 0
    publish_log: list[PublishRecord] = field(default_factory=list)
    command_log: list[CommandRecord] = field(default_factory=list)
    events: list[tuple[int, str, str]] = field(default_factory=list)

    @property
    def local_model(self):
        return self.local_controller.model if self.local_controller else None

    @property
    def failover_active(self) -> bool:
        return (self.missed_heartbeats >= self.failover_threshold
                and self.local_model is not None)

    def _take_seq(self, endpoint_id: int) -> int:
        seq = self.next_seq.get(endpoint_id, 0)
        self.next_seq[endpoint_id] = (seq + 1) & 0xFF
        return seq

    def _seen_before(self, endpoint_id: int, seq: int) -> bool:
        window = self.recent_seqs.setdefault(endpoint_id, deque(maxlen=DEDUP_WINDOW))
        if seq in window:
            return True
        window.append(seq)
        self.last_seq[endpoint_id] = seq
        return False


def _make_cmd(state: CoordinatorState, endpoint_id: int, open_faucet: bool) -> Frame:
    return Frame(MsgType.IRRIGATION_CMD, endpoint_id, state._take_seq(endpoint_id),
                 encode_cmd_payload(open_faucet))


def coordinator_step(state: CoordinatorState, from_endpoints: list[Frame],
                     from_server: list, now: int
                     ) -> tuple[CoordinatorState, list, list[Frame]]:
    """One gateway step; returns (state, messages to server, frames to endpoints)."""
    to_server: list = []
    to_endpoints: list[Frame] = []
    new_frames: list[tuple[Frame, bool, bool]] = []   # (frame, open_faucet, failover)

    # Heartbeat accounting drives the failover latch.
    was_failover = state.failover_active
    if any(isinstance(m, Heartbeat) for m in from_server):
        state.missed_heartbeats = 0
        state.server_link_up = True
    else:
        state.missed_heartbeats += 1
        if state.missed_heartbeats >= state.failover_threshold:
            state.server_link_up = False
    if state.failover_active and not was_failover:
        state.events.append((now, "failover_enter",
                             f"missed {state.missed_heartbeats} heartbeats"))
    elif was_failover and not state.failover_active:
        state.events.append((now, "failover_exit", "heartbeat restored"))

    for frame in from_endpoints:
        eid = frame.endpoint_id
        if frame.msg_type == MsgType.ACK:
            entry = state.pending.pop((eid, frame.seq), None)
            if entry is not None:
                state.believed_open[eid] = (entry.frame.payload == b"\x01")
        elif frame.msg_type == MsgType.SENSOR_REPORT:
            to_endpoints.append(Frame(MsgType.ACK, eid, frame.seq))
            if state._seen_before(eid, frame.seq):
                state.duplicates += 1
                continue
            moisture, report_step = decode_sensor_payload(frame.payload)
            topic = f"greenhouse/{eid}/moisture"
            to_server.append(Publish(topic, eid, "moisture", moisture, report_step))
            state.publish_log.append(PublishRecord(now, topic, eid))
            if state.failover_active:
                has_pending_cmd = any(k[0] == eid for k in state.pending)
                believed = state.believed_open.get(eid, False)
                decision = controller_decide(state.local_controller, moisture, believed)
                if not has_pending_cmd:
                    if decision == Decision.OPEN and not believed:
                        new_frames.append((_make_cmd(state, eid, True), True, True))
                    elif decision == Decision.CLOSE and believed:
                        new_frames.append((_make_cmd(state, eid, False), False, True))
        elif frame.msg_type == MsgType.TIMEOUT_ERROR:
            to_endpoints.append(Frame(MsgType.ACK, eid, frame.seq))
            if state._seen_before(eid, frame.seq):
                state.duplicates += 1
                continue
            state.believed_open[eid] = False
            timeout_step = decode_timeout_payload(frame.payload)
            topic = f"greenhouse/{eid}/timeout"
            to_server.append(Publish(topic, eid, "timeout", None, timeout_step))
            state.publish_log.append(PublishRecord(now, topic, eid))

    for key in list(state.pending):
        entry = state.pending[key]
        if entry.attempts >= MAX_TRANSMISSIONS:
            del state.pending[key]
            state.dropped_frames += 1
            state.events.append((now, "frame_dropped",
                                 f"IRRIGATION_CMD endpoint={key[0]} seq={key[1]} "
                                 f"unacknowledged after {entry.attempts} transmissions"))
        else:
            entry.attempts += 1
            state.retransmissions += 1
            to_endpoints.append(entry.frame)

    for msg in from_server:
        if isinstance(msg, Command):
            new_frames.append((_make_cmd(state, msg.endpoint_id, msg.open_faucet),
                               msg.open_faucet, False))

    for frame, open_faucet, failover in new_frames:
        state.pending[(frame.endpoint_id, frame.seq)] = PendingFrame(frame, attempts=1)
        state.command_log.append(CommandRecord(now, frame.endpoint_id, open_faucet, failover))
        event = "failover_cmd" if failover else "cmd"
        verb = "OPEN" if open_faucet else "CLOSE"
        state.events.append((now, event, f"greenhouse/{frame.endpoint_id}/cmd {verb}"))
        to_endpoints.append(frame)
    return state, to_server, to_endpoints
