"""Discrete-event simulation of the endpoint / coordinator / cloud architecture."""

from .controller import ControllerConfig, Decision, controller_decide
from .coordinator import (
    Command,
    CommandRecord,
    CoordinatorState,
    Heartbeat,
    Publish,
    PublishRecord,
    coordinator_step,
)
from .endpoint import MAX_TRANSMISSIONS, EndpointState, PendingFrame, endpoint_step
from .frames import (
    Frame,
    MsgType,
    crc16_ccitt_false,
    decode_cmd_payload,
    decode_frame,
    decode_sensor_payload,
    decode_timeout_payload,
    encode_cmd_payload,
    encode_frame,
    encode_sensor_payload,
    encode_timeout_payload,
)
from .sim import SimResult, SimScenario, SimSummary, simulate

__all__ = [
    "ControllerConfig", "Decision", "controller_decide",
    "Command", "CommandRecord", "CoordinatorState", "Heartbeat", "Publish",
    "PublishRecord", "coordinator_step",
    "MAX_TRANSMISSIONS", "EndpointState", "PendingFrame", "endpoint_step",
    "Frame", "MsgType", "crc16_ccitt_false", "decode_cmd_payload", "decode_frame",
    "decode_sensor_payload", "decode_timeout_payload", "encode_cmd_payload",
    "encode_frame", "encode_sensor_payload", "encode_timeout_payload",
    "SimResult", "SimScenario", "SimSummary", "simulate",
]
