"""Single-clock discrete-event loop tying endpoints, coordinator, and server together.

Timing model, one step per sensor reporting period:

* soils advance first using the faucet states from the end of the previous
  step, then endpoints read the fresh moisture;
* the endpoint<->coordinator radio is a Bernoulli-loss link crossed within
  the step on the way up and with a one-step delay on the way down, so an
  acknowledgment arrives the step after a frame was sent;
* server messages reach the coordinator one step after emission and both
  directions are severed during declared outage windows.

All randomness (link loss, soil noise) derives from the scenario seed, so
identical scenarios produce byte-identical event logs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dataset import GENERATOR_EPOCH, STEP_SECONDS, Dataset, Sample, SoilParams, step_soil
from ..errors import UsageError
from .controller import ControllerConfig, Decision, controller_decide
from .coordinator import Command, CoordinatorState, Heartbeat, Publish, coordinator_step
from .endpoint import EndpointState, endpoint_step
from .frames import Frame, MsgType, decode_frame, encode_frame

from datetime import timedelta


@dataclass(frozen=True)
class SimScenario:
    seed: int
    steps: int
    soils: tuple[SoilParams, ...]              # soils[i] belongs to endpoint_id i+1
    controller: ControllerConfig
    loss_prob: float = 0.0
    outages: tuple[tuple[int, int], ...] = ()  # [start, end) step windows
    coordinator_controller: ControllerConfig | None = None
    irrigation_rate: float = 0.02              # layer-0 moisture per open-faucet step
    max_irrigation_steps: int = 20
    failover_threshold: int = 3
    reporting_interval: int = 1
    warmup_steps: int = 0
    report_band: float | None = None           # band used for the in-band statistic

    def __post_init__(self):
        if self.steps < 1:
            raise UsageError("steps must be >= 1")
        if not self.soils:
            raise UsageError("scenario needs at least one endpoint soil")
        if not (0.0 <= self.loss_prob < 1.0):
            raise UsageError("loss_prob must lie in [0, 1)")
        for start, end in self.outages:
            if start < 0 or end <= start:
                raise UsageError(f"bad outage window [{start}, {end})")

    def in_outage(self, step: int) -> bool:
        return any(start <= step < end for start, end in self.outages)


@dataclass(frozen=True)
class SimSummary:
    steps: int
    frames_originated: int
    frames_delivered: int
    frames_resolved: int
    delivery_rate: float
    retransmissions: int
    frames_given_up: int
    duplicates: int
    timeout_count: int
    server_command_count: int
    failover_command_count: int
    irrigation_duty_cycle: float
    in_band_fraction: float


@dataclass
class SimResult:
    events: list[str]
    traces: dict[int, Dataset]
    summary: SimSummary

    def event_text(self) -> str:
        return "\n".join(self.events) + ("\n" if self.events else "")


@dataclass
class _ServerState:
    controller: ControllerConfig
    believed_open: dict[int, bool] = field(default_factory=dict)
    commands_sent: int = 0


def _server_step(state: _ServerState, publishes: list[Publish], events: list[str],
                 now: int) -> list:
    """Cloud controller: decide per moisture report, heartbeat every step."""
    out: list = []
    for pub in publishes:
        if pub.kind == "timeout":
            state.believed_open[pub.endpoint_id] = False
            events.append(f"{now}\tserver\ttimeout_noted\tendpoint={pub.endpoint_id}")
            continue
        believed = state.believed_open.get(pub.endpoint_id, False)
        decision = controller_decide(state.controller, pub.moisture, believed)
        if decision == Decision.OPEN and not believed:
            out.append(Command(f"greenhouse/{pub.endpoint_id}/cmd", pub.endpoint_id, True))
            state.believed_open[pub.endpoint_id] = True
            state.commands_sent += 1
            events.append(f"{now}\tserver\tcmd\tgreenhouse/{pub.endpoint_id}/cmd OPEN")
        elif decision == Decision.CLOSE and believed:
            out.append(Command(f"greenhouse/{pub.endpoint_id}/cmd", pub.endpoint_id, False))
            state.believed_open[pub.endpoint_id] = False
            state.commands_sent += 1
            events.append(f"{now}\tserver\tcmd\tgreenhouse/{pub.endpoint_id}/cmd CLOSE")
    out.append(Heartbeat())
    return out


def simulate(scenario: SimScenario) -> SimResult:
    """Run the scenario to completion; deterministic for a fixed scenario."""
    n = len(scenario.soils)
    endpoint_ids = [i + 1 for i in range(n)]
    link_rng = np.random.default_rng(np.random.SeedSequence([scenario.seed, 17]))
    soil_rngs = [np.random.default_rng(np.random.SeedSequence([scenario.seed, 100 + i]))
                 for i in range(n)]

    moisture = [np.asarray(s.initial_moisture, dtype=float) for s in scenario.soils]
    endpoints = [EndpointState(endpoint_id=eid,
                               max_irrigation_steps=scenario.max_irrigation_steps,
                               reporting_interval=scenario.reporting_interval)
                 for eid in endpoint_ids]
    coordinator = CoordinatorState(failover_threshold=scenario.failover_threshold,
                                   local_controller=scenario.coordinator_controller)
    server = _ServerState(controller=scenario.controller)

    events: list[str] = []
    trace_rows: list[list[Sample]] = [[] for _ in range(n)]
    downlink_inboxes: dict[int, list[Frame]] = {eid: [] for eid in endpoint_ids}
    server_out_prev: list = []

    # Uplink data-frame accounting for the delivery-rate statistic.
    active_uid: dict[tuple[int, int], int] = {}
    next_uid = 0
    originated = 0
    delivered: set[int] = set()
    resolved: set[int] = set()

    open_steps = 0
    in_band_steps = 0
    band = scenario.report_band if scenario.report_band is not None else scenario.controller.band
    lo = scenario.controller.setpoint * (1.0 - band)
    hi = scenario.controller.setpoint * (1.0 + band)

    def cross_link(frames: list[Frame], now: int) -> list[Frame]:
        """Bernoulli loss plus a wire round-trip through the codec."""
        nonlocal delivered
        survivors = []
        for f in frames:
            wire = encode_frame(f)
            if scenario.loss_prob > 0.0 and link_rng.random() < scenario.loss_prob:
                events.append(f"{now}\tlink\tdrop\t{f.msg_type.name} "
                              f"endpoint={f.endpoint_id} seq={f.seq}")
                continue
            got = decode_frame(wire)
            if got.msg_type in (MsgType.SENSOR_REPORT, MsgType.TIMEOUT_ERROR):
                uid = active_uid.get((got.endpoint_id, got.seq))
                if uid is not None:
                    delivered.add(uid)
            survivors.append(got)
        return survivors

    for t in range(scenario.steps):
        outage = scenario.in_outage(t)

        if t > 0:
            for i in range(n):
                params = scenario.soils[i]
                irrigation = scenario.irrigation_rate if endpoints[i].faucet_open else 0.0
                noise = (soil_rngs[i].normal(0.0, params.noise_std, 4)
                         if params.noise_std > 0 else None)
                moisture[i] = step_soil(moisture[i], params, irrigation, noise)
        for i in range(n):
            ts = GENERATOR_EPOCH + timedelta(seconds=STEP_SECONDS * t)
            trace_rows[i].append(Sample(ts, tuple(float(v) for v in moisture[i])))
            if lo <= moisture[i][-1] <= hi and t >= scenario.warmup_steps:
                in_band_steps += 1

        uplink: list[Frame] = []
        for i, est in enumerate(endpoints):
            before = set(est.pending)
            est, out = endpoint_step(est, downlink_inboxes[est.endpoint_id],
                                     tuple(moisture[i]), t)
            downlink_inboxes[est.endpoint_id] = []
            endpoints[i] = est
            for seq in est.pending:
                if seq not in before:
                    active_uid[(est.endpoint_id, seq)] = next_uid
                    originated += 1
                    next_uid += 1
            for seq in before - set(est.pending):
                resolved.add(active_uid[(est.endpoint_id, seq)])
            for step_no, name, details in est.events:
                events.append(f"{step_no}\tendpoint:{est.endpoint_id}\t{name}\t{details}")
            est.events.clear()
            if est.faucet_open:
                open_steps += 1
            uplink.extend(out)

        delivered_up = cross_link(uplink, t)

        from_server = [] if outage else server_out_prev
        coordinator, to_server, downlink = coordinator_step(coordinator, delivered_up,
                                                            from_server, t)
        for step_no, name, details in coordinator.events:
            events.append(f"{step_no}\tcoordinator\t{name}\t{details}")
        coordinator.events.clear()

        for f in cross_link(downlink, t):
            downlink_inboxes[f.endpoint_id].append(f)

        if outage:
            if to_server:
                events.append(f"{t}\tlink\tserver_outage\t{len(to_server)} publishes lost")
            server_out_prev = _server_step(server, [], events, t)
        else:
            for pub in to_server:
                events.append(f"{t}\tcoordinator\tpublish\t{pub.topic} "
                              f"step={pub.report_step}")
            server_out_prev = _server_step(server, to_server, events, t)

    # Frames still awaiting an acknowledgment at the end are not counted.
    delivered_resolved = len(delivered & resolved)
    summary = SimSummary(
        steps=scenario.steps,
        frames_originated=originated,
        frames_delivered=delivered_resolved,
        frames_resolved=len(resolved),
        delivery_rate=(delivered_resolved / len(resolved)) if resolved else 1.0,
        retransmissions=sum(e.retransmissions for e in endpoints) + coordinator.retransmissions,
        frames_given_up=sum(e.dropped_frames for e in endpoints) + coordinator.dropped_frames,
        duplicates=coordinator.duplicates,
        timeout_count=sum(e.timeout_count for e in endpoints),
        server_command_count=server.commands_sent,
        failover_command_count=sum(1 for c in coordinator.command_log if c.failover),
        irrigation_duty_cycle=open_steps / (scenario.steps * n),
        in_band_fraction=(in_band_steps / (max(scenario.steps - scenario.warmup_steps, 1) * n)),
    )
    traces = {eid: Dataset(tuple(trace_rows[i]), soil_label=f"endpoint{eid}")
              for i, eid in enumerate(endpoint_ids)}
    return SimResult(events=events, traces=traces, summary=summary)
