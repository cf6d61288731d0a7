"""Live websocket sessions: an interactive client steers the world
(spawn/move people, hands, arousal, attention) and receives state ticks.

Protocol: every message is one JSON object {type, seq, payload}, one
message per websocket text frame. The client opens with
{type: "hello", seq, payload: {version: 1}} and receives a "welcome"
carrying dt and the robot description (DH rows, limits, presets) so the
client can draw the same arm. Commands are applied atomically at tick
boundaries in arrival order and acknowledged with an "ack" (or "error")
naming the command's seq. State messages are coalesced under
backpressure: the outbox keeps only the newest states, never an
unbounded backlog.
"""

from __future__ import annotations

import asyncio
import json
import math
import time
from collections import deque
from dataclasses import dataclass, field

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .harness import Engine, TraceRecord
from .scene import RobotModel, SkeletonObservation, forward_kinematics, load_robot_config
from .scenario import (
    DEFAULT_SHOULDER_OFFSET,
    HAND_DOWN_DROP,
    HAND_LATERAL_OFFSET,
    HAND_RAISE_CLEARANCE,
    Scenario,
    Condition,
)

PROTOCOL_VERSION = 1
MAX_PERSONS = 16
VELOCITY_WINDOW_TICKS = 3  # finite-difference smoothing for live steering
CATCH_UP_TICKS = 3
STATE_OUTBOX_LIMIT = 4


class ProtocolError(ValueError):
    def __init__(self, message: str, fld: str | None = None) -> None:
        super().__init__(message)
        self.field = fld


@dataclass
class LivePerson:
    """Client-steered person; `pos` is the latest commanded position and
    `history` holds one sampled position per tick for velocity smoothing."""

    person_id: int
    pos: tuple[float, float, float] = (0.0, 0.0, 0.0)
    history: deque = field(default_factory=lambda: deque(maxlen=VELOCITY_WINDOW_TICKS + 1))
    left_raised: bool = False
    right_raised: bool = False

    def sample_tick(self) -> None:
        self.history.append(self.pos)

    def observe(self, t: float, dt: float) -> SkeletonObservation:
        pos = self.pos
        span = len(self.history) - 1
        if span > 0:
            oldest = self.history[0]
            vel = tuple((a - b) / (span * dt) for a, b in zip(pos, oldest))
        else:
            vel = (0.0, 0.0, 0.0)
        shoulder = pos[2] + DEFAULT_SHOULDER_OFFSET
        left = (
            pos[0],
            pos[1] + HAND_LATERAL_OFFSET,
            shoulder + HAND_RAISE_CLEARANCE if self.left_raised else pos[2] - HAND_DOWN_DROP,
        )
        right = (
            pos[0],
            pos[1] - HAND_LATERAL_OFFSET,
            shoulder + HAND_RAISE_CLEARANCE if self.right_raised else pos[2] - HAND_DOWN_DROP,
        )
        return SkeletonObservation(
            person_id=self.person_id,
            t=t,
            torso_pos=pos,
            torso_vel=vel,
            left_hand_pos=left,
            right_hand_pos=right,
            left_hand_vel=vel,
            right_hand_vel=vel,
            shoulder_height=shoulder,
        )


class LiveSession:
    """Engine plus client-steered world for one websocket connection."""

    def __init__(self, model: RobotModel, dt: float, seed: int = 0) -> None:
        self.model = model
        self.dt = dt
        self.persons: dict[int, LivePerson] = {}
        self.ticks_per_message = 1
        self._reset(seed)

    def _reset(self, seed: int) -> None:
        scenario = Scenario(seed=seed, dt=self.dt, duration_s=1.0, condition=Condition())
        self.engine = Engine(scenario, self.model)
        self.persons.clear()

    def apply(self, op: str, payload: dict) -> None:
        """Apply one client command; raises ProtocolError on bad input."""
        if op == "set_arousal":
            level = _num_field(payload, "level")
            if not 1.0 <= level <= 10.0:
                raise ProtocolError(f"level must be within [1, 10], got {level}", "level")
            self.engine.set_arousal(level)
        elif op == "set_attention":
            mode = payload.get("mode")
            if mode not in ("low", "high"):
                raise ProtocolError(f"mode must be 'low' or 'high', got {mode!r}", "mode")
            self.engine.set_attention(mode)
        elif op == "spawn_person":
            pid = _id_field(payload)
            if pid in self.persons:
                raise ProtocolError(f"person id {pid} already exists", "id")
            if len(self.persons) >= MAX_PERSONS:
                raise ProtocolError(f"session person cap is {MAX_PERSONS}", "id")
            person = LivePerson(person_id=pid, pos=_pos_field(payload))
            person.sample_tick()
            self.persons[pid] = person
        elif op == "move_person":
            person = self._person(payload)
            person.pos = _pos_field(payload)
        elif op == "set_hand":
            person = self._person(payload)
            hand = payload.get("hand")
            if hand not in ("left", "right"):
                raise ProtocolError(f"hand must be 'left' or 'right', got {hand!r}", "hand")
            raised = payload.get("raised")
            if not isinstance(raised, bool):
                raise ProtocolError("raised must be a boolean", "raised")
            if hand == "left":
                person.left_raised = raised
            else:
                person.right_raised = raised
        elif op == "remove_person":
            pid = _id_field(payload)
            if pid not in self.persons:
                raise ProtocolError(f"unknown person id {pid}", "id")
            del self.persons[pid]
        elif op == "reset":
            seed = payload.get("seed", 0)
            if not isinstance(seed, int):
                raise ProtocolError("seed must be an integer", "seed")
            self._reset(seed)
        elif op == "set_rate":
            rate = payload.get("ticks_per_message")
            if not isinstance(rate, int) or rate < 1:
                raise ProtocolError("ticks_per_message must be a positive integer", "ticks_per_message")
            self.ticks_per_message = rate
        else:
            raise ProtocolError(f"unknown command op {op!r}", "op")

    def _person(self, payload: dict) -> LivePerson:
        pid = _id_field(payload)
        person = self.persons.get(pid)
        if person is None:
            raise ProtocolError(f"unknown person id {pid}", "id")
        return person

    def step(self) -> TraceRecord:
        t = self.engine.tick * self.dt
        observations = [p.observe(t, self.dt) for p in self.persons.values()]
        for person in self.persons.values():
            person.sample_tick()
        return self.engine.step(observations)

    def state_payload(self, record: TraceRecord) -> dict:
        ee = forward_kinematics(self.model, record.pose)
        return {
            "tick": record.tick,
            "t": round(record.time, 6),
            "q": [round(v, 6) for v in record.pose],
            "ee": {
                "pos": [round(ee[i][3], 6) for i in range(3)],
                "rot": [[round(ee[i][j], 6) for j in range(3)] for i in range(3)],
            },
            "gaze": {
                "kind": record.gaze.priority,
                "id": record.gaze.target_id,
                "pos": [round(v, 6) for v in record.gaze.target_pos],
            },
            "selection": record.selection,
            "persons": [
                {
                    "id": rec.person_id,
                    "pos": [round(v, 6) for v in obs.torso_pos],
                    "phi": round(rec.phi, 6),
                    "P": round(rec.P, 6),
                    "V": round(rec.V, 6),
                    "theta": round(rec.theta, 6),
                    "h_left": rec.h_left,
                    "h_right": rec.h_right,
                }
                for rec, obs in self._records_with_obs(record)
            ],
            "drift": [
                {"id": vt.target_id, "pos": [round(v, 6) for v in vt.pos],
                 "expires_at": round(vt.born_at + vt.lifespan, 6)}
                for vt in record.drift_targets
            ],
            "arousal": self.engine.arousal,
            "attention": self.engine.attention_mode,
            "saturated": record.saturated,
        }

    def _records_with_obs(self, record: TraceRecord):
        for rec in record.records:
            person = self.persons.get(rec.person_id)
            if person is not None:
                yield rec, person.observe(record.time, self.dt)


def _num_field(payload: dict, name: str) -> float:
    value = payload.get(name)
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise ProtocolError(f"{name} must be a finite number", name)
    return float(value)


def _id_field(payload: dict) -> int:
    pid = payload.get("id")
    if not isinstance(pid, int) or isinstance(pid, bool):
        raise ProtocolError("id must be an integer", "id")
    return pid


def _pos_field(payload: dict) -> tuple[float, float, float]:
    pos = payload.get("pos")
    if (
        not isinstance(pos, (list, tuple))
        or len(pos) != 3
        or not all(isinstance(v, (int, float)) and math.isfinite(v) for v in pos)
    ):
        raise ProtocolError("pos must be a finite 3-vector", "pos")
    return tuple(float(v) for v in pos)


class _Outbox:
    """Control messages are never dropped; state messages coalesce to
    the newest few when the client cannot drain fast enough."""

    def __init__(self) -> None:
        self.control: deque[str] = deque()
        self.state: deque[str] = deque(maxlen=STATE_OUTBOX_LIMIT)
        self._event = asyncio.Event()

    def put_control(self, msg: dict) -> None:
        self.control.append(json.dumps(msg))
        self._event.set()

    def put_state(self, msg: dict) -> None:
        self.state.append(json.dumps(msg))
        self._event.set()

    async def next(self) -> str:
        while not self.control and not self.state:
            self._event.clear()
            await self._event.wait()
        return self.control.popleft() if self.control else self.state.popleft()


def _message(kind: str, seq: int, payload: dict) -> dict:
    return {"type": kind, "seq": seq, "payload": payload}


def _robot_description(model: RobotModel) -> dict:
    return {
        "dh_parameters": [list(row) for row in model.dh_parameters],
        "joint_limits": [list(row) for row in model.joint_limits],
        "base_pos": list(model.base_position),
        "gaze_axis": list(model.gaze_axis),
    }


def create_app(
    default_dt: float = 1.0 / 30.0,
    max_sessions: int = 8,
    model: RobotModel | None = None,
    realtime: bool = True,
    ui_dir: str | None = None,
) -> FastAPI:
    """Build the service app. `realtime=False` removes pacing sleeps so
    tests can run the loop as fast as the event loop allows. `ui_dir`
    optionally mounts a built browser client (index.html + dist/)."""
    app = FastAPI(title="socialarm")
    app.state.model = model if model is not None else load_robot_config()
    app.state.max_sessions = max_sessions
    app.state.active_sessions = 0
    app.state.default_dt = default_dt
    app.state.realtime = realtime

    @app.get("/healthz")
    def healthz() -> dict:
        return {"ok": True, "sessions": app.state.active_sessions}

    @app.websocket("/session")
    async def session_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        if app.state.active_sessions >= app.state.max_sessions:
            await ws.send_text(
                json.dumps(
                    _message("error", 0, {"message": "session limit reached", "field": None})
                )
            )
            await ws.close()
            return
        app.state.active_sessions += 1
        try:
            await _run_session(app, ws)
        except WebSocketDisconnect:
            pass
        finally:
            app.state.active_sessions -= 1

    if ui_dir is not None:
        # registered last so it never shadows /session or /healthz
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


async def _handshake(ws: WebSocket) -> bool:
    raw = await ws.receive_text()
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError:
        await ws.send_text(json.dumps(_message("error", 0, {"message": "handshake is not valid JSON"})))
        return False
    if msg.get("type") != "hello" or msg.get("payload", {}).get("version") != PROTOCOL_VERSION:
        await ws.send_text(
            json.dumps(
                _message(
                    "error",
                    0,
                    {
                        "message": f"handshake rejected: expected hello with version {PROTOCOL_VERSION}",
                        "field": "version",
                    },
                )
            )
        )
        return False
    return True


async def _run_session(app: FastAPI, ws: WebSocket) -> None:
    if not await _handshake(ws):
        await ws.close()
        return

    session = LiveSession(app.state.model, app.state.default_dt)
    outbox = _Outbox()
    commands: asyncio.Queue = asyncio.Queue(maxsize=64)
    outbox.put_control(
        _message(
            "welcome",
            0,
            {
                "version": PROTOCOL_VERSION,
                "dt": session.dt,
                "robot": _robot_description(app.state.model),
            },
        )
    )

    async def reader() -> None:
        while True:
            raw = await ws.receive_text()
            try:
                msg = json.loads(raw)
            except json.JSONDecodeError:
                outbox.put_control(
                    _message("error", 0, {"message": "message is not valid JSON", "field": None})
                )
                continue
            seq = msg.get("seq", 0)
            if msg.get("type") != "command":
                outbox.put_control(
                    _message("error", seq, {"message": "expected type 'command'", "field": "type"})
                )
                continue
            payload = msg.get("payload")
            if not isinstance(payload, dict) or "op" not in payload:
                outbox.put_control(
                    _message("error", seq, {"message": "payload must carry 'op'", "field": "payload"})
                )
                continue
            await commands.put((seq, payload))

    async def writer() -> None:
        while True:
            await ws.send_text(await outbox.next())

    async def ticker() -> None:
        next_t = time.monotonic()
        while True:
            # apply queued commands atomically at the tick boundary
            while not commands.empty():
                seq, payload = commands.get_nowait()
                try:
                    session.apply(payload["op"], payload)
                    outbox.put_control(_message("ack", seq, {"op": payload["op"]}))
                except ProtocolError as exc:
                    outbox.put_control(
                        _message("error", seq, {"message": str(exc), "field": exc.field})
                    )
            record = session.step()
            if record.tick % session.ticks_per_message == 0:
                outbox.put_state(_message("state", record.tick, session.state_payload(record)))
            if app.state.realtime:
                next_t += session.dt
                now = time.monotonic()
                if now < next_t:
                    await asyncio.sleep(next_t - now)
                elif now - next_t > CATCH_UP_TICKS * session.dt:
                    # too far behind: lag simulated time instead of spiraling
                    next_t = now
            else:
                await asyncio.sleep(0)

    tasks = [
        asyncio.create_task(reader()),
        asyncio.create_task(writer()),
        asyncio.create_task(ticker()),
    ]
    try:
        done, _ = await asyncio.wait(tasks, return_when=asyncio.FIRST_EXCEPTION)
        for task in done:
            exc = task.exception()
            if exc is not None and not isinstance(exc, WebSocketDisconnect):
                raise exc
    finally:
        for task in tasks:
            task.cancel()
