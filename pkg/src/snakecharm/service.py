"""Live tracking service: each session integrates horizontal lifts at a fixed tick.

HTTP lifecycle
    POST   /sessions               {"scenario": {...}, "tick_rate"?, "k"?,
                                    "v_max"?, "paced"?}  -> session info + id
    POST   /sessions/{id}/reset    restore the scenario's initial state
    DELETE /sessions/{id}          drop the session and its subscribers

Message channel at /sessions/{id}/stream (WebSocket, JSON both ways)
    client -> server: {"type":"set_target","pos":[...]}, {"type":"pause"},
        {"type":"resume"}, {"type":"set_params","k":real,"v_max":real};
        unpaced sessions additionally accept {"type":"tick","count":k} so a
        client (or a test) can drive simulated time deterministically.
    server -> client: {"type":"state","t","head","segments","energy","margin",
        "status","clamped","w","axis"} after every tick and every state change,
        or {"type":"error","error",...,"echo":...} for malformed input.

The held target is interpreted as pure pursuit: commanded head velocity
clamp(k * (target - head), v_max).  Targets outside radius (1 - 0.02) * L are
clamped to it and the snapshot's "clamped" flag set.  When the Gram margin
falls below tol_singular the session reports singular-stopped and halts; it
resumes when reset, or when the commanded direction acquires a component
orthogonal to the stored axis (the axis component is discarded and the
restricted solve realizes the rest).

Snapshots are serialized through the canonical 17-digit emitter, so an
identical message sequence against an unpaced session reproduces an identical
snapshot stream byte for byte.  Subscribers are latest-only: a slow consumer
always sees the newest state, never a backlog.
"""

from __future__ import annotations

import asyncio
import json
import logging
import uuid
from contextlib import asynccontextmanager
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from starlette.websockets import WebSocket, WebSocketDisconnect

from .control import lift_velocity
from .endpoint import endpoint, singularity
from .geometry import DegeneracyError, renormalize
from .scenario import ScenarioError, dumps_canonical, scenario_from_dict

log = logging.getLogger("snakecharm.service")

BOUNDARY_DELTA_SCALE = 0.02
DEFAULT_TICK_RATE = 60.0
DEFAULT_GAIN = 4.0
DEFAULT_VMAX = 2.0
MAX_TICK_BATCH = 100_000


def _offer(queue: asyncio.Queue, item) -> None:
    """Latest-only put: drop the stale entry rather than block the loop."""
    if queue.full():
        try:
            queue.get_nowait()
        except asyncio.QueueEmpty:
            pass
    queue.put_nowait(item)


class Session:
    """One live arm; all mutation happens under `lock`."""

    def __init__(self, sid: str, scenario, *, tick_rate: float, k: float,
                 v_max: float, paced: bool):
        self.id = sid
        self.scenario = scenario
        self.tick_rate = tick_rate
        self.dt = 1.0 / tick_rate
        self.k = k
        self.v_max = v_max
        self.paced = paced
        self.scheme = scenario.integrator.scheme
        self.tol_singular = scenario.tolerances.tol_singular
        self.lock = asyncio.Lock()
        self.subscribers: list = []
        self.ticker: Optional[asyncio.Task] = None
        self.closed = False
        self._reset_state()

    # -- state ------------------------------------------------------------

    def _reset_state(self) -> None:
        self.config = self.scenario.configuration()
        self.t = 0.0
        self.energy = 0.0
        self.head = endpoint(self.config)
        self.target = self.head.copy()
        self.clamped = False
        self.w = np.zeros(self.config.d)
        self._power = 0.0
        sing = singularity(self.config, self.tol_singular)
        self.margin = sing.margin
        self.axis = sing.axis
        self.status = "singular-stopped" if sing.is_singular else "running"
        if not sing.is_singular:
            self._refresh_control()

    def boundary_radius(self) -> float:
        return (1.0 - BOUNDARY_DELTA_SCALE) * self.config.total_length

    def _clamp(self, pos: np.ndarray):
        limit = self.boundary_radius()
        r = float(np.linalg.norm(pos))
        if r > limit:
            return pos * (limit / r), True
        return pos, False

    def _command(self, head: np.ndarray) -> np.ndarray:
        cmd = self.k * (self.target - head)
        speed = float(np.linalg.norm(cmd))
        if speed > self.v_max:
            cmd = cmd * (self.v_max / speed)
        return cmd

    def _lift(self, cfg):
        """Pure-pursuit lift at cfg; at singular states only the component
        orthogonal to the degenerate axis is commanded."""
        head = endpoint(cfg)
        cmd = self._command(head)
        sing = singularity(cfg, self.tol_singular)
        if sing.is_singular:
            cmd = cmd - (cmd @ sing.axis) * sing.axis
            if np.linalg.norm(cmd) <= 1e-12 * max(1.0, self.v_max):
                raise DegeneracyError("no commanded motion off the axis")
        return lift_velocity(cfg, cmd, tol_singular=self.tol_singular)

    def _refresh_control(self) -> None:
        """Recompute the solved control and power at the current state."""
        try:
            field, w = self._lift(self.config)
        except DegeneracyError:
            self.w = np.zeros(self.config.d)
            self._power = 0.0
            return
        self.w = w
        self._power = 0.5 * float(
            self.config.quadrature.weights
            @ np.einsum("sd,sd->s", field.values, field.values))

    def _mark_singular(self) -> None:
        sing = singularity(self.config, self.tol_singular)
        self.margin = sing.margin
        self.axis = sing.axis if sing.axis is not None else self.axis
        self.status = "singular-stopped"
        self.w = np.zeros(self.config.d)
        self._power = 0.0

    # -- integration --------------------------------------------------------

    def _tick_once(self) -> None:
        if self.status == "paused" or self.closed:
            return
        dt = self.dt
        p_old = self._power
        vals = self.config.values
        try:
            if self.scheme == "euler":
                field, _ = self._lift(self.config)
                new_vals = vals + dt * field.values
            else:
                # rk4 with stage retraction: renormalize before each lift so
                # every stage sees an actual sphere configuration
                def f(v):
                    fld, _ = self._lift(
                        renormalize(self.config.with_values(v)))
                    return fld.values
                k1 = f(vals)
                k2 = f(vals + 0.5 * dt * k1)
                k3 = f(vals + 0.5 * dt * k2)
                k4 = f(vals + dt * k3)
                new_vals = vals + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            new_cfg = renormalize(self.config.with_values(new_vals))
        except DegeneracyError:
            self._mark_singular()
            return
        self.config = new_cfg
        self.t += dt
        self.head = endpoint(new_cfg)
        sing = singularity(new_cfg, self.tol_singular)
        self.margin = sing.margin
        if sing.is_singular:
            self.axis = sing.axis
            self.status = "singular-stopped"
            self.w = np.zeros(new_cfg.d)
            p_new = 0.0
        else:
            self.axis = None
            self.status = "running"
            self._refresh_control()   # sets w and _power at the new state
            p_new = self._power
        self.energy += 0.5 * dt * (p_old + p_new)
        self._power = p_new

    # -- protocol -----------------------------------------------------------

    def snapshot(self) -> dict:
        return {
            "type": "state",
            "t": self.t,
            "head": self.head.tolist(),
            "segments": self.config.values.tolist(),
            "energy": self.energy,
            "margin": self.margin,
            "status": self.status,
            "clamped": self.clamped,
            "w": self.w.tolist(),
            "axis": None if self.axis is None else self.axis.tolist(),
        }

    def emit(self) -> None:
        text = dumps_canonical(self.snapshot(), pretty=False)
        for queue in self.subscribers:
            _offer(queue, text)

    def subscribe(self) -> asyncio.Queue:
        queue: asyncio.Queue = asyncio.Queue(maxsize=1)
        _offer(queue, dumps_canonical(self.snapshot(), pretty=False))
        self.subscribers.append(queue)
        return queue

    def unsubscribe(self, queue: asyncio.Queue) -> None:
        if queue in self.subscribers:
            self.subscribers.remove(queue)

    def handle(self, msg: dict) -> Optional[dict]:
        """Apply one client message; returns an error payload or None."""
        mtype = msg.get("type")
        if mtype == "set_target":
            pos = msg.get("pos")
            if (not isinstance(pos, list) or len(pos) != self.config.d
                    or not all(isinstance(v, (int, float))
                               and not isinstance(v, bool) for v in pos)
                    or not np.all(np.isfinite(pos))):
                return {"type": "error",
                        "error": f"set_target needs a finite pos of length "
                                 f"{self.config.d}", "echo": msg}
            self.target, self.clamped = self._clamp(np.asarray(pos, float))
            if self.status == "running":
                self._refresh_control()
            self.emit()
        elif mtype == "pause":
            if self.status == "running":
                self.status = "paused"
            self.emit()
        elif mtype == "resume":
            if self.status == "paused":
                self.status = "running"
                self._refresh_control()
            self.emit()
        elif mtype == "set_params":
            k = msg.get("k", self.k)
            v_max = msg.get("v_max", self.v_max)
            if (isinstance(k, bool) or isinstance(v_max, bool)
                    or not isinstance(k, (int, float))
                    or not isinstance(v_max, (int, float))
                    or not (k >= 0) or not (v_max > 0)):
                return {"type": "error",
                        "error": "set_params needs k >= 0 and v_max > 0",
                        "echo": msg}
            self.k = float(k)
            self.v_max = float(v_max)
            if self.status == "running":
                self._refresh_control()
            self.emit()
        elif mtype == "tick":
            if self.paced:
                return {"type": "error",
                        "error": "tick is only valid for unpaced sessions",
                        "echo": msg}
            count = msg.get("count", 1)
            if (isinstance(count, bool) or not isinstance(count, int)
                    or not 1 <= count <= MAX_TICK_BATCH):
                return {"type": "error",
                        "error": f"tick count must be an integer in "
                                 f"[1, {MAX_TICK_BATCH}]", "echo": msg}
            for _ in range(count):
                self._tick_once()
                self.emit()
        else:
            return {"type": "error",
                    "error": f"unknown message type {mtype!r}", "echo": msg}
        return None

    # -- pacing -------------------------------------------------------------

    def start(self) -> None:
        if self.paced:
            self.ticker = asyncio.get_running_loop().create_task(self._run())

    async def _run(self) -> None:
        period = 1.0 / self.tick_rate
        try:
            while not self.closed:
                await asyncio.sleep(period)
                async with self.lock:
                    if self.closed:
                        break
                    if self.status != "paused":
                        self._tick_once()
                        self.emit()
        except asyncio.CancelledError:
            pass

    def close(self) -> None:
        self.closed = True
        if self.ticker is not None:
            self.ticker.cancel()
        for queue in self.subscribers:
            _offer(queue, None)
        self.subscribers.clear()


def _session_info(sess: Session) -> dict:
    return {
        "id": sess.id,
        "dimension": sess.config.d,
        "kind": sess.config.kind,
        "partition": sess.config.partition.knots.tolist(),
        "total_length": sess.config.total_length,
        "boundary_radius": sess.boundary_radius(),
        "tick_rate": sess.tick_rate,
        "paced": sess.paced,
        "k": sess.k,
        "v_max": sess.v_max,
        "tol_singular": sess.tol_singular,
        "head": sess.head.tolist(),
        "margin": sess.margin,
        "status": sess.status,
    }


def create_app() -> FastAPI:
    sessions: dict = {}

    @asynccontextmanager
    async def lifespan(_app):
        yield
        for sess in list(sessions.values()):
            sess.close()
        sessions.clear()

    app = FastAPI(title="snakecharm live tracking", lifespan=lifespan)
    app.state.sessions = sessions

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return JSONResponse({"error": "body is not valid JSON"}, 400)
        if not isinstance(body, dict) or "scenario" not in body:
            return JSONResponse({"error": "body needs a scenario field"}, 400)
        try:
            scenario = scenario_from_dict(body["scenario"])
            tick_rate = float(body.get("tick_rate", DEFAULT_TICK_RATE))
            k = float(body.get("k", DEFAULT_GAIN))
            v_max = float(body.get("v_max", DEFAULT_VMAX))
            paced = bool(body.get("paced", True))
            if not tick_rate > 0:
                raise ScenarioError("tick_rate: must be positive")
            if not (k >= 0 and v_max > 0):
                raise ScenarioError("k must be >= 0 and v_max > 0")
        except (ScenarioError, TypeError, ValueError) as err:
            return JSONResponse({"error": str(err)}, 400)
        sid = uuid.uuid4().hex[:12]
        sess = Session(sid, scenario, tick_rate=tick_rate, k=k, v_max=v_max,
                       paced=paced)
        sessions[sid] = sess
        sess.start()
        log.info("session %s created (paced=%s, tick_rate=%g)", sid, paced,
                 tick_rate)
        return _session_info(sess)

    @app.post("/sessions/{sid}/reset")
    async def reset_session(sid: str):
        sess = sessions.get(sid)
        if sess is None:
            return JSONResponse({"error": f"unknown session {sid!r}"}, 404)
        async with sess.lock:
            sess._reset_state()
            sess.emit()
            return sess.snapshot()

    @app.delete("/sessions/{sid}")
    async def delete_session(sid: str):
        sess = sessions.pop(sid, None)
        if sess is None:
            return JSONResponse({"error": f"unknown session {sid!r}"}, 404)
        async with sess.lock:
            sess.close()
        return {"ok": True}

    @app.websocket("/sessions/{sid}/stream")
    async def stream(ws: WebSocket, sid: str):
        await ws.accept()
        send_lock = asyncio.Lock()

        async def safe_send(text: str):
            async with send_lock:
                await ws.send_text(text)

        sess = sessions.get(sid)
        if sess is None:
            await safe_send(dumps_canonical(
                {"type": "error", "error": f"unknown session {sid!r}"},
                pretty=False))
            await ws.close()
            return
        async with sess.lock:
            queue = sess.subscribe()

        async def pump():
            while True:
                item = await queue.get()
                if item is None:
                    break
                await safe_send(item)
            await ws.close()

        pump_task = asyncio.get_running_loop().create_task(pump())
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = json.loads(text)
                except json.JSONDecodeError:
                    await safe_send(dumps_canonical(
                        {"type": "error", "error": "malformed JSON",
                         "echo": text}, pretty=False))
                    continue
                if not isinstance(msg, dict):
                    await safe_send(dumps_canonical(
                        {"type": "error", "error": "expected a JSON object",
                         "echo": msg}, pretty=False))
                    continue
                async with sess.lock:
                    err = sess.handle(msg)
                if err is not None:
                    await safe_send(dumps_canonical(err, pretty=False))
        except WebSocketDisconnect:
            pass
        finally:
            pump_task.cancel()
            async with sess.lock:
                sess.unsubscribe(queue)

    return app
