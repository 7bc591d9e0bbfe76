"""Control/telemetry service: the operator console's backend.

One clock-owner thread advances the engine on the wall clock and executes
every control mutation; HTTP handlers funnel their work into that thread
through a queue, so the command stream stays single-writer. Snapshot reads
are lock-free (the engine publishes immutable snapshots).

HTTP surface:
    GET  /state          latest stage snapshot
    GET  /config         active engine configuration
    POST /role           {"role": "director"|"puppeteer"|"wizard"|"hybrid"}
    POST /finger-map     {"index": 1, "middle": 2, ...}
    POST /gesture        {"kind": ..., "direction"?, "finger"?, "strength"?}
    POST /sequence/run   {"name": "lightning"} or {"cues": [...]}
WebSocket /ws/stage pushes {"type": "snapshot"|"gesture"|"command", ...}.
"""

from __future__ import annotations

import asyncio
import json
import logging
import queue
import threading
import time
from typing import Callable, Optional

from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .cues import (
    BUILTIN_SEQUENCES,
    Cue,
    CueSequence,
    InjectGesture,
    sequence_from_obj,
)
from .engine import Engine
from .errors import StagehandError
from .gestures import GestureEvent
from .roles import FingerMap, Role

log = logging.getLogger(__name__)


class EngineHost:
    """Runs the engine on a dedicated wall-clock thread and serializes all
    control access to it."""

    def __init__(self, engine: Engine):
        self.engine = engine
        engine._notify = self._fanout
        self._controls: "queue.Queue[tuple[Callable, _ResultBox]]" = queue.Queue()
        self._subscribers: list[queue.Queue] = []
        self._sub_lock = threading.Lock()
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None
        self._pending_cues: list[tuple[float, Cue]] = []

    # -- lifecycle ------------------------------------------------------------

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
        self.engine.close()

    def _run(self) -> None:
        t0 = time.monotonic()
        while not self._stop.is_set():
            try:
                fn, box = self._controls.get(timeout=0.002)
            except queue.Empty:
                fn, box = None, None
            now = time.monotonic() - t0
            self.engine.advance_to(now)
            self._dispatch_due_cues(now)
            if fn is not None:
                box.run(fn)
            self.engine.link.drain_telemetry()

    def _dispatch_due_cues(self, now: float) -> None:
        while self._pending_cues and self._pending_cues[0][0] <= now:
            _, cue = self._pending_cues.pop(0)
            self.engine.apply_cue(cue)

    # -- control funnel ---------------------------------------------------------

    def submit(self, fn: Callable[[Engine], object]):
        """Run fn on the engine thread; blocks for the result."""
        box = _ResultBox(self.engine)
        self._controls.put((fn, box))
        return box.wait()

    def schedule_sequence(self, seq: CueSequence) -> int:
        """Schedule cues relative to now on the engine clock."""

        def _schedule(engine: Engine) -> int:
            base = engine.sim_time
            for cue in seq.cues:
                self._pending_cues.append((base + cue.at, cue))
            self._pending_cues.sort(key=lambda item: item[0])
            return len(seq.cues)

        return self.submit(_schedule)

    # -- observation ------------------------------------------------------------

    def snapshot(self):
        return self.engine.latest_snapshot

    def subscribe(self, maxsize: int = 512) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=maxsize)
        with self._sub_lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._sub_lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def _fanout(self, obj: dict) -> None:
        with self._sub_lock:
            subscribers = list(self._subscribers)
        for q in subscribers:
            try:
                q.put_nowait(obj)
            except queue.Full:
                # Slow client: drop the oldest message to keep the feed live.
                try:
                    q.get_nowait()
                    q.put_nowait(obj)
                except (queue.Empty, queue.Full):
                    pass


class _ResultBox:
    def __init__(self, engine: Engine):
        self._engine = engine
        self._done = threading.Event()
        self._result = None
        self._error: Optional[BaseException] = None

    def run(self, fn) -> None:
        try:
            self._result = fn(self._engine)
        except BaseException as exc:  # surfaced to the submitter
            self._error = exc
        finally:
            self._done.set()

    def wait(self):
        self._done.wait()
        if self._error is not None:
            raise self._error
        return self._result


def _bad_request(reason: str) -> JSONResponse:
    return JSONResponse(status_code=400, content={"error": reason})


def create_app(host: EngineHost) -> FastAPI:
    app = FastAPI(title="stagehand conductor", docs_url=None, redoc_url=None)

    @app.get("/state")
    def get_state():
        return host.snapshot().to_json_obj()

    @app.get("/config")
    def get_config():
        return host.engine.config.to_json_obj()

    @app.post("/role")
    async def post_role(request: Request):
        body = await _json_body(request)
        if body is None or "role" not in body:
            return _bad_request("body must be {\"role\": ...}")
        try:
            role = Role(str(body["role"]).lower())
        except ValueError:
            return _bad_request(f"unknown role {body['role']!r}")
        try:
            host.submit(lambda e: e.set_role(role))
        except StagehandError as exc:
            return _bad_request(str(exc))
        return {"ok": True, "role": role.value}

    @app.post("/finger-map")
    async def post_finger_map(request: Request):
        body = await _json_body(request)
        if body is None or not isinstance(body, dict):
            return _bad_request("body must map finger names to robot ids")
        mapping = body.get("map", body)
        try:
            finger_map = FingerMap.from_names(mapping)
        except (StagehandError, ValueError, TypeError) as exc:
            return _bad_request(str(exc))
        host.submit(lambda e: e.set_finger_map(finger_map))
        active = host.engine.controller.role
        response = {"ok": True, "map": finger_map.to_json_obj()}
        if active not in (Role.PUPPETEER, Role.HYBRID):
            # Accepted with a warning, not rejected: the operator may be
            # staging the map before switching roles.
            response["warning"] = (
                "finger map set while role is "
                f"{active.value if active else 'unset'}")
        return response

    @app.post("/gesture")
    async def post_gesture(request: Request):
        body = await _json_body(request)
        if body is None or "kind" not in body:
            return _bad_request("body must be a gesture object with 'kind'")
        try:
            obj = dict(body)
            obj.setdefault("t", 0.0)
            obj.setdefault("strength", 1.0)
            event = GestureEvent.from_json_obj(obj)
            inject = InjectGesture(kind=event.kind, direction=event.direction,
                                   finger=event.finger,
                                   strength=event.strength)
        except (KeyError, ValueError, TypeError) as exc:
            return _bad_request(f"bad gesture: {exc}")
        host.submit(lambda e: e.inject_gesture(inject))
        return {"ok": True, "kind": inject.kind.value}

    @app.post("/sequence/run")
    async def post_sequence(request: Request):
        body = await _json_body(request)
        if body is None:
            return _bad_request("body must name a sequence or carry cues")
        try:
            if "name" in body:
                name = str(body["name"])
                if name not in BUILTIN_SEQUENCES:
                    return _bad_request(
                        f"unknown sequence {name!r}; "
                        f"built-ins: {sorted(BUILTIN_SEQUENCES)}")
                seq = BUILTIN_SEQUENCES[name]()
            elif "cues" in body:
                seq = sequence_from_obj({"name": body.get("name", "adhoc"),
                                         "cues": body["cues"]})
            else:
                return _bad_request("body must carry 'name' or 'cues'")
        except StagehandError as exc:
            return _bad_request(str(exc))
        count = host.schedule_sequence(seq)
        return {"ok": True, "scheduled": count, "name": seq.name}

    @app.websocket("/ws/stage")
    async def ws_stage(ws: WebSocket):
        await ws.accept()
        q = host.subscribe()
        try:
            while True:
                try:
                    msg = q.get_nowait()
                except queue.Empty:
                    await asyncio.sleep(0.005)
                    continue
                await ws.send_text(json.dumps(msg, separators=(",", ":")))
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            host.unsubscribe(q)

    return app


async def _json_body(request: Request) -> Optional[dict]:
    try:
        body = await request.json()
    except Exception:
        return None
    return body if isinstance(body, dict) else None


def serve_api(app: FastAPI, port: int, host: str = "127.0.0.1"):
    """Run uvicorn in a daemon thread; returns (server, thread)."""
    import uvicorn

    config = uvicorn.Config(app, host=host, port=port, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10.0
    while not server.started and time.monotonic() < deadline:
        time.sleep(0.02)
    return server, thread
