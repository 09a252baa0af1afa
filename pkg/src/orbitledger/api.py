"""Embedded HTTP control service exposing one live, steppable simulation.

A single simulation instance per process; commands serialize through a
lock so every read happens at an event-loop quiescence point.  Push
updates go out on /v1/events as server-sent events; polling the other
endpoints is always sufficient.
"""

from __future__ import annotations

import json
import queue
import random
import threading
import time
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from .contracts import InvocationError
from .scenario import ScenarioConfig
from .simulation import Simulation
from .topology import GridCoord


def demo_config() -> ScenarioConfig:
    """The interactive demo constellation: 28x4 grid, 6-wide service area."""
    return ScenarioConfig(
        planes=4, slots_per_plane=28,
        plane_start=0, plane_end=3, slot_width=6,
        leader_row_plane=1, seed=7, cycles=0,
    )


class Session:
    """One simulation plus control state; commands are serialized."""

    def __init__(self, cfg: ScenarioConfig | None = None) -> None:
        self.cfg = cfg or demo_config()
        self.sim = Simulation(self.cfg.sim_config())
        self.lock = threading.Lock()
        self.mode = "paused"
        self.interval = 10.0
        self.rng = random.Random(self.cfg.seed ^ 0x5EED)
        self._tx_counter = 0
        self._subscribers: list[queue.Queue] = []
        self._auto_thread: threading.Thread | None = None

    # -- events ----------------------------------------------------------

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=256)
        self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        if q in self._subscribers:
            self._subscribers.remove(q)

    def publish(self, event: str, data: dict) -> None:
        for q in list(self._subscribers):
            try:
                q.put_nowait((event, data))
            except queue.Full:
                pass  # slow consumer: it can re-sync by polling

    # -- commands ----------------------------------------------------------

    def next_tx_id(self) -> str:
        self._tx_counter += 1
        return f"api-{self._tx_counter:04d}"

    def default_submitter(self) -> GridCoord:
        outside = sorted(set(self.sim.topo.coords()) - self.sim.window.members)
        return self.rng.choice(outside) if outside else min(self.sim.window.members)

    def step(self) -> int:
        self.sim.advance_period()
        self.sim.check_convergence()
        self.publish("period", {"period": self.sim.period})
        return self.sim.period

    def submit(self, contract: str, op: str, args: dict, submitter: GridCoord) -> str:
        tx_id = self.next_tx_id()
        self.sim.submit(submitter, [{
            "tx_id": tx_id,
            "invocation": {"contract": contract, "op": op, "args": args},
        }])
        info = self.sim.query_tx(tx_id)
        if info["status"] == "committed":
            self.publish("tx_committed", {"tx_id": tx_id, "height": info.get("height")})
        return tx_id

    def _auto_loop(self) -> None:
        while self.mode == "auto":
            time.sleep(self.interval)
            if self.mode != "auto":
                break
            with self.lock:
                if self.mode == "auto":
                    self.step()

    def set_mode(self, mode: str, interval: float | None = None) -> None:
        if interval is not None:
            self.interval = float(interval)
        self.mode = mode
        if mode == "auto" and (self._auto_thread is None or not self._auto_thread.is_alive()):
            self._auto_thread = threading.Thread(target=self._auto_loop, daemon=True)
            self._auto_thread.start()


def create_app(cfg: ScenarioConfig | None = None, ui_dir: Path | None = None) -> FastAPI:
    session = Session(cfg)
    app = FastAPI(title="orbitledger control api", version="1")
    app.state.session = session
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=r"https?://(localhost|127\.0\.0\.1)(:\d+)?",
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def stamped(data: dict, status_code: int = 200) -> JSONResponse:
        return JSONResponse(
            {"seed": session.cfg.seed, "period": session.sim.period, **data},
            status_code=status_code,
        )

    @app.get("/v1/grid")
    def get_grid() -> Response:
        if not session.lock.acquire(blocking=False):
            raise HTTPException(status_code=503, detail="step in progress")
        try:
            cells = session.sim.grid_snapshot()
            leader = session.sim.leader
            return stamped({
                "grid": {
                    "planes": session.sim.topo.planes,
                    "slots_per_plane": session.sim.topo.slots_per_plane,
                },
                "leader": leader.as_list() if leader else None,
                "leader_row_plane": session.cfg.leader_row_plane,
                "sa_size": len(session.sim.window.members),
                "nodes": cells,
            })
        finally:
            session.lock.release()

    @app.post("/v1/step")
    def post_step() -> Response:
        if session.mode != "paused":
            raise HTTPException(status_code=409, detail="auto-advance enabled; pause first")
        with session.lock:
            period = session.step()
        return stamped({"stepped_to": period})

    @app.post("/v1/mode")
    def post_mode(body: dict = Body(...)) -> Response:
        mode = body.get("mode")
        if mode not in ("paused", "auto"):
            raise HTTPException(status_code=400, detail="mode must be paused|auto")
        interval = body.get("interval_seconds")
        if interval is not None and (not isinstance(interval, (int, float)) or interval <= 0):
            raise HTTPException(status_code=400, detail="interval_seconds must be > 0")
        with session.lock:
            session.set_mode(mode, interval)
        return stamped({"mode": session.mode, "interval_seconds": session.interval})

    @app.post("/v1/transactions")
    def post_transaction(body: dict = Body(...)) -> Response:
        errors = {}
        contract = body.get("contract")
        op = body.get("op")
        args = body.get("args", {})
        if not isinstance(contract, str) or not contract:
            errors["contract"] = "required string"
        if not isinstance(op, str) or not op:
            errors["op"] = "required string"
        if not isinstance(args, dict):
            errors["args"] = "must be an object"
        submitter_raw = body.get("submitter")
        submitter = None
        if submitter_raw is not None:
            if (not isinstance(submitter_raw, list) or len(submitter_raw) != 2
                    or not all(isinstance(v, int) for v in submitter_raw)):
                errors["submitter"] = "must be [plane, slot]"
            else:
                submitter = GridCoord(*submitter_raw)
                if not session.sim.topo.contains(submitter):
                    errors["submitter"] = "outside the grid"
        if errors:
            raise HTTPException(status_code=400, detail=errors)
        with session.lock:
            if submitter is None:
                submitter = session.default_submitter()
            try:
                tx_id = session.submit(contract, op, args, submitter)
            except InvocationError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            info = session.sim.query_tx(tx_id)
        if info["status"] == "rejected":
            return stamped({"tx_id": tx_id, "status": info["status"],
                            "reason": info.get("reason")}, status_code=422)
        return stamped({"tx_id": tx_id, "status": info["status"],
                        "submitter": submitter.as_list()}, status_code=201)

    @app.get("/v1/transactions/{tx_id}")
    def get_transaction(tx_id: str) -> Response:
        with session.lock:
            info = session.sim.query_tx(tx_id)
        return stamped({"tx_id": tx_id, **info})

    @app.get("/v1/state/{key}")
    def get_state(key: str, r: int = 1) -> Response:
        with session.lock:
            sa_size = len(session.sim.window.members)
            if not 1 <= r <= sa_size:
                raise HTTPException(status_code=400, detail=f"r must be in [1,{sa_size}]")
            found = session.sim.quorum_read(key, r)
        if found is None:
            raise HTTPException(status_code=404, detail=f"key {key!r} unknown at all {r} replicas")
        value, version = found
        return stamped({"key": key, "value": value, "version": version, "r": r})

    @app.get("/v1/metrics")
    def get_metrics() -> Response:
        with session.lock:
            snapshot = session.sim.metrics.snapshot()
            from .metrics import summary_dict

            data = summary_dict(snapshot, seed=session.cfg.seed)
        return stamped(data)

    @app.get("/v1/events")
    def get_events() -> StreamingResponse:
        q = session.subscribe()

        def stream():
            try:
                yield _sse("hello", {"seed": session.cfg.seed, "period": session.sim.period})
                while True:
                    try:
                        event, data = q.get(timeout=15.0)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield _sse(event, data)
            finally:
                session.unsubscribe(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


def _sse(event: str, data: dict) -> str:
    return f"event: {event}\ndata: {json.dumps(data)}\n\n"


def serve(cfg: ScenarioConfig | None, host: str, port: int, ui_dir: Path | None = None) -> None:
    import uvicorn

    if ui_dir is None:
        default_ui = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        if default_ui.is_dir():
            ui_dir = default_ui
    app = create_app(cfg, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
