"""Live-session service hosting the detector for remote participants.

Wire protocol: newline-delimited JSON over a persistent TCP connection.
Client messages: create_session, resume_session, event, finish.  Server
messages: session_created, session_resumed, state, check_result, ack,
finished, error.  Check results carry only the observation — ground truth is
revealed only by "finish".

Sessions are event-sourced: the growing trace is the source of truth and the
environment state is derived by replay, so a dropped connection loses
nothing; a session stays resumable by id until its cap expires.  Finished
sessions are appended to a JSON Lines file, one record per session.
"""

from __future__ import annotations

import asyncio
import itertools
import json
import random
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .core import (
    CausalStructure,
    OverhypothesisKind,
    object_index,
    parse_structure,
)
from .demos import scripts_for_condition
from .env import EnvState, Observation, check, place, remove, reset, step
from .traces import Condition, SessionTrace, TraceEvent, trace_to_dict

DEFAULT_SESSION_CAP_S = 600.0  # sessions auto-finish after ten minutes


class ProtocolError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def sample_truth(kind: OverhypothesisKind, n_objects: int, seed: int) -> CausalStructure:
    """Seeded draw of a two-blicket structure of the given kind; which two
    objects are the blickets is what the seed randomizes."""
    rng = random.Random(seed)
    pairs = list(itertools.combinations(range(n_objects), 2))
    return CausalStructure(kind, frozenset(rng.choice(pairs)))


@dataclass
class Session:
    session_id: str
    trace: SessionTrace
    n_objects: int
    started_at: float  # service clock, seconds
    cap_s: float
    state: EnvState = None
    finished: bool = False
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)

    def __post_init__(self) -> None:
        if self.state is None:
            self.state = reset(self.trace.ground_truth)

    def elapsed_ms(self, now: float) -> int:
        return int(round((now - self.started_at) * 1000))

    def public_state(self) -> dict:
        return self.state.serialize()


class SessionService:
    """All protocol logic, independent of any transport.

    ``handle_message`` maps one client message to one reply dict, so tests
    can drive it directly; the TCP layer just frames NDJSON around it.
    """

    def __init__(
        self,
        trace_path: str | Path,
        n_objects: int = 3,
        session_cap_s: float = DEFAULT_SESSION_CAP_S,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.trace_path = Path(trace_path)
        self.n_objects = n_objects
        self.session_cap_s = session_cap_s
        self.clock = clock
        self.sessions: dict[str, Session] = {}
        self._write_lock = asyncio.Lock()

    # -- message handling --------------------------------------------------

    async def handle_message(self, msg: dict) -> dict:
        try:
            if not isinstance(msg, dict) or "type" not in msg:
                raise ProtocolError("malformed", "message must be an object with a type")
            kind = msg["type"]
            if kind == "create_session":
                return await self._create(msg)
            if kind == "resume_session":
                return await self._resume(msg)
            if kind == "event":
                return await self._event(msg)
            if kind == "finish":
                return await self._finish(msg)
            raise ProtocolError("unknown_type", f"unknown message type: {kind!r}")
        except ProtocolError as exc:
            return {"type": "error", "code": exc.code, "message": str(exc)}

    async def _create(self, msg: dict) -> dict:
        try:
            cond = Condition(
                OverhypothesisKind(msg["condition"]["kind"]),
                bool(msg["condition"]["given"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError("bad_condition", f"invalid condition: {exc}")
        truth_spec = msg.get("ground_truth", "sample")
        if truth_spec == "sample":
            truth = sample_truth(cond.structure_kind, self.n_objects, int(msg.get("seed", 0)))
        else:
            truth = parse_structure(truth_spec)
            if truth.kind != cond.structure_kind:
                raise ProtocolError(
                    "bad_truth", "ground truth kind must match the condition"
                )
        session_id = msg.get("session_id") or uuid.uuid4().hex
        if session_id in self.sessions:
            raise ProtocolError("duplicate_session", f"session {session_id} exists")
        trace = SessionTrace(session_id=session_id, condition=cond, ground_truth=truth)
        sess = Session(
            session_id=session_id,
            trace=trace,
            n_objects=self.n_objects,
            started_at=self.clock(),
            cap_s=float(msg.get("session_cap_s", self.session_cap_s)),
        )
        self.sessions[session_id] = sess
        return {
            "type": "session_created",
            "session_id": session_id,
            "condition": {"kind": cond.structure_kind.value, "given": cond.hypothesis_given},
            "demos": [s.serialize() for s in scripts_for_condition(cond.hypothesis_given)],
            "state": sess.public_state(),
            "session_cap_s": sess.cap_s,
        }

    def _get(self, msg: dict) -> Session:
        sid = msg.get("session_id")
        sess = self.sessions.get(sid)
        if sess is None:
            raise ProtocolError("no_such_session", f"unknown session: {sid!r}")
        return sess

    async def _resume(self, msg: dict) -> dict:
        sess = self._get(msg)
        if sess.finished:
            raise ProtocolError("finished", "session already finished")
        return {
            "type": "session_resumed",
            "session_id": sess.session_id,
            "state": sess.public_state(),
            "events": len(sess.trace.events),
        }

    async def _event(self, msg: dict) -> dict:
        sess = self._get(msg)
        async with sess.lock:
            if sess.finished:
                raise ProtocolError("finished", "session already finished")
            now = self.clock()
            if now - sess.started_at > sess.cap_s:
                await self._complete(sess, msg.get("answers"))
                return {"type": "finished", "session_id": sess.session_id,
                        "reason": "session_cap"}
            t_ms = sess.elapsed_ms(now)
            ev = msg.get("event")
            if not isinstance(ev, dict) or "kind" not in ev:
                raise ProtocolError("malformed", "event must be an object with a kind")
            kind = ev["kind"]
            if kind in (TraceEvent.PLACE, TraceEvent.REMOVE):
                try:
                    obj = object_index(ev["object"])
                except (KeyError, ValueError) as exc:
                    raise ProtocolError("bad_object", str(exc))
                if not 0 <= obj < self.n_objects:
                    raise ProtocolError("bad_object", f"no such object: {ev['object']}")
                action = place(obj) if kind == TraceEvent.PLACE else remove(obj)
                sess.state, _ = step(sess.state, action)
                sess.trace.events.append(TraceEvent(t_ms, kind, obj=obj))
                return {"type": "state", "session_id": sess.session_id,
                        "state": sess.public_state()}
            if kind == TraceEvent.CHECK:
                sess.state, obs = step(sess.state, check())
                sess.trace.events.append(TraceEvent(t_ms, kind, outcome=obs))
                return {"type": "check_result", "session_id": sess.session_id,
                        "outcome": obs.value, "state": sess.public_state()}
            if kind in (TraceEvent.DEMO, TraceEvent.QUESTION, TraceEvent.ANSWER):
                sess.trace.events.append(
                    TraceEvent(t_ms, kind, ref_id=ev.get("id"), payload=ev.get("payload"))
                )
                return {"type": "ack", "session_id": sess.session_id}
            raise ProtocolError("bad_event", f"unknown event kind: {kind!r}")

    async def _finish(self, msg: dict) -> dict:
        sess = self._get(msg)
        async with sess.lock:
            if sess.finished:
                raise ProtocolError("finished", "session already finished")
            await self._complete(sess, msg.get("answers"))
        return {
            "type": "finished",
            "session_id": sess.session_id,
            "ground_truth": sess.trace.ground_truth.name,
        }

    async def _complete(self, sess: Session, answers: dict | None) -> None:
        if answers:
            if "blickets" in answers:
                sess.trace.blicket_judgments = {
                    object_index(k): bool(v) for k, v in answers["blickets"].items()
                }
            if "final_combo" in answers:
                sess.trace.final_combination = frozenset(
                    object_index(k) for k in answers["final_combo"]
                )
            if "free_text" in answers:
                sess.trace.free_answer = str(answers["free_text"])
        sess.finished = True
        record = json.dumps(trace_to_dict(sess.trace)) + "\n"
        async with self._write_lock:
            self.trace_path.parent.mkdir(parents=True, exist_ok=True)
            # single append+flush keeps each record atomic on a local file
            with open(self.trace_path, "a", encoding="utf-8") as f:
                f.write(record)
                f.flush()

    def expire_stale(self) -> list[str]:
        """Ids of unfinished sessions past their cap (service housekeeping)."""
        now = self.clock()
        return [
            s.session_id
            for s in self.sessions.values()
            if not s.finished and now - s.started_at > s.cap_s
        ]

    # -- TCP transport -----------------------------------------------------

    async def handle_connection(
        self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                try:
                    msg = json.loads(line)
                except json.JSONDecodeError:
                    reply = {"type": "error", "code": "malformed",
                             "message": "invalid JSON"}
                else:
                    reply = await self.handle_message(msg)
                writer.write(json.dumps(reply).encode() + b"\n")
                await writer.drain()
        finally:
            writer.close()

    async def serve_tcp(self, host: str = "127.0.0.1", port: int = 8765):
        return await asyncio.start_server(self.handle_connection, host, port)


def build_http_app(service: SessionService):
    """Read-only HTTP companion: health check and trace download."""
    from fastapi import FastAPI
    from fastapi.responses import PlainTextResponse

    app = FastAPI(title="blicket-service")

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "active_sessions": sum(
                1 for s in service.sessions.values() if not s.finished
            ),
        }

    @app.get("/traces", response_class=PlainTextResponse)
    def traces():
        if not service.trace_path.exists():
            return ""
        return service.trace_path.read_text(encoding="utf-8")

    return app


async def run_service(
    trace_path: str | Path,
    tcp_port: int,
    http_port: int | None = None,
    session_cap_s: float = DEFAULT_SESSION_CAP_S,
) -> None:
    """Run the TCP service (and optional HTTP companion) until cancelled."""
    service = SessionService(trace_path, session_cap_s=session_cap_s)
    server = await service.serve_tcp(port=tcp_port)
    tasks = [server.serve_forever()]
    if http_port is not None:
        import uvicorn

        config = uvicorn.Config(
            build_http_app(service), host="127.0.0.1", port=http_port, log_level="warning"
        )
        tasks.append(uvicorn.Server(config).serve())
    await asyncio.gather(*tasks)
