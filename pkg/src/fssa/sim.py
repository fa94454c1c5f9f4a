"""Deterministic in-memory execution of one full aggregation run.

Spawns n client state machines and one server, carries every message through
the bit-exact wire encoding, injects dropouts at configured round boundaries,
records corrupted parties' received traffic, and measures per-phase time and
bytes. Identical configs (including the seed) produce byte-identical
transcripts.
"""

from __future__ import annotations

import enum
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import messages
from .errors import ClientAborted, InsufficientShares, InvalidArgument, RoundAborted
from .protocol import Client, Params, Server, plan_parameters


class DropPoint(enum.Enum):
    NEVER = "never"
    AFTER_ROUND0 = "after_round0"           # advertised a key, never uploads shares
    AFTER_ROUND1_SEND = "after_round1_send" # uploaded shares, never sees the delivery
    AFTER_ROUND1_RECEIVE = "after_round1_receive"  # got the delivery, never sends sums


@dataclass
class SimConfig:
    n: int
    m: int
    rho: float = 0.0
    gamma: float = 0.0
    B: int = 2**16
    seed: int = 0
    dropout_schedule: dict = field(default_factory=dict)  # client index -> DropPoint
    corrupted: frozenset = frozenset()
    inputs: list | None = None  # fixed input vectors keyed by order 1..n; None = random
    security_level: str = "production"
    degenerate_privacy_ok: bool = False
    per_chunk_ciphertexts: bool = False
    parallel: bool = False

    def plan(self) -> Params:
        return plan_parameters(
            self.n,
            self.m,
            B=self.B,
            rho=self.rho,
            gamma=self.gamma,
            degenerate_privacy_ok=self.degenerate_privacy_ok,
            security_level=self.security_level,
        )

    def validate(self, params: Params):
        dropping = {u for u, p in self.dropout_schedule.items() if p is not DropPoint.NEVER}
        if len(dropping) > self.n - params.t:
            raise InvalidArgument(
                f"{len(dropping)} scheduled dropouts exceed the budget {self.n - params.t}"
            )
        if len(self.corrupted) > params.t - params.d:
            raise InvalidArgument(
                f"{len(self.corrupted)} corrupted clients exceed the budget "
                f"{params.t - params.d}"
            )
        for u in list(self.dropout_schedule) + list(self.corrupted):
            if not 1 <= u <= self.n:
                raise InvalidArgument(f"client index {u} outside [1, {self.n}]")
        if self.inputs is not None:
            if len(self.inputs) != self.n or any(len(v) != self.m for v in self.inputs):
                raise InvalidArgument("fixed inputs must be n vectors of length m")


@dataclass
class SimReport:
    status: str                    # "ok" or "aggregation_failed"
    aggregate: list | None
    n: int
    m: int
    t: int
    d: int
    q: int
    chunk_count: int
    roster_sizes: dict             # {"u1": ..., "u2": ..., "u3": ...}
    expected_sum_over_u2: list | None
    client_phase_ns: dict          # u -> {"keygen": ..., "share": ..., "encrypt": ..., "sum": ...}
    server_phase_ns: dict          # {"route": ..., "reconstruct": ...}
    bytes_sent: dict               # u -> total bytes this client put on the wire
    server_bytes_sent: int
    transcript: list               # (stage, sender, recipient, payload bytes)
    corrupted_views: dict          # u -> list of payloads the corrupted client received

    def sent_counts(self) -> dict:
        out: dict = {}
        for _, sender, _, payload in self.transcript:
            if sender != "server":
                out[sender] = out.get(sender, 0) + 1
        return out

    def received_counts(self) -> dict:
        out: dict = {}
        for _, sender, recipient, payload in self.transcript:
            if recipient != "server":
                out[recipient] = out.get(recipient, 0) + 1
        return out

    def to_json(self) -> str:
        doc = {
            "status": self.status,
            "aggregate": self.aggregate,
            "n": self.n,
            "m": self.m,
            "t": self.t,
            "d": self.d,
            "q": self.q,
            "chunk_count": self.chunk_count,
            "roster_sizes": self.roster_sizes,
            "expected_sum_over_u2": self.expected_sum_over_u2,
            "client_phase_ns": {str(k): v for k, v in self.client_phase_ns.items()},
            "server_phase_ns": self.server_phase_ns,
            "bytes_sent": {str(k): v for k, v in self.bytes_sent.items()},
            "server_bytes_sent": self.server_bytes_sent,
            "transcript": [
                {"stage": st, "from": s, "to": r, "payload": p.hex()}
                for st, s, r, p in self.transcript
            ],
            "corrupted_views": {
                str(u): [p.hex() for p in views] for u, views in self.corrupted_views.items()
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def apply_dropout_schedule(schedule: dict, boundary: DropPoint, live_set: set) -> set:
    """Remove exactly the clients scheduled to drop at this boundary."""
    return {u for u in live_set if schedule.get(u, DropPoint.NEVER) is not boundary}


def collect_metrics(transcript, clients, server, extra) -> dict:
    """Assemble the measured SimReport fields from a finished (or failed) run."""
    bytes_sent: dict = {}
    server_bytes = 0
    for _, sender, _, payload in transcript:
        if sender == "server":
            server_bytes += len(payload)
        else:
            bytes_sent[sender] = bytes_sent.get(sender, 0) + len(payload)
    return {
        "client_phase_ns": {u: dict(c.phase_ns) for u, c in clients.items() if c.phase_ns},
        "server_phase_ns": dict(server.phase_ns),
        "bytes_sent": bytes_sent,
        "server_bytes_sent": server_bytes,
        **extra,
    }


def run_simulation(cfg: SimConfig) -> SimReport:
    """One deterministic aggregation run under the configured fault schedule.

    Too many dropouts is a legitimate outcome: the report comes back with
    status "aggregation_failed" rather than an exception.
    """
    params = cfg.plan()
    cfg.validate(params)
    fp = params.fp
    rng = random.Random(cfg.seed)
    np_seed_root = np.random.SeedSequence(cfg.seed)

    if cfg.inputs is not None:
        inputs = {u: list(cfg.inputs[u - 1]) for u in range(1, cfg.n + 1)}
    else:
        gen = np.random.default_rng(np_seed_root.spawn(1)[0])
        inputs = {
            u: [int(x) for x in gen.integers(0, cfg.B, size=cfg.m)]
            for u in range(1, cfg.n + 1)
        }

    clients = {u: Client(u, params) for u in range(1, cfg.n + 1)}
    server = Server(params)
    transcript: list = []
    corrupted_views: dict = {u: [] for u in cfg.corrupted}
    schedule = cfg.dropout_schedule

    def log(stage, sender, recipient, payload: bytes):
        transcript.append((stage, sender, recipient, payload))
        if recipient in corrupted_views:
            corrupted_views[recipient].append(payload)

    def fail(reason_sizes):
        extra = {
            "status": "aggregation_failed",
            "aggregate": None,
            "expected_sum_over_u2": None,
            "roster_sizes": reason_sizes,
        }
        metrics = collect_metrics(transcript, clients, server, extra)
        return SimReport(
            n=cfg.n,
            m=cfg.m,
            t=params.t,
            d=params.d,
            q=fp.q,
            chunk_count=params.chunk_count,
            transcript=transcript,
            corrupted_views=corrupted_views,
            **metrics,
        )

    live = set(clients)

    # Round 0: every live client advertises a key.
    hellos = []
    for u in sorted(live):
        wire = messages.serialize(clients[u].round0(rng), fp)
        log("round0", u, "server", wire)
        hellos.append(messages.deserialize(wire, fp))
    try:
        broadcast = server.round0(hellos)
    except RoundAborted:
        return fail({"u1": len(hellos), "u2": 0, "u3": 0})
    broadcast_wire = messages.serialize(broadcast, fp)
    for u in sorted(live):
        log("broadcast", "server", u, broadcast_wire)

    live = apply_dropout_schedule(schedule, DropPoint.AFTER_ROUND0, live)

    # Round 1: surviving clients chunk, share, and encrypt.
    np_rngs = {
        u: np.random.default_rng(s)
        for u, s in zip(sorted(clients), np_seed_root.spawn(len(clients)))
    }

    def do_round1(u):
        return clients[u].round1(
            messages.deserialize(broadcast_wire, fp),
            inputs[u],
            rng=_sub_rng(cfg.seed, u),
            np_rng=np_rngs[u],
            per_chunk=cfg.per_chunk_ciphertexts,
        )

    order = sorted(live)
    aborted = set()
    if cfg.parallel:
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(_guarded(do_round1), order))
    else:
        results = [_guarded(do_round1)(u) for u in order]
    uploads = []
    for u, res in zip(order, results):
        if isinstance(res, ClientAborted):
            aborted.add(u)
            continue
        wire = messages.serialize(res, fp)
        log("round1", u, "server", wire)
        uploads.append(messages.deserialize(wire, fp))
    live -= aborted

    try:
        deliveries = server.round1(uploads)
    except RoundAborted:
        return fail({"u1": len(server.u1), "u2": len(uploads), "u3": 0})

    live = apply_dropout_schedule(schedule, DropPoint.AFTER_ROUND1_SEND, live)

    # Round 2: deliveries go out, survivors respond with summed shares.
    sums = []
    for u in sorted(live):
        if u not in deliveries:
            continue
        wire = messages.serialize(deliveries[u], fp)
        log("delivery", "server", u, wire)
    live = apply_dropout_schedule(schedule, DropPoint.AFTER_ROUND1_RECEIVE, live)
    for u in sorted(live):
        if u not in deliveries:
            continue
        try:
            msg = clients[u].round2(
                messages.deserialize(messages.serialize(deliveries[u], fp), fp),
                per_chunk=cfg.per_chunk_ciphertexts,
            )
        except ClientAborted:
            continue
        wire = messages.serialize(msg, fp)
        log("round2", u, "server", wire)
        sums.append(messages.deserialize(wire, fp))

    try:
        aggregate = server.round2(sums)
    except (InsufficientShares, RoundAborted):
        return fail({"u1": len(server.u1), "u2": len(server.u2), "u3": len(sums)})

    if cfg.n * (cfg.B - 1) < 2**63:
        acc = np.zeros(cfg.m, dtype=np.int64)
        for u in server.u2:
            acc += np.array(inputs[u], dtype=np.int64)
        expected = [int(x) for x in acc % fp.q]
    else:
        expected = [sum(inputs[u][j] for u in server.u2) % fp.q for j in range(cfg.m)]
    extra = {
        "status": "ok",
        "aggregate": aggregate,
        "expected_sum_over_u2": expected,
        "roster_sizes": {"u1": len(server.u1), "u2": len(server.u2), "u3": len(server.u3)},
    }
    metrics = collect_metrics(transcript, clients, server, extra)
    return SimReport(
        n=cfg.n,
        m=cfg.m,
        t=params.t,
        d=params.d,
        q=fp.q,
        chunk_count=params.chunk_count,
        transcript=transcript,
        corrupted_views=corrupted_views,
        **metrics,
    )


def _guarded(fn):
    def inner(u):
        try:
            return fn(u)
        except ClientAborted as e:
            return e

    return inner


def _sub_rng(seed: int, u: int) -> random.Random:
    """Independent deterministic stream per (seed, client) for nonces."""
    return random.Random((seed << 20) ^ (u * 0x9E3779B9))


def load_sim_config(path) -> SimConfig:
    """Read a SimConfig from a YAML key-value file."""
    with open(path) as f:
        doc = yaml.safe_load(f) or {}
    schedule = {
        int(u): DropPoint(p) for u, p in (doc.get("dropout_schedule") or {}).items()
    }
    return SimConfig(
        n=int(doc["n"]),
        m=int(doc["m"]),
        rho=float(doc.get("rho", 0.0)),
        gamma=float(doc.get("gamma", 0.0)),
        B=int(doc.get("B", 2**16)),
        seed=int(doc.get("seed", 0)),
        dropout_schedule=schedule,
        corrupted=frozenset(int(u) for u in doc.get("corrupted", [])),
        inputs=doc.get("inputs"),
        security_level=doc.get("security_level", "production"),
        degenerate_privacy_ok=bool(doc.get("degenerate_privacy_ok", False)),
        per_chunk_ciphertexts=bool(doc.get("per_chunk_ciphertexts", False)),
        parallel=bool(doc.get("parallel", False)),
    )
