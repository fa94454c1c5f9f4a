"""Client and server state machines for the 3-round aggregation protocol.

Round 0: every client advertises a fresh public key; the server broadcasts
the roster. Round 1: every client splits its input into length-d chunks,
ramp-shares each chunk to the roster, and uploads one authenticated
ciphertext per peer holding all of that peer's chunk shares; the server
routes them. Round 2: every client sums its own and the decrypted shares
per chunk and sends the sums; the server reconstructs each chunk and
concatenates the results.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass

import numpy as np

from .aead import AeCiphertext, ae_dec, ae_enc
from .errors import (
    ClientAborted,
    InsufficientShares,
    InvalidArgument,
    ProtocolOrderViolation,
    Rejected,
    RoundAborted,
)
from .field import FieldParams, build_recon_matrix, find_field_modulus, poly_eval_batch
from .keyagree import GroupParams, ka_agree, ka_gen, ka_setup
from .messages import (
    ClientHello,
    KeyBroadcast,
    ShareDelivery,
    ShareUpload,
    SumShares,
    decode_share_plaintext,
    encode_share_plaintext,
)
from .ramp import RampParams, rss_share_batch

_EPS = 1e-9


@dataclass(frozen=True)
class Params:
    """Public protocol parameters shared by every party."""

    n: int
    t: int
    d: int
    B: int
    m: int
    chunk_count: int
    fp: FieldParams
    gp: GroupParams
    security_level: str = "production"

    def __post_init__(self):
        if not 0 < self.d <= self.t <= self.n:
            raise InvalidArgument("need 0 < d <= t <= n")
        if self.n * (self.B - 1) + 1 > self.fp.q:
            raise InvalidArgument("modulus too small: sums could wrap")
        if self.chunk_count != math.ceil(self.m / self.d):
            raise InvalidArgument("chunk_count inconsistent with m and d")

    def ramp(self) -> RampParams:
        return RampParams(
            t=self.t, d=self.d, n=self.n, fp=self.fp, allow_degenerate=self.d == self.t
        )


def plan_parameters(
    n: int,
    m: int,
    B: int = 2**16,
    rho: float = 0.0,
    gamma: float = 0.0,
    degenerate_privacy_ok: bool = False,
    security_level: str = "production",
    q: int | None = None,
) -> Params:
    """Derive (t, d, q) from the dropout rate rho and corruption rate gamma.

    t = n - floor(rho*n) so up to floor(rho*n) dropouts are tolerated;
    d = t - ceil(gamma*n) so ceil(gamma*n) colluders see at most t-d shares.
    d is clamped to t-1 unless degenerate_privacy_ok, since d = t leaves no
    random coefficients at all.
    """
    if n < 2 or m < 1:
        raise InvalidArgument("need n >= 2 and m >= 1")
    if not (0 <= rho < 1 and 0 <= gamma < 1 and rho + gamma < 1):
        raise InvalidArgument("rates must satisfy 0 <= rho, gamma and rho + gamma < 1")
    t = n - math.floor(rho * n + _EPS)
    d = t - math.ceil(gamma * n - _EPS)
    if not degenerate_privacy_ok:
        d = min(d, t - 1)
    else:
        d = min(d, t)
    if d <= 0:
        raise InvalidArgument("rates too aggressive: secret length would be zero")
    if q is None:
        fp = find_field_modulus(n, B)
    else:
        fp = FieldParams(q)
        if fp.q < n * (B - 1) + 1:
            raise InvalidArgument("supplied modulus violates the no-wraparound bound")
    return Params(
        n=n,
        t=t,
        d=d,
        B=B,
        m=m,
        chunk_count=math.ceil(m / d),
        fp=fp,
        gp=ka_setup(security_level),
        security_level=security_level,
    )


def chunk_vector(x, d: int, B: int) -> list[list[int]]:
    """Split an input vector into ceil(m/d) chunks, zero-padding the last one."""
    if d < 1:
        raise InvalidArgument("chunk length must be positive")
    if len(x) < 1:
        raise InvalidArgument("empty input vector")
    for e in x:
        if not 0 <= e < B:
            raise InvalidArgument(f"entry {e} outside [0, {B})")
    padded = list(x) + [0] * (-len(x) % d)
    return [padded[i : i + d] for i in range(0, len(padded), d)]


def _mod_matmul(a: np.ndarray, b: np.ndarray, q: int, a_f64=None) -> np.ndarray:
    """(a @ b) % q for int64 matrices of reduced elements.

    When the magnitudes allow it, split b into high and low halves so both
    partial products fit exactly in float64 and run through one BLAS matmul;
    otherwise fall back to the integer matmul. Callers guarantee the int64
    bound t * (q-1)^2 < 2^63. `a_f64` optionally supplies a precomputed
    float copy of `a`.
    """
    t = a.shape[1]
    if t * q * q <= 2**55 - 4 * q:
        # Balanced residues keep |dot| <= t*(q/2)^2 <= 2^53 - q, exact in
        # float64.
        af = a_f64 if a_f64 is not None else _balanced_f64(a, q)
        qf = float(q)
        out = np.empty((a.shape[0], b.shape[1]), dtype=np.int64)
        # Tile over columns so the per-block working set stays cache-resident
        # no matter how wide b is.
        block = max(1, 4096 // max(t, 1))
        for lo in range(0, b.shape[1], block):
            bf = b[:, lo : lo + block].astype(np.float64)
            bf -= (bf > q / 2) * qf
            c = af @ bf
            # Reduce mod q in float: the computed floor(c/q) is off by at
            # most 1 (|c/q| * 2^-51 < 1 under the guard), and every
            # intermediate is an integer of magnitude <= |c| + q <= 2^53,
            # hence exact; the two fixups catch the off-by-one cases.
            c -= np.floor(c * (1.0 / qf)) * qf
            c[c < 0] += qf
            c[c >= qf] -= qf
            out[:, lo : lo + block] = c
        return out
    qb = (q - 1).bit_length()
    lt = max(t, 1).bit_length()
    # Exactness bounds for the split at bit k: every float dot product must
    # stay below 2^52, so qb + k + lt <= 52 (low half) and
    # 2*qb - k + lt <= 52 (high half). The balanced `a` only tightens these.
    k_min = max(1, 2 * qb + lt - 52)
    k_max = 52 - qb - lt
    if k_min <= k_max:
        af = a_f64 if a_f64 is not None else _balanced_f64(a, q)
        k = min(max(qb // 2, k_min), k_max)
        halves = np.concatenate([b & ((1 << k) - 1), b >> k], axis=1)
        parts = (af @ halves.astype(np.float64)).astype(np.int64)
        cols = b.shape[1]
        return ((parts[:, cols:] % q) * (1 << k) + parts[:, :cols]) % q
    return (a @ b) % q


def _balanced_f64(a: np.ndarray, q: int) -> np.ndarray:
    """Float copy with residues mapped to (-q/2, q/2]."""
    af = a.astype(np.float64)
    af -= (af > q / 2) * float(q)
    return af


class Round(enum.Enum):
    FRESH = "fresh"
    ADVERTISED = "advertised"
    SHARED = "shared"
    DONE = "done"
    ABORTED = "aborted"


class Client:
    """One client's sequential state machine.

    Rounds must be driven in order; a failed protocol check moves the state
    to ABORTED and raises ClientAborted. `phase_ns` records wall time spent
    in each computational phase for the measurement harness.
    """

    def __init__(self, u: int, params: Params):
        if not 1 <= u <= params.n:
            raise InvalidArgument(f"client index {u} outside [1, {params.n}]")
        self.u = u
        self.params = params
        self.round = Round.FRESH
        self.keypair = None
        self.roster = {}          # u -> public key bytes, from the broadcast
        self.pair_keys = {}       # v -> 32-byte symmetric key
        self.own_shares = None    # this client's own shares, one per chunk
        self.received_shares = {} # sender v -> list of chunk shares
        self.phase_ns = {}

    def _abort(self, why: str):
        self.round = Round.ABORTED
        raise ClientAborted(f"client {self.u}: {why}")

    def round0(self, rng=None) -> ClientHello:
        if self.round is not Round.FRESH:
            raise ProtocolOrderViolation(f"round0 called in state {self.round}")
        t0 = time.perf_counter_ns()
        self.keypair = ka_gen(self.params.gp, rng)
        self.phase_ns["keygen"] = time.perf_counter_ns() - t0
        self.round = Round.ADVERTISED
        return ClientHello(u=self.u, public_key=self.keypair.public)

    def round1(
        self,
        broadcast: KeyBroadcast,
        x,
        rng=None,
        np_rng=None,
        coeffs=None,
        per_chunk: bool = False,
    ) -> ShareUpload:
        """Share the input vector to the Round-0 roster.

        `coeffs` (one list of t-d values per chunk) pins the random
        coefficients for deterministic tests. `per_chunk` switches to one
        inner ciphertext per chunk instead of one batched ciphertext per
        recipient.
        """
        if self.round is not Round.ADVERTISED:
            raise ProtocolOrderViolation(f"round1 called in state {self.round}")
        p = self.params
        roster = dict(broadcast.keys)
        if len(roster) < p.t:
            self._abort(f"roster size {len(roster)} below threshold {p.t}")
        if len({pk for pk in roster.values()}) != len(roster):
            self._abort("duplicate public keys in broadcast")
        if roster.get(self.u) != self.keypair.public:
            self._abort("own public key missing or mismatched in broadcast")
        if len(x) != p.m:
            raise InvalidArgument(f"input vector length {len(x)} != m = {p.m}")
        self.roster = roster
        points = sorted(roster)

        t0 = time.perf_counter_ns()
        chunks = chunk_vector(x, p.d, p.B)
        rp = p.ramp()
        if coeffs is not None:
            if len(coeffs) != p.chunk_count or any(len(c) != p.t - p.d for c in coeffs):
                raise InvalidArgument("need t-d explicit coefficients for every chunk")
            coeff_matrix = np.array(
                [list(c) + list(h) for c, h in zip(chunks, coeffs)], dtype=np.int64
            ) % p.fp.q
            share_matrix = poly_eval_batch(
                coeff_matrix, np.array(points, dtype=np.int64) % p.fp.q, p.fp
            )
        else:
            if np_rng is None:
                seed = rng.getrandbits(64) if rng is not None else None
                np_rng = np.random.default_rng(seed)
            share_matrix = rss_share_batch(rp, np.array(chunks), points, np_rng)
        self.phase_ns["share"] = time.perf_counter_ns() - t0

        col = {v: i for i, v in enumerate(points)}
        self.own_shares = [int(s) for s in share_matrix[:, col[self.u]]]

        t0 = time.perf_counter_ns()
        for v in points:
            if v != self.u:
                self.pair_keys[v] = ka_agree(self.keypair, roster[v], p.gp)
        self.phase_ns["agree"] = time.perf_counter_ns() - t0

        t0 = time.perf_counter_ns()
        cts = []
        for v in points:
            if v == self.u:
                continue
            key = self.pair_keys[v]
            v_shares = share_matrix[:, col[v]]
            if per_chunk:
                blob = bytearray()
                for s in v_shares:
                    pt = encode_share_plaintext(self.u, v, [int(s)], p.fp)
                    inner = ae_enc(key, pt, rng).to_bytes()
                    blob += len(inner).to_bytes(4, "little") + inner
                cts.append((v, bytes(blob)))
            else:
                pt = encode_share_plaintext(self.u, v, v_shares, p.fp)
                cts.append((v, ae_enc(key, pt, rng).to_bytes()))
        self.phase_ns["encrypt"] = time.perf_counter_ns() - t0

        self.round = Round.SHARED
        return ShareUpload(u=self.u, ciphertexts=tuple(cts))

    def round2(self, delivery: ShareDelivery, per_chunk: bool = False) -> SumShares:
        """Decrypt peers' shares, verify the identity headers, and sum per chunk."""
        if self.round is not Round.SHARED:
            raise ProtocolOrderViolation(f"round2 called in state {self.round}")
        p = self.params
        senders = [v for v, _ in delivery.ciphertexts]
        u2 = set(senders) | {self.u}
        if len(u2) < p.t:
            self._abort(f"|U2| = {len(u2)} below threshold {p.t}")

        t0 = time.perf_counter_ns()
        sums = np.array(self.own_shares, dtype=np.int64)
        for v, ct_bytes in delivery.ciphertexts:
            if v == self.u or v not in self.roster:
                self._abort(f"delivery names unexpected sender {v}")
            key = self.pair_keys.get(v) or ka_agree(self.keypair, self.roster[v], p.gp)
            try:
                if per_chunk:
                    shares = []
                    pos = 0
                    for _ in range(p.chunk_count):
                        ln = int.from_bytes(ct_bytes[pos : pos + 4], "little")
                        pos += 4
                        pt = ae_dec(key, AeCiphertext.from_bytes(ct_bytes[pos : pos + ln]))
                        pos += ln
                        su, sv, chunk = decode_share_plaintext(pt, p.fp)
                        if su != v or sv != self.u:
                            self._abort(f"identity header mismatch from {v}")
                        shares.extend(chunk)
                else:
                    pt = ae_dec(key, AeCiphertext.from_bytes(ct_bytes))
                    su, sv, shares = decode_share_plaintext(pt, p.fp)
                    if su != v or sv != self.u:
                        self._abort(f"identity header mismatch from {v}")
            except Rejected:
                self._abort(f"ciphertext from {v} failed authentication")
            except InvalidArgument as e:
                self._abort(f"malformed share payload from {v}: {e}")
            if len(shares) != p.chunk_count:
                self._abort(f"wrong share count from {v}")
            self.received_shares[v] = shares
            sums = (sums + np.array(shares, dtype=np.int64)) % p.fp.q
        self.phase_ns["sum"] = time.perf_counter_ns() - t0

        self.round = Round.DONE
        return SumShares(u=self.u, sums=tuple(int(s) for s in sums))


class Server:
    """The aggregation server: collects, routes, and reconstructs."""

    def __init__(self, params: Params):
        self.params = params
        self.round = 0
        self.u1: tuple = ()
        self.u2: tuple = ()
        self.u3: tuple = ()
        self.public_keys = {}
        self.uploads = {}
        self._matrix_cache = {}
        self.phase_ns = {}

    def round0(self, hellos) -> KeyBroadcast:
        if self.round != 0:
            raise ProtocolOrderViolation("round0 already closed")
        p = self.params
        indices = [h.u for h in hellos]
        if len(set(indices)) != len(indices):
            raise InvalidArgument("duplicate client index in Round 0")
        for h in hellos:
            if not 1 <= h.u <= p.n:
                raise InvalidArgument(f"unknown client index {h.u}")
        if len(indices) < p.t:
            raise RoundAborted(f"only {len(indices)} keys collected, need {p.t}")
        self.u1 = tuple(sorted(indices))
        self.public_keys = {h.u: h.public_key for h in hellos}
        self.round = 1
        return KeyBroadcast(keys=tuple((u, self.public_keys[u]) for u in self.u1))

    def round1(self, uploads) -> dict:
        if self.round != 1:
            raise ProtocolOrderViolation("round1 out of order")
        p = self.params
        t0 = time.perf_counter_ns()
        senders = [up.u for up in uploads]
        if len(set(senders)) != len(senders):
            raise InvalidArgument("duplicate upload in Round 1")
        u1set = set(self.u1)
        for up in uploads:
            if up.u not in u1set:
                raise InvalidArgument(f"upload from client {up.u} outside the roster")
            for v, _ in up.ciphertexts:
                if v not in u1set or v == up.u:
                    raise InvalidArgument(f"ciphertext addressed to unknown recipient {v}")
        if len(senders) < p.t:
            raise RoundAborted(f"only {len(senders)} uploads collected, need {p.t}")
        self.u2 = tuple(sorted(senders))
        self.uploads = {up.u: dict(up.ciphertexts) for up in uploads}
        deliveries = {}
        for u in self.u2:
            entries = []
            for v in self.u2:
                if v == u:
                    continue
                if u not in self.uploads[v]:
                    raise InvalidArgument(f"client {v} sent no ciphertext for {u}")
                entries.append((v, self.uploads[v][u]))
            deliveries[u] = ShareDelivery(ciphertexts=tuple(entries))
        self.phase_ns["route"] = time.perf_counter_ns() - t0
        self.round = 2
        return deliveries

    def round2(self, sums) -> list[int]:
        if self.round != 2:
            raise ProtocolOrderViolation("round2 out of order")
        p = self.params
        senders = [s.u for s in sums]
        if len(set(senders)) != len(senders):
            raise InvalidArgument("duplicate sum-share message in Round 2")
        u2set = set(self.u2)
        for s in sums:
            if s.u not in u2set:
                raise InvalidArgument(f"sum shares from client {s.u} outside U2")
            if len(s.sums) != p.chunk_count:
                raise InvalidArgument("sum-share vector has wrong chunk count")
        if len(senders) < p.t:
            raise InsufficientShares(
                f"only {len(senders)} clients survived to Round 2, need {p.t}"
            )
        self.u3 = tuple(sorted(senders))

        pts = self.u3[: p.t]
        t0 = time.perf_counter_ns()
        matrix = self._matrix_cache.get(pts)
        if matrix is None:
            matrix = build_recon_matrix([x % p.fp.q for x in pts], p.d, p.fp)
            self._matrix_cache[pts] = matrix
        self.phase_ns["precompute"] = time.perf_counter_ns() - t0

        # The reconstruct phase times only the reconstruction computation:
        # applying the precomputed matrix to the summed shares. Unpacking the
        # received share vectors into matrix form and converting the result
        # back to Python ints are message marshaling, not reconstruction.
        if p.t * (p.fp.q - 1) ** 2 < 2**63:
            # One matmul over all chunks: rows (d x t) @ sums (t x chunks).
            by_u = {s.u: (s.sums_np if s.sums_np is not None else
                          np.array(s.sums, dtype=np.int64)) for s in sums}
            sum_matrix = np.stack([by_u[u] for u in pts])
            t0 = time.perf_counter_ns()
            coeff = _mod_matmul(matrix.rows_np, sum_matrix, p.fp.q, matrix.rows_f64)
            self.phase_ns["reconstruct"] = time.perf_counter_ns() - t0
            out = coeff.T.reshape(-1).tolist()
        else:
            by_u = {s.u: s.sums for s in sums}
            out = []
            t0 = time.perf_counter_ns()
            for i in range(p.chunk_count):
                out.extend(matrix.apply([by_u[u][i] for u in pts]))
            self.phase_ns["reconstruct"] = time.perf_counter_ns() - t0
        self.round = 3
        return out[: p.m]
