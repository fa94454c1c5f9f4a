"""Prime-field arithmetic, polynomial evaluation, and reconstruction matrices.

Field elements are plain Python ints, always kept fully reduced in [0, q).
Batch helpers use numpy int64 arrays when the modulus is small enough that
intermediate products cannot overflow, and fall back to Python ints otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import sympy

from .errors import InvalidArgument

_MAX_MODULUS_BITS = 64


@dataclass(frozen=True)
class FieldParams:
    """A prime modulus q and the byte width used to encode one element."""

    q: int
    byte_width: int = field(init=False)

    def __post_init__(self):
        if self.q < 2:
            raise InvalidArgument(f"modulus must be >= 2, got {self.q}")
        if self.q.bit_length() > _MAX_MODULUS_BITS:
            raise InvalidArgument(f"modulus exceeds {_MAX_MODULUS_BITS} bits")
        if not sympy.isprime(self.q):
            raise InvalidArgument(f"modulus {self.q} is not prime")
        object.__setattr__(self, "byte_width", (self.q.bit_length() + 7) // 8)

    def reduce(self, a: int) -> int:
        return a % self.q

    def encode_elem(self, a: int) -> bytes:
        """Fixed-width little-endian encoding of one element."""
        return int(a).to_bytes(self.byte_width, "little")

    def decode_elem(self, data: bytes) -> int:
        if len(data) != self.byte_width:
            raise InvalidArgument("element encoding has wrong length")
        v = int.from_bytes(data, "little")
        if v >= self.q:
            raise InvalidArgument("element encoding out of range")
        return v

    def numpy_safe_dot_len(self) -> int:
        """Max dot-product length whose int64 accumulation cannot overflow."""
        per_term = (self.q - 1) ** 2
        if per_term == 0:
            return 2**62
        return (2**63 - 1) // per_term


def fe_inv(a: int, fp: FieldParams) -> int:
    """Multiplicative inverse of a modulo q."""
    a %= fp.q
    if a == 0:
        raise InvalidArgument("zero has no multiplicative inverse")
    return pow(a, -1, fp.q)


def poly_eval(coeffs, x: int, fp: FieldParams) -> int:
    """Evaluate a polynomial (ascending-degree coefficients) at x by Horner's rule."""
    if len(coeffs) == 0:
        raise InvalidArgument("empty coefficient list")
    q = fp.q
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % q
    return acc


def poly_eval_batch(coeff_matrix: np.ndarray, xs: np.ndarray, fp: FieldParams) -> np.ndarray:
    """Evaluate many polynomials at many points at once.

    coeff_matrix has shape (num_polys, num_coeffs), ascending degree;
    xs has shape (num_points,). Returns shape (num_polys, num_points).
    """
    if coeff_matrix.ndim != 2 or coeff_matrix.shape[1] == 0:
        raise InvalidArgument("coefficient matrix must be 2-D and nonempty")
    q = fp.q
    if (q - 1) ** 2 + (q - 1) < 2**63:
        c = np.asarray(coeff_matrix, dtype=np.int64)
        x = np.asarray(xs, dtype=np.int64)
        acc = np.zeros((c.shape[0], x.shape[0]), dtype=np.int64)
        for k in range(c.shape[1] - 1, -1, -1):
            acc = (acc * x + c[:, k : k + 1]) % q
        return acc
    out = np.empty((coeff_matrix.shape[0], len(xs)), dtype=object)
    for i, row in enumerate(coeff_matrix):
        for j, x in enumerate(xs):
            out[i, j] = poly_eval(list(row), int(x), fp)
    return out


@dataclass(frozen=True)
class ReconMatrix:
    """d x t matrix mapping t polynomial evaluations to the first d coefficients."""

    rows: tuple            # d rows of t entries each
    points: tuple          # the t evaluation points the matrix was built for
    d: int
    fp: FieldParams
    rows_np: object = field(default=None, compare=False, repr=False)
    rows_f64: object = field(default=None, compare=False, repr=False)

    @property
    def t(self) -> int:
        return len(self.points)

    def apply(self, shares) -> list[int]:
        """Recover the first d coefficients from evaluations at self.points."""
        if len(shares) != self.t:
            raise InvalidArgument(f"expected {self.t} shares, got {len(shares)}")
        q = self.fp.q
        if self.t <= self.fp.numpy_safe_dot_len():
            m = self.rows_np if self.rows_np is not None else np.array(self.rows, dtype=np.int64)
            v = np.asarray(shares, dtype=np.int64)
            return [int(x) for x in (m @ v) % q]
        return [sum(r * s for r, s in zip(row, shares)) % q for row in self.rows]


def build_recon_matrix(points, d: int, fp: FieldParams) -> ReconMatrix:
    """Precompute the coefficient-extraction matrix for a set of evaluation points.

    Row j holds the degree-j coefficients of the Lagrange basis polynomials for
    the given points, so row j dotted with (f(p_1), ..., f(p_t)) yields the
    coefficient of x^j in f for any f of degree < t.
    """
    q = fp.q
    pts = [p % q for p in points]
    t = len(pts)
    if not 0 < d <= t:
        raise InvalidArgument(f"need 0 < d <= t, got d={d}, t={t}")
    if t > q - 1:
        raise InvalidArgument("more points than nonzero field elements")
    if any(p == 0 for p in pts):
        raise InvalidArgument("evaluation points must be nonzero")
    if len(set(pts)) != t:
        raise InvalidArgument("evaluation points must be distinct")

    # Master polynomial P(x) = prod (x - p_k), ascending coefficients.
    master = [1]
    for p in pts:
        nxt = [0] * (len(master) + 1)
        for i, c in enumerate(master):
            nxt[i] = (nxt[i] - c * p) % q
            nxt[i + 1] = (nxt[i + 1] + c) % q
        master = nxt

    cols = []
    for p in pts:
        # Synthetic division: Q(x) = P(x) / (x - p), degree t-1.
        quot = [0] * t
        carry = master[t]
        for i in range(t - 1, -1, -1):
            quot[i] = carry
            carry = (master[i] + carry * p) % q
        # Normalize so the basis polynomial equals 1 at p.
        denom = poly_eval(quot, p, fp)
        scale = fe_inv(denom, fp)
        cols.append([(c * scale) % q for c in quot[:d]])

    rows = tuple(tuple(cols[k][j] for k in range(t)) for j in range(d))
    rows_np = np.array(rows, dtype=np.int64) if q.bit_length() <= 62 else None
    if rows_np is not None:
        # Balanced residues in (-q/2, q/2], the form float matmuls consume.
        rows_f64 = rows_np.astype(np.float64)
        rows_f64 -= (rows_f64 > q / 2) * float(q)
    else:
        rows_f64 = None
    return ReconMatrix(
        rows=rows, points=tuple(pts), d=d, fp=fp, rows_np=rows_np, rows_f64=rows_f64
    )


def find_field_modulus(n: int, B: int) -> FieldParams:
    """Smallest prime q with q >= n(B-1)+1, so n inputs below B never wrap."""
    if n < 1 or B < 2:
        raise InvalidArgument("need n >= 1 and B >= 2")
    R = n * (B - 1) + 1
    if R.bit_length() > _MAX_MODULUS_BITS:
        raise InvalidArgument("required modulus exceeds the 64-bit budget")
    q = int(sympy.nextprime(R - 1))
    if q.bit_length() > _MAX_MODULUS_BITS:
        raise InvalidArgument("required modulus exceeds the 64-bit budget")
    return FieldParams(q)
