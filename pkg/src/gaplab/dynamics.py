"""Base dynamical systems: affine torus maps, the m-fold expanding circle map
and the Smale-Williams solenoid.

Torus coordinates are stored exactly as dyadic integers ``num / 2**bits``.
Affine maps with integer matrices and the expanding map ``w -> m*w`` act on
these numerators by integer arithmetic modulo ``2**bits``, so orbits are
exact orbits of the true map (the frequency vector ``b`` of an affine map is
rounded once onto the same dyadic grid). The expanding map shifts bits out of
the numerator, which is why sampled points for it carry thousands of bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NonInvertible, PrecisionExhausted

__all__ = [
    "AffineTorus",
    "Doubling",
    "Solenoid",
    "PhasePoint",
    "iterate",
    "orbit",
    "orbit_coords",
    "sample_points",
    "max_forward_steps",
    "system_from_dict",
    "system_to_dict",
    "rotation",
    "skew_shift",
    "cat_map",
]

_MANTISSA = 53


def _int_det(A):
    """Exact determinant of a small integer matrix (Bareiss elimination)."""
    M = [list(map(int, row)) for row in A]
    n = len(M)
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def _int_inverse_unimodular(A):
    """Integer inverse of a matrix with determinant +-1, via the adjugate."""
    n = len(A)
    det = _int_det(A)
    if n == 1:
        return ((det,),)
    inv = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(A) if k != i]
            inv[j][i] = (-1) ** (i + j) * _int_det(minor) * det
    return tuple(tuple(r) for r in inv)


def _dyadic_floor(x: float, bits: int) -> int:
    """Largest integer k with k / 2**bits <= (x mod 1)."""
    frac = Fraction(x) - math.floor(x)
    return (frac.numerator << bits) // frac.denominator


def _to_float(num: int, bits: int) -> float:
    if bits <= _MANTISSA:
        return math.ldexp(num, -bits)
    return math.ldexp(num >> (bits - _MANTISSA), -_MANTISSA)


@dataclass(frozen=True)
class AffineTorus:
    """``w -> A w + b`` on the d-torus, with ``A`` an integer matrix of
    determinant +-1."""

    A: tuple
    b: tuple
    bits: int = 64

    kind = "affine_torus"
    invertible = True

    def __post_init__(self):
        A = tuple(tuple(int(v) for v in row) for row in self.A)
        b = tuple(float(v) for v in self.b)
        d = len(A)
        if d == 0 or any(len(row) != d for row in A):
            raise ValueError("A must be a non-empty square integer matrix")
        if len(b) != d:
            raise DimensionMismatch(f"b has length {len(b)}, expected {d}")
        if abs(_int_det(A)) != 1:
            raise ValueError("A must have determinant +-1 to define a homeomorphism")
        if self.bits < _MANTISSA:
            raise ValueError("bits must be at least 53")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return len(self.A)

    @property
    def A_inv(self):
        return _int_inverse_unimodular(self.A)

    def b_nums(self, bits: int) -> tuple:
        return tuple(_dyadic_floor(v, bits) for v in self.b)


@dataclass(frozen=True)
class Doubling:
    """The expanding circle map ``w -> m w`` (not invertible)."""

    m: int = 2
    bits: int = 8192

    kind = "doubling"
    invertible = False
    dim = 1

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError("multiplier must be an integer >= 2")
        if self.bits < _MANTISSA:
            raise ValueError("bits must be at least 53")


@dataclass(frozen=True)
class Solenoid:
    """Smale-Williams solenoid ``F(w, x, y) = (2w, lam x + cos(2 pi w)/2,
    lam y + sin(2 pi w)/2)`` on the solid torus, 0 < lam < 1/2."""

    lam: float = 0.25
    bits: int = 8192
    depth: int = 40

    kind = "solenoid"
    # F is a homeomorphism of the attractor, but backward orbits are not exposed
    invertible = False
    dim = 1
    m = 2

    def __post_init__(self):
        if not 0.0 < self.lam < 0.5:
            raise ValueError("solenoid contraction must lie strictly inside (0, 1/2)")
        if self.bits < _MANTISSA:
            raise ValueError("bits must be at least 53")


@dataclass(frozen=True)
class PhasePoint:
    """A point of the phase space.

    ``nums[i] / 2**bits`` is the i-th torus coordinate; ``disk`` holds the
    (x, y) fibre coordinates of a solenoid point and is None otherwise.
    """

    nums: tuple
    bits: int = 64
    disk: tuple | None = None

    def __post_init__(self):
        nums = tuple(int(v) % (1 << self.bits) for v in self.nums)
        object.__setattr__(self, "nums", nums)
        if self.disk is not None:
            x, y = map(float, self.disk)
            if x * x + y * y > 1.0 + 1e-12:
                raise ValueError("disk coordinates must satisfy x^2 + y^2 <= 1")
            object.__setattr__(self, "disk", (x, y))

    @classmethod
    def from_coords(cls, coords, bits: int = 64, disk=None) -> "PhasePoint":
        coords = np.atleast_1d(np.asarray(coords, dtype=float))
        return cls(tuple(_dyadic_floor(float(c), bits) for c in coords), bits, disk)

    @property
    def coords(self) -> tuple:
        return tuple(_to_float(v, self.bits) for v in self.nums)

    @property
    def dim(self) -> int:
        return len(self.nums)


def _check(sys, pt: PhasePoint):
    if pt.dim != sys.dim:
        raise DimensionMismatch(f"point has {pt.dim} torus coordinates, system needs {sys.dim}")
    if isinstance(sys, Solenoid) != (pt.disk is not None):
        raise DimensionMismatch("disk coordinates must be present exactly for solenoid points")


def _step(sys, nums, bits, disk, backward=False, A_inv=None, b_nums=None):
    mod = (1 << bits) - 1
    if isinstance(sys, AffineTorus):
        if backward:
            shifted = [(v - c) for v, c in zip(nums, b_nums)]
            return tuple(sum(a * v for a, v in zip(row, shifted)) & mod for row in A_inv), None
        return tuple((sum(a * v for a, v in zip(row, nums)) + c) & mod
                     for row, c in zip(sys.A, b_nums)), None
    if isinstance(sys, Solenoid):
        w = 2.0 * math.pi * _to_float(nums[0], bits)
        x, y = disk
        disk = (sys.lam * x + 0.5 * math.cos(w), sys.lam * y + 0.5 * math.sin(w))
        return ((nums[0] << 1) & mod,), disk
    return ((nums[0] * sys.m) & mod,), None


def iterate(sys, pt: PhasePoint, n: int) -> PhasePoint:
    """Return ``T**n (pt)``; negative ``n`` requires an invertible map."""
    _check(sys, pt)
    if n < 0 and not sys.invertible:
        raise NonInvertible(f"{sys.kind} cannot be iterated backwards")
    nums, disk = pt.nums, pt.disk
    extra = {}
    if isinstance(sys, AffineTorus):
        extra = {"b_nums": sys.b_nums(pt.bits)}
        if n < 0:
            extra["A_inv"] = sys.A_inv
    for _ in range(abs(n)):
        nums, disk = _step(sys, nums, pt.bits, disk, backward=n < 0, **extra)
    return PhasePoint(nums, pt.bits, disk)


def max_forward_steps(sys, pt: PhasePoint):
    """Number of forward steps that keep full double precision in the
    coordinates, or None when the map never discards bits."""
    if isinstance(sys, AffineTorus):
        return None
    m = sys.m
    shift = (m & -m).bit_length() - 1  # 2-adic valuation of m
    if shift == 0:
        return None
    return max(0, (pt.bits - _MANTISSA) // shift)


def orbit(sys, pt: PhasePoint, n0: int, n1: int) -> list:
    """Phase points ``T**n pt`` for ``n0 <= n <= n1``."""
    _check(sys, pt)
    if n1 < n0:
        return []
    cur = iterate(sys, pt, n0)
    out = [cur]
    extra = {"b_nums": sys.b_nums(pt.bits)} if isinstance(sys, AffineTorus) else {}
    nums, disk = cur.nums, cur.disk
    for _ in range(n1 - n0):
        nums, disk = _step(sys, nums, pt.bits, disk, **extra)
        out.append(PhasePoint(nums, pt.bits, disk))
    return out


def orbit_coords(sys, pt: PhasePoint, n0: int, n1: int) -> np.ndarray:
    """Torus coordinates of ``T**n pt`` for ``n0 <= n <= n1`` as an
    ``(n1 - n0 + 1, d)`` float array.

    Raises PrecisionExhausted when an expanding map would shift the sampled
    bits of ``pt`` out before step ``n1``.
    """
    _check(sys, pt)
    if n0 < 0 and not sys.invertible:
        raise NonInvertible(f"{sys.kind} orbit window cannot start below 0")
    limit = max_forward_steps(sys, pt)
    if limit is not None and n1 > limit:
        raise PrecisionExhausted(
            f"window end {n1} exceeds the {limit} exact steps available at {pt.bits} bits")
    L = max(0, n1 - n0 + 1)
    out = np.empty((L, sys.dim))
    if L == 0:
        return out
    bits = pt.bits
    nums = iterate(sys, pt, n0).nums
    mod = (1 << bits) - 1
    if isinstance(sys, AffineTorus):
        A, c = sys.A, sys.b_nums(bits)
        for i in range(L):
            out[i] = [_to_float(v, bits) for v in nums]
            nums = tuple((sum(a * v for a, v in zip(row, nums)) + ci) & mod
                         for row, ci in zip(A, c))
    else:
        v, m = nums[0], sys.m
        for i in range(L):
            out[i, 0] = _to_float(v, bits)
            v = (v * m) & mod
    return out


def _random_nums(rng: np.random.Generator, bits: int, count: int) -> list:
    nbytes = (bits + 7) // 8
    drop = 8 * nbytes - bits
    return [int.from_bytes(rng.bytes(nbytes), "little") >> drop for _ in range(count)]


def sample_points(sys, seed: int, count: int) -> list:
    """Deterministic Lebesgue-distributed sample of ``count`` phase points.

    Solenoid points share their angles with the expanding-map sample of the
    same seed; the fibre coordinates come from a random backward itinerary of
    length ``sys.depth`` pushed forward through F from the disk centre.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    nums = _random_nums(rng, sys.bits, count * sys.dim)
    pts = [tuple(nums[i * sys.dim:(i + 1) * sys.dim]) for i in range(count)]
    if not isinstance(sys, Solenoid):
        return [PhasePoint(p, sys.bits) for p in pts]
    sym_rng = np.random.default_rng([seed, 0x501E])
    out = []
    for p in pts:
        w0 = _to_float(p[0], sys.bits)
        symbols = sym_rng.integers(0, 2, size=sys.depth)
        pre = np.empty(sys.depth)
        w = w0
        for j in range(sys.depth):
            w = (w + symbols[j]) / 2.0
            pre[j] = w
        x = y = 0.0
        for w in pre[::-1]:
            x, y = sys.lam * x + 0.5 * math.cos(2 * math.pi * w), sys.lam * y + 0.5 * math.sin(2 * math.pi * w)
        out.append(PhasePoint(p, sys.bits, (x, y)))
    return out


def rotation(alpha: Sequence[float] | float, bits: int = 64) -> AffineTorus:
    alpha = tuple(np.atleast_1d(alpha).astype(float))
    d = len(alpha)
    return AffineTorus(tuple(tuple(int(i == j) for j in range(d)) for i in range(d)), alpha, bits)


def skew_shift(alpha: float, bits: int = 64) -> AffineTorus:
    return AffineTorus(((1, 0), (1, 1)), (alpha, 0.0), bits)


def cat_map(bits: int = 64) -> AffineTorus:
    return AffineTorus(((2, 1), (1, 1)), (0.0, 0.0), bits)


def system_to_dict(sys) -> dict:
    if isinstance(sys, AffineTorus):
        return {"kind": "affine_torus", "A": [list(r) for r in sys.A], "b": list(sys.b), "bits": sys.bits}
    if isinstance(sys, Doubling):
        return {"kind": "doubling", "m": sys.m, "bits": sys.bits}
    return {"kind": "solenoid", "lambda": sys.lam, "bits": sys.bits, "depth": sys.depth}


def system_from_dict(obj: dict):
    kind = obj.get("kind")
    if kind == "affine_torus":
        return AffineTorus(obj["A"], obj["b"], obj.get("bits", 64))
    if kind == "doubling":
        return Doubling(obj.get("m", 2), obj.get("bits", 8192))
    if kind == "solenoid":
        return Solenoid(obj.get("lambda", 0.25), obj.get("bits", 8192), obj.get("depth", 40))
    raise ValueError(f"unknown system kind {kind!r}")
