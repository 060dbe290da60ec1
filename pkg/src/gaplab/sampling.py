"""Sampling functions on the torus and the Jacobi coefficients they generate
along orbits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import PhasePoint, orbit_coords
from .errors import DimensionMismatch, NonInvertible

__all__ = [
    "TrigPoly",
    "SamplingFn",
    "JacobiCoeffs",
    "evaluate",
    "coefficients",
    "constant",
    "cosine",
    "exponential",
    "sampling_from_dict",
    "sampling_to_dict",
]


@dataclass(frozen=True)
class TrigPoly:
    """Finite Fourier series ``sum_k c_k exp(2 pi i k.w)`` on the d-torus.

    ``terms`` maps integer frequency tuples to complex coefficients. With
    ``real=True`` the table must be Hermitian, ``c_{-k} = conj(c_k)``.
    """

    d: int
    terms: tuple
    real: bool = True

    def __post_init__(self):
        items = self.terms.items() if isinstance(self.terms, dict) else self.terms
        table = {}
        for k, c in items:
            k = tuple(int(v) for v in np.atleast_1d(k))
            if len(k) != self.d:
                raise DimensionMismatch(f"frequency {k} is not {self.d}-dimensional")
            table[k] = table.get(k, 0j) + complex(c)
        table = {k: c for k, c in table.items() if c != 0}
        if self.real:
            for k, c in table.items():
                mirror = table.get(tuple(-v for v in k), 0j)
                if abs(mirror - c.conjugate()) > 1e-12 * max(1.0, abs(c)):
                    raise ValueError(f"real TrigPoly needs c_-k = conj(c_k); violated at k={k}")
        object.__setattr__(self, "terms", tuple(sorted(table.items())))
        freqs = np.array([k for k, _ in self.terms], dtype=float).reshape(-1, self.d)
        object.__setattr__(self, "_freqs", freqs)
        object.__setattr__(self, "_coefs", np.array([c for _, c in self.terms], dtype=complex))

    def __call__(self, w) -> np.ndarray:
        """Evaluate at an ``(L, d)`` array of angles (or a single point)."""
        w = np.asarray(w, dtype=float)
        single = w.ndim <= 1
        w = w.reshape(-1, self.d)
        if not self.terms:
            vals = np.zeros(len(w), dtype=complex)
        else:
            phase = np.exp(2j * np.pi * (w @ self._freqs.T))
            vals = phase @ self._coefs
        if self.real:
            vals = vals.real.copy()
        return vals[0] if single else vals

    @property
    def sup_bound(self) -> float:
        return float(np.abs(self._coefs).sum())


@dataclass(frozen=True)
class SamplingFn:
    """A TrigPoly followed by a pointwise post-map.

    ``post`` is one of ``"identity"``, ``"clamp_below"`` (``max(0, f - t)``,
    real ``f`` only) or ``"modulus"`` (``|f|``).
    """

    base: TrigPoly
    post: str = "identity"
    t: float = 0.0

    def __post_init__(self):
        if self.post not in ("identity", "clamp_below", "modulus"):
            raise ValueError(f"unknown post-map {self.post!r}")
        if self.post == "clamp_below" and not self.base.real:
            raise ValueError("clamp_below requires a real base polynomial")

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def real(self) -> bool:
        return self.base.real or self.post != "identity"

    def __call__(self, w) -> np.ndarray:
        vals = self.base(w)
        if self.post == "clamp_below":
            return np.maximum(0.0, vals - self.t)
        if self.post == "modulus":
            return np.abs(vals)
        return vals

    def modulus(self) -> "SamplingFn":
        """``|f|``; clamp and modulus outputs are already nonnegative."""
        if self.post == "identity":
            return SamplingFn(self.base, "modulus")
        return self


@dataclass(frozen=True, eq=False)
class JacobiCoeffs:
    """Coefficients ``a(n) = p(T^n w)``, ``b(n) = q(T^n w)`` for
    ``n0 <= n <= n1``."""

    n0: int
    n1: int
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        L = self.n1 - self.n0 + 1
        if len(self.a) != L or len(self.b) != L:
            raise ValueError("coefficient arrays must match the window length")
        if np.iscomplexobj(self.b):
            raise ValueError("diagonal coefficients must be real")

    @property
    def window(self) -> tuple:
        return (self.n0, self.n1)

    def __len__(self):
        return self.n1 - self.n0 + 1

    def a_at(self, n: int):
        return self.a[n - self.n0]

    def b_at(self, n: int):
        return self.b[n - self.n0]

    def gauge_reduced(self) -> "JacobiCoeffs":
        return JacobiCoeffs(self.n0, self.n1, np.abs(self.a), self.b)


def _check_dim(f: SamplingFn, sys):
    if f.d != sys.dim:
        raise DimensionMismatch(f"sampling function is {f.d}-dimensional, system has dimension {sys.dim}")


def evaluate(f: SamplingFn, sys, pt: PhasePoint):
    """Value of ``f`` at a phase point (solenoid points use their angle only)."""
    _check_dim(f, sys)
    if pt.dim != sys.dim:
        raise DimensionMismatch("point does not belong to the system")
    val = f(np.array(pt.coords))
    return complex(val) if not f.real else float(val)


def coefficients(sys, p: SamplingFn, q: SamplingFn, pt: PhasePoint, window) -> JacobiCoeffs:
    """Sample ``p`` and ``q`` along the orbit of ``pt`` over the inclusive
    window ``[n0, n1]``."""
    n0, n1 = window
    if not q.real:
        raise ValueError("q must be real-valued")
    _check_dim(p, sys)
    _check_dim(q, sys)
    if n0 < 0 and not sys.invertible:
        raise NonInvertible(f"{sys.kind} coefficients are only defined on windows inside Z_+")
    w = orbit_coords(sys, pt, n0, n1)
    return JacobiCoeffs(n0, n1, p(w), np.asarray(q(w), dtype=float))


def constant(value, d: int = 1) -> SamplingFn:
    value = complex(value)
    return SamplingFn(TrigPoly(d, {(0,) * d: value}, real=value.imag == 0))


def cosine(amplitude: float = 1.0, k=1, d: int = 1, offset: float = 0.0) -> SamplingFn:
    """``offset + amplitude * cos(2 pi k.w)``."""
    k = tuple(np.atleast_1d(k).astype(int))
    if len(k) != d:
        k = k + (0,) * (d - len(k))
    terms = {k: amplitude / 2, tuple(-v for v in k): amplitude / 2}
    if offset:
        terms[(0,) * d] = offset
    return SamplingFn(TrigPoly(d, terms, real=True))


def exponential(k=1, d: int = 1, coef: complex = 1.0) -> SamplingFn:
    """``coef * exp(2 pi i k.w)`` (complex-valued)."""
    k = tuple(np.atleast_1d(k).astype(int))
    if len(k) != d:
        k = k + (0,) * (d - len(k))
    return SamplingFn(TrigPoly(d, {k: coef}, real=False))


def sampling_to_dict(f: SamplingFn) -> dict:
    out = {
        "d": f.base.d,
        "real": f.base.real,
        "terms": [{"k": list(k), "re": c.real, "im": c.imag} for k, c in f.base.terms],
    }
    if f.post != "identity":
        out["post"] = f.post
    if f.post == "clamp_below":
        out["t"] = f.t
    return out


def sampling_from_dict(obj: dict) -> SamplingFn:
    terms = {tuple(t["k"]): complex(t.get("re", 0.0), t.get("im", 0.0)) for t in obj["terms"]}
    base = TrigPoly(int(obj["d"]), terms, bool(obj.get("real", True)))
    return SamplingFn(base, obj.get("post", "identity"), float(obj.get("t", 0.0)))
