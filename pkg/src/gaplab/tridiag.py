"""Finite Jacobi blocks, gauge reduction, Sturm counts and bisection."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyBlock, NotGaugeReduced

__all__ = [
    "JacobiBlock",
    "EigenList",
    "build_block",
    "gauge_reduce",
    "sturm_count",
    "sturm_counts",
    "eigenvalues",
    "eigenvalues_array",
    "free_block",
    "dense_matrix",
]

_TINY = 1e-300


@dataclass(frozen=True, eq=False)
class JacobiBlock:
    """``m x m`` Jacobi matrix with diagonal ``diag`` and upper off-diagonal
    ``offdiag`` (the lower one is its conjugate).

    ``phases`` are the unit-modulus gauge factors produced by
    :func:`gauge_reduce`; they are all 1 for a freshly built block.
    ``start`` is the orbit index of the first site.
    """

    diag: np.ndarray
    offdiag: np.ndarray
    phases: np.ndarray = None
    start: int = 0

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float)
        off = np.asarray(self.offdiag)
        if diag.ndim != 1 or len(diag) == 0:
            raise EmptyBlock("a Jacobi block needs at least one site")
        if len(off) != len(diag) - 1:
            raise ValueError("offdiag must have exactly m - 1 entries")
        if not np.iscomplexobj(off):
            off = off.astype(float)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", off)
        if self.phases is None:
            object.__setattr__(self, "phases", np.ones(len(diag), dtype=complex))

    @property
    def m(self) -> int:
        return len(self.diag)

    @property
    def is_reduced(self) -> bool:
        off = self.offdiag
        if np.iscomplexobj(off):
            if np.any(off.imag != 0):
                return False
            off = off.real
        return bool(np.all(off >= 0))

    def gershgorin(self) -> tuple:
        r = np.zeros(self.m)
        mag = np.abs(self.offdiag)
        r[:-1] += mag
        r[1:] += mag
        return float(np.min(self.diag - r)), float(np.max(self.diag + r))

    def to_csv(self) -> str:
        """Rows ``n, b, Re a, Im a`` (the last row has no off-diagonal)."""
        buf = io.StringIO()
        buf.write("n,b,re_a,im_a\n")
        off = np.asarray(self.offdiag, dtype=complex)
        for i in range(self.m):
            if i < self.m - 1:
                buf.write(f"{self.start + i},{float(self.diag[i])!r},{float(off[i].real)!r},{float(off[i].imag)!r}\n")
            else:
                buf.write(f"{self.start + i},{float(self.diag[i])!r},,\n")
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class EigenList:
    values: np.ndarray
    tol: float

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]


def build_block(coeffs, start: int | None = None, stop: int | None = None) -> JacobiBlock:
    """Block on the orbit sites ``start <= n < stop`` of a coefficient window.

    Defaults cover the whole window. Zero off-diagonals are kept as they are.
    """
    start = coeffs.n0 if start is None else start
    stop = coeffs.n1 + 1 if stop is None else stop
    if start < coeffs.n0 or stop > coeffs.n1 + 1:
        raise ValueError(f"sub-interval [{start}, {stop}) leaves window {coeffs.window}")
    if stop <= start:
        raise EmptyBlock(f"sub-interval [{start}, {stop}) is empty")
    i, j = start - coeffs.n0, stop - coeffs.n0
    return JacobiBlock(coeffs.b[i:j], coeffs.a[i:j - 1], start=start)


def free_block(m: int) -> JacobiBlock:
    return JacobiBlock(np.zeros(m), np.ones(m - 1))


def gauge_reduce(block: JacobiBlock) -> JacobiBlock:
    """Conjugate by ``diag(lam_0, ..., lam_{m-1})`` with ``lam_0 = 1`` and
    ``lam_{n+1} = lam_n exp(-i Arg a(n))`` (``Arg 0`` taken as 0), which turns
    every off-diagonal entry into ``|a(n)|``."""
    off = np.asarray(block.offdiag)
    mag = np.abs(off)
    # from the argument, not conj(a)/|a|: the quotient overflows for subnormal a
    unit = np.exp(-1j * np.angle(off))
    phases = np.concatenate([[1.0 + 0j], np.cumprod(unit)])
    # renormalise against drift of the running product
    phases /= np.abs(phases)
    return JacobiBlock(block.diag, mag, phases * block.phases, block.start)


def dense_matrix(block: JacobiBlock) -> np.ndarray:
    """Hermitian dense matrix of the block (for small checks)."""
    off = np.asarray(block.offdiag)
    H = np.diag(block.diag.astype(off.dtype if np.iscomplexobj(off) else float))
    if block.m > 1:
        H = H + np.diag(off, 1) + np.diag(np.conj(off), -1)
    return H


def _real_offdiag(block: JacobiBlock) -> np.ndarray:
    if not block.is_reduced:
        raise NotGaugeReduced("off-diagonal entries must be real and nonnegative; call gauge_reduce first")
    return np.asarray(np.real(block.offdiag), dtype=float)


def _pivmin(diag, off2) -> float:
    scale = max(1.0, float(np.max(np.abs(diag))) if len(diag) else 1.0,
                float(np.max(off2)) if len(off2) else 1.0)
    return _TINY * scale


def sturm_counts(diag: np.ndarray, off2: np.ndarray, energies) -> np.ndarray:
    """Vectorised Sturm count: number of eigenvalues ``<= E`` for each energy.

    ``off2`` holds the squared off-diagonal moduli. Pivots that vanish are
    replaced by ``-pivmin`` so that an exact eigenvalue is counted as ``<= E``.
    """
    x = np.asarray(energies, dtype=float)
    pivmin = _pivmin(diag, off2)
    d = diag[0] - x
    d = np.where(np.abs(d) < pivmin, -pivmin, d)
    count = (d < 0).astype(np.int64)
    for i in range(1, len(diag)):
        d = (diag[i] - x) - off2[i - 1] / d
        d[np.abs(d) < pivmin] = -pivmin
        count += d < 0
    return count


def sturm_count(block: JacobiBlock, E: float) -> int:
    """Number of eigenvalues of the (gauge-reduced) block that are ``<= E``."""
    off = _real_offdiag(block)
    return int(sturm_counts(block.diag, off * off, np.array([E]))[0])


def eigenvalues_array(diag: np.ndarray, off: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """All eigenvalues of a real symmetric tridiagonal matrix by count-based
    bisection; every value is the midpoint of a bracket of width <= tol."""
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    m = len(diag)
    if m == 1:
        return diag.copy()
    r = np.zeros(m)
    r[:-1] += np.abs(off)
    r[1:] += np.abs(off)
    lo0, hi0 = float(np.min(diag - r)), float(np.max(diag + r))
    pad = max(tol, 1e-12 * max(1.0, abs(lo0), abs(hi0)))
    lo = np.full(m, lo0 - pad)
    hi = np.full(m, hi0 + pad)
    target = np.arange(1, m + 1)
    off2 = off * off
    # widths shrink by half each sweep, so the loop length is known up front
    sweeps = int(np.ceil(np.log2((hi0 - lo0 + 2 * pad) / tol))) + 1
    for _ in range(max(sweeps, 1)):
        mid = 0.5 * (lo + hi)
        uniq, inv = np.unique(mid, return_inverse=True)
        c = sturm_counts(diag, off2, uniq)[inv]
        up = c >= target
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
        if np.max(hi - lo) <= tol:
            break
    return 0.5 * (lo + hi)


def eigenvalues(block: JacobiBlock, tol: float = 1e-12) -> EigenList:
    if tol <= 0:
        raise ValueError("tol must be positive")
    off = _real_offdiag(block)
    return EigenList(eigenvalues_array(block.diag, off, tol), tol)
