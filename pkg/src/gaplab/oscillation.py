"""Dirichlet solutions, zero and sign-flip counts, and the block
decomposition of Jacobi matrices whose off-diagonal vanishes."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import (
    EnergyTooCloseToBlockSpectrum,
    NonPositiveOffdiag,
    SolutionHitsEigenvalue,
)
from .tridiag import JacobiBlock, _real_offdiag, eigenvalues_array

__all__ = [
    "DirichletSolution",
    "BlockDecomposition",
    "OscillationReport",
    "dirichlet_solution",
    "count_interpolated_zeros",
    "interpolated_zeros",
    "verify_oscillation",
    "split_blocks",
    "block_sign_flips",
    "sign_flips",
    "block_ids",
]

SPECTRUM_GUARD = 1e-9


@dataclass(frozen=True, eq=False)
class DirichletSolution:
    """``values[j] = u(j - 1)`` for ``-1 <= j - 1 <= m``."""

    energy: float
    values: np.ndarray
    trailing: float

    @property
    def m(self) -> int:
        return len(self.values) - 2

    def u(self, n: int) -> float:
        return float(self.values[n + 1])


def dirichlet_solution(block: JacobiBlock, E: float, trailing: float = 1.0) -> DirichletSolution:
    """Solve ``a(n-1)u(n-1) + b(n)u(n) + a(n)u(n+1) = E u(n)`` for
    ``0 <= n <= m-1`` with ``u(-1) = 0``, ``u(0) = 1`` and the missing
    coefficient ``a(m-1)`` replaced by ``trailing``."""
    off = _real_offdiag(block)
    if np.any(off <= 0):
        raise NonPositiveOffdiag("interior off-diagonal entries must be strictly positive")
    if trailing <= 0:
        raise NonPositiveOffdiag("trailing coefficient must be positive")
    m = block.m
    coef = np.append(off, trailing)
    u = np.zeros(m + 2)
    u[1] = 1.0
    for n in range(m):
        left = coef[n - 1] * u[n] if n > 0 else 0.0
        u[n + 2] = ((E - block.diag[n]) * u[n + 1] - left) / coef[n]
    return DirichletSolution(float(E), u, float(trailing))


def interpolated_zeros(values) -> int:
    """Zeros of the piecewise-linear interpolation of ``values[0..L]`` on the
    open interval ``(0, L)``.

    A node value of exactly zero counts once; a strict sign change between
    consecutive nodes counts once.
    """
    v = np.asarray(values, dtype=float)
    lattice = int(np.count_nonzero(v[1:-1] == 0.0))
    crossings = int(np.count_nonzero(v[:-1] * v[1:] < 0))
    return lattice + crossings


def count_interpolated_zeros(sol: DirichletSolution) -> int:
    """``F_m(E)``: zeros of the interpolated solution in ``(0, m)``."""
    return interpolated_zeros(sol.values[1:])


@dataclass(frozen=True)
class OscillationReport:
    m: int
    E: float
    F: int
    eig_above: int
    equal: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def verify_oscillation(block: JacobiBlock, E: float, trailing: float = 1.0,
                       guard: float = SPECTRUM_GUARD) -> OscillationReport:
    """Compare the zero count of the Dirichlet solution with the number of
    block eigenvalues above ``E``."""
    off = _real_offdiag(block)
    ev = eigenvalues_array(block.diag, off, tol=1e-13)
    if np.min(np.abs(ev - E)) < guard:
        raise EnergyTooCloseToBlockSpectrum(f"E={E} lies within {guard} of an eigenvalue")
    F = count_interpolated_zeros(dirichlet_solution(block, E, trailing))
    above = int(np.count_nonzero(ev > E))
    return OscillationReport(block.m, float(E), F, above, F == above)


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    """Maximal zero-free runs of a coefficient window.

    ``singular`` lists the orbit indices ``n`` with ``a(n) = 0``. Block ``r``
    covers the sites ``[n_r + 1, n_{r+1}]``; the first block starts at the
    window edge and the last one may end at the window edge without a zero,
    in which case ``complete[r]`` is False.
    """

    singular: np.ndarray
    blocks: list
    complete: list

    @property
    def lengths(self) -> np.ndarray:
        return np.array([b.m for b in self.blocks], dtype=int)

    def __len__(self):
        return len(self.blocks)


def split_blocks(coeffs) -> BlockDecomposition:
    a = np.asarray(coeffs.a)
    if np.iscomplexobj(a):
        if np.any(a.imag != 0):
            raise ValueError("split_blocks needs gauge-reduced (real) coefficients")
        a = a.real
    if np.any(a < 0):
        raise ValueError("split_blocks needs nonnegative off-diagonal coefficients")
    zeros = np.flatnonzero(a == 0.0)
    blocks, complete = [], []
    first = 0
    ends = list(zeros) + ([len(a) - 1] if (len(zeros) == 0 or zeros[-1] != len(a) - 1) else [])
    for k, last in enumerate(ends):
        blocks.append(JacobiBlock(coeffs.b[first:last + 1], a[first:last], start=coeffs.n0 + first))
        closed_right = k < len(zeros)
        closed_left = k > 0
        complete.append(bool(closed_left and closed_right))
        first = last + 1
    return BlockDecomposition(zeros + coeffs.n0, blocks, complete)


def sign_flips(diag, off, energies, trailing: float = 1.0, allow_zero: bool = False) -> np.ndarray:
    """Zeros of the interpolated Dirichlet solution of a block on ``(0, m)``,
    vectorised over energies.

    Counted as sign changes between consecutive nonzero nodes ``u(0..m)``. A
    node with ``u(j) = 0`` at ``1 <= j < m`` is counted once through the sign
    change it sits in (the recurrence forces ``u(j-1) u(j+1) < 0``). An exact
    zero at ``j = m`` means ``E`` is a block eigenvalue and raises
    SolutionHitsEigenvalue unless ``allow_zero`` is set. The solution is
    rescaled on the fly, so long blocks are fine.
    """
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    E = np.atleast_1d(np.asarray(energies, dtype=float))
    m = len(diag)
    coef = np.append(off, trailing)
    prev = np.zeros_like(E)
    cur = np.ones_like(E)
    last = np.ones_like(E)
    flips = np.zeros(E.shape, dtype=np.int64)
    for n in range(m):
        left = coef[n - 1] * prev if n > 0 else 0.0
        nxt = ((E - diag[n]) * cur - left) / coef[n]
        sg = np.sign(nxt)
        if n == m - 1 and not allow_zero and np.any(sg == 0):
            raise SolutionHitsEigenvalue(f"solution vanishes at node {m}: E is a block eigenvalue")
        change = (sg != 0) & (sg != last)
        flips += change
        last = np.where(sg != 0, sg, last)
        prev, cur = cur, nxt
        big = np.maximum(np.abs(prev), np.abs(cur))
        if np.any((big > 1e150) | (big < 1e-150)):
            sc = np.where((big > 1e150) | (big < 1e-150), big, 1.0)
            prev, cur = prev / sc, cur / sc
    return flips


def block_sign_flips(block: JacobiBlock, E: float, guard: float = SPECTRUM_GUARD) -> int:
    """``f_r`` for one block: sign flips of its Dirichlet solution continued
    past the block with coefficient 1."""
    off = _real_offdiag(block)
    if np.any(off <= 0):
        raise NonPositiveOffdiag("blocks must have strictly positive interior off-diagonals")
    ev = eigenvalues_array(block.diag, off, tol=1e-13)
    if np.min(np.abs(ev - E)) < guard:
        raise EnergyTooCloseToBlockSpectrum(f"E={E} lies within {guard} of the block spectrum")
    return int(sign_flips(block.diag, off, [E], 1.0)[0])


def block_ids(decomp: BlockDecomposition, energies) -> np.ndarray:
    """IDS from the block route: ``1 - sum_r f_r / sum_r l_r``."""
    E = np.atleast_1d(np.asarray(energies, dtype=float))
    total = np.zeros(E.shape, dtype=np.int64)
    for blk in decomp.blocks:
        total += sign_flips(blk.diag, np.real(blk.offdiag), E, 1.0)
    return 1.0 - total / decomp.lengths.sum()
