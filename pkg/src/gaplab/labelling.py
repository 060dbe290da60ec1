"""Label groups of affine torus maps, matching of gap labels against them,
and connectedness verdicts for systems whose labels are integers."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .dynamics import AffineTorus
from .errors import PreconditionViolated

__all__ = [
    "LabelGroup",
    "LabelMatch",
    "GapLabelReport",
    "ConnectednessVerdict",
    "integer_kernel",
    "label_group",
    "integer_group",
    "match_label",
    "verify_gap_labels",
    "summary_csv",
    "connectedness_verdict",
    "is_nonvanishing",
]

DEFAULT_M = {0: 0, 1: 100, 2: 30}


def _hnf_rows(rows: list) -> list:
    """Row-style Hermite normal form of a list of integer vectors (zero rows
    dropped)."""
    R = [list(r) for r in rows]
    if not R:
        return []
    d = len(R[0])
    out, k = [], 0
    for col in range(d):
        if k >= len(R):
            break
        while True:
            nz = [i for i in range(k, len(R)) if R[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(R[i][col]))
            R[k], R[piv] = R[piv], R[k]
            done = True
            for i in range(k + 1, len(R)):
                f = R[i][col] // R[k][col]
                if f:
                    R[i] = [x - f * y for x, y in zip(R[i], R[k])]
                if R[i][col] != 0:
                    done = False
            if done:
                break
        if k < len(R) and R[k][col] != 0:
            if R[k][col] < 0:
                R[k] = [-x for x in R[k]]
            for i in range(k):
                f = R[i][col] // R[k][col]
                if f:
                    R[i] = [x - f * y for x, y in zip(R[i], R[k])]
            k += 1
    for r in R:
        if any(r):
            out.append(tuple(r))
    return out


def integer_kernel(A) -> list:
    """Integer basis of ``Z^d`` intersected with ``ker(I - A^T)``.

    Exact unimodular column elimination on ``I - A^T``: the columns of the
    accumulated transform that end up over zero columns span the lattice
    kernel. The basis is returned in Hermite form.
    """
    A = [[int(v) for v in row] for row in A]
    d = len(A)
    if d == 0 or any(len(r) != d for r in A):
        raise ValueError("A must be square")
    M = [[int(i == j) - A[j][i] for j in range(d)] for i in range(d)]
    U = [[int(i == j) for j in range(d)] for i in range(d)]

    def colop(dst, src, f):
        for row in M:
            row[dst] -= f * row[src]
        for row in U:
            row[dst] -= f * row[src]

    def swap(c1, c2):
        for row in M + U:
            row[c1], row[c2] = row[c2], row[c1]

    k = 0
    for r in range(d):
        if k >= d:
            break
        while True:
            nz = [c for c in range(k, d) if M[r][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda c: abs(M[r][c]))
            swap(k, piv)
            for c in range(k + 1, d):
                if M[r][c]:
                    colop(c, k, M[r][c] // M[r][k])
            if all(M[r][c] == 0 for c in range(k + 1, d)):
                k += 1
                break
    basis = [tuple(U[i][c] for i in range(d)) for c in range(k, d)]
    return _hnf_rows(basis)


@dataclass(frozen=True)
class LabelGroup:
    """``{sum_i c_i (v_i . b) + n}`` with ``v_i`` the kernel basis."""

    b: tuple
    basis: tuple
    M: int = 100
    Nb: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        object.__setattr__(self, "basis", tuple(tuple(int(x) for x in v) for v in self.basis))

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def integer_only(self) -> bool:
        return self.rank == 0 or not any(np.dot(v, self.b) % 1.0 for v in self.basis)

    @property
    def generators(self) -> np.ndarray:
        """``v_i . b`` for each basis vector."""
        return np.array([float(np.dot(v, self.b)) for v in self.basis])


def integer_group() -> LabelGroup:
    return LabelGroup((), (), 0)


def is_nonvanishing(p, grid: int = 8192, margin: float = 1e-9) -> bool:
    """Grid check that ``p`` has no zero on the circle (d = 1 only).

    Real values are tested for sign changes between neighbouring grid
    points (cyclically) and for values within ``margin`` of 0; complex values
    for a modulus below ``margin`` times the largest modulus.
    """
    if p.d != 1:
        raise ValueError("nonvanishing check is implemented for circle sampling functions")
    w = ((np.arange(grid) + 0.5) / grid)[:, None]
    vals = p.base(w) if p.post == "modulus" else p(w)
    if np.iscomplexobj(vals):
        mag = np.abs(vals)
        return bool(mag.min() > margin * max(mag.max(), 1.0))
    if np.any(np.abs(vals) <= margin):
        return False
    return not np.any(np.sign(vals) != np.sign(np.roll(vals, 1)))


def label_group(sys, p=None, M: int | None = None) -> LabelGroup:
    """Label group of the system.

    Affine torus maps get ``{m.b + n : m in ker(I - A^T)}``. The doubling map
    and the solenoid get the integers, which needs ``p`` without zeros;
    otherwise PreconditionViolated is raised (the labels are then an open
    question and are only reported).
    """
    if isinstance(sys, AffineTorus):
        basis = integer_kernel(sys.A)
        M = DEFAULT_M.get(len(basis), 10) if M is None else M
        return LabelGroup(sys.b, tuple(basis), M)
    if p is None or not is_nonvanishing(p):
        raise PreconditionViolated(
            f"labels over {sys.kind} are only known to be integers when p has no zeros (theory open)")
    return integer_group()


@dataclass(frozen=True)
class LabelMatch:
    k: float
    coeffs: tuple
    m: tuple
    n: int
    value: float
    residual: float
    matched: bool
    tol: float
    M: int


def match_label(k: float, group: LabelGroup, tol: float = 5e-3, M: int | None = None) -> LabelMatch:
    """Best element of the group near ``k`` over the coefficient box
    ``|c_i| <= M``, with ``n`` rounded optimally for each coefficient choice.

    Ties go to the smallest coefficient norm. The scan is exhaustive.
    """
    if not 0.0 <= k <= 1.0:
        raise ValueError("labels lie in [0, 1]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = group.M if M is None else M
    r = group.rank
    if r > 2:
        raise ValueError("exhaustive matching supports kernels of rank <= 2")
    rng = np.arange(-M, M + 1)
    if r == 0:
        C = np.zeros((1, 0), dtype=np.int64)
    elif r == 1:
        C = rng[:, None]
    else:
        C = np.stack(np.meshgrid(rng, rng, indexing="ij"), axis=-1).reshape(-1, 2)
    s = C @ group.generators if r else np.zeros(1)
    n = np.rint(k - s)
    if group.Nb is not None:
        n = np.clip(n, -group.Nb, group.Nb)
    res = np.abs(s + n - k)
    norm = np.abs(C).sum(axis=1)
    best = np.lexsort((norm, res))[0]
    coeffs = tuple(int(c) for c in C[best])
    m = tuple(int(x) for x in (np.array(coeffs) @ np.array(group.basis, dtype=np.int64))) if r else ()
    value = float(s[best] + n[best])
    resid = abs(value - k)
    return LabelMatch(float(k), coeffs, m, int(n[best]), value, resid, resid <= tol, tol, M)


@dataclass(frozen=True)
class GapLabelReport:
    gap: tuple
    label: float
    match: LabelMatch

    def to_dict(self) -> dict:
        return {
            "gap": list(self.gap),
            "label": self.label,
            "m": list(self.match.m),
            "n": self.match.n,
            "residual": self.match.residual,
            "matched": self.match.matched,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def verify_gap_labels(gaps, group: LabelGroup, tol: float = 5e-3, M: int | None = None):
    """Match every gap label; returns ``(reports, summary)``."""
    reports = [GapLabelReport((g.lo, g.hi), g.label, match_label(g.label, group, tol, M)) for g in gaps]
    unmatched = [r for r in reports if not r.match.matched]
    summary = {
        "gaps": len(reports),
        "matched": len(reports) - len(unmatched),
        "unmatched": len(unmatched),
        "worst_residual": max((r.match.residual for r in reports), default=0.0),
        "tol": tol,
        "M": group.M if M is None else M,
        "rank": group.rank,
    }
    return reports, summary


def summary_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lo", "hi", "width", "label", "m", "n", "residual", "matched"])
    for r in reports:
        lo, hi = r.gap
        w.writerow([repr(float(lo)), repr(float(hi)), repr(float(hi - lo)), repr(float(r.label)), " ".join(map(str, r.match.m)),
                    r.match.n, repr(float(r.match.residual)), int(r.match.matched)])
    return buf.getvalue()


@dataclass(frozen=True)
class ConnectednessVerdict:
    connected: bool
    offending: list = field(default_factory=list)
    near_integer: bool = True
    min_width: float = 0.0
    note: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["offending"] = [{"gap": [g.lo, g.hi], "width": g.width, "label": g.label} for g in self.offending]
        return d


def connectedness_verdict(gaps, group: LabelGroup, min_width: float,
                          integer_tol: float = 2e-2, resolution: dict | None = None) -> ConnectednessVerdict:
    """Connected iff none of ``gaps`` (already stability-filtered) is wider
    than ``min_width``.

    ``near_integer`` records whether every detected label is within
    ``integer_tol`` of an integer; such gaps are finite-size artifacts, since
    an interior gap cannot carry an integer label.
    """
    if not group.integer_only:
        raise PreconditionViolated("connectedness verdicts need an integer-only label group")
    wide = [g for g in gaps if g.width > min_width]
    near = all(abs(g.label - round(g.label)) <= integer_tol for g in gaps)
    res = resolution or {}
    note = "no gap detected at resolution " + json.dumps({**res, "min_width": min_width}, sort_keys=True)
    if wide:
        note = f"{len(wide)} stable interior gap(s) wider than {min_width}"
    return ConnectednessVerdict(not wide, wide, near, min_width, note)
