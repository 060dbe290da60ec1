"""Density of states from finite truncations, the integrated density of
states, spectrum approximation and gap detection."""

from __future__ import annotations

import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import sample_points, system_to_dict
from .sampling import coefficients, sampling_to_dict
from .tridiag import build_block, eigenvalues, gauge_reduce

__all__ = [
    "DosEstimate",
    "Gap",
    "dos_estimate",
    "truncation_eigenvalues",
    "ids_eval",
    "spectrum_approx",
    "detect_gaps",
    "free_ids",
    "default_workers",
    "spectral_class",
]


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("GAPLAB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class DosEstimate:
    """Weighted eigenvalue atoms pooled over sampled truncations."""

    values: np.ndarray
    weights: np.ndarray
    N: int
    S: int
    seed: int
    meta: dict = field(default_factory=dict)
    source: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        order = np.argsort(self.values, kind="mergesort")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float)[order])
        w = np.asarray(self.weights, dtype=float)[order]
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(w)]))

    def __len__(self):
        return len(self.values)

    def ids(self, E):
        return ids_eval(self, E)

    def refined(self, factor: int = 2) -> "DosEstimate":
        """Recompute with ``factor * N`` sites from the same sampled points
        (cached per factor)."""
        if self.source is None:
            raise ValueError("this estimate does not carry its system and sampling functions")
        cache = self.__dict__.setdefault("_refined", {})
        if factor not in cache:
            sys, p, q, tol = self.source
            cache[factor] = dos_estimate(sys, p, q, self.seed, self.S, factor * self.N, tol=tol)
        return cache[factor]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("value,weight\n")
        for v, w in zip(self.values, self.weights):
            buf.write(f"{float(v)!r},{float(w)!r}\n")
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "N": self.N,
            "samples": self.S,
            "seed": self.seed,
            "atoms": len(self.values),
            "total_weight": float(self._cum[-1]),
            "min": float(self.values[0]),
            "max": float(self.values[-1]),
            **self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2)


@dataclass(frozen=True)
class Gap:
    lo: float
    hi: float
    label: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("a gap needs lo < hi")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)


def truncation_eigenvalues(sys, p, q, pt, N: int, tol: float = 1e-11) -> np.ndarray:
    """Eigenvalues of the gauge-reduced ``N x N`` truncation on ``[0, N)``."""
    coeffs = coefficients(sys, p, q, pt, (0, N - 1))
    return eigenvalues(gauge_reduce(build_block(coeffs)), tol).values


def dos_estimate(sys, p, q, seed: int, S: int, N: int, tol: float = 1e-11,
                 workers: int | None = None) -> DosEstimate:
    """Pool the eigenvalues of ``S`` sampled ``N x N`` truncations, each atom
    carrying weight ``1 / (S N)``."""
    if S < 1 or N < 1:
        raise ValueError("need S >= 1 and N >= 1")
    pts = sample_points(sys, seed, S)
    workers = default_workers() if workers is None else workers
    if workers > 1 and S > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda pt: truncation_eigenvalues(sys, p, q, pt, N, tol), pts))
    else:
        parts = [truncation_eigenvalues(sys, p, q, pt, N, tol) for pt in pts]
    values = np.concatenate(parts)
    weights = np.full(len(values), 1.0 / (S * N))
    meta = {
        "system": system_to_dict(sys),
        "p": sampling_to_dict(p),
        "q": sampling_to_dict(q),
        "tol": tol,
    }
    return DosEstimate(values, weights, N, S, seed, meta, (sys, p, q, tol))


def ids_eval(dos: DosEstimate, E):
    """Total weight of atoms ``<= E`` (right-continuous step function)."""
    idx = np.searchsorted(dos.values, E, side="right")
    out = dos._cum[idx]
    return float(out) if np.ndim(out) == 0 else out


def spectrum_approx(dos: DosEstimate, delta: float) -> list:
    """Union of the closed ``delta``-neighbourhoods of all atoms, merged into
    disjoint intervals."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    v = dos.values
    breaks = np.flatnonzero(np.diff(v) > 2 * delta)
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [len(v) - 1]])
    return [(float(v[s] - delta), float(v[e] + delta)) for s, e in zip(starts, ends)]


def _cluster_weight(dos: DosEstimate, lo: float, hi: float) -> float:
    i = np.searchsorted(dos.values, lo, side="left")
    j = np.searchsorted(dos.values, hi, side="right")
    return float(dos._cum[j] - dos._cum[i])


def _edge_weight(dos: DosEstimate, edge_weight):
    return 2.0 / (dos.S * dos.N) if edge_weight is None else float(edge_weight)


def detect_gaps(dos: DosEstimate, delta: float, min_width: float, stability=None,
                edge_weight: float | None = None) -> list:
    """Interior gaps of ``spectrum_approx(dos, delta)`` wider than
    ``min_width``, labelled by the IDS at their midpoint.

    Clusters of atoms with total weight at most ``edge_weight`` (default: two
    atoms, the most a single truncation can place in a gap through its two
    boundary states) do not split a gap. A candidate survives only if
    its midpoint is still free of such clusters (within ``delta``) in the
    ``stability`` estimate, which defaults to a recomputation at twice the
    truncation size; pass ``stability=False`` to skip the check.
    """
    if min_width <= 2 * delta:
        raise ValueError("min_width must exceed 2 * delta")
    ew = _edge_weight(dos, edge_weight)
    intervals = [iv for iv in spectrum_approx(dos, delta) if _cluster_weight(dos, *iv) > ew]
    cands = [(hi, lo) for (_, hi), (lo, _) in zip(intervals[:-1], intervals[1:]) if lo - hi > min_width]
    if not cands:
        return []
    if stability is None:
        stability = dos.refined(2)
    gaps = []
    for lo, hi in cands:
        mid = 0.5 * (lo + hi)
        if stability is not False:
            sw = _edge_weight(stability, edge_weight)
            if _cluster_weight(stability, mid - delta, mid + delta) > sw:
                continue
        gaps.append(Gap(lo, hi, ids_eval(dos, mid)))
    return gaps


def free_ids(E):
    """Closed-form IDS of the free Jacobi matrix, ``1 - arccos(E/2)/pi``."""
    E = np.clip(np.asarray(E, dtype=float), -2.0, 2.0)
    return 1.0 - np.arccos(E / 2.0) / np.pi


def spectral_class(dos: DosEstimate, energies, delta: float):
    """For each energy: whether it lies in ``spectrum_approx(dos, delta)``
    and its distance to the nearest endpoint of that set."""
    iv = np.array(spectrum_approx(dos, delta))
    E = np.atleast_1d(np.asarray(energies, dtype=float))
    inside = np.any((iv[:, 0][None, :] <= E[:, None]) & (E[:, None] <= iv[:, 1][None, :]), axis=1)
    edge = np.min(np.abs(iv.reshape(1, -1) - E[:, None]), axis=1)
    return inside, edge
