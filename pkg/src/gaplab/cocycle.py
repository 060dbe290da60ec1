"""Transfer-matrix cocycle of a topological Jacobi family: products, solution
propagation, rotation numbers, invariant sections and a numerical test for
dominated splitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import iterate, sample_points
from .errors import NonInvertible, SingularCocycle
from .oscillation import sign_flips, split_blocks
from .sampling import JacobiCoeffs, coefficients

__all__ = [
    "ProjectivePoint",
    "DsVerdict",
    "cocycle_matrix",
    "cocycle_iterate",
    "transfer_matrix",
    "solution_action",
    "rotation_number",
    "rotation_numbers",
    "dominated_splitting_test",
    "ds_sweep",
    "unstable_section",
    "stable_section",
    "section_residuals",
]

RENORM_EVERY = 32


@dataclass(frozen=True)
class ProjectivePoint:
    """The line spanned by ``(cos theta, sin theta)``, ``0 <= theta < pi``."""

    theta: float

    @classmethod
    def from_vector(cls, v) -> "ProjectivePoint":
        x, y = float(np.real(v[0])), float(np.real(v[1]))
        if y == 0.0:
            return cls(0.0)
        th = math.atan2(y, x) % math.pi
        return cls(th)

    @property
    def vector(self) -> np.ndarray:
        return np.array([math.cos(self.theta), math.sin(self.theta)])

    def distance(self, other: "ProjectivePoint") -> float:
        return abs(math.sin(self.theta - other.theta))


def transfer_matrix(E: float, a_prev, a_n, b_n) -> np.ndarray:
    """``[[E - b(n), -conj(a(n-1))], [a(n), 0]]``."""
    dtype = complex if np.iscomplexobj(a_prev) or np.iscomplexobj(a_n) else float
    return np.array([[E - b_n, -np.conj(a_prev)], [a_n, 0.0]], dtype=dtype)


def cocycle_matrix(E: float, sys, p, q, pt, shifted: bool = False) -> np.ndarray:
    """``B^E(w)``; with ``shifted`` the half-line form
    ``[[E - q(Tw), -conj(p(w))], [p(Tw), 0]]`` that needs no inverse map."""
    if shifted:
        c = coefficients(sys, p, q, pt, (0, 1))
        return transfer_matrix(E, c.a[0], c.a[1], c.b[1])
    if not sys.invertible:
        raise NonInvertible(f"{sys.kind} has no inverse; use shifted=True")
    c = coefficients(sys, p, q, pt, (-1, 0))
    return transfer_matrix(E, c.a[0], c.a[1], c.b[1])


def _product(E: float, coeffs: JacobiCoeffs, n_first: int, n: int):
    """``B(n_first + n - 1) ... B(n_first)`` as (matrix, log scale)."""
    dtype = complex if np.iscomplexobj(coeffs.a) else float
    M = np.eye(2, dtype=dtype)
    log_scale = 0.0
    for k in range(n):
        j = n_first + k
        M = transfer_matrix(E, coeffs.a_at(j - 1), coeffs.a_at(j), coeffs.b_at(j)) @ M
        if (k + 1) % RENORM_EVERY == 0:
            s = np.max(np.abs(M))
            if s > 0:
                M = M / s
                log_scale += math.log(s)
    return M, log_scale


def cocycle_iterate(E: float, sys, p, q, pt, n: int, shifted: bool = False, scaled: bool = False):
    """``B_n(w) = B(T^{n-1} w) ... B(w)``, ``B_0 = I``.

    The running product is renormalised every 32 factors. With ``scaled`` the
    pair ``(M, log_scale)`` is returned, the product being
    ``exp(log_scale) * M``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if shifted:
        coeffs = coefficients(sys, p, q, pt, (0, n))
        first = 1
    else:
        if not sys.invertible:
            raise NonInvertible(f"{sys.kind} has no inverse; use shifted=True")
        coeffs = coefficients(sys, p, q, pt, (-1, max(n - 1, 0)))
        first = 0
    M, log_scale = _product(E, coeffs, first, n)
    if scaled:
        return M, log_scale
    return M * math.exp(log_scale)


def solution_action(E: float, coeffs: JacobiCoeffs, n: int, u_n, u_prev):
    """Advance ``(u(n), u(n-1))`` to ``(u(n+1), u(n))`` with the cocycle.

    Returns ``(vector, singular)``. When ``a(n) = 0`` the cocycle maps the
    solution vector to the zero vector; that image is returned with
    ``singular=True`` and ``u(n+1)`` stays undetermined.
    """
    B = transfer_matrix(E, coeffs.a_at(n - 1), coeffs.a_at(n), coeffs.b_at(n))
    v = B @ np.array([u_n, u_prev])
    a_n = coeffs.a_at(n)
    if a_n == 0:
        return v, True
    return v / a_n, False


def rotation_numbers(energies, sys, p, q, pt, t_max: int = 10_000) -> np.ndarray:
    """Sign-flip density of the Dirichlet-type solution on ``[0, t_max]``.

    The coefficients are gauge-reduced first. The window is cut at every zero
    of the off-diagonal; each piece gets its own Dirichlet solution continued
    with coefficient 1, and the flips of all pieces are divided by ``t_max``.
    This estimates ``1 - k(E)``.
    """
    if t_max < 1:
        raise ValueError("t_max must be positive")
    coeffs = coefficients(sys, p, q, pt, (0, t_max - 1)).gauge_reduced()
    decomp = split_blocks(coeffs)
    E = np.atleast_1d(np.asarray(energies, dtype=float))
    total = np.zeros(E.shape, dtype=np.int64)
    for blk in decomp.blocks:
        total += sign_flips(blk.diag, np.real(blk.offdiag), E, 1.0)
    return total / t_max


def rotation_number(E: float, sys, p, q, pt, t_max: int = 10_000) -> float:
    return float(rotation_numbers([E], sys, p, q, pt, t_max)[0])


@dataclass(frozen=True)
class DsVerdict:
    status: str
    n_star: int
    rho: float | None = None
    witness: int | None = None
    reason: str = ""
    min_ratio: float = float("nan")
    min_angle: float = float("nan")
    align_error: float = float("nan")
    params: dict = field(default_factory=dict, compare=False)

    @property
    def dominated(self) -> bool:
        return self.status == "dominated"


def _unit(v):
    n = np.hypot(v[..., 0], v[..., 1])
    return v / n[..., None]


def _cross(u, v):
    return np.abs(u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0])


class _OrbitData:
    """Gauge-reduced coefficients on ``[-D-1, L+D]`` for G sampled points."""

    def __init__(self, sys, p, q, G, L, D, seed):
        if not sys.invertible:
            raise NonInvertible(f"dominated splitting test needs an invertible base; {sys.kind} is not")
        self.pts = sample_points(sys, seed, G)
        self.L, self.D = L, D
        a, b = [], []
        for pt in self.pts:
            c = coefficients(sys, p, q, pt, (-D - 1, L + D)).gauge_reduced()
            a.append(c.a)
            b.append(c.b)
        self.a = np.array(a, dtype=float)
        self.b = np.array(b, dtype=float)
        zero = np.argwhere(self.a == 0.0)
        if len(zero):
            g, _ = zero[0]
            raise SingularCocycle(f"off-diagonal vanishes on the orbit of sample {g}; "
                                  "dominated splitting is not tested in the singular regime")

    def idx(self, n):
        return n + self.D + 1

    def forward(self, E, start, v0):
        """Unit vectors ``E^u(T^n w)`` estimates for ``0 <= n < L``."""
        G = len(self.pts)
        v = np.tile(v0, (G, 1))
        out = np.empty((G, self.L, 2))
        for n in range(start, self.L):
            if n >= 0:
                out[:, n] = v
            i = self.idx(n)
            x = (E - self.b[:, i]) * v[:, 0] - self.a[:, i - 1] * v[:, 1]
            y = self.a[:, i] * v[:, 0]
            v = _unit(np.stack([x, y], axis=1))
        return out

    def backward(self, E, stop, v0):
        """Unit vectors ``E^s(T^n w)`` estimates for ``0 <= n < L``, pulled
        back from site ``stop`` with the adjugate of each cocycle matrix."""
        G = len(self.pts)
        v = np.tile(v0, (G, 1))
        out = np.empty((G, self.L, 2))
        for n in range(stop - 1, -1, -1):
            i = self.idx(n)
            x = self.a[:, i - 1] * v[:, 1]
            y = -self.a[:, i] * v[:, 0] + (E - self.b[:, i]) * v[:, 1]
            v = _unit(np.stack([x, y], axis=1))
            if n < self.L:
                out[:, n] = v
        return out

    def log_ratios(self, E, n_star):
        """``log(sigma_1 / sigma_2)`` of ``B_{n_star}(w)`` for every sampled
        point. The determinant of the product is known exactly,
        ``prod_n a(n) a(n-1)``, so only ``sigma_1`` comes from the matrix."""
        G = len(self.pts)
        M = np.tile(np.eye(2), (G, 1, 1))
        log_scale = np.zeros(G)
        i0, i1 = self.idx(0), self.idx(n_star)
        with np.errstate(divide="ignore"):
            log_det = np.sum(np.log(self.a[:, i0:i1]) + np.log(self.a[:, i0 - 1:i1 - 1]), axis=1)
        for n in range(n_star):
            i = self.idx(n)
            B = np.zeros((G, 2, 2))
            B[:, 0, 0] = E - self.b[:, i]
            B[:, 0, 1] = -self.a[:, i - 1]
            B[:, 1, 0] = self.a[:, i]
            M = B @ M
            sc = np.max(np.abs(M), axis=(1, 2))
            M = M / sc[:, None, None]
            log_scale += np.log(sc)
        # normalised determinant; sigma_1^2 solves s^2 - fro2 s + det^2 = 0
        det = np.exp(log_det - 2 * log_scale)
        fro2 = np.sum(M * M, axis=(1, 2))
        s1sq = 0.5 * (fro2 + np.sqrt(np.maximum(fro2 * fro2 - 4 * det * det, 0.0)))
        return np.log(s1sq) - (log_det - 2 * log_scale)


_V0 = np.array([math.cos(1.0), math.sin(1.0)])
_V1 = np.array([math.cos(2.2), math.sin(2.2)])


def _verdict(E, data: _OrbitData, n_star, rho_min, min_angle, align_tol, params):
    logs = data.log_ratios(E, n_star)
    min_log = float(np.min(logs))
    min_ratio = math.exp(min(min_log, 700.0))
    common = dict(n_star=n_star, min_ratio=min_ratio, params=params)
    if min_log <= math.log1p(1e-6):
        return DsVerdict("not_dominated", witness=int(np.argmin(logs)),
                         reason="B_N acts isometrically at a sampled point", **common)
    D, L = data.D, data.L
    u_deep = data.forward(E, -D, _V0)
    u_half = data.forward(E, -n_star, _V1)
    s_deep = data.backward(E, L + D, _V0)
    s_half = data.backward(E, L + n_star, _V1)
    angles = _cross(u_deep, s_deep)
    min_ang = float(np.min(angles))
    align = float(max(np.max(_cross(u_deep, u_half)), np.max(_cross(s_deep, s_half))))
    common.update(min_angle=min_ang, align_error=align)
    if min_ang < min_angle:
        g = int(np.unravel_index(np.argmin(angles), angles.shape)[0])
        return DsVerdict("not_dominated", witness=g, reason="unstable and stable directions collide", **common)
    if min_log >= n_star * math.log(rho_min) and align <= align_tol:
        return DsVerdict("dominated", rho=math.exp(min_log / n_star), **common)
    return DsVerdict("inconclusive", reason="ratios or direction fields did not settle", **common)


def ds_sweep(energies, sys, p, q, G: int = 64, n_star: int = 40, rho_min: float = 1.05,
             seed: int = 0, orbit_steps: int = 64, min_angle: float = 1e-2,
             align_tol: float = 1e-6) -> list:
    """Dominated-splitting verdicts for many energies, sharing one set of
    sampled orbits."""
    params = dict(G=G, n_star=n_star, rho_min=rho_min, seed=seed, orbit_steps=orbit_steps,
                  min_angle=min_angle, align_tol=align_tol)
    data = _OrbitData(sys, p, q, G, orbit_steps, 2 * n_star, seed)
    return [_verdict(float(E), data, n_star, rho_min, min_angle, align_tol, params)
            for E in np.atleast_1d(energies)]


def dominated_splitting_test(E: float, sys, p, q, **params) -> DsVerdict:
    """Finite-orbit check of domination for the cocycle at energy ``E``.

    For ``G`` sampled points and ``orbit_steps`` orbit points after each, the
    unstable directions (pushed forward from depth ``2 n_star``) and stable
    directions (pulled back from ``2 n_star`` steps ahead) are computed and
    compared with shallower estimates. The verdict is

    * not dominated if some ``B_{n_star}`` has singular value ratio within
      1e-6 of 1, or the two direction fields come closer than ``min_angle``;
    * dominated if every ratio is at least ``rho_min ** n_star`` and the
      direction fields agree with their shallow estimates to ``align_tol``;
    * inconclusive otherwise.

    The coefficients are gauge-reduced first, which conjugates the cocycle
    by unit-modulus diagonal factors and leaves domination unchanged.
    """
    return ds_sweep([E], sys, p, q, **params)[0]


def _section_coeffs(sys, p, q, pt, n0, n1):
    return coefficients(sys, p, q, pt, (n0, n1)).gauge_reduced()


def _push(E, c: JacobiCoeffs, n_from: int, n_to: int, v):
    """Apply ``B(n_to - 1) ... B(n_from)`` projectively."""
    v = np.array(v, dtype=float)
    for n in range(n_from, n_to):
        a_prev, a_n, b_n = c.a_at(n - 1), c.a_at(n), c.b_at(n)
        v = np.array([(E - b_n) * v[0] - a_prev * v[1], a_n * v[0]])
        nv = math.hypot(v[0], v[1])
        if nv == 0.0:
            raise SingularCocycle("projective image collapsed to the zero vector")
        v = v / nv
    return v


def _unstable_at(E, c: JacobiCoeffs, n: int, depth: int):
    """``E^u(T^n w)`` from a push over ``[n - depth, n)``; if the window has a
    zero of the off-diagonal the push restarts exactly at ``e_1`` right after
    the last one."""
    start = n - depth
    seg = c.a[start - c.n0:n - c.n0]
    zeros = np.flatnonzero(seg == 0.0)
    if len(zeros):
        k = start + int(zeros[-1]) + 1
        return _push(E, c, k, n, [1.0, 0.0])
    return _push(E, c, start, n, _V0)


def _residual(E, c: JacobiCoeffs, n: int, v, w) -> float:
    Bv = _push(E, c, n, n + 1, v)
    return ProjectivePoint.from_vector(Bv).distance(ProjectivePoint.from_vector(w))


def unstable_section(E: float, sys, p, q, pt, depth: int = 60):
    """``(E^u(w), residual)`` where the residual is the projective distance
    between ``B(w) E^u(w)`` and the independently computed ``E^u(Tw)``."""
    if not sys.invertible:
        raise NonInvertible(f"the unstable section needs the past orbit; {sys.kind} has none")
    c = _section_coeffs(sys, p, q, pt, -depth - 1, 1)
    u0 = _unstable_at(E, c, 0, depth)
    u1 = _unstable_at(E, c, 1, depth)
    return ProjectivePoint.from_vector(u0), _residual(E, c, 0, u0, u1)


def _pull(E, c: JacobiCoeffs, n_from: int, n_to: int, v):
    """Apply ``B(n_to)^{-1} ... B(n_from - 1)^{-1}`` projectively (adjugates)."""
    v = np.array(v, dtype=float)
    for n in range(n_from - 1, n_to - 1, -1):
        a_prev, a_n, b_n = c.a_at(n - 1), c.a_at(n), c.b_at(n)
        v = np.array([a_prev * v[1], -a_n * v[0] + (E - b_n) * v[1]])
        v = v / math.hypot(v[0], v[1])
    return v


def stable_section(E: float, sys, p, q, pt, depth: int = 60):
    """``(E^s(w), residual)``, pulling back from ``T^depth w`` by inverse
    cocycle matrices; needs a nonvanishing off-diagonal."""
    if not sys.invertible:
        raise NonInvertible(f"{sys.kind} cocycle needs p(T^-1 w); use an invertible base")
    c = _section_coeffs(sys, p, q, pt, -1, depth + 2)
    if np.any(c.a == 0.0):
        raise SingularCocycle("stable section pulled back through a singular cocycle matrix")
    s0 = _pull(E, c, depth, 0, _V0)
    s1 = _pull(E, c, depth + 1, 1, _V0)
    return ProjectivePoint.from_vector(s0), _residual(E, c, 0, s0, s1)


def section_residuals(E: float, sys, p, q, pt, steps: int = 100, depth: int = 60,
                      kind: str = "unstable") -> np.ndarray:
    """Invariance residuals of the chosen section at ``T^j w``,
    ``0 <= j < steps``, each section computed from scratch."""
    fn = unstable_section if kind == "unstable" else stable_section
    out = np.empty(steps)
    for j in range(steps):
        out[j] = fn(E, sys, p, q, iterate(sys, pt, j), depth)[1]
    return out
