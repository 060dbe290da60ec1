"""gaplab: spectra, gap labels and transfer-matrix cocycles of Jacobi
operators sampled along orbits of torus maps, expanding maps and the
solenoid."""

from . import cocycle, dynamics, ids, labelling, oscillation, sampling, tridiag
from .dynamics import (
    AffineTorus,
    Doubling,
    PhasePoint,
    Solenoid,
    cat_map,
    iterate,
    rotation,
    sample_points,
    skew_shift,
)
from .errors import *  # noqa: F401,F403
from .ids import DosEstimate, Gap, detect_gaps, dos_estimate, ids_eval, spectrum_approx
from .sampling import SamplingFn, TrigPoly, coefficients, constant, cosine, exponential
from .tridiag import JacobiBlock, build_block, eigenvalues, gauge_reduce, sturm_count

__version__ = "0.1.0"
