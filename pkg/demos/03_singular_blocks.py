# %% [markdown]
# # Off-diagonals with zeros
#
# With a(n) = max(0, cos(2 pi (w + n alpha)) - 0.5) the off-diagonal vanishes on a
# positive-measure set, and the matrix splits into finite blocks. The IDS can
# then be read from sign flips block by block.

# %%
import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from gaplab import SamplingFn, cosine, rotation, sample_points
from gaplab.cocycle import unstable_section
from gaplab.dynamics import iterate
from gaplab.oscillation import block_ids, split_blocks
from gaplab.sampling import coefficients

GOLDEN = (np.sqrt(5) - 1) / 2
sys, q = rotation(GOLDEN), cosine(2.0)
p = SamplingFn(cosine(1.0).base, "clamp_below", 0.5)
pt = sample_points(sys, 5, 1)[0]

# %%
c = coefficients(sys, p, q, pt, (0, 9999)).gauge_reduced()
dec = split_blocks(c)
print(len(dec), "blocks; lengths", np.bincount(dec.lengths)[1:])

# %% [markdown]
# Block route against a direct diagonalisation of the whole window.

# %%
ev = eigvalsh_tridiagonal(c.b, c.a[:-1])
E = np.linspace(ev[0] - 0.1, ev[-1] + 0.1, 100)
direct = np.searchsorted(ev, E, side="right") / len(ev)
print("sup |block IDS - direct IDS| =", np.max(np.abs(block_ids(dec, E) - direct)))

# %% [markdown]
# Right after a zero of a, the unstable direction is exactly e1.

# %%
n = int(dec.singular[0])
sec, _ = unstable_section(0.3, sys, p, q, iterate(sys, pt, n + 1))
print("theta after the first zero:", sec.theta)
