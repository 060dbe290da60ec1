# %% [markdown]
# # Rotation numbers, dominated splitting and invariant sections
#
# Inside a gap the transfer-matrix cocycle is uniformly hyperbolic. We check
# this three ways: the sign-flip rotation number sits at 1 - k, the splitting
# test reports domination, and the stable/unstable directions are invariant.

# %%
import numpy as np

from gaplab import constant, cosine, rotation, sample_points
from gaplab.cocycle import dominated_splitting_test, rotation_numbers, section_residuals
from gaplab.ids import detect_gaps, dos_estimate

GOLDEN = (np.sqrt(5) - 1) / 2
amo = rotation(GOLDEN), constant(1.0), cosine(6.0)
pt = sample_points(amo[0], 11, 1)[0]

# %%
d = dos_estimate(*amo, seed=1, S=8, N=2000)
gaps = sorted(detect_gaps(d, 2e-3, 5e-3), key=lambda g: -g.width)[:5]
mids = [g.midpoint for g in gaps]
rho = rotation_numbers(mids, *amo, pt, 10_000)
for g, r in zip(gaps, rho):
    print(f"E={g.midpoint:+.4f}  rotation {r:.5f}  1-k {1 - g.label:.5f}")

# %% [markdown]
# One energy in a gap, one inside a band.

# %%
for E in (gaps[0].midpoint, 0.0):
    v = dominated_splitting_test(E, *amo)
    print(f"E={E:+.4f}: {v.status:14s} rho={v.rho}  min angle={v.min_angle:.2e}")

# %%
E = gaps[0].midpoint
for kind in ("unstable", "stable"):
    r = section_residuals(E, *amo, pt, steps=100, kind=kind)
    print(kind, "section residual over 100 steps:", r.max())
