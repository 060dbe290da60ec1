# %% [markdown]
# # Density of states and gap labels for the almost Mathieu family
#
# We pool eigenvalues of sampled truncations, look for gaps in the pooled
# spectrum, and compare each gap's IDS value against the label group of the
# golden rotation.

# %%
import time

import numpy as np

from gaplab import cosine, constant, rotation
from gaplab.ids import detect_gaps, dos_estimate, free_ids, ids_eval
from gaplab.labelling import label_group, match_label

GOLDEN = (np.sqrt(5) - 1) / 2

# %% [markdown]
# Warm up on the free matrix, where the IDS has a closed form.

# %%
free = rotation(GOLDEN), constant(1.0), constant(0.0)
d = dos_estimate(*free, seed=0, S=1, N=5000)
E = np.linspace(-2, 2, 400)
print("free IDS sup error:", np.max(np.abs(ids_eval(d, E) - free_ids(E))))

# %% [markdown]
# Now the coupling-3 almost Mathieu operator: b(n) = 6 cos(2 pi (w + n alpha)).

# %%
amo = rotation(GOLDEN), constant(1.0), cosine(6.0)
t = time.perf_counter()
d = dos_estimate(*amo, seed=1, S=8, N=2000)
gaps = sorted(detect_gaps(d, 2e-3, 5e-3), key=lambda g: -g.width)
print(f"{len(gaps)} stable gaps in {time.perf_counter() - t:.1f}s")

# %%
group = label_group(amo[0])
for g in gaps[:8]:
    m = match_label(g.label, group)
    print(f"[{g.lo:+.4f}, {g.hi:+.4f}]  k={g.label:.5f}  = {m.m[0]:+d}*alpha {m.n:+d}   residual {m.residual:.1e}")
