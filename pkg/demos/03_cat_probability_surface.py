"""How the upload probability depends on channel quality, waiting time and z."""

# %%
import numpy as np

from catsim import SchemeConfig
from catsim.schemes import cat_probability, pcat_z

cfg = SchemeConfig()

# %%
# rows: SINR, columns: seconds since the last upload
dts = [20, 30, 60, 119, 120]
print("SINR  " + "".join(f"{dt:>9}" for dt in dts))
for s in (0, 10, 15, 20, 25, 30):
    print(f"{s:4d}  " + "".join(f"{cat_probability(s, dt, 1.0, cfg):9.4f}" for dt in dts))

# %% [markdown]
# pCAT raises the exponent when the road ahead looks better than now (wait)
# and lowers it when it looks worse (send soon).

# %%
for delta in (-10, -5, -1, 0, 1, 5, 10):
    z = pcat_z(15.0, delta, cfg)
    print(f"delta={delta:+3d} dB  z={z:5.2f}  p(15 dB, 60 s)={cat_probability(15.0, 60, z, cfg):.5f}")

# %%
s = np.linspace(0, 30, 7)
print(np.round([pcat_z(x, 3.0, cfg) for x in s], 3))
