"""Build a connectivity map from a few drives and compare the three schemes.

Run with ``python demos/01_map_and_schemes.py``.
"""

# %%
import numpy as np

from catsim import (
    DataSourceConfig,
    SchemeConfig,
    build_map,
    calibrate_defaults,
    generate_ensemble,
    mean_sinr_at_tx,
    predict_horizon_mean,
    run_campaign,
    urban_hotspot_profile,
)

profile = urban_hotspot_profile()
print(f"route: {profile.route_length / 1000:.1f} km, {len(profile.hotspots)} hotspots")

# %% [markdown]
# Five drives build the map; five different drives are simulated. Both sets
# share the static shadowing of the route (it comes from the master seed) but
# each drive has its own fast fading.

# %%
seed = 7
map_drives = generate_ensemble(profile, 5, seed, first=5)
eval_drives = generate_ensemble(profile, 5, seed)
cmap = build_map(map_drives, bin_width=25.0)
print(f"{len(cmap.bin_start)} bins, SINR range {cmap.mean_sinr.min():.1f} .. {cmap.mean_sinr.max():.1f} dB")

# %%
# what pCAT sees at a few points of the first drive: now vs. the next 10 s
tr = eval_drives[0]
for k in (100, 400, 700):
    ahead = predict_horizon_mean(cmap, tr.distance[k], tr.speeds[k], 10.0)
    print(f"t={tr.t[k]:5.0f} s  d={tr.distance[k]:7.1f} m  now={tr.sinr[k]:5.1f} dB  ahead={ahead:5.1f} dB")

# %%
cfg = SchemeConfig()
channel = calibrate_defaults()
result = run_campaign(eval_drives, ["periodic", "cat", "pcat"], cfg, channel, DataSourceConfig(), seed, cmap=cmap)

for scheme in result.schemes():
    gaps = np.concatenate([np.diff([e.start_t for e in r.events]) for r in result.for_scheme(scheme)])
    print(f"{scheme:<9} mean SINR at upload {mean_sinr_at_tx(result, scheme):5.2f} dB, "
          f"gaps {gaps.min():.0f}..{gaps.max():.0f} s")
