"""A first look at the two synthetic environments and their reward surfaces.

Each of the five simulated years carries a Gaussian-mixture reward surface
over the unit square of intervention coverages. Exhaustive 40x40 scans show
the year-1 geometry: a main basin worth ~110, a secondary basin worth ~105,
and two penalty pits along the top edge.
"""

import numpy as np

from scarce_rl import Action, default_env_a, default_env_b, landscape_scan, year_reward_a
from scarce_rl.harness import export_landscape

config = default_env_a()

matrix = landscape_scan(config, year=1, grid_n=40)
print(f"year-1 scan: {matrix.size} cells, max {matrix.max():.2f}, mean {matrix.mean():.2f}")

axis = np.linspace(0, 1, 40)
i, j = np.unravel_index(np.argmax(matrix), matrix.shape)
print(f"best cell at ({axis[i]:.3f}, {axis[j]:.3f})")

for pit in [(0.2, 0.9), (0.8, 0.9)]:
    print(f"reward at the pit {pit}: {year_reward_a(1, Action(*pit), None, config):.1f}")

# later years modulate the surface by similarity to the previous action
same = year_reward_a(2, Action(0.3, 0.6), Action(0.3, 0.6), config)
far = year_reward_a(2, Action(0.3, 0.6), Action(0.9, 0.1), config)
print(f"year-2 at the main basin: {same:.1f} after repeating it, {far:.1f} after a far move")

# the history-mean environment shifts the effective action instead
config_b = default_env_b()
scan_b = landscape_scan(config_b, year=3, grid_n=40, context=[Action(0.3, 0.6)] * 2)
print(f"env_b year-3 max (history at the main basin): {scan_b.max():.2f}")

path = export_landscape(matrix, "landscape_env_a_year1.csv")
print(f"wrote {path} for plotting")
