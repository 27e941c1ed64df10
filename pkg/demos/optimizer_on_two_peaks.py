"""
Several optima from one run
===========================

The CAB optimizer keeps a historical memory of good positions that are at
least ``rho`` apart. On a function with two equally high peaks a single run
ends with both peaks in memory.
"""

import math

import numpy as np

from cab_ellipse.cab import CAB, Bounds, CabConfig

peaks = np.array([[0.25, 0.25], [0.75, 0.75]])


def two_peaks(x):
    return max(math.exp(-np.sum((x - c) ** 2) / 0.02) for c in peaks)


cab = CAB(Bounds([0, 0], [1, 1]), two_peaks, CabConfig(rho=0.02))
state = cab.run_state(seed=1)

for m in state.memory_h[:4]:
    print(np.round(m.position, 4), round(m.fitness, 6))

# %%
# The best memory fitness never drops from one generation to the next.

h = np.array(state.history)
print("monotone:", bool(np.all(np.diff(h) >= 0)), "final best:", h[-1])

# %%
# How often does a run hold both peaks within 0.05? A short tally:

hits = 0
for seed in range(20):
    mem = [m.position for m in cab.run(seed)]
    hits += all(min(np.linalg.norm(p - c) for p in mem) <= 0.05 for c in peaks)
print(f"both peaks found in {hits}/20 runs")
