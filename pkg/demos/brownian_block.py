"""
The Brownian block by Monte Carlo
=================================

Replace the coin flips by Brownian hitting times.  The law of
(S_sigma, X, S_T) is the discrete block's law, so the exact targets carry over.
"""

import numpy as np

from semistatic.continuous import ContinuousBlockParams, default_grid_step, mc_verify, simulate_path

params = ContinuousBlockParams(0.5, 2, 2.25, 2.75)

rng = np.random.default_rng(1)
path = simulate_path(params, default_grid_step(params), rng)
print(f"one path: {len(path.path)} steps, sigma at {path.sigma_index} (S = {path.s_sigma:+.0f}),"
      f" X = {path.x}, T at {path.T_index} (S_T = {path.s_T:+.2f})")

report = mc_verify(params, 100_000, seed=2024, path_samples=20_000)
for row in report.rows:
    print(f"  [{'ok ' if row.passed else 'FAIL'}] {row.name}: {row.estimate:.5g} (se {row.se:.2g}) vs {row.target:.5g}")
print("all within tolerance:", report.passed)
