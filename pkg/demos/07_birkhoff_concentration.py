"""Birkhoff averages along cascade orbits concentrate near the reference
integral, and level integrals converge as the levels deepen.

Orbit windows start at codeword boundaries of i.i.d.-uniform draws; the
reference integral comes from level 0 with ten times the trials.  The
exponent estimates track the certified bands toward zero.
"""

import warnings

import numpy as np

from nonhyp.blending import find_blending
from nonhyp.cascade import build_cascade
from nonhyp.fiber import FiberFamily, NorthSouthMap, Rotation
from nonhyp.measures import (
    battery,
    birkhoff_concentration_battery,
    exponent_of_level,
    sample_orbit,
    weakstar_diagnostic,
)
from nonhyp.skeleton import (
    MeasureSampler,
    build_initial_cifs,
    estimate_measure_stats,
    extract_skeleton,
)

family = FiberFamily([NorthSouthMap(0.6), Rotation(np.sqrt(2) - 1)])
sampler = MeasureSampler(weights=np.array([0.6, 0.4]), seed=5)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    bl, _, _ = find_blending(family, centers=32, deltas=(2**-6,),
                             depth_cap=60, beam_width=24, shortlist=3)
    stats = estimate_measure_stats(sampler, family, horizon=400, trials=200,
                                   seed=5)
    sk = extract_skeleton(sampler, family, n=8, eps_E=abs(stats.alpha) * 0.42,
                          eps_H=0.6, alpha=stats.alpha, budget=400_000, seed=5)
    code, cert, used, _ = build_initial_cifs(sk, family, bl, seed=5, grid_pts=9)
    levels = build_cascade(code, cert, used, family, m_schedule=[3, 3], seed=5,
                           stat_samples=80, verify_samples=24)

# a sampled orbit is reproducible and consistent with the fiber maps
orbit = sample_orbit(family, levels[1], length=100, seed=4)
print("orbit spot check:", orbit.spot_check(family))

# per-level exponents head toward zero inside their bands
for lvl in levels:
    rep = exponent_of_level(family, lvl, trials=150, seed=3 + lvl.n)
    print(f"level {lvl.n}: exponent {rep.estimate:+.4f} +- {rep.sem:.4f} "
          f"(band {rep.band[0]:+.4f}..{rep.band[1]:+.4f})")

# concentration of five observables over mean-roof windows
reports = birkhoff_concentration_battery(family, levels, n=2, ell=1,
                                         observables=battery(), eps=0.3,
                                         trials=400, seed=9)
print()
for rep in reports:
    print(f"{rep.observable:7s}: fraction within eps of reference "
          f"{rep.fraction_within:.3f} (reference {rep.reference:+.4f})")

# integrals settle across levels (weak-star diagnostics on the battery)
diag = weakstar_diagnostic(family, levels, trials=150, seed=11)
print("\nsuccessive integral differences per observable:")
for i, name in enumerate(diag.names):
    print(f"{name:7s}: " + " -> ".join(f"{d:.4f}" for d in diag.diffs[:, i]))
print("decaying:", diag.decaying)
