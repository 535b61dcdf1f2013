"""The repeat-and-tail cascade: exponents halve, entropy survives.

Level n words concatenate m_n previous-level words and append a tail: a
truncated expanding word that cancels half the accumulated contraction,
plus a connection word back into the core.  Certificates halve their
quantifiers level by level while the entropy drop stays inside the
geometric budget e^{-L1 |alpha|}.
"""

import warnings

import numpy as np

from nonhyp.blending import find_blending
from nonhyp.cascade import build_cascade, entropy_lower_bound, roof_assumption_check
from nonhyp.fiber import FiberFamily, NorthSouthMap, Rotation
from nonhyp.measures import exponent_of_level
from nonhyp.skeleton import (
    MeasureSampler,
    build_initial_cifs,
    estimate_measure_stats,
    extract_skeleton,
)

# a small synthetic family keeps this demo under a minute
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

for lvl in levels:
    c = lvl.certificate
    s = lvl.stats
    print(f"level {lvl.n}: {lvl.M} words, mean roof {s.mean_roof:.1f}, "
          f"mean tail {s.mean_tail:.1f}, certified band "
          f"({c.alpha - c.eps:.4f}, {c.alpha + c.eps:.4f})")

# sampled per-word exponents land in the halving bands
print()
for lvl in levels:
    rep = exponent_of_level(family, lvl, trials=200, seed=11 + lvl.n)
    print(f"level {lvl.n}: spectrum [{rep.low:.4f}, {rep.high:.4f}] "
          f"in band {rep.in_band}")

# roof growth obeys the sandwich with K = L1 |alpha|, and entropy obeys
# the geometric transfer bound
rc = roof_assumption_check(levels, seed=3)
print(f"\nroof checks ok: {rc['ok']} (K = {rc['K']:.3f}, L2 = {rc['L2']:.1f})")
for chk in entropy_lower_bound(levels, stats.entropy, 0.6):
    print(f"  {chk.name}: {chk.lhs:.4f} <= {chk.rhs:.4f} ({chk.ok})")
