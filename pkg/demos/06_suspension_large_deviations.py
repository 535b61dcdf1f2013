"""The abstract suspension model: roof entropy, concentration horizons,
and intermediate-floor address arithmetic.

Everything here is purely symbolic: alphabets with integer roofs.  The
entropy of the uniform suspension is log M over the mean roof; windowed
sums of roofs concentrate at explicit horizons; and the height of any
intermediate floor is a sum of constituent roofs along an address chain.
"""

import math

from nonhyp.suspension import (
    Address,
    RoofProfile,
    abramov_entropy,
    bernstein_horizon,
    delta_psi,
    floor_offset,
    large_dev_fraction,
    tail_mass_estimate,
)

prof = RoofProfile((2, 4))
print("roofs:", prof.R, " mean:", prof.mean)
print("entropy log M / mean R =", abramov_entropy(prof), "= log2/3 =",
      math.log(2) / 3)

# column sums of an observable over one fiber column
psi = lambda a, k: k
print("column sum over symbol 1 (roof 4): 0+1+2+3 =", delta_psi(prof, psi, 1))

# the concentration horizon from the stated exponential bound
for C, eps in ((1.0, 0.5), (1.0, 0.3), (3.0, 0.25)):
    print(f"N0(C={C}, eps={eps}) = {bernstein_horizon(C, eps)}")

# empirical all-window concentration improves with the horizon
prof2 = RoofProfile((1, 3))
for m in (4, 10, 40, 120):
    frac = large_dev_fraction(prof2, lambda a, k: 1.0, m=m, eps=0.3,
                              trials=20000, seed=2)
    print(f"m={m:4d}: all-window fraction {frac:.3f}")

# addresses point at intermediate floors; their heights are partial sums
m_schedule = [3, 2]
r0 = {0: 2, 1: 3, 2: 5}

def substitute(level, sym):
    return tuple(sym)

def roof(level, sym):
    if level == 0:
        return r0[sym]
    return sum(roof(level - 1, c) for c in sym) + 1  # one tail symbol

lvl1 = [(0, 1, 2), (2, 1, 0)]
window = [(lvl1[0], lvl1[1])]
for digits in ((0, 0), (1, 0), (2, 0), (0, 1), (2, 1)):
    s = floor_offset(window, Address(0, digits), m_schedule, roof, substitute)
    print(f"address {digits}: floor height {s}")

# tails occupy an explicit fraction of the suspension height
frac, bound = tail_mass_estimate([10.0, 33.0], [3], ell=0, L2=3.0)
print(f"tail mass above level 0: {frac:.4f} (= 1/11), bound {bound:.3f}")
