"""SL(2,R) cocycles on the projective line: Lyapunov exponents and the
fiber-exponent dictionary.

For a constant hyperbolic matrix the upper exponent is log of the leading
eigenvalue; projective fiber exponents are +2 lambda1 at the maximizing
direction and -2 lambda1 everywhere else.  A rotation gives zero across
the board, and a random mix of the two is positive (no invariant
directions survive the mixing).
"""

import numpy as np

from nonhyp.fiber import (
    FiberFamily,
    MatrixSL2,
    classify,
    expansion_regions,
    exponent_dictionary_check,
    finite_time_exponent,
    lyapunov_upper,
    lyapunov_upper_batch,
)

diag = MatrixSL2.diagonal(2.0)
rot = MatrixSL2.rotation(1.0)
print("classify diag(2,1/2):", classify(diag))       # hyperbolic
print("classify R(1 rad):  ", classify(rot))         # elliptic
print("classify shear:     ", classify(MatrixSL2(1, 1, 0, 1)))

lam = lyapunov_upper([diag], np.ones(1000, dtype=int))
print(f"lambda1 of constant diag: {lam:.12f} (log 2 = {np.log(2):.12f})")

# fiber exponents in the angle chart x = theta/pi: e1 at 0, e2 at 1/2
fam = FiberFamily.projective([diag])
print("exponent at e1 direction:", finite_time_exponent(fam, (1,), 0.0))
print("exponent at e2 direction:", finite_time_exponent(fam, (1,), 0.5))

# the dictionary check estimates lambda1, finds the maximizing direction,
# and verifies the +2/-2 case split at the sampled directions
rep = exponent_dictionary_check([diag], [1] * 1000, 1000)
print(f"dictionary: case={rep.case} v0={rep.v0:.4f} ok={rep.ok}")

# where the projective action expands and contracts
minus, plus = expansion_regions(diag)
print("contracting near:", [round(arc.center, 3) for arc in minus])
print("expanding near:  ", [round(arc.center, 3) for arc in plus])

# mixing in the rotation gives a positive exponent (qualitative check)
rng = np.random.default_rng(7)
lams = lyapunov_upper_batch([diag, rot], rng.integers(1, 3, size=(20, 20000)))
print(f"two-matrix cocycle: lambda1 = {lams.mean():.4f} +- {lams.std():.4f}")
