"""From a sampled measure to a certified contracting word system.

Orbit windows whose derivative ladders fit the K0-sandwich form the
skeleton; windows based in the chosen blending interval are steered into
its core by connection words and become the initial codewords.  The
certificate (J; K, alpha0, alpha, eps) is then verified clause by clause.
"""

import warnings

import numpy as np

from nonhyp.blending import find_blending
from nonhyp.cifs import exponent_spectrum, Horseshoe, verify_cifs
from nonhyp.codes import is_disjoint
from nonhyp.fiber import FiberFamily, MatrixSL2
from nonhyp.skeleton import (
    MeasureSampler,
    build_initial_cifs,
    estimate_measure_stats,
    extract_skeleton,
)

family = FiberFamily.projective([MatrixSL2.diagonal(2.0), MatrixSL2.rotation(1.0)])
# weights biased toward the rotation: weak hyperbolicity is the regime
# where the construction has desk-scale margins
sampler = MeasureSampler(weights=np.array([0.25, 0.75]), seed=7)

stats = estimate_measure_stats(sampler, family, seed=7)
print(f"fiber exponent alpha = {stats.alpha:.4f} +- {stats.alpha_sem:.4f}")
print(f"base entropy h = {stats.entropy:.4f}")

bl, _, _ = find_blending(family, centers=64, deltas=(2**-6,), depth_cap=70,
                         beam_width=32, shortlist=4)

with warnings.catch_warnings():
    warnings.simplefilter("ignore")  # high rejection is expected at n=12
    sk = extract_skeleton(sampler, family, n=12, eps_E=abs(stats.alpha) * 0.4,
                          eps_H=0.45, alpha=stats.alpha, K0_cap=25.0,
                          budget=300_000, seed=7)
print(f"\nskeleton: {sk.size} distinct windows, fitted K0 = {sk.K0:.1f}, "
      f"L0 = {sk.L0:.1f}")
print("sandwich re-verifies:", sk.reverify(family))

code, cert, used, rep = build_initial_cifs(sk, family, bl, seed=7)
print(f"\ninitial system: {code.size} words, lengths {code.min_len}.."
      f"{code.max_len}, disjoint: {is_disjoint(code)}")
print(f"certificate: alpha = {cert.alpha:.4f}, eps = {cert.eps:.4f}, "
      f"K = {cert.K:.3g}")
print(f"J centered at {rep.center:.4f}, m_c = {rep.m_c}, L1 = {rep.L1:.1f}")

report = verify_cifs(family, code, cert, seed=99)
print(f"\nverification margins: containment {report.containment_margin:.4f}, "
      f"envelope {report.contraction_margin:.2f}, "
      f"spectrum {report.spectrum_margin:.4f}")

spec = exponent_spectrum(family, Horseshoe(code, cert, report), trials=16,
                         words_per_trial=32, seed=1)
print(f"observed spectrum [{spec.low:.4f}, {spec.high:.4f}] inside "
      f"({cert.alpha - cert.eps:.4f}, {cert.alpha + cert.eps:.4f}): "
      f"{spec.within(cert.alpha, cert.eps)}")
