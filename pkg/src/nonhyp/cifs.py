"""Contracting word systems with quantifiers: certificate verification,
attractor points, exponent spectra, and distortion control.

A certificate (J, K, alpha0, alpha, eps) asserts that every codeword maps
J into itself, that all partial derivatives along concatenations obey
|(f^k)'| <= K e^{k alpha0}, and that per-word mean log-derivatives on J
stay inside (alpha - eps, alpha + eps).  The all-m quantifier of the
middle clause is checked up to a finite m plus the inductive slack it
buys; every report says so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circle import Arc, circ_dist, image_arc
from .errors import (
    CertificateViolated,
    HorizonCapExceeded,
    HypothesisFails,
    NoConvergence,
)
from ._util import spawn_rngs

WORD_SAMPLE_THRESHOLD = 100_000
WORD_SAMPLE_SIZE = 10_000
ATTRACTOR_TOL = 1e-10


@dataclass(frozen=True)
class CifsCertificate:
    """Quantifiers (J; K, alpha0, alpha, eps) of a contracting system."""

    J: Arc
    K: float
    alpha0: float
    alpha: float
    eps: float

    def __post_init__(self):
        if self.K < 1.0:
            raise ValueError("K must be >= 1")
        if not self.alpha0 < 0 or not self.alpha < 0:
            raise ValueError("alpha0 and alpha must be negative")
        if not 0 < self.eps < -self.alpha:
            raise ValueError("eps must lie in (0, |alpha|)")

    def halved(self):
        """Quantifiers after one repeat-and-tail step."""
        return CifsCertificate(
            self.J, self.K, self.alpha0 / 2, self.alpha / 2, self.eps / 2
        )

    def contraction_budget(self, tol, arc_len=None):
        """Symbols needed before diam(f^n J) <= tol: K e^{n a0} |J| <= tol."""
        size = self.J.length if arc_len is None else arc_len
        need = (math.log(tol) - math.log(size) - math.log(self.K)) / self.alpha0
        return max(1, int(math.ceil(need)))

    def to_json(self):
        return {
            "J": [self.J.center, self.J.length],
            "K": self.K,
            "alpha0": self.alpha0,
            "alpha": self.alpha,
            "eps": self.eps,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(Arc(*obj["J"]), obj["K"], obj["alpha0"], obj["alpha"], obj["eps"])


@dataclass
class VerifyReport:
    """Worst margins per clause; nonnegative margins mean pass."""

    containment_margin: float
    contraction_margin: float
    spectrum_margin: float
    words_checked: int
    words_total: int
    m_checked: int
    note: str = ""
    spectrum_observed: tuple = (0.0, 0.0)

    @property
    def ok(self):
        return (
            self.containment_margin >= 0
            and self.contraction_margin >= 0
            and self.spectrum_margin >= 0
        )


def _word_arc(family, word, arc):
    for sym in word:
        arc = image_arc(family.map(sym), arc)
    return arc


def verify_words(
    family,
    words,
    cert,
    grid_pts=17,
    m_check=4,
    tuples_per_m=24,
    seed=0,
    raise_on_fail=True,
    note="",
):
    """Check certificate clauses on an explicit list of words.

    (a) containment of word images of J; (c) per-word mean exponents on a
    grid of J; (b) the K e^{k alpha0} envelope along sampled m-tuples for
    m <= m_check.  Clause (b) for larger m follows inductively from (c)
    once per-word exponents are certified, which is the slack noted in
    the report.
    """
    words = list(words)
    if not words:
        raise ValueError("no words to verify")
    rng = np.random.default_rng(seed)
    xs = cert.J.grid(grid_pts)

    worst_contain = math.inf
    worst_spec = math.inf
    spec_lo, spec_hi = math.inf, -math.inf
    for w in words:
        img = _word_arc(family, w, cert.J)
        margin = (cert.J.length - img.length) - 2 * circ_dist(img.center, cert.J.center)
        if not cert.J.contains_arc(img, tol=1e-12):
            margin = min(margin, -1e-12)
        worst_contain = min(worst_contain, margin)
        if margin < 0 and raise_on_fail:
            raise CertificateViolated("a", {"word": w, "image": (img.center, img.length)})
        logs = np.array([_orbit_log_deriv(family, w, float(x)) for x in xs])
        mean = logs / len(w)
        spec_lo = min(spec_lo, float(mean.min()))
        spec_hi = max(spec_hi, float(mean.max()))
        margin_c = float(min(mean.min() - (cert.alpha - cert.eps),
                             (cert.alpha + cert.eps) - mean.max()))
        worst_spec = min(worst_spec, margin_c)
        if margin_c < 0 and raise_on_fail:
            x_bad = float(xs[int(np.argmin(mean)) if mean.min() - (cert.alpha - cert.eps)
                             < (cert.alpha + cert.eps) - mean.max()
                             else int(np.argmax(mean))])
            raise CertificateViolated(
                "c", {"word": w, "x": x_bad, "exponent_range": (mean.min(), mean.max())}
            )

    log_k = math.log(cert.K)
    worst_env = math.inf
    for m in range(1, m_check + 1):
        n_tuples = min(tuples_per_m, len(words) ** m)
        for _ in range(n_tuples):
            tup = [words[int(i)] for i in rng.integers(0, len(words), size=m)]
            flat = sum((tuple(w) for w in tup), ())
            for x in (xs[0], xs[len(xs) // 2], xs[-1]):
                prefix = _prefix_log_derivs(family, flat, float(x))
                ks = np.arange(1, len(flat) + 1)
                margins = log_k + ks * cert.alpha0 - prefix
                margin_b = float(margins.min())
                worst_env = min(worst_env, margin_b)
                if margin_b < 0 and raise_on_fail:
                    k_bad = int(np.argmin(margins)) + 1
                    raise CertificateViolated(
                        "b", {"tuple": tup, "x": float(x), "k": k_bad,
                              "log_deriv": float(prefix[k_bad - 1])}
                    )
    return VerifyReport(
        containment_margin=worst_contain,
        contraction_margin=worst_env,
        spectrum_margin=worst_spec,
        words_checked=len(words),
        words_total=len(words),
        m_checked=m_check,
        note=note or (
            f"clause (b) checked for m <= {m_check}; larger m covered by the "
            "per-word spectrum inductively"
        ),
        spectrum_observed=(spec_lo, spec_hi),
    )


def verify_cifs(family, code, cert, grid_pts=17, m_check=4, tuples_per_m=24,
                seed=0, raise_on_fail=True):
    """Verify a materialized code, sampling words above the size threshold."""
    words = list(code.words)
    note = ""
    if len(words) > WORD_SAMPLE_THRESHOLD:
        rng = np.random.default_rng(seed)
        idx = rng.choice(len(words), size=WORD_SAMPLE_SIZE, replace=False)
        words = [words[int(i)] for i in idx]
        note = f"sampled {WORD_SAMPLE_SIZE} of {len(code.words)} words"
    rep = verify_words(family, words, cert, grid_pts, m_check, tuples_per_m,
                       seed, raise_on_fail, note)
    rep.words_total = len(code.words)
    return rep


def _orbit_log_deriv(family, word, x):
    total = 0.0
    for sym in word:
        m = family.map(sym)
        total += math.log(float(m.deriv(x)))
        x = float(m.eval(x))
    return total


def _prefix_log_derivs(family, word, x):
    out = np.empty(len(word))
    total = 0.0
    for k, sym in enumerate(word):
        m = family.map(sym)
        total += math.log(float(m.deriv(x)))
        out[k] = total
        x = float(m.eval(x))
    return out


@dataclass
class Horseshoe:
    """A verified code together with its certificate."""

    code: object
    certificate: CifsCertificate
    report: VerifyReport

    @property
    def R(self):
        return self.code.max_len

    def to_json(self):
        return {
            "code": self.code.to_json(),
            "certificate": self.certificate.to_json(),
            "margins": {
                "containment": self.report.containment_margin,
                "contraction": self.report.contraction_margin,
                "spectrum": self.report.spectrum_margin,
            },
            "note": self.report.note,
        }


@dataclass
class AttractorPoint:
    x: float
    residual: float
    symbols_used: int


def attractor_point(family, words_window, x0, tol=ATTRACTOR_TOL, cert=None,
                    second_seed=None):
    """Limit point of backward compositions along a window of codewords.

    The window lists words oldest first: the returned point approximates
    f_[w_{-1}] o ... o f_[w_{-n}] (x0).  Contraction makes the limit
    independent of x0; the residual is the distance from a second seed's
    image, and symbols_used records when it first dipped below tol.
    """
    window = list(words_window)
    if not window:
        raise ValueError("empty window")
    total_symbols = sum(len(w) for w in window)
    if second_seed is None:
        if cert is not None:
            j = cert.J
            second_seed = j.lo if circ_dist(x0, j.lo) > circ_dist(x0, j.hi) else j.hi
        else:
            second_seed = (float(x0) + 0.01) % 1.0
    x_a, x_b = float(x0), float(second_seed)
    consumed, first_hit = 0, None
    for w in window:
        x_a = family.apply_word(w, x_a)
        x_b = family.apply_word(w, x_b)
        consumed += len(w)
        if first_hit is None and circ_dist(x_a, x_b) <= tol:
            first_hit = consumed
    residual = float(circ_dist(x_a, x_b))
    if residual > tol:
        raise NoConvergence(
            f"two-seed residual {residual:.3g} above tol {tol:g} after "
            f"{total_symbols} symbols"
        )
    return AttractorPoint(x_a, residual, first_hit or total_symbols)


@dataclass
class SpectrumReport:
    low: float
    high: float
    mean: float
    samples: int

    def within(self, alpha, eps):
        return alpha - eps < self.low and self.high < alpha + eps


def exponent_spectrum(family, horseshoe, trials=32, words_per_trial=32, seed=0):
    """Per-word exponents observed along attractor orbits."""
    code = horseshoe.code
    cert = horseshoe.certificate
    rngs = spawn_rngs(seed, trials)
    values = []
    burn = max(2, cert.contraction_budget(ATTRACTOR_TOL) // code.min_len + 1)
    for rng in rngs:
        back = [code.words[int(i)] for i in rng.integers(0, code.size, size=burn)]
        x = attractor_point(family, back, cert.J.center, tol=1e-8).x
        for i in rng.integers(0, code.size, size=words_per_trial):
            w = code.words[int(i)]
            values.append(_orbit_log_deriv(family, w, x) / len(w))
            x = family.apply_word(w, x)
    arr = np.asarray(values)
    return SpectrumReport(float(arr.min()), float(arr.max()), float(arr.mean()),
                          len(values))


def distortion_horizon(family, code, phi, tau, J=None, m_cap=4096,
                       tuples_per_m=12, pair_samples=9, seed=0):
    """Least m with Birkhoff sums over shared-cylinder points tau n-close.

    Observables read (current symbol, fiber point).  Points sharing the
    m-word cylinder and starting anywhere in J are compared directly; the
    search doubles m and then bisects to the least passing value.
    """
    J = J or Arc(0.5, 1.0)

    def max_gap(m):
        rng = np.random.default_rng([seed, m])
        worst = 0.0
        count = min(tuples_per_m, code.size**m)
        for _ in range(count):
            tup = [code.words[int(i)] for i in rng.integers(0, code.size, size=m)]
            flat = sum((tuple(w) for w in tup), ())
            n = len(flat)
            sums = []
            for y0 in J.grid(pair_samples):
                y, total = float(y0), 0.0
                for sym in flat:
                    total += float(phi(sym, y))
                    y = float(family.map(sym).eval(y))
                sums.append(total)
            worst = max(worst, (max(sums) - min(sums)) / n)
        return worst

    m = 1
    while m <= m_cap:
        if max_gap(m) < tau:
            break
        m *= 2
    else:
        raise HorizonCapExceeded(f"no horizon <= {m_cap} achieves tau = {tau}")
    lo, hi = max(1, m // 2), m
    while lo < hi:
        mid = (lo + hi) // 2
        if max_gap(mid) < tau:
            hi = mid
        else:
            lo = mid + 1
    return hi


def modulus_of_continuity(family, scale, grid=4096):
    """Empirical sup of |log f' (y) - log f' (x)| over |y - x| <= scale."""
    xs = np.arange(grid) / grid
    worst = 0.0
    for m in family.maps:
        base = np.log(np.asarray(m.deriv(xs), dtype=float))
        up = np.log(np.asarray(m.deriv((xs + scale) % 1.0), dtype=float))
        dn = np.log(np.asarray(m.deriv((xs - scale) % 1.0), dtype=float))
        worst = max(worst, float(np.max(np.abs(up - base))),
                    float(np.max(np.abs(dn - base))))
    return worst


def distortion_radius(family, word, x, K0, alpha, eps, r_cap=0.25, grid=4096,
                      y_samples=100, seed=0):
    """Largest dyadic r <= r_cap tolerating the widened derivative sandwich.

    Requires the base orbit to satisfy the eps/4 sandwich; the returned r
    has modulus(K0 r) <= eps/4 and the eps/2 sandwich re-checked at
    sampled y in B(x, r).
    """
    n = len(word)
    prefix = _prefix_log_derivs(family, word, float(x))
    ks = np.arange(1, n + 1)
    lo = -math.log(K0) + ks * (alpha - eps / 4)
    hi = math.log(K0) + ks * (alpha + eps / 4)
    if np.any(prefix < lo - 1e-12) or np.any(prefix > hi + 1e-12):
        raise HypothesisFails("base orbit violates its eps/4 sandwich")

    rng = np.random.default_rng(seed)
    r = r_cap
    while r > 1.0 / grid:
        if modulus_of_continuity(family, K0 * r, grid) <= eps / 4:
            ys = (float(x) + (rng.random(y_samples) - 0.5) * 2 * r) % 1.0
            lo_w = -math.log(K0) + ks * (alpha - eps / 2)
            hi_w = math.log(K0) + ks * (alpha + eps / 2)
            ok = True
            for y in ys:
                py = _prefix_log_derivs(family, word, float(y))
                if np.any(py < lo_w - 1e-12) or np.any(py > hi_w + 1e-12):
                    ok = False
                    break
            if ok:
                return r
        r /= 2
    return r
