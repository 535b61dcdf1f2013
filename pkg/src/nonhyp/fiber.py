"""Fiber dynamics: circle diffeomorphisms, SL(2,R) projective actions,
word compositions, and Lyapunov exponents of matrix cocycles.

Conventions: the circle is [0,1); the projective line is parametrized by
x in [0,1) via the angle pi*x, so projective derivatives coincide with
circle derivatives.  Symbols are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .circle import wrap
from .errors import Inconclusive, NotHyperbolic

_DET_TOL = 1e-12
_TRACE_TOL = 1e-12


class CircleMap:
    """Orientation-preserving circle diffeomorphism.

    eval/deriv accept scalars or numpy arrays; deriv is everywhere
    positive; norm_bound dominates |f'| and |(f^-1)'| globally.
    """

    def eval(self, x):
        raise NotImplementedError

    def deriv(self, x):
        raise NotImplementedError

    def inverse(self, x):
        raise NotImplementedError

    @property
    def norm_bound(self):
        raise NotImplementedError

    def log_deriv(self, x):
        return np.log(self.deriv(x))

    def inverse_map(self):
        return _InverseMap(self)


class _InverseMap(CircleMap):
    def __init__(self, base):
        self.base = base

    def eval(self, x):
        return self.base.inverse(x)

    def deriv(self, x):
        return 1.0 / self.base.deriv(self.base.inverse(x))

    def inverse(self, x):
        return self.base.eval(x)

    @property
    def norm_bound(self):
        return self.base.norm_bound


class Rotation(CircleMap):
    """Rigid rotation x -> x + rho."""

    def __init__(self, rho):
        self.rho = float(rho)

    def eval(self, x):
        if isinstance(x, float):
            return (x + self.rho) % 1.0
        return wrap(x + self.rho)

    def deriv(self, x):
        if isinstance(x, float):
            return 1.0
        return np.ones_like(np.asarray(x, dtype=float))

    def inverse(self, x):
        if isinstance(x, float):
            return (x - self.rho) % 1.0
        return wrap(x - self.rho)

    @property
    def norm_bound(self):
        return 1.0


class NorthSouthMap(CircleMap):
    """Analytic diffeo x -> x + a*sin(2 pi x)/(2 pi), |a| < 1.

    For a > 0 the fixed point 0 repels (f' = 1+a) and 1/2 attracts
    (f' = 1-a); the inverse is found by monotone Newton iteration.
    """

    def __init__(self, a):
        if not abs(a) < 1:
            raise ValueError("|a| < 1 required for a diffeomorphism")
        self.a = float(a)

    def eval(self, x):
        if isinstance(x, float):
            return (x + self.a * math.sin(2 * math.pi * x) / (2 * math.pi)) % 1.0
        return wrap(x + self.a * np.sin(2 * np.pi * np.asarray(x, dtype=float)) / (2 * np.pi))

    def deriv(self, x):
        if isinstance(x, float):
            return 1.0 + self.a * math.cos(2 * math.pi * x)
        return 1.0 + self.a * np.cos(2 * np.pi * np.asarray(x, dtype=float))

    def inverse(self, x):
        x = np.asarray(x, dtype=float)
        y = x.copy()
        for _ in range(60):
            lift = y + self.a * np.sin(2 * np.pi * y) / (2 * np.pi)
            err = np.mod(lift - x + 0.5, 1.0) - 0.5
            if np.all(np.abs(err) < 1e-14):
                break
            y = y - err / self.deriv(y)
        return wrap(y)

    @property
    def norm_bound(self):
        return 1.0 / (1.0 - abs(self.a))


class MatrixSL2:
    """2x2 real matrix with determinant one."""

    def __init__(self, a, b, c, d):
        self.mat = np.array([[a, b], [c, d]], dtype=float)
        det = a * d - b * c
        if abs(det - 1.0) > _DET_TOL:
            raise ValueError(f"determinant {det} differs from 1")

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=float).reshape(2, 2)
        return cls(arr[0, 0], arr[0, 1], arr[1, 0], arr[1, 1])

    @classmethod
    def rotation(cls, theta):
        c, s = math.cos(theta), math.sin(theta)
        return cls(c, -s, s, c)

    @classmethod
    def diagonal(cls, lam):
        return cls(lam, 0.0, 0.0, 1.0 / lam)

    @property
    def trace(self):
        return float(self.mat[0, 0] + self.mat[1, 1])

    def inverse(self):
        a, b, c, d = self.mat.ravel()
        return MatrixSL2(d, -b, -c, a)

    def __matmul__(self, other):
        return MatrixSL2.from_array(self.mat @ other.mat)

    def singular_values(self):
        g = self.mat.T @ self.mat
        t = g[0, 0] + g[1, 1]
        disc = math.sqrt(max(t * t - 4.0, 0.0))  # det g = 1
        smax = math.sqrt((t + disc) / 2.0)
        return smax, 1.0 / smax

    def to_list(self):
        return [float(v) for v in self.mat.ravel()]


def classify(matrix, tol=_TRACE_TOL):
    """Trace trichotomy: |tr| > 2 hyperbolic, < 2 elliptic, = 2 parabolic."""
    t = abs(matrix.trace)
    if abs(t - 2.0) <= tol:
        return "parabolic"
    return "hyperbolic" if t > 2.0 else "elliptic"


def _angles_to_vectors(x):
    th = np.pi * np.asarray(x, dtype=float)
    return np.cos(th), np.sin(th)


class ProjectiveMap(CircleMap):
    """Projective action v -> Av/|Av| on P^1, in the x = angle/pi chart.

    The derivative is the closed form 1/|A v(x)|^2 (determinant one);
    finite differences are used only as a test oracle.
    """

    def __init__(self, matrix):
        self.matrix = matrix
        m = matrix.mat
        self._a, self._b, self._c, self._d = (
            float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1])
        )
        self._inv = None

    def eval(self, x):
        if isinstance(x, float):
            th = math.pi * x
            c, s = math.cos(th), math.sin(th)
            return (math.atan2(self._c * c + self._d * s,
                               self._a * c + self._b * s) / math.pi) % 1.0
        c, s = _angles_to_vectors(x)
        a = self.matrix.mat
        w0 = a[0, 0] * c + a[0, 1] * s
        w1 = a[1, 0] * c + a[1, 1] * s
        return wrap(np.arctan2(w1, w0) / np.pi)

    def deriv(self, x):
        if isinstance(x, float):
            th = math.pi * x
            c, s = math.cos(th), math.sin(th)
            w0 = self._a * c + self._b * s
            w1 = self._c * c + self._d * s
            return 1.0 / (w0 * w0 + w1 * w1)
        c, s = _angles_to_vectors(x)
        a = self.matrix.mat
        w0 = a[0, 0] * c + a[0, 1] * s
        w1 = a[1, 0] * c + a[1, 1] * s
        return 1.0 / (w0 * w0 + w1 * w1)

    def inverse(self, x):
        if self._inv is None:
            self._inv = ProjectiveMap(self.matrix.inverse())
        return self._inv.eval(x)

    @property
    def norm_bound(self):
        smax, _ = self.matrix.singular_values()
        return smax * smax


class FiberFamily:
    """Ordered family of fiber maps; symbols are 1-based."""

    def __init__(self, maps):
        maps = list(maps)
        if not maps:
            raise ValueError("need at least one fiber map")
        self.maps = maps

    @classmethod
    def projective(cls, matrices):
        return cls([ProjectiveMap(m) for m in matrices])

    @property
    def N(self):
        return len(self.maps)

    @property
    def norm_bound(self):
        return max(m.norm_bound for m in self.maps)

    def map(self, symbol):
        return self.maps[symbol - 1]

    def apply(self, symbol, x):
        return self.map(symbol).eval(x)

    def apply_word(self, word, x):
        for sym in word:
            x = self.map(sym).eval(x)
        return x

    def apply_word_inverse(self, word, x):
        for sym in reversed(word):
            x = self.map(sym).inverse(x)
        return x


class ComposedMap(CircleMap):
    """Composition f_{w_{k-1}} o ... o f_{w_0}, with prefix derivatives."""

    def __init__(self, family, word):
        self.family = family
        self.word = tuple(word)

    def eval(self, x):
        return self.family.apply_word(self.word, x)

    def prefix_log_derivs(self, x):
        """log|(f^k)'(x)| for k = 1..len(word)."""
        out = np.empty(len(self.word))
        total = 0.0
        for k, sym in enumerate(self.word):
            m = self.family.map(sym)
            total += float(np.log(m.deriv(x)))
            out[k] = total
            x = float(m.eval(x))
        return out

    def log_deriv(self, x):
        total = 0.0
        for sym in self.word:
            m = self.family.map(sym)
            total += float(np.log(m.deriv(x)))
            x = float(m.eval(x))
        return total

    def deriv(self, x):
        return np.exp(self.log_deriv(x))

    def inverse(self, x):
        return self.family.apply_word_inverse(self.word, x)

    @property
    def norm_bound(self):
        return self.family.norm_bound ** len(self.word)


def compose_word(family, word):
    return ComposedMap(family, word)


class ExponentSample(NamedTuple):
    word: tuple
    x: float
    n: int
    value: float


def finite_time_exponent(family, word, x):
    """Per-step log-derivative of the word composition at x."""
    if len(word) == 0:
        raise ValueError("empty word")
    return compose_word(family, word).log_deriv(x) / len(word)


def _spectral_norms(mats):
    """2-norms of a (T,2,2) stack, via the closed-form top singular value."""
    g = np.einsum("tji,tjk->tik", mats, mats)
    tr = g[:, 0, 0] + g[:, 1, 1]
    det = np.linalg.det(mats) ** 2
    disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
    return np.sqrt((tr + disc) / 2.0)


def lyapunov_upper_batch(matrices, symbols):
    """(1/n) log ||A_{xi_{n-1}} ... A_{xi_0}|| for each row of `symbols`.

    Products renormalize by their max-abs entry every step; the discarded
    factors accumulate as compensated log sums, so no overflow occurs at
    any horizon.
    """
    symbols = np.asarray(symbols, dtype=np.int64)
    if symbols.ndim == 1:
        symbols = symbols[None, :]
    trials, n = symbols.shape
    mats = np.stack([m.mat for m in matrices])
    prod = np.broadcast_to(np.eye(2), (trials, 2, 2)).copy()
    logs = np.zeros(trials)
    comp = np.zeros(trials)  # Kahan compensation
    for t in range(n):
        step = mats[symbols[:, t] - 1]
        prod = np.einsum("tij,tjk->tik", step, prod)
        scale = np.max(np.abs(prod), axis=(1, 2))
        prod /= scale[:, None, None]
        term = np.log(scale) - comp
        tot = logs + term
        comp = (tot - logs) - term
        logs = tot
    logs += np.log(_spectral_norms(prod))
    return logs / n


def lyapunov_upper(matrices, symbols, n=None):
    """Scalar upper Lyapunov exponent along one symbol stream."""
    symbols = np.asarray(symbols, dtype=np.int64)
    if n is not None:
        symbols = symbols[:n]
    return float(lyapunov_upper_batch(matrices, symbols)[0])


def sl2_product(matrices, symbols):
    """Renormalized product: returns (P_normalized, log_scale) with
    A_{xi_{n-1}} ... A_{xi_0} = exp(log_scale) * P_normalized."""
    prod = np.eye(2)
    log_scale = 0.0
    for s in symbols:
        prod = matrices[s - 1].mat @ prod
        scale = np.max(np.abs(prod))
        prod /= scale
        log_scale += math.log(scale)
    return prod, log_scale


def sl2_power(matrix, n):
    """Renormalized n-th power by binary exponentiation."""
    result, log_r = np.eye(2), 0.0
    base, log_b = matrix.mat.copy(), 0.0
    k = n
    while k:
        if k & 1:
            result = base @ result
            log_r += log_b
            s = np.max(np.abs(result))
            result /= s
            log_r += math.log(s)
        base = base @ base
        log_b *= 2
        s = np.max(np.abs(base))
        base /= s
        log_b += math.log(s)
        k >>= 1
    return result, log_r


def projective_orbit_exponent(prod, log_scale, x):
    """(1/n)-unscaled fiber log-derivative of the projective action of a
    renormalized product at angle chart x: log|f'(x)| = -2 log|P v(x)|."""
    c, s = _angles_to_vectors(x)
    w0 = prod[0, 0] * c + prod[0, 1] * s
    w1 = prod[1, 0] * c + prod[1, 1] * s
    return -2.0 * (log_scale + 0.5 * np.log(w0 * w0 + w1 * w1))


@dataclass
class DictionaryReport:
    """Outcome of the cocycle exponent dictionary check."""

    lambda1: float
    case: str  # "zero" or "positive"
    v0: float | None
    sample_angles: np.ndarray
    sample_exponents: np.ndarray
    v0_exponent: float | None
    tol: float
    ok: bool


def exponent_dictionary_check(
    matrices, xi_plus, n, v_samples=8, stab_rtol=0.05, zero_tol=1e-3, band_tol=None
):
    """Check the dictionary between lambda_1 and fiber exponents.

    lambda_1 estimates at horizons n/2 and n must agree to stab_rtol,
    else Inconclusive.  With alpha = lambda_1: alpha ~ 0 forces all fiber
    exponents ~ 0; alpha > 0 forces +2 alpha at the maximizing direction
    v0 and -2 alpha at the other samples.
    """
    xi = np.asarray(list(xi_plus)[:n], dtype=np.int64)
    if xi.size < n:
        raise ValueError("stream shorter than horizon")
    half = n // 2
    lam_half = lyapunov_upper(matrices, xi[:half])
    prod, log_scale = sl2_product(matrices, xi)
    lam = (log_scale + math.log(_spectral_norms(prod[None])[0])) / n
    if abs(lam - lam_half) / max(abs(lam), zero_tol) > stab_rtol:
        raise Inconclusive(
            f"lambda1 moved {lam_half:.6g} -> {lam:.6g} between horizons {half} and {n}"
        )
    if band_tol is None:
        band_tol = max(5.0 / n, 10 * zero_tol)

    if isinstance(v_samples, int):
        angles = wrap(np.linspace(0.05, 1.05, v_samples, endpoint=False))
    else:
        angles = np.asarray(v_samples, dtype=float)
    exps = projective_orbit_exponent(prod, log_scale, angles) / n

    if lam <= zero_tol:
        ok = bool(np.all(np.abs(exps) <= band_tol + 2 * zero_tol))
        return DictionaryReport(lam, "zero", None, angles, exps, None, band_tol, ok)

    # Maximizer of |(f^n)'| = minimizer of |P v|: bottom right-singular
    # direction of the product.  At that direction |P v| equals the least
    # singular value, whose double-precision image in the normalized
    # product underflows at these horizons, so the exponent is taken from
    # the singular values (det 1: sigma_min = 1/sigma_max).
    g = prod.T @ prod
    evals, evecs = np.linalg.eigh(g)
    v_min = evecs[:, 0]
    v0 = wrap(math.atan2(v_min[1], v_min[0]) / math.pi)
    e0 = 2.0 * (log_scale + math.log(_spectral_norms(prod[None])[0])) / n
    circ_sep = np.minimum(np.abs(angles - v0), 1 - np.abs(angles - v0))
    generic = exps[circ_sep > 0.02]
    ok = abs(e0 - 2 * lam) <= band_tol and bool(
        np.all(np.abs(generic + 2 * lam) <= band_tol)
    )
    return DictionaryReport(lam, "positive", v0, angles, exps, e0, band_tol, ok)


def expansion_regions(matrix, grid=4096):
    """Partition of P^1 (angle chart) into derivative-<1 and >1 arcs."""
    from .circle import Arc

    if classify(matrix) != "hyperbolic":
        raise NotHyperbolic(f"trace {matrix.trace:.6g} is not hyperbolic")
    pm = ProjectiveMap(matrix)
    xs = np.linspace(0.0, 1.0, grid, endpoint=False)
    d = pm.deriv(xs)
    minus, plus = [], []
    for sign, sink in ((d < 1.0, minus), (d > 1.0, plus)):
        idx = np.flatnonzero(sign)
        if idx.size == 0:
            continue
        if idx.size == grid:
            sink.append(Arc.full())
            continue
        breaks = np.flatnonzero(np.diff(idx) > 1)
        runs = np.split(idx, breaks + 1)
        # Merge a run touching the seam with one touching the end.
        if len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == grid - 1:
            runs[0] = np.concatenate([runs[-1], runs[0] + grid])
            runs.pop()
        for run in runs:
            lo = xs[run[0] % grid]
            sink.append(Arc.from_endpoints(lo, wrap(lo + (len(run) - 1) / grid)))
    return minus, plus
