"""Empirical ergodic statistics on cascade levels: orbit sampling,
exponent tracking toward zero, Birkhoff-average concentration, and
weak-star convergence diagnostics.

Sampling draws level codewords i.i.d.-uniformly (the uniform Bernoulli
measure on the code is the desk surrogate for the level measure) and
starts fiber points on the sampled backward attractor.  Reference
integrals come from level 0 with ten times the trials of any comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._util import parallel_map, sem as _sem, spawn_rngs


@dataclass
class Observable:
    """Reads (current base symbol, fiber point)."""

    name: str
    fn: object

    def __call__(self, symbol, x):
        return self.fn(symbol, x)


def battery():
    """Five standard observables for convergence diagnostics; all accept
    scalars or numpy arrays."""
    return [
        Observable("fiber", lambda s, x: x),
        Observable("sin", lambda s, x: np.sin(2 * np.pi * x)),
        Observable("cos", lambda s, x: np.cos(2 * np.pi * x)),
        Observable("sym1", lambda s, x: np.where(s == 1, 1.0, 0.0)),
        Observable("fiber2", lambda s, x: x * x),
    ]


@dataclass
class OrbitSample:
    level: int
    seed: int
    symbols: np.ndarray
    xs: np.ndarray

    def spot_check(self, family, points=5):
        """Re-evaluate a few transitions against the stored trajectory."""
        idx = np.linspace(0, len(self.symbols) - 2, points).astype(int)
        for i in idx:
            y = float(family.map(int(self.symbols[i])).eval(self.xs[i]))
            if abs(y - self.xs[i + 1]) > 1e-9:
                return False
        return True


def _start_point(level, family, rng, burn_words=24):
    """Attractor-point surrogate: image of the interval center under a
    sampled backward window of base-level codewords (level 0 words carry
    no tails, so the window costs nothing to spell)."""
    base = level
    while base.prev is not None:
        base = base.prev
    x = base.certificate.J.center
    for i in rng.integers(0, base.M, size=burn_words):
        x = float(family.apply_word(base.code.words[int(i)], x))
    return x


def sample_orbit(family, level, length, seed, burn_words=24):
    """Forward trajectory of `length` fiber steps along i.i.d. codewords."""
    rng = np.random.default_rng(seed)
    x = _start_point(level, family, rng, burn_words)
    symbols = np.empty(length, dtype=np.int64)
    xs = np.empty(length + 1)
    xs[0] = x
    pos = 0
    while pos < length:
        addr = level.sample_addresses(1, rng)[0]
        word = level.spell_prefix(addr, length - pos)
        for sym in word:
            symbols[pos] = sym
            xs[pos + 1] = float(family.map(sym).eval(xs[pos]))
            pos += 1
    return OrbitSample(level.n, seed, symbols, xs)


@dataclass
class ExponentReport:
    level: int
    estimate: float
    sem: float
    low: float
    high: float
    band: tuple
    samples: int
    values: np.ndarray | None = None

    @property
    def in_band(self):
        lo, hi = self.band
        return lo < self.low and self.high < hi

    def to_json(self):
        return {
            "level": self.level,
            "estimate": self.estimate,
            "sem": self.sem,
            "low": self.low,
            "high": self.high,
            "band": list(self.band),
            "samples": self.samples,
            "in_band": self.in_band,
            "values": [float(v) for v in self.values]
            if self.values is not None else None,
        }


def exponent_of_level(family, level, trials=1000, seed=0, burn_words=24):
    """Per-word exponents along sampled attractor orbits.

    Words are sampled i.i.d.-uniformly; each contributes its mean
    log-derivative per symbol, measured along the orbit.  The band is the
    level certificate's open interval.
    """
    cert = level.certificate
    rngs = spawn_rngs(seed, trials)

    def one(rng):
        x = _start_point(level, family, rng, burn_words)
        addr = level.sample_addresses(1, rng)[0]
        word = level.word(addr)
        total = 0.0
        for sym in word:
            m = family.map(sym)
            total += math.log(float(m.deriv(x)))
            x = float(m.eval(x))
        return total / len(word)

    arr = np.asarray(parallel_map(one, rngs))
    return ExponentReport(
        level=level.n,
        estimate=float(arr.mean()),
        sem=_sem(arr),
        low=float(arr.min()),
        high=float(arr.max()),
        band=(cert.alpha - cert.eps, cert.alpha + cert.eps),
        samples=trials,
        values=arr,
    )


@dataclass
class BirkhoffReport:
    observable: str
    level: int
    ell: int
    horizon: int
    reference: float
    averages: np.ndarray
    eps: float

    @property
    def fraction_within(self):
        return float(np.mean(np.abs(self.averages - self.reference) < self.eps))

    @property
    def ok(self):
        return self.fraction_within > 1.0 - self.eps

    def to_json(self):
        # the raw per-orbit averages ride along so the fraction and mean
        # can be re-derived from the report alone
        return {
            "observable": self.observable,
            "level": self.level,
            "ell": self.ell,
            "horizon": self.horizon,
            "reference": self.reference,
            "eps": self.eps,
            "fraction_within": self.fraction_within,
            "ok": self.ok,
            "mean": float(self.averages.mean()),
            "averages": [float(v) for v in self.averages],
        }


def _window_averages(family, level, phis, horizon, rng, burn_words):
    """Birkhoff averages of several observables over one shared window."""
    x = _start_point(level, family, rng, burn_words)
    totals = [0.0] * len(phis)
    pos = 0
    while pos < horizon:
        addr = level.sample_addresses(1, rng)[0]
        word = level.spell_prefix(addr, horizon - pos)
        for sym in word:
            for i, phi in enumerate(phis):
                totals[i] += float(phi(sym, x))
            x = float(family.map(sym).eval(x))
            pos += 1
    return [t / horizon for t in totals]


def _window_average(family, level, phi, horizon, rng, burn_words):
    return _window_averages(family, level, [phi], horizon, rng, burn_words)[0]


def _spell_rows(code, rng, rows, length):
    """(rows, length) symbol matrix of i.i.d. codeword concatenations."""
    out = np.empty((rows, length), dtype=np.int64)
    for t in range(rows):
        pos = 0
        while pos < length:
            w = code.words[int(rng.integers(0, code.size))]
            take = min(len(w), length - pos)
            out[t, pos : pos + take] = w[:take]
            pos += take
    return out


def reference_integrals(family, level0, phis, trials, seed, burn_words=24,
                        horizon=None):
    """Level-0 estimates of the integrals over shared windows, vectorized
    across trials (level-0 words carry no tails)."""
    horizon = horizon or max(64, int(4 * level0.stats.mean_roof))
    rng = np.random.default_rng(seed)
    burn_len = burn_words * level0.code.max_len
    burn = _spell_rows(level0.code, rng, trials, burn_len)
    sym = _spell_rows(level0.code, rng, trials, horizon)
    xs = np.full(trials, level0.certificate.J.center)
    for t in range(burn_len):
        for i in range(1, family.N + 1):
            mask = burn[:, t] == i
            if np.any(mask):
                xs[mask] = family.map(i).eval(xs[mask])
    sums = np.zeros(len(phis))
    for t in range(horizon):
        col = sym[:, t]
        for k, phi in enumerate(phis):
            sums[k] += float(np.mean(phi(col, xs)))
        for i in range(1, family.N + 1):
            mask = col == i
            if np.any(mask):
                xs[mask] = family.map(i).eval(xs[mask])
    return (sums / horizon).tolist()


def reference_integral(family, level0, phi, trials, seed, burn_words=24,
                       horizon=None):
    return reference_integrals(family, level0, [phi], trials, seed,
                               burn_words, horizon)[0]


def birkhoff_concentration_battery(family, levels, n, ell, observables, eps,
                                   trials=10000, seed=0, references=None,
                                   burn_words=24):
    """Concentration reports for several observables on shared windows.

    The reference integrals use level 0 with ten times the trials of the
    comparison; sharing windows across the battery keeps one orbit pass.
    """
    if not ell < n:
        raise ValueError("ell must be below n")
    level = levels[n]
    horizon = int(round(levels[ell].stats.mean_roof))
    if references is None:
        references = reference_integrals(
            family, levels[0], observables, trials=10 * trials,
            seed=seed + 10_000,
        )
    rngs = spawn_rngs(seed, trials)
    rows = np.array(parallel_map(
        lambda rng: _window_averages(family, level, observables, horizon,
                                     rng, burn_words),
        rngs,
    ))
    return [
        BirkhoffReport(
            observable=getattr(obs, "name", f"phi{i}"),
            level=n,
            ell=ell,
            horizon=horizon,
            reference=references[i],
            averages=rows[:, i],
            eps=eps,
        )
        for i, obs in enumerate(observables)
    ]


def birkhoff_concentration(family, levels, n, ell, observable, eps,
                           trials=10000, seed=0, reference=None,
                           burn_words=24):
    """Fraction of level-n windows whose mean-roof-horizon average lands
    within eps of the reference integral; passes above 1 - eps."""
    refs = None if reference is None else [reference]
    return birkhoff_concentration_battery(
        family, levels, n, ell, [observable], eps, trials, seed, refs,
        burn_words,
    )[0]


@dataclass
class WeakStarDiagnostic:
    names: list
    integrals: np.ndarray  # levels x observables
    diffs: np.ndarray  # (levels-1) x observables
    noise: np.ndarray

    @property
    def decaying(self):
        """Differences decay (up to 3 sigma) across consecutive levels."""
        if self.diffs.shape[0] < 2:
            return True
        ok = self.diffs[1:] < self.diffs[:-1] + 3 * self.noise[1:]
        return bool(np.all(ok))

    def to_json(self):
        return {
            "names": self.names,
            "integrals": self.integrals.tolist(),
            "diffs": self.diffs.tolist(),
            "noise": self.noise.tolist(),
            "decaying": self.decaying,
        }


def weakstar_diagnostic(family, levels, observables=None, trials=400,
                        seed=0, burn_words=24):
    """Per-level integral estimates and their successive differences."""
    observables = observables or battery()
    names = [getattr(o, "name", f"phi{i}") for i, o in enumerate(observables)]
    horizon = int(round(levels[-1].stats.mean_roof))
    est = np.zeros((len(levels), len(observables)))
    sems = np.zeros_like(est)
    for li, level in enumerate(levels):
        rngs = spawn_rngs(seed + li, trials)
        for oi, obs in enumerate(observables):
            vals = [
                _window_average(family, level, obs, horizon, rng, burn_words)
                for rng in rngs[: max(trials // (li + 1), 50)]
            ]
            est[li, oi] = np.mean(vals)
            sems[li, oi] = _sem(vals)
    diffs = np.abs(np.diff(est, axis=0))
    noise = np.sqrt(sems[1:] ** 2 + sems[:-1] ** 2)
    return WeakStarDiagnostic(names, est, diffs, noise)
