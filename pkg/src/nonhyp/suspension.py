"""Abstract suspension model: roof profiles, entropy via the roof-average
formula, column sums and their variation, concentration horizons from the
Bernstein bound, and the address arithmetic of intermediate floors.

Nothing here touches fiber dynamics: levels enter only through integer
roof data, which is exactly what the abstract model consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import WindowTooShort


@dataclass(frozen=True)
class RoofProfile:
    """Alphabet size with one positive integer roof value per symbol."""

    R: tuple

    def __post_init__(self):
        if not self.R:
            raise ValueError("empty profile")
        if any(int(r) != r or r < 1 for r in self.R):
            raise ValueError("roof values must be positive integers")
        object.__setattr__(self, "R", tuple(int(r) for r in self.R))

    @property
    def M(self):
        return len(self.R)

    @property
    def mean(self):
        return Fraction(sum(self.R), self.M)

    @property
    def max(self):
        return max(self.R)

    @property
    def min(self):
        return min(self.R)

    def deviation_bound(self):
        """C = max |R - mean R| over symbols."""
        mean = self.mean
        return float(max(abs(Fraction(r) - mean) for r in self.R))


def abramov_entropy(profile):
    """log M / mean roof, the entropy of the uniform suspension."""
    return math.log(profile.M) * profile.M / sum(profile.R)


def delta_psi(profile, psi, symbol):
    """Column sum of the observable over the fiber above one symbol."""
    return math.fsum(psi(symbol, k) for k in range(profile.R[symbol]))


def variation(profile, psi):
    """Worst cylinder oscillation of the column sums.

    Observables reading only (symbol, floor) have zero variation; ones
    depending on the continuation supply per-symbol (min, max) bounds of
    their column sum through `cylinder_bounds`.
    """
    bounds = getattr(psi, "cylinder_bounds", None)
    if bounds is None:
        return 0.0
    return max(hi - lo for lo, hi in (bounds(a) for a in range(profile.M)))


def bernstein_horizon(C, eps, cap=10**7):
    """Least m with 2 m exp(-3 m eps / (2C)) <= eps.

    The exponential constant is the one the concentration bound states;
    no sharper constant is derived here.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0,1)")
    if C <= 0:
        return 1
    rate = 1.5 * eps / C
    m = 1
    while m <= cap:
        if 2 * m * math.exp(-rate * m) <= eps:
            return m
        m += 1
    raise ValueError(f"no horizon below {cap}")


def large_dev_fraction(profile, psi, m, eps, trials=10000, seed=0,
                       chunk=2048):
    """Fraction of i.i.d.-uniform symbol streams whose windowed sums all
    concentrate.

    Streams have length 2m; every window (i, k) with i < m, k <= m must
    satisfy |sum R - k mean R| < m eps and the column-sum analogue with
    slack m (2 var + eps).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.default_rng(seed)
    r = np.asarray(profile.R, dtype=float)
    mean_r = float(profile.mean)
    dpsi = np.array([delta_psi(profile, psi, a) for a in range(profile.M)])
    mean_d = float(dpsi.mean())
    var = variation(profile, psi)
    thr_r = m * eps
    thr_d = m * (2 * var + eps)

    good = 0
    done = 0
    while done < trials:
        take = min(chunk, trials - done)
        done += take
        sym = rng.integers(0, profile.M, size=(take, 2 * m))
        ok = np.ones(take, dtype=bool)
        for dev, thr in ((r[sym] - mean_r, thr_r), (dpsi[sym] - mean_d, thr_d)):
            cum = np.concatenate(
                [np.zeros((take, 1)), np.cumsum(dev, axis=1)], axis=1
            )
            worst = np.zeros(take)
            for i in range(m):
                windows = np.abs(cum[:, i + 1 : i + m + 1] - cum[:, i : i + 1])
                worst = np.maximum(worst, windows.max(axis=1))
            ok &= worst < thr
        good += int(ok.sum())
    return good / trials


# ------------------------------------------------------------- addresses


@dataclass(frozen=True)
class Address:
    """(level, digits) pointing at an intermediate floor: digits
    (a_l, ..., a_{n-1}) with a_k < m_{k+1}."""

    level: int
    digits: tuple

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        if self.level < 0:
            raise ValueError("negative level")
        if any(d < 0 for d in self.digits):
            raise ValueError("negative digit")

    @property
    def top_level(self):
        return self.level + len(self.digits)

    def weight_level(self):
        """Level of the lowest nonzero digit (n for the zero address)."""
        for i, d in enumerate(self.digits):
            if d:
                return self.level + i
        return self.top_level

    @property
    def norm(self):
        w = self.weight_level()
        return sum(self.digits[w - self.level :])

    def simplified(self):
        w = self.weight_level()
        return Address(w, self.digits[w - self.level :])

    def chain(self):
        """The increment chain from the zero address up to this one.

        Each step raises one digit by one, sweeping the top level first;
        yields (level_of_increment, previous_address) pairs.
        """
        n = self.top_level
        digits = list(self.simplified().digits)
        lvl = self.weight_level()
        cur = Address(n, ())
        for i in range(len(digits) - 1, -1, -1):
            level_i = lvl + i
            for _ in range(digits[i]):
                yield level_i, cur
                if cur.level > level_i:
                    pad = [0] * (cur.level - level_i - 1)
                    cur = Address(level_i, tuple([1] + pad + list(cur.digits)))
                else:
                    nxt = list(cur.digits)
                    nxt[0] += 1
                    cur = Address(level_i, tuple(nxt))


def validate_address(address, m_schedule):
    """m_schedule lists (m_1, ..., m_n); digit a_k must be < m_{k+1}."""
    n = len(m_schedule)
    if address.top_level != n:
        raise ValueError("address does not reach the top level")
    for i, d in enumerate(address.digits):
        if d >= m_schedule[address.level + i]:
            raise ValueError(
                f"digit {d} at level {address.level + i} exceeds "
                f"m = {m_schedule[address.level + i]}"
            )


def flatten_window(window, substitute, from_level, to_level):
    """Spell a window of level-n symbols in the level-l alphabet."""
    out = list(window)
    for lvl in range(from_level, to_level, -1):
        nxt = []
        for sym in out:
            nxt.extend(substitute(lvl, sym))
        out = nxt
    return out


def floor_offset(window, address, m_schedule, roof, substitute):
    """Height of the intermediate floor addressed inside a symbol window.

    Walks the address increment chain, adding the roof of the constituent
    passed at each step: `roof(level, symbol)` and `substitute(level,
    symbol) -> tuple of level-1 symbols` provide the cascade data.
    """
    n = len(m_schedule)
    validate_address(address, m_schedule)
    if not window:
        raise WindowTooShort("empty symbol window")
    total = 0
    for level_i, prev in address.chain():
        k = _k_index(prev, level_i, m_schedule)
        flat = flatten_window(window, substitute, n, level_i)
        if k >= len(flat):
            raise WindowTooShort(
                f"address walk needs piece {k} at level {level_i}, window "
                f"holds {len(flat)}"
            )
        total += roof(level_i, flat[k])
    return total


def _k_index(address, level, m_schedule):
    """Position (in level-`level` pieces) of the floor the address marks."""
    k = 0
    a = address
    for i, d in enumerate(a.digits):
        lvl_i = a.level + i
        block = 1
        for j in range(level, lvl_i):
            block *= m_schedule[j]
        k += d * block
    return k


@dataclass
class SuspensionStats:
    level: int
    M: float  # may exceed float precision of ints; log10 also carried
    log_M: float
    mean_roof: float
    min_roof: float
    max_roof: float
    entropy: float
    tail_mass: float | None = None

    @classmethod
    def from_level(cls, lvl):
        s = lvl.stats
        return cls(
            level=lvl.n,
            M=float(lvl.M),
            log_M=lvl.log_M,
            mean_roof=s.mean_roof,
            min_roof=s.min_roof,
            max_roof=s.max_roof,
            entropy=lvl.log_M / s.mean_roof,
        )

    def to_json(self):
        return {
            "level": self.level,
            "log_M": self.log_M,
            "mean_roof": self.mean_roof,
            "min_roof": self.min_roof,
            "max_roof": self.max_roof,
            "entropy": self.entropy,
            "tail_mass": self.tail_mass,
        }


def tail_mass_estimate(mean_roofs, m_schedule, ell, L2=None):
    """Fraction of suspension height from tails above level ell.

    mean_roofs lists the exact (or estimated) mean roof per level; the
    identity mean_n = (prod m) mean_ell + tail contributions gives the
    fraction directly.  If L2 is given, also the geometric bound.
    """
    n = len(m_schedule)
    if not 0 <= ell < len(mean_roofs) - 1:
        raise ValueError("need levels above ell")
    prod_m = 1
    for m in m_schedule[ell:]:
        prod_m *= m
    frac = 1.0 - prod_m * mean_roofs[ell] / mean_roofs[-1]
    bound = None
    if L2 is not None:
        bound = sum(L2 * 2.0 ** (-k) for k in range(ell + 1, n + 1))
    return frac, bound
