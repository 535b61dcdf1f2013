"""Repeat-and-tail cascade: tailing maps, level objects, and the roof and
entropy controls that certify the exponent-halving construction.

Level n words are m_n-fold concatenations of level n-1 words plus a tail:
a truncated expanding sequence that lifts the accumulated contraction back
to half its exponent, then a connection word into the core of J.  Word
counts grow like M^(m1...mn), so levels above the materialization cap
stay implicit: words are addressed by nested index tuples and tails are
computed (and memoized) on demand, deterministically.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .blending import ConnectorField
from .circle import image_arc
from .cifs import modulus_of_continuity, verify_words
from .codes import CodeBook
from .errors import SearchExhausted, SizeOverflow, TailTooLong

MATERIALIZE_CAP = 4096
TAIL_BEAM = 16


@dataclass
class TailingMap:
    """Tail words for m-tuples of a level's codewords, built on demand.

    The expanding part truncates at the least depth whose image length
    reaches |J| e^{(1/2) sum|w| alpha}; a connection word then lands the
    image midpoint in the core.  Tail lengths are bounded by
    L1 sum|w| |alpha| and violations abort the construction.
    """

    level: "CascadeLevel"
    m: int
    blending: object
    family: object
    beam_width: int = TAIL_BEAM
    depth_cap: int = 400
    _cache: dict = field(default_factory=dict)
    _connector: ConnectorField | None = None

    def __post_init__(self):
        if self._connector is None:
            self._connector = ConnectorField(self.family, self.blending.core)

    def tail(self, addrs):
        key = tuple(addrs)
        if key not in self._cache:
            self._cache[key] = self._build(key)
        return self._cache[key]

    def _build(self, addrs):
        fam, lvl = self.family, self.level
        cert = lvl.certificate
        arc = cert.J
        total = 0
        for a in addrs:
            arc = lvl.word_image(a, arc)
            total += lvl.roof(a)
        log_threshold = math.log(cert.J.length) + 0.5 * total * cert.alpha
        bound = lvl.L1 * total * abs(cert.alpha)
        target = 0.5 * cert.alpha

        # Candidate covering words cross the threshold at different depths
        # (each minimal for its own covering sequence); among them, pick
        # the tail that centers the finished word's exponent in the halved
        # band.  The per-word exponent self-corrects tuple fluctuations
        # because the threshold is fixed by the target, not by the tuple.
        # The candidates share the tuple part, so its orbits and
        # log-derivative runs are computed once per grid point.
        fam = self.family
        heads = []
        for x in cert.J.grid(2):
            y, run = float(x), 0.0
            for a in addrs:
                for sym in lvl.word(a):
                    m = fam.map(sym)
                    run += math.log(float(m.deriv(y)))
                    y = float(m.eval(y))
            heads.append((y, run))
        settle = 0.2 * (cert.eps / 2)
        best, best_gap = None, math.inf
        shortest_over = None
        for eta, img in self._crossings(arc, log_threshold):
            beta = self._connector.word(img.center)
            tail = eta + beta
            if len(tail) > bound:
                if shortest_over is None or len(tail) < shortest_over:
                    shortest_over = len(tail)
                continue
            e_here = self._tail_exponent(heads, tail, total)
            gap = abs(e_here - target)
            if gap < best_gap:
                best, best_gap = tail, gap
            if best_gap < settle:
                break
        if best is None:
            if shortest_over is not None:
                raise TailTooLong(addrs, shortest_over, bound)
            raise SearchExhausted(
                "no expansion crossed the truncation threshold",
                depth_cap=self.depth_cap,
            )
        return best

    def _tail_exponent(self, heads, tail, flat_len):
        """Mean exponent of the finished word, continuing stored orbits."""
        fam = self.family
        length = flat_len + len(tail)
        vals = []
        for y, run in heads:
            for sym in tail:
                m = fam.map(sym)
                run += math.log(float(m.deriv(y)))
                y = float(m.eval(y))
            vals.append(run / length)
        return sum(vals) / len(vals)

    def _crossings(self, arc, log_threshold, extra_depths=10, per_depth=2):
        """Depth-synchronous beam search, yielding threshold crossings for
        several depths beyond the first (deterministic order)."""
        fam = self.family
        if math.log(arc.length) >= log_threshold:
            # the contraction hypothesis eps < |alpha|/2 rules this out
            raise SearchExhausted("tuple image already above threshold", 0)
        frontier = [(arc, ())]
        found_depth = None
        for depth in range(1, self.depth_cap + 1):
            crossers, grown = [], []
            for cur, word in frontier:
                for sym in range(1, fam.N + 1):
                    nxt = image_arc(fam.map(sym), cur)
                    w = word + (sym,)
                    if math.log(max(nxt.length, 1e-300)) >= log_threshold:
                        crossers.append((w, nxt))
                    else:
                        grown.append((nxt, w))
            if crossers:
                if found_depth is None:
                    found_depth = depth
                crossers.sort(key=lambda t: t[0])
                for w, img in crossers[:per_depth]:
                    yield w, img
            if found_depth is not None and depth >= found_depth + extra_depths:
                return
            grown.sort(key=lambda t: -t[0].length)
            frontier = grown[: self.beam_width]
            if not frontier:
                return
        if found_depth is None:
            raise SearchExhausted(
                f"no expansion to threshold within {self.depth_cap} steps",
                depth_cap=self.depth_cap,
            )


@dataclass
class LevelStats:
    mean_roof: float
    min_roof: float
    max_roof: float
    mean_tail: float
    max_tail: float
    sampled: bool
    sample_size: int


class CascadeLevel:
    """One level of the cascade; level 0 wraps the initial code.

    Addresses: level-0 words are indexed by integers; a level-n word by an
    m_n-tuple of level n-1 addresses.  The dictionary to the abstract
    alphabet is structural: the address IS the tail-free symbol, `word`
    spells it with all tails, `strip` without them.
    """

    def __init__(self, n, certificate, L1, code=None, prev=None, m=None,
                 tailing=None, stats=None, warnings_list=None):
        self.n = n
        self.certificate = certificate
        self.L1 = L1
        self.code = code
        self.prev = prev
        self.m = m
        self.tailing = tailing
        self.stats = stats
        self.warnings = warnings_list or []
        if n == 0:
            self.M = code.size
        else:
            self.M = prev.M**m

    # -------------------------------------------------------- level 0 API

    @classmethod
    def base(cls, code, certificate, L1, family=None):
        lens = [len(w) for w in code.words]
        stats = LevelStats(
            mean_roof=float(np.mean(lens)),
            min_roof=float(min(lens)),
            max_roof=float(max(lens)),
            mean_tail=0.0,
            max_tail=0.0,
            sampled=False,
            sample_size=code.size,
        )
        lvl = cls(0, certificate, L1, code=code, stats=stats)
        lvl._family0 = family
        return lvl

    # ----------------------------------------------------------- words

    def word(self, addr):
        """Spelled word in {1..N}, tails included."""
        if self.n == 0:
            return self.code.words[addr]
        flat = ()
        for a in addr:
            flat += self.prev.word(a)
        return flat + self.tailing.tail(addr)

    def strip(self, addr):
        """Spelled word with every tail cut out (the dictionary image)."""
        if self.n == 0:
            return self.code.words[addr]
        return sum((self.prev.strip(a) for a in addr), ())

    def roof(self, addr):
        """Roof value: length of the tailed word."""
        if self.n == 0:
            return len(self.code.words[addr])
        return sum(self.prev.roof(a) for a in addr) + len(self.tailing.tail(addr))

    def tail_len(self, addr):
        if self.n == 0:
            return 0
        return len(self.tailing.tail(addr))

    def word_image(self, addr, arc):
        from .circle import word_image_arc

        if self.n == 0:
            return word_image_arc(self._family0, self.code.words[addr], arc)
        for a in addr:
            arc = self.prev.word_image(a, arc)
        for sym in self.tailing.tail(addr):
            arc = image_arc(self.tailing.family.map(sym), arc)
        return arc

    def spell_prefix(self, addr, length):
        """First `length` symbols of word(addr); only the tails the prefix
        actually touches are computed."""
        if self.n == 0:
            return self.code.words[addr][:length]
        out = ()
        for a in addr:
            if len(out) >= length:
                return out[:length]
            r = self.prev.roof(a)
            if len(out) + r <= length:
                out += self.prev.word(a)
            else:
                out += self.prev.spell_prefix(a, length - len(out))
        if len(out) < length:
            out += self.tailing.tail(addr)
        return out[:length]

    def sample_addresses(self, k, rng):
        if self.n == 0:
            return [int(i) for i in rng.integers(0, self.M, size=k)]
        return [tuple(self.prev.sample_addresses(self.m, rng)) for _ in range(k)]

    def all_addresses(self):
        if self.n == 0:
            return list(range(self.M))
        prev = self.prev.all_addresses()
        out = [()]
        for _ in range(self.m):
            out = [t + (a,) for t in out for a in prev]
        return out

    @property
    def log_M(self):
        if self.n == 0:
            return math.log(self.M)
        return self.m * self.prev.log_M

    @property
    def family(self):
        return self._family0 if self.n == 0 else self.tailing.family

    def roof_model(self):
        """Adapter for the suspension-side address arithmetic."""
        levels = []
        lvl = self
        while lvl is not None:
            levels.append(lvl)
            lvl = lvl.prev
        levels.reverse()
        return levels


def build_tailing(level, m, blending, family, beam_width=TAIL_BEAM,
                  depth_cap=400):
    """Tailing map for m-tuples over a level's codewords.

    Tails are built on demand and memoized; every built tail satisfies
    the L1 length bound or the construction aborts.
    """
    return TailingMap(level, m, blending, family, beam_width=beam_width,
                      depth_cap=depth_cap)


def repeat_and_tail(code, m, tailing, cap=200_000):
    """Materialized m-fold repeat with tails; tails may be a dict keyed by
    index tuples, a callable on word tuples, or a TailingMap."""
    if code.size**m > cap:
        raise SizeOverflow(f"{code.size}^{m} exceeds cap {cap}")
    idx_tuples = [()]
    for _ in range(m):
        idx_tuples = [t + (i,) for t in idx_tuples for i in range(code.size)]
    words = []
    for tup in idx_tuples:
        flat = sum((code.words[i] for i in tup), ())
        if isinstance(tailing, dict):
            tail = tuple(tailing.get(tup, ()))
        elif isinstance(tailing, TailingMap):
            tail = tailing.tail(tup)
        elif callable(tailing):
            tail = tuple(tailing(tuple(code.words[i] for i in tup)))
        else:
            tail = ()
        words.append(flat + tail)
    return CodeBook(tuple(words), N=code.N)


def _post_hoc_tailing_checks(level, m, blending, family):
    """The three consequences the existential tuple-count bound is used
    for; failures are warnings at desk scale, with numbers attached."""
    cert = level.certificate
    out = []
    delta = blending.delta
    m_c = blending.m_c or 0
    norm = family.norm_bound
    r_cap = min(blending.constants.get("K1", 1.0),
                blending.constants.get("K4", delta / 2),
                delta / norm**m_c)
    r = r_cap
    while r > 1e-6 and modulus_of_continuity(family, r) >= cert.eps / 8:
        r /= 2
    min_w = level.stats.min_roof
    lhs = cert.J.length * max(
        math.exp(m * min_w * (cert.alpha + cert.eps)),
        cert.K * math.exp(m * 0.5 * min_w * cert.alpha),
    )
    if not lhs < r:
        out.append(f"tuple-image size check: {lhs:.3g} not below r = {r:.3g}")
    if not m * abs(cert.alpha) >= 1:
        out.append(f"m|alpha| = {m * abs(cert.alpha):.3g} below 1")
    rhs = cert.eps / 8
    val = math.log(norm ** (1 + m_c)) / m
    if not val < rhs:
        out.append(f"connector distortion check: {val:.3g} not below eps/8 = {rhs:.3g}")
    return out


def advance_level(level, m, blending, family, seed=0, stat_samples=160,
                  verify_samples=48, beam_width=TAIL_BEAM,
                  materialize_cap=MATERIALIZE_CAP, verify=True):
    """Build level n from level n-1: tails, stats, halved certificate.

    Certificate verification samples words when the level is implicit;
    the sampling fraction is recorded in the stats.
    """
    n = level.n + 1
    warns = _post_hoc_tailing_checks(level, m, blending, family)
    for w in warns:
        warnings.warn(f"level {n}: {w}", stacklevel=2)
    tailing = build_tailing(level, m, blending, family, beam_width=beam_width)
    cert = level.certificate.halved()
    new = CascadeLevel(n, cert, level.L1, prev=level, m=m, tailing=tailing,
                       warnings_list=warns)

    rng = np.random.default_rng([seed, n])
    if new.M <= materialize_cap:
        addrs = new.all_addresses()
        sampled = False
    else:
        addrs = new.sample_addresses(stat_samples, rng)
        sampled = True
    roofs = np.array([new.roof(a) for a in addrs], dtype=float)
    tails = np.array([new.tail_len(a) for a in addrs], dtype=float)
    if sampled:
        mean_roof = m * level.stats.mean_roof + float(tails.mean())
    else:
        mean_roof = float(roofs.mean())
    new.stats = LevelStats(
        mean_roof=mean_roof,
        min_roof=float(roofs.min()),
        max_roof=float(roofs.max()),
        mean_tail=float(tails.mean()),
        max_tail=float(tails.max()),
        sampled=sampled,
        sample_size=len(addrs),
    )

    if verify:
        pick = addrs if len(addrs) <= verify_samples else [
            addrs[int(i)] for i in rng.choice(len(addrs), verify_samples,
                                              replace=False)
        ]
        words = [new.word(a) for a in pick]
        rep = verify_words(family, words, cert, m_check=2, tuples_per_m=8,
                           seed=seed + n, note=f"level {n}: sampled "
                           f"{len(pick)} of {new.M} words")
        new.verify_report = rep
    return new


def build_cascade(code, certificate, blending, family, m_schedule, L1=None,
                  seed=0, **kwargs):
    """Level 0 from the initial system, then one level per m."""
    L1 = blending.L1 if L1 is None else L1
    base = CascadeLevel.base(code, certificate, L1, family=family)
    levels = [base]
    for m in m_schedule:
        levels.append(advance_level(levels[-1], m, blending, family,
                                    seed=seed, **kwargs))
    return levels


@dataclass
class InequalityCheck:
    name: str
    lhs: float
    rhs: float
    strict: bool = True

    @property
    def ok(self):
        return self.lhs < self.rhs if self.strict else self.lhs <= self.rhs

    def to_json(self):
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "margin": self.rhs - self.lhs, "ok": self.ok}


def roof_constant_L2(K, max_r0, min_r0):
    """L2 = 2 max{K e^K, e^K} max R0 / min R0."""
    return 2.0 * math.exp(K) * max(K, 1.0) * max_r0 / min_r0


def roof_assumption_check(levels, samples=96, seed=0):
    """Per-level roof sandwich plus the four derived roof estimates.

    The sandwich constant is K = L1 |alpha|; estimates use the L2 built
    from it.  Returns every inequality with its numbers; violations are
    collected, never silently dropped.
    """
    base = levels[0]
    K = base.L1 * abs(base.certificate.alpha)
    L2 = roof_constant_L2(K, base.stats.max_roof, base.stats.min_roof)
    checks = []
    rng = np.random.default_rng(seed)
    for lvl in levels[1:]:
        n = lvl.n
        if lvl.M <= samples:
            addrs = lvl.all_addresses()
        else:
            addrs = lvl.sample_addresses(samples, rng)
        for a in addrs[: samples // 4]:
            parts = sum(lvl.prev.roof(c) for c in a)
            roof = lvl.roof(a)
            checks.append(InequalityCheck(
                f"level {n} roof lower (tail nonempty), addr sample", parts, roof))
            checks.append(InequalityCheck(
                f"level {n} roof upper", roof,
                (1 + K * 2.0 ** (-(n - 1))) * parts, strict=False))
        s, sp = lvl.stats, lvl.prev.stats
        # Item (1) is about true maxima; sampled levels witness it by the
        # repeated-argmax tuple, whose roof exceeds the sum by its tail.
        if lvl.prev.n == 0:
            prev_addrs = lvl.prev.all_addresses()
        else:
            prev_addrs = lvl.prev.sample_addresses(64, rng)
        arg = max(prev_addrs, key=lvl.prev.roof)
        witness_roof = lvl.roof(tuple([arg] * lvl.m))
        max_roof_n = max(s.max_roof, witness_roof)
        checks.append(InequalityCheck(
            f"level {n} est (1): m*max R_(n-1) < max R_n (witnessed)",
            lvl.m * lvl.prev.roof(arg), witness_roof))
        checks.append(InequalityCheck(
            f"level {n} est (2): max/mean <= max/min < L2",
            max_roof_n / s.min_roof, L2))
        ratio = s.mean_roof / (lvl.m * sp.mean_roof)
        checks.append(InequalityCheck(f"level {n} est (3) lower", 1.0, ratio))
        checks.append(InequalityCheck(
            f"level {n} est (3) upper", ratio, 1 + L2 * 2.0 ** (-n)))
        checks.append(InequalityCheck(
            f"level {n} est (4): max tail <= L2 2^-n mean roof",
            s.max_tail, L2 * 2.0 ** (-n) * s.mean_roof, strict=False))
    return {"K": K, "L2": L2, "checks": checks,
            "ok": all(c.ok for c in checks)}


def entropy_lower_bound(levels, h0, eps_H):
    """h_n = log M_n / mean R_n against the geometric transfer bound."""
    base = levels[0]
    L1 = base.L1
    alpha = abs(base.certificate.alpha)
    out = []
    for lvl in levels:
        h_n = lvl.log_M / lvl.stats.mean_roof
        bound = math.exp(-L1 * (1 - 2.0 ** (-lvl.n)) * alpha) * (h0 - eps_H)
        out.append(InequalityCheck(f"level {lvl.n} entropy >= bound", bound, h_n,
                                   strict=False))
    return out
