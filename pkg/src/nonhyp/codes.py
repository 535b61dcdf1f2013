"""Finite-word algebra over the alphabet {1..N}.

Words are tuples of 1-based symbols.  A CodeBook is a finite collection of
words; when no word is a prefix of another the collection is *disjoint*
and every one-sided concatenation decodes uniquely left to right.
Bi-infinite concatenations may still decode in several ways; the number of
distinct decodings of an eventually-periodic stream is counted exactly by
folding the periodic tails onto their phases.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NotCodable, SizeOverflow, WindowTooSmall

Word = tuple  # of ints in 1..N

DEFAULT_POWER_CAP = 1_000_000


def is_prefix(a, b):
    """True iff word a is a (not necessarily proper) prefix of word b."""
    return len(a) <= len(b) and b[: len(a)] == a


@dataclass(frozen=True)
class CodeBook:
    """Finite ordered collection of nonempty words, kept sorted."""

    words: tuple
    N: int = 0

    def __post_init__(self):
        words = tuple(sorted(tuple(w) for w in self.words))
        if not words:
            raise ValueError("empty code")
        if any(len(w) == 0 for w in words):
            raise ValueError("empty word in code")
        if len(set(words)) != len(words):
            raise ValueError("duplicate words in code")
        top = max(max(w) for w in words)
        low = min(min(w) for w in words)
        if low < 1:
            raise ValueError("symbols must be >= 1")
        n = self.N if self.N else top
        if top > n:
            raise ValueError("symbol exceeds alphabet size")
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "N", n)

    @property
    def size(self):
        return len(self.words)

    @property
    def max_len(self):
        return max(len(w) for w in self.words)

    @property
    def min_len(self):
        return min(len(w) for w in self.words)

    def to_json(self):
        return {"N": self.N, "words": [list(w) for w in self.words]}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(tuple(w) for w in obj["words"]), N=obj["N"])

    def __iter__(self):
        return iter(self.words)


def is_disjoint(code):
    """No word is a prefix of a distinct word.

    On the sorted word list a prefix pair, if any exists, occurs at
    adjacent positions, so one linear scan suffices.
    """
    ws = code.words
    return not any(is_prefix(ws[i], ws[i + 1]) for i in range(len(ws) - 1))


def _require_disjoint(code):
    if not is_disjoint(code):
        raise ValueError("code is not disjoint")


@dataclass
class Decoding:
    """Index parse of a finite stream segment: concatenating
    words[indices] after skipping `offset` symbols of the first word
    reproduces the consumed segment; `residual` is what remains."""

    indices: list
    offset: int = 0
    residual: tuple = ()


def forward_decode(code, stream):
    """Greedy unique left-to-right parse of a finite symbol stream.

    Returns the Decoding of the maximal parsable prefix; the unparsed rest
    is the residual and must itself be a prefix of some codeword
    (an incomplete tail).  Anything else raises NotCodable.
    """
    _require_disjoint(code)
    stream = tuple(stream)
    by_head = {}
    for idx, w in enumerate(code.words):
        by_head.setdefault(w[0], []).append((idx, w))
    indices = []
    pos = 0
    while pos < len(stream):
        hit = None
        for idx, w in by_head.get(stream[pos], ()):
            if stream[pos : pos + len(w)] == w:
                hit = idx
                break
        if hit is not None:
            indices.append(hit)
            pos += len(code.words[hit])
            continue
        rest = stream[pos:]
        if any(is_prefix(rest, w) for w in code.words):
            return Decoding(indices, 0, rest)
        raise NotCodable(f"stream stuck at position {pos}: {rest[:8]}...")
    return Decoding(indices, 0, ())


@dataclass(frozen=True)
class PeriodicStream:
    """Bi-infinite stream (... left left | center right right ...).

    The center occupies positions [0, len(center)); the left word repeats
    over the negative positions and the right word from len(center) on.
    """

    left: tuple
    center: tuple
    right: tuple

    def __post_init__(self):
        if not self.left or not self.right:
            raise ValueError("periodic tails must be nonempty")

    def symbol_at(self, p):
        if p < 0:
            return self.left[p % len(self.left)]
        if p < len(self.center):
            return self.center[p]
        return self.right[(p - len(self.center)) % len(self.right)]

    def segment(self, lo, hi):
        return tuple(self.symbol_at(p) for p in range(lo, hi))


def _matches_ending_at(code, stream, cut):
    """Codewords w with stream[cut-|w| : cut] == w."""
    out = []
    for idx, w in enumerate(code.words):
        if stream.segment(cut - len(w), cut) == w:
            out.append(idx)
    return out


def _forward_ok(code, stream, start, window):
    """Unique greedy parse from `start` closes onto the right period."""
    center_end = len(stream.center)
    period = len(stream.right)
    seen = set()
    pos = start
    while True:
        if pos - start > window:
            raise WindowTooSmall(
                f"forward parse from {start} unresolved within {window} symbols"
            )
        if pos >= center_end:
            phase = (pos - center_end) % period
            if phase in seen:
                return True
            seen.add(phase)
        hit = None
        for w in code.words:
            if stream.segment(pos, pos + len(w)) == w:
                hit = w
                break
        if hit is None:
            return False
        pos += len(hit)


class _LeftPhaseGraph:
    """Backward-match graph folded onto cut phases mod the left period.

    A cut at position q <= 0 only ever reads symbols below q, which are
    pure left-periodic, so the set of backward continuations depends on q
    only through q mod |left|.
    """

    def __init__(self, code, stream):
        period = len(stream.left)
        self.period = period
        self.edges = {}
        for phase in range(period):
            # Realize the phase at the nonpositive cut q = phase - period.
            q = phase - period
            outs = []
            for idx in _matches_ending_at(code, stream, q):
                w = code.words[idx]
                outs.append((idx, (q - len(w)) % period))
            self.edges[phase] = outs

    def viable(self):
        """Phases from which an infinite backward path exists."""
        alive = set(self.edges)
        while True:
            nxt = {p for p in alive if any(h in alive for _, h in self.edges[p])}
            if nxt == alive:
                return alive
            alive = nxt

    def count_paths(self, entry_phase):
        """Distinct infinite backward paths from a phase.

        For a disjoint code this is finite: no phase on a cycle can keep
        two live continuations, else the stream would have unboundedly
        many decodings.
        """
        alive = self.viable()
        if entry_phase not in alive:
            return 0
        live_edges = {
            p: [(i, h) for i, h in self.edges[p] if h in alive] for p in alive
        }

        # Phases lying on a cycle of the live graph.
        def reaches(src, dst):
            seen, stack = set(), [src]
            while stack:
                p = stack.pop()
                for _, h in live_edges[p]:
                    if h == dst:
                        return True
                    if h not in seen:
                        seen.add(h)
                        stack.append(h)
            return False

        cyclic = {p for p in alive if reaches(p, p)}
        for p in cyclic:
            if len(live_edges[p]) > 1:
                raise WindowTooSmall(
                    "branching inside a backward cycle; decoding count unbounded"
                )

        memo = {}

        def count(p):
            if p in cyclic:
                return 1
            if p not in memo:
                memo[p] = sum(count(h) for _, h in live_edges[p])
            return memo[p]

        return count(entry_phase)


def count_decodings(code, stream, window=4096):
    """Number of distinct decodings of an eventually-periodic stream.

    Every decoding has a unique smallest nonnegative cut p < R (R the
    longest word).  Decodings with first cut p share their forward parse
    (unique left decipherability) and branch only backward; backward
    branches are counted exactly on the phase-folded match graph.
    """
    _require_disjoint(code)
    if not isinstance(stream, PeriodicStream):
        stream = PeriodicStream(*stream)
    graph = _LeftPhaseGraph(code, stream)
    total = 0
    for p in range(code.max_len):
        if not _forward_ok(code, stream, p, window):
            continue
        for idx in _matches_ending_at(code, stream, p):
            w = code.words[idx]
            if len(w) <= p:
                continue  # previous cut would be nonnegative: p not minimal
            total += graph.count_paths((p - len(w)) % graph.period)
    return total


def power(code, m, cap=DEFAULT_POWER_CAP):
    """All m-fold concatenations; disjointness is inherited."""
    _require_disjoint(code)
    if m < 1:
        raise ValueError("power must be >= 1")
    if code.size**m > cap:
        raise SizeOverflow(f"{code.size}^{m} exceeds cap {cap}")
    words = [()]
    for _ in range(m):
        words = [u + w for u in words for w in code.words]
    return CodeBook(tuple(words), N=code.N)


def extend_suffix(code, suffixes):
    """Append per-word suffixes; missing entries mean the empty suffix.

    A prefix of an extended word that is itself an extended word would
    force a prefix relation among the originals, so disjointness is
    inherited.
    """
    _require_disjoint(code)
    out = []
    for w in code.words:
        suf = tuple(suffixes.get(w, ()))
        out.append(w + suf)
    n = max([code.N] + [max(w) for w in out])
    return CodeBook(tuple(out), N=n)
