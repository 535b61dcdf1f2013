"""Circle arithmetic: points in [0,1), arcs, and arc images under diffeos.

Arcs are stored as (center, length).  Keeping the length as its own field
lets arcs survive contraction far below the resolution of endpoint
differences (cascade levels shrink intervals to ~1e-60), where an
(lo, hi) representation would collapse to a point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Below this length, arc images are propagated to first order through the
# derivative at the center instead of through endpoint images.
_TINY = 1e-9

# Up to this length, endpoint images cannot be seam-ambiguous (image
# lengths stay far from both 0 and 1), so no interior guard is needed.
_SMALL = 1e-3

# Interior samples guarding endpoint-image orientation across the seam.
_GUARD_SAMPLES = 17


def wrap(x):
    """Reduce to the fundamental domain [0,1)."""
    return np.mod(x, 1.0)


def circ_dist(a, b):
    """Shortest distance on the circle of length one."""
    d = np.abs(np.mod(a - b, 1.0))
    return np.minimum(d, 1.0 - d)


def signed_gap(frm, to):
    """Positively-oriented distance from `frm` to `to`, in [0,1)."""
    return (to - frm) % 1.0


@dataclass(frozen=True)
class Arc:
    """Closed arc of the circle: the positively-oriented sweep from
    center - length/2 to center + length/2."""

    center: float
    length: float

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("negative arc length")
        object.__setattr__(self, "center", float(self.center) % 1.0)
        object.__setattr__(self, "length", float(min(self.length, 1.0)))

    @classmethod
    def from_endpoints(cls, lo, hi):
        """Arc sweeping positively from lo to hi."""
        length = signed_gap(lo, hi)
        return cls(wrap(lo + length / 2.0), length)

    @classmethod
    def full(cls):
        return cls(0.5, 1.0)

    @property
    def lo(self):
        return (self.center - self.length / 2.0) % 1.0

    @property
    def hi(self):
        return (self.center + self.length / 2.0) % 1.0

    @property
    def is_full(self):
        return self.length >= 1.0

    def ball(self, delta):
        """The delta-neighborhood, still an arc."""
        return Arc(self.center, min(self.length + 2.0 * delta, 1.0))

    def contains_point(self, x, tol=1e-12):
        if self.is_full:
            return True
        return signed_gap(self.lo, x) <= self.length + tol

    def contains_arc(self, other, tol=1e-12):
        if self.is_full:
            return True
        if other.length > self.length + tol:
            return False
        return signed_gap(self.lo, other.lo) + other.length <= self.length + tol

    def intersects(self, other, tol=1e-12):
        if self.is_full or other.is_full:
            return True
        a = signed_gap(self.lo, other.lo) <= self.length + tol
        b = signed_gap(other.lo, self.lo) <= other.length + tol
        return a or b

    def grid(self, n):
        """n sample points covering the arc, endpoints included."""
        if self.is_full:
            return wrap(np.linspace(0.0, 1.0, n, endpoint=False))
        offs = np.linspace(-self.length / 2.0, self.length / 2.0, max(n, 2))
        return wrap(self.center + offs)


def image_arc(circle_map, arc):
    """Image of an arc under an orientation-preserving circle diffeo.

    Endpoint images fix the image arc for ordinary lengths; a midpoint and
    interior samples guard against mod-1 ambiguity near the seam.  Tiny
    arcs are pushed forward to first order (length times |f'(center)|),
    which is exact up to O(length^2) distortion.
    """
    if arc.is_full:
        return Arc.full()
    if arc.length < _TINY:
        new_len = arc.length * abs(float(circle_map.deriv(arc.center)))
        return Arc(float(circle_map.eval(arc.center)), min(new_len, 1.0))

    lo_img = float(circle_map.eval(arc.lo))
    hi_img = float(circle_map.eval(arc.hi))
    cand = Arc.from_endpoints(lo_img, hi_img)
    if arc.length < _SMALL and cand.length < 0.5:
        return cand
    mid_img = float(circle_map.eval(arc.center))
    if cand.contains_point(mid_img, tol=1e-9):
        xs = arc.grid(_GUARD_SAMPLES)
        imgs = wrap(np.asarray(circle_map.eval(xs)))
        if all(cand.contains_point(v, tol=1e-9) for v in imgs):
            return cand
    # Seam-ambiguous: accumulate lengths over fine sub-arcs instead.
    pieces = 256
    xs = wrap(arc.lo + np.linspace(0.0, arc.length, pieces + 1))
    imgs = np.asarray(circle_map.eval(xs), dtype=float)
    total = float(np.sum(np.mod(np.diff(imgs), 1.0)))
    return Arc.from_endpoints(lo_img, wrap(lo_img + min(total, 1.0)))


def word_image_arc(family, word, arc):
    """Image of an arc under the composition indexed by `word` (applied
    left to right)."""
    cur = arc
    for sym in word:
        cur = image_arc(family.map(sym), cur)
    return cur


def mesh_of_cloud(points):
    """Largest circular gap left uncovered by a finite point cloud."""
    pts = np.sort(wrap(np.asarray(points, dtype=float)))
    if pts.size == 0:
        return 1.0
    gaps = np.diff(pts, append=pts[0] + 1.0)
    return float(np.max(gaps))
