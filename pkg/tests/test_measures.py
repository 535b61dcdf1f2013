"""Orbit statistics: spectra, concentration, weak-star diagnostics."""

import math

import numpy as np
import pytest

from nonhyp.cascade import CascadeLevel
from nonhyp.cifs import CifsCertificate
from nonhyp.circle import Arc
from nonhyp.codes import CodeBook
from nonhyp.fiber import FiberFamily, NorthSouthMap
from nonhyp.measures import (
    Observable,
    battery,
    birkhoff_concentration,
    birkhoff_concentration_battery,
    exponent_of_level,
    reference_integral,
    sample_orbit,
    weakstar_diagnostic,
)


@pytest.fixture
def single_word_level():
    fam = FiberFamily([NorthSouthMap(0.5)])
    code = CodeBook(((1, 1, 1),))
    cert = CifsCertificate(Arc(0.5, 0.05), K=1.1, alpha0=-0.5, alpha=-0.69,
                           eps=0.05)
    return fam, CascadeLevel.base(code, cert, L1=5.0, family=fam)


# ------------------------------------------------------------ orbit samples


def test_single_word_orbit_is_periodic(single_word_level):
    fam, lvl = single_word_level
    orbit = sample_orbit(fam, lvl, length=30, seed=1)
    assert np.array_equal(orbit.symbols, np.ones(30, dtype=int))
    # the fiber settles on the fixed point of the word map
    assert abs(orbit.xs[-1] - 0.5) < 1e-6


def test_orbit_seed_determinism(mini_pipeline):
    fam = mini_pipeline.family
    lvl = mini_pipeline.levels[1]
    o1 = sample_orbit(fam, lvl, length=120, seed=42)
    o2 = sample_orbit(fam, lvl, length=120, seed=42)
    assert np.array_equal(o1.symbols, o2.symbols)
    assert np.array_equal(o1.xs, o2.xs)
    o3 = sample_orbit(fam, lvl, length=120, seed=43)
    assert not np.array_equal(o1.symbols, o3.symbols)


def test_orbit_spot_check(mini_pipeline):
    fam = mini_pipeline.family
    orbit = sample_orbit(fam, mini_pipeline.levels[0], length=200, seed=3)
    assert orbit.spot_check(fam)


def test_isometric_fiber_increments():
    from nonhyp.fiber import Rotation

    fam = FiberFamily([Rotation(0.23)])
    code = CodeBook(((1, 1),))
    cert = CifsCertificate(Arc(0.5, 0.5), K=1.0, alpha0=-0.01, alpha=-0.02,
                           eps=0.01)
    lvl = CascadeLevel.base(code, cert, L1=1.0, family=fam)
    orbit = sample_orbit(fam, lvl, length=40, seed=2)
    steps = np.abs(np.diff(orbit.xs))
    steps = np.minimum(steps, 1 - steps)
    assert np.all(steps <= 0.23 + 1e-12)


# ---------------------------------------------------------------- exponents


def test_exponent_single_word_level(single_word_level):
    fam, lvl = single_word_level
    rep = exponent_of_level(fam, lvl, trials=32, seed=1)
    assert rep.estimate == pytest.approx(math.log(0.5), abs=0.02)
    assert rep.in_band


def test_exponent_levels_halve(mini_pipeline):
    fam = mini_pipeline.family
    reps = [
        exponent_of_level(fam, lvl, trials=150, seed=7 + lvl.n)
        for lvl in mini_pipeline.levels
    ]
    for rep, lvl in zip(reps, mini_pipeline.levels):
        assert rep.in_band, (rep.low, rep.high, rep.band)
    assert reps[1].estimate == pytest.approx(reps[0].estimate / 2, abs=0.02)


# ------------------------------------------------------------ concentration


def test_constant_observable_concentrates_exactly(mini_pipeline):
    fam = mini_pipeline.family
    const = Observable("const", lambda s, x: 1.75)
    rep = birkhoff_concentration(fam, mini_pipeline.levels, n=1, ell=0,
                                 observable=const, eps=0.3, trials=64, seed=2,
                                 reference=1.75)
    assert rep.fraction_within == 1.0
    assert rep.ok


def test_concentration_mini(mini_pipeline):
    fam = mini_pipeline.family
    reps = birkhoff_concentration_battery(
        fam, mini_pipeline.levels, n=1, ell=0, observables=battery(),
        eps=0.35, trials=250, seed=3,
    )
    for rep in reps:
        assert rep.fraction_within > 1 - 0.35, rep.observable
    assert reps[0].horizon == int(round(mini_pipeline.levels[0].stats.mean_roof))


def test_concentration_requires_ell_below_n(mini_pipeline):
    obs = Observable("c", lambda s, x: x)
    with pytest.raises(ValueError):
        birkhoff_concentration(mini_pipeline.family, mini_pipeline.levels,
                               n=1, ell=1, observable=obs, eps=0.3, trials=8,
                               seed=1)


def test_reference_integral_fiber_observable(mini_pipeline):
    """The level-0 fiber-coordinate integral sits inside J."""
    fam = mini_pipeline.family
    ref = reference_integral(fam, mini_pipeline.levels[0],
                             battery()[0], trials=400, seed=9)
    j = mini_pipeline.certificate.J
    assert j.contains_point(ref, tol=j.length)


# ---------------------------------------------------------------- weak star


def test_weakstar_constant_observable_zero_diffs(mini_pipeline):
    fam = mini_pipeline.family
    const = Observable("const", lambda s, x: np.where(np.asarray(s) > 0, 2.0, 2.0))
    diag = weakstar_diagnostic(fam, mini_pipeline.levels, observables=[const],
                               trials=40, seed=4)
    assert np.allclose(diag.diffs, 0.0)
    assert diag.decaying


def test_weakstar_mini_battery(mini_pipeline):
    fam = mini_pipeline.family
    diag = weakstar_diagnostic(fam, mini_pipeline.levels, trials=120, seed=5)
    assert diag.integrals.shape == (2, 5)
    assert diag.decaying
    blob = diag.to_json()
    assert set(blob) == {"names", "integrals", "diffs", "noise", "decaying"}
