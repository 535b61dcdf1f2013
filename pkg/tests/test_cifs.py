"""Certificate verification, attractor points, spectra, distortion."""

import math

import numpy as np
import pytest

from nonhyp.circle import Arc, circ_dist
from nonhyp.cifs import (
    CifsCertificate,
    attractor_point,
    distortion_horizon,
    distortion_radius,
    exponent_spectrum,
    Horseshoe,
    modulus_of_continuity,
    verify_cifs,
)
from nonhyp.codes import CodeBook
from nonhyp.errors import CertificateViolated, HypothesisFails, NoConvergence
from nonhyp.fiber import FiberFamily, NorthSouthMap, Rotation


@pytest.fixture
def ns_family():
    """Two north-south maps, both attracting at 1/2 on J = [0.45, 0.55]."""
    return FiberFamily([NorthSouthMap(0.5), NorthSouthMap(0.3)])


@pytest.fixture
def ns_code():
    return CodeBook(((1,), (2,)))


@pytest.fixture
def ns_cert():
    return CifsCertificate(Arc(0.5, 0.1), K=1.2, alpha0=-0.25, alpha=-0.5, eps=0.27)


def test_certificate_validation():
    with pytest.raises(ValueError):
        CifsCertificate(Arc(0.5, 0.1), K=0.5, alpha0=-1.0, alpha=-1.0, eps=0.5)
    with pytest.raises(ValueError):
        CifsCertificate(Arc(0.5, 0.1), K=1.0, alpha0=-1.0, alpha=-1.0, eps=1.5)


def test_verify_passes_constructed_contraction(ns_family, ns_code, ns_cert):
    rep = verify_cifs(ns_family, ns_code, ns_cert)
    assert rep.ok
    assert rep.containment_margin >= 0
    assert rep.note  # the finite-m slack is stated


def test_verify_fails_with_understated_constant(ns_family, ns_code):
    bad = CifsCertificate(Arc(0.5, 0.1), K=1.0, alpha0=-0.75, alpha=-0.5, eps=0.27)
    with pytest.raises(CertificateViolated) as err:
        verify_cifs(ns_family, ns_code, bad)
    assert err.value.clause == "b"
    assert "k" in err.value.witness


def test_verify_fails_containment_for_offcenter_interval(ns_family, ns_code):
    cert = CifsCertificate(Arc(0.25, 0.1), K=1.2, alpha0=-0.01, alpha=-0.5, eps=0.45)
    with pytest.raises(CertificateViolated) as err:
        verify_cifs(ns_family, ns_code, cert)
    assert err.value.clause in ("a", "c")


def test_attractor_constant_window_reaches_fixed_point(ns_family, ns_cert):
    window = [(1,)] * 80
    pt = attractor_point(ns_family, window, 0.46, tol=1e-10, cert=ns_cert)
    assert circ_dist(pt.x, 0.5) < 1e-10  # Banach fixed point of map 1
    assert pt.residual <= 1e-10


def test_attractor_independent_of_seed(ns_family, ns_cert, rng):
    window = [((1,) if b else (2,)) for b in rng.integers(0, 2, size=60)]
    p1 = attractor_point(ns_family, window, 0.455, tol=1e-10, cert=ns_cert)
    p2 = attractor_point(ns_family, window, 0.545, tol=1e-10, cert=ns_cert)
    assert circ_dist(p1.x, p2.x) < 2e-10


def test_attractor_budget_dominates_observed(ns_family, ns_cert, rng):
    budget = ns_cert.contraction_budget(1e-10)
    for _ in range(10):
        window = [((1,) if b else (2,)) for b in rng.integers(0, 2, size=budget + 20)]
        pt = attractor_point(ns_family, window, 0.47, tol=1e-10, cert=ns_cert)
        assert pt.symbols_used <= budget


def test_attractor_shift_equivariance(ns_family, ns_cert, rng):
    """x(window + [w]) == f_[w](x(window)) within tolerance, en masse."""
    for _ in range(1000):
        window = [((1,) if b else (2,)) for b in rng.integers(0, 2, size=48)]
        w0 = (1,) if rng.integers(0, 2) else (2,)
        base = attractor_point(ns_family, window, 0.5, tol=1e-9, cert=ns_cert).x
        shifted = attractor_point(ns_family, window + [w0], 0.5, tol=1e-9,
                                  cert=ns_cert).x
        assert circ_dist(ns_family.apply_word(w0, base), shifted) < 1e-8


def test_attractor_no_convergence_on_isometries():
    fam = FiberFamily([Rotation(0.37)])
    with pytest.raises(NoConvergence):
        attractor_point(fam, [(1,)] * 50, 0.2, tol=1e-10)


def test_exponent_spectrum_stays_in_band(ns_family, ns_code, ns_cert):
    rep = verify_cifs(ns_family, ns_code, ns_cert)
    shoe = Horseshoe(ns_code, ns_cert, rep)
    spec = exponent_spectrum(ns_family, shoe, trials=16, words_per_trial=64)
    assert spec.within(ns_cert.alpha, ns_cert.eps)
    assert spec.samples == 16 * 64


def test_single_word_uniform_derivative_spectrum():
    """A rotation composed with itself has exponent exactly zero; use a
    1-word nearly-affine contraction instead and check the singleton."""
    fam = FiberFamily([NorthSouthMap(0.5)])
    code = CodeBook(((1, 1),))
    cert = CifsCertificate(Arc(0.5, 0.02), K=1.1, alpha0=-0.6, alpha=-0.693, eps=0.05)
    rep = verify_cifs(fam, code, cert)
    shoe = Horseshoe(code, cert, rep)
    spec = exponent_spectrum(fam, shoe, trials=4, words_per_trial=16)
    assert spec.high - spec.low < 0.02  # essentially one exponent
    assert spec.within(cert.alpha, cert.eps)


# ---------------------------------------------------------------- distortion


def test_distortion_horizon_constant_observable(ns_family, ns_code, ns_cert):
    phi = lambda sym, x: 3.25
    assert distortion_horizon(ns_family, ns_code, phi, tau=0.01, J=ns_cert.J) == 1


def test_distortion_horizon_symbol_indicator(ns_family, ns_code, ns_cert):
    phi = lambda sym, x: 1.0 if sym == 1 else 0.0
    assert distortion_horizon(ns_family, ns_code, phi, tau=0.5, J=ns_cert.J) == 1


def test_distortion_horizon_fiber_coordinate(ns_family, ns_code, ns_cert):
    phi = lambda sym, x: x
    n1 = distortion_horizon(ns_family, ns_code, phi, tau=0.05, J=ns_cert.J, seed=3)
    assert 1 <= n1 < 4096
    # direct re-check at the returned horizon on fresh tuples
    rng = np.random.default_rng(99)
    for _ in range(8):
        tup = [ns_code.words[int(i)] for i in rng.integers(0, 2, size=n1)]
        flat = sum(tup, ())
        sums = []
        for y0 in ns_cert.J.grid(7):
            y, total = float(y0), 0.0
            for sym in flat:
                total += y
                y = float(ns_family.map(sym).eval(y))
            sums.append(total)
        assert max(sums) - min(sums) < 0.05 * len(flat)


def test_distortion_horizon_cap_exceeded(ns_family, ns_code, ns_cert):
    from nonhyp.errors import HorizonCapExceeded

    phi = lambda sym, x: x
    with pytest.raises(HorizonCapExceeded):
        distortion_horizon(ns_family, ns_code, phi, tau=1e-9, J=ns_cert.J,
                           m_cap=4)


def test_distortion_radius_isometries_return_cap():
    fam = FiberFamily([Rotation(0.1), Rotation(0.77)])
    r = distortion_radius(fam, (1, 2, 1, 2), 0.3, K0=1.5, alpha=-1e-9, eps=0.4)
    assert r == 0.25


def test_distortion_radius_north_south(ns_family):
    word = (1,) * 8
    x = 0.5
    r = distortion_radius(ns_family, word, x, K0=1.05, alpha=-0.693, eps=0.2)
    assert 0 < r <= 0.25
    assert modulus_of_continuity(ns_family, 1.05 * r) <= 0.05 + 1e-12
    # widened sandwich re-checked directly
    rng = np.random.default_rng(5)
    ks = np.arange(1, len(word) + 1)
    for y in (x + (rng.random(100) - 0.5) * 2 * r) % 1.0:
        total, yy = 0.0, float(y)
        for j, sym in enumerate(word, start=1):
            m = ns_family.map(sym)
            total += math.log(float(m.deriv(yy)))
            yy = float(m.eval(yy))
            assert total <= math.log(1.05) + j * (-0.693 + 0.1) + 1e-9
            assert total >= -math.log(1.05) + j * (-0.693 - 0.1) - 1e-9


def test_distortion_radius_hypothesis_failure(ns_family):
    # a word visiting the repelling region violates the contraction sandwich
    with pytest.raises(HypothesisFails):
        distortion_radius(ns_family, (1, 1, 1), 0.01, K0=1.01, alpha=-0.69, eps=0.1)
