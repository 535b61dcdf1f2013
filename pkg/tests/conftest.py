import warnings
from dataclasses import dataclass

import numpy as np
import pytest

from nonhyp.fiber import FiberFamily, MatrixSL2, NorthSouthMap, Rotation


@pytest.fixture
def two_matrix_cocycle():
    """One hyperbolic diag(2, 1/2) and one rotation by 1 radian."""
    return [MatrixSL2.diagonal(2.0), MatrixSL2.rotation(1.0)]


@dataclass
class MiniPipeline:
    family: object
    sampler: object
    stats: object
    blending: object
    skeleton: object
    code: object
    certificate: object
    used_blending: object
    levels: list
    eps_H: float


@pytest.fixture(scope="session")
def mini_pipeline():
    """Small end-to-end construction on a north-south + rotation family;
    level 1 materializes exactly (M below the cap)."""
    from nonhyp.blending import find_blending
    from nonhyp.cascade import build_cascade
    from nonhyp.skeleton import (
        MeasureSampler,
        build_initial_cifs,
        estimate_measure_stats,
        extract_skeleton,
    )

    family = FiberFamily([NorthSouthMap(0.6), Rotation(np.sqrt(2) - 1)])
    sampler = MeasureSampler(weights=np.array([0.6, 0.4]), seed=5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        bl, _table, _certs = find_blending(
            family, centers=32, deltas=(2**-6,), depth_cap=60, beam_width=24,
            shortlist=3,
        )
        stats = estimate_measure_stats(sampler, family, horizon=400,
                                       trials=200, seed=5)
        skel = extract_skeleton(
            sampler, family, n=8, eps_E=abs(stats.alpha) * 0.42, eps_H=0.6,
            alpha=stats.alpha, K0_cap=25.0, budget=400000, seed=5,
        )
        code, cert, used, _rep = build_initial_cifs(skel, family, bl, seed=5,
                                                    grid_pts=9)
        levels = build_cascade(code, cert, used, family, m_schedule=[3],
                               seed=5, stat_samples=80, verify_samples=24)
    return MiniPipeline(family, sampler, stats, bl, skel, code, cert, used,
                        levels, eps_H=0.6)


@pytest.fixture
def two_matrix_family(two_matrix_cocycle):
    return FiberFamily.projective(two_matrix_cocycle)


@pytest.fixture
def rotation_family():
    return FiberFamily([Rotation(np.sqrt(2) - 1), Rotation(np.sqrt(3) - 1)])


@pytest.fixture
def north_south_family():
    return FiberFamily([NorthSouthMap(0.5), Rotation(0.239)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
