"""Acceptance suite: each criterion runs at its stated tolerance and
prints one pass/fail line.

The end-to-end criteria share a single full-pipeline run on the bundled
two-matrix configuration (session fixture); the determinism criterion
runs a reduced configuration twice under different thread counts.
"""

import json
import math
import os
import re
import subprocess
import sys
import time

import numpy as np
import pytest

from nonhyp.cli import RunConfig, run_pipeline
from nonhyp.codes import CodeBook, PeriodicStream, count_decodings, forward_decode
from nonhyp.fiber import (
    MatrixSL2,
    FiberFamily,
    exponent_dictionary_check,
    finite_time_exponent,
    lyapunov_upper,
    projective_orbit_exponent,
    sl2_power,
)
from nonhyp.suspension import RoofProfile, abramov_entropy, bernstein_horizon, large_dev_fraction

LOG2 = math.log(2.0)


def report_line(criterion, ok, detail):
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")


@pytest.fixture(scope="session")
def pipeline():
    """One full run of the bundled example, with per-stage wall clock."""
    cfg = RunConfig.from_file(
        os.path.join(os.path.dirname(__file__), "..", "configs", "two_matrix.toml")
    )
    stamps = {}
    t0 = time.time()

    def log(msg):
        m = re.match(r"(.+) done", msg)
        if m:
            stamps[m.group(1)] = time.time() - t0

    code, report = run_pipeline(cfg, log=log)
    assert code == 0, report.get("error")
    return report, stamps


# ----------------------------------------------------------- criterion 1


def test_criterion_1_codes_suite(rng):
    t0 = time.time()
    classic = CodeBook(((1, 2, 1), (1, 2, 2), (2, 1), (2, 2, 1)))
    stream = PeriodicStream(left=(1, 2, 2), center=(1, 2, 1), right=(1, 2, 1))
    n_classic = count_decodings(classic, stream)

    from test_codes import random_disjoint_code

    violations = 0
    for _ in range(200):
        code = random_disjoint_code(rng, n_symbols=4, max_len=5)
        pick = lambda k: sum(
            (code.words[int(i)] for i in rng.integers(0, code.size, size=k)), ()
        )
        s = PeriodicStream(pick(2), pick(2), pick(2))
        n = count_decodings(code, s)
        if not 1 <= n <= code.max_len:
            violations += 1

    exact = 0
    pool = [random_disjoint_code(rng) for _ in range(20)]
    for _ in range(10_000):
        code = pool[int(rng.integers(0, len(pool)))]
        idx = list(rng.integers(0, code.size, size=20))
        streamed = sum((code.words[i] for i in idx), ())
        dec = forward_decode(code, streamed)
        exact += dec.indices == idx and dec.residual == ()
    elapsed = time.time() - t0

    ok = n_classic >= 2 and violations == 0 and exact == 10_000 and elapsed < 10
    report_line(1, ok, f"classic-example stream decodings {n_classic} >= 2, "
                       f"{violations} bound violations, {exact}/10000 round "
                       f"trips, {elapsed:.1f}s")
    assert n_classic >= 2
    assert violations == 0
    assert exact == 10_000
    assert elapsed < 10


# ----------------------------------------------------------- criterion 2


def test_criterion_2_cocycle_dictionary():
    t0 = time.time()
    diag = [MatrixSL2.diagonal(2.0)]
    lam = lyapunov_upper(diag, np.ones(1000, dtype=int))
    fam = FiberFamily.projective(diag)
    e2 = finite_time_exponent(fam, (1,), 0.5)
    e1 = finite_time_exponent(fam, (1,), 0.0)
    # generic directions at a long squaring horizon: -2 lambda1 elsewhere
    n = 2**25
    prod, log_scale = sl2_power(diag[0], n)
    generic = [
        float(projective_orbit_exponent(prod, log_scale, x) / n)
        for x in (0.13, 0.31, 0.72, 0.86)
    ]
    case = exponent_dictionary_check(diag, [1] * 1000, 1000)
    rot = lyapunov_upper([MatrixSL2.rotation(1.0)], np.ones(1000, dtype=int))
    elapsed = time.time() - t0

    ok = (
        abs(lam - LOG2) <= 1e-9
        and abs(e2 - 2 * LOG2) <= 1e-6
        and abs(e1 + 2 * LOG2) <= 1e-6
        and all(abs(g + 2 * LOG2) <= 1e-6 for g in generic)
        and case.case == "positive"
        and case.ok
        and abs(rot) <= 1e-9
        and elapsed < 5
    )
    report_line(2, ok, f"lambda1 err {abs(lam - LOG2):.2e}, v0 exponent "
                       f"{e2:.6f}, generic max err "
                       f"{max(abs(g + 2 * LOG2) for g in generic):.2e}, "
                       f"rotation {abs(rot):.2e}, {elapsed:.1f}s")
    assert abs(lam - LOG2) <= 1e-9
    assert abs(e2 - 2 * LOG2) <= 1e-6
    assert abs(e1 + 2 * LOG2) <= 1e-6
    for g in generic:
        assert abs(g + 2 * LOG2) <= 1e-6
    assert case.case == "positive" and case.ok
    assert abs(rot) <= 1e-9
    assert elapsed < 5


# ----------------------------------------------------------- criterion 3


def test_criterion_3_abramov(rng):
    h = abramov_entropy(RoofProfile((2, 4)))
    exact = abs(h - LOG2 / 3) <= 1e-15 * abs(h)
    monotone = True
    for _ in range(1000):
        m = int(rng.integers(2, 7))
        base = [int(r) for r in rng.integers(1, 30, size=m)]
        h0 = abramov_entropy(RoofProfile(tuple(base)))
        j = int(rng.integers(0, m))
        base[j] += int(rng.integers(1, 6))
        if not abramov_entropy(RoofProfile(tuple(base))) < h0:
            monotone = False
    report_line(3, exact and monotone,
                f"entropy(2,4) = {h!r} vs log2/3, monotone over 1000 profiles: "
                f"{monotone}")
    assert exact
    assert monotone


# ----------------------------------------------------------- criterion 4


def test_criterion_4_bernstein_anchor():
    # brute-force oracle recomputed here, never trusted from memory
    m = 1
    while not 2 * m * math.exp(-3 * m * 0.5 / 2.0) <= 0.5:
        m += 1
    ok = m == 4 and bernstein_horizon(1.0, 0.5) == 4
    report_line(4, ok, f"N0(C=1, eps=0.5) = {bernstein_horizon(1.0, 0.5)}, "
                       f"oracle {m}")
    assert m == 4
    assert bernstein_horizon(1.0, 0.5) == 4


@pytest.mark.xfail(
    strict=True,
    reason=(
        "The concentration bound keeps its stated exponential constant, "
        "which is far too optimistic at its own horizon: for a two-value "
        "roof with spread 2, the all-window event at m = N0 = 4 forces the "
        "first five symbols to alternate (probability 1/16), so the "
        "fraction cannot exceed 1 - eps = 0.5; the honest assertion below "
        "is kept and expected to fail."
    ),
)
def test_criterion_4_fraction_at_horizon(rng):
    t0 = time.time()
    eps = 0.5
    psi = lambda a, k: 1.0
    sigma = math.sqrt(0.25 / 100_000)
    results = []
    for _ in range(10):
        r1 = int(rng.integers(1, 7))
        r2 = int(rng.integers(1, 7))
        while r2 == r1:
            r2 = int(rng.integers(1, 7))
        prof = RoofProfile((r1, r2))
        n0 = bernstein_horizon(prof.deviation_bound(), eps)
        frac = large_dev_fraction(prof, psi, m=n0, eps=eps, trials=100_000,
                                  seed=int(rng.integers(2**31)))
        results.append((prof.R, n0, frac))
    elapsed = time.time() - t0
    ok = all(f > 1 - eps - 3 * sigma for _, _, f in results) and elapsed < 60
    report_line(4, ok, "fractions at N0: "
                + ", ".join(f"{r}@{n0}:{f:.3f}" for r, n0, f in results)
                + f", {elapsed:.1f}s")
    assert elapsed < 60
    for r, n0, f in results:
        assert f > 1 - eps - 3 * sigma, (r, n0, f)


# ----------------------------------------------------------- criterion 5


def test_criterion_5_cascade_end_to_end(pipeline):
    report, stamps = pipeline
    stages = report["initial_system"], report["cascade"], report["suspension"]
    assert all(stages)

    spectra = report["measures"]["spectra"]
    in_band = all(s["in_band"] for s in spectra)
    samples_ok = all(s["samples"] == 1000 for s in spectra)

    roof_ok = report["cascade"]["roof_checks"]["ok"]
    entropy_ok = all(c["ok"] for c in report["suspension"]["entropy_checks"])

    # tail-length bound: enforced per tail at construction (violations
    # abort); re-checked here from the sampled roof statistics
    levels = report["cascade"]["levels"]
    l1 = report["initial_system"]["L1"]
    tails_ok = True
    for lvl in levels[1:]:
        alpha_prev = levels[lvl["n"] - 1]["certificate"]["alpha"]
        min_flat = lvl["min_roof"] - lvl["max_tail"]
        tails_ok &= lvl["max_tail"] <= l1 * abs(alpha_prev) * min_flat

    elapsed = max(stamps.values())
    ok = in_band and samples_ok and roof_ok and entropy_ok and tails_ok \
        and elapsed < 600
    detail = ", ".join(
        f"level {s['level']}: [{s['low']:.4f},{s['high']:.4f}] in "
        f"[{s['band'][0]:.4f},{s['band'][1]:.4f}]" for s in spectra
    )
    report_line(5, ok, f"{detail}; roof {roof_ok}, entropy {entropy_ok}, "
                       f"tails {tails_ok}, {elapsed:.0f}s")
    assert in_band and samples_ok
    assert roof_ok
    assert entropy_ok
    assert tails_ok
    assert elapsed < 600


# ----------------------------------------------------------- criterion 6


def test_criterion_6_concentration(pipeline):
    report, stamps = pipeline
    conc = report["measures"]["concentration"]
    eps = 0.25
    fractions = {c["observable"]: c["fraction_within"] for c in conc}
    conc_ok = len(conc) == 5 and all(f > 1 - eps for f in fractions.values())
    weak = report["measures"]["weakstar"]
    decay_ok = weak["decaying"]
    elapsed = stamps.get("measures", 0.0) - stamps.get("suspension", 0.0)
    ok = conc_ok and decay_ok and elapsed < 300
    report_line(6, ok, f"fractions {fractions}, weak-star decaying "
                       f"{decay_ok}, {elapsed:.0f}s")
    assert conc_ok, fractions
    assert decay_ok, weak["diffs"]
    assert elapsed < 300


# ----------------------------------------------------------- criterion 7


def test_criterion_7_determinism(tmp_path):
    cfg = json.load(open(
        os.path.join(os.path.dirname(__file__), "..", "configs",
                     "two_matrix.json")
    ))
    cfg["skeleton"]["budget"] = 120_000
    cfg["blending"]["centers"] = 32
    cfg["suspension"]["trials"] = 20_000
    cfg["measures"].update({"trials": 800, "spectrum_trials": 80})
    cfg_path = tmp_path / "light.json"
    cfg_path.write_text(json.dumps(cfg))

    outputs = []
    for threads in ("1", "4"):
        out_dir = tmp_path / f"thr{threads}"
        out_dir.mkdir()
        env = dict(os.environ, NONHYP_THREADS=threads)
        proc = subprocess.run(
            [sys.executable, "-m", "nonhyp.cli", "run", "--config",
             str(cfg_path), "--out-dir", str(out_dir)],
            env=env, capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr[-2000:]
        outputs.append((out_dir / "report.json").read_bytes())
    identical = outputs[0] == outputs[1]
    report_line(7, identical,
                f"reports byte-identical across thread counts: {identical} "
                f"({len(outputs[0])} bytes)")
    assert identical
