"""Pipeline orchestration and the `nonhyp` command line.

Stages run in construction order: blending -> skeleton -> initial system
-> cascade -> suspension -> measures.  Reports are canonical JSON and
byte-identical for identical (config, seed) regardless of thread count;
wall-clock timing goes to a sidecar log, never into the report.

Exit codes: 0 pass, 2 certificate or assertion failure, 3 search
exhaustion, 4 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import blending as blending_mod
from . import cascade as cascade_mod
from . import measures as measures_mod
from . import suspension as suspension_mod
from ._util import canonical_json, write_json
from .cifs import CifsCertificate
from .codes import CodeBook, PeriodicStream, count_decodings, is_disjoint
from .errors import (
    CardinalityOutOfRange,
    CertificateViolated,
    CifsRejected,
    ConfigError,
    NonhypError,
    SearchExhausted,
    SkeletonTooSmall,
    TailTooLong,
)
from .fiber import FiberFamily, MatrixSL2, lyapunov_upper_batch
from .skeleton import (
    MeasureSampler,
    build_initial_cifs,
    estimate_measure_stats,
    extract_skeleton,
)

FAIL_EXIT = 2
SEARCH_EXIT = 3
CONFIG_EXIT = 4

_DEFAULTS = {
    "blending": {"centers": 64, "deltas": [2**-6], "depth": 70, "beam": 32,
                 "shortlist": 4},
    "skeleton": {"n": 12, "eps_E_frac": 0.4, "eps_H": 0.45, "K0_cap": 25.0,
                 "budget": 1_500_000, "band_margin": 0.7},
    "cascade": {"m": [4, 4], "stat_samples": 160, "verify_samples": 48},
    "suspension": {"ld_eps": 0.3, "trials": 100_000},
    "measures": {"ell": 1, "n": 2, "eps": 0.25, "trials": 10_000,
                 "spectrum_trials": 1_000},
}


@dataclass
class RunConfig:
    """Validated run configuration; all defaults are explicit here and
    echoed into every report."""

    matrices: list
    weights: list | None
    markov: list | None
    seed: int
    blending: dict = field(default_factory=dict)
    skeleton: dict = field(default_factory=dict)
    cascade: dict = field(default_factory=dict)
    suspension: dict = field(default_factory=dict)
    measures: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path):
        try:
            if str(path).endswith(".json"):
                with open(path) as fh:
                    raw = json.load(fh)
            else:
                with open(path, "rb") as fh:
                    raw = tomllib.load(fh)
        except (OSError, ValueError) as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw):
        if "seed" not in raw:
            raise ConfigError("seed is mandatory")
        fam = raw.get("family", {})
        mats = fam.get("matrices")
        if not mats:
            raise ConfigError("family.matrices is required")
        meas = raw.get("measure", {})
        weights = meas.get("weights")
        markov = meas.get("markov")
        if (weights is None) == (markov is None):
            raise ConfigError("provide exactly one of measure.weights/markov")
        cfg = cls(
            matrices=[list(map(float, m)) for m in mats],
            weights=weights,
            markov=markov,
            seed=int(raw["seed"]),
        )
        for stage, defaults in _DEFAULTS.items():
            merged = dict(defaults)
            merged.update(raw.get(stage, {}))
            setattr(cfg, stage, merged)
        cfg.validate()
        return cfg

    def validate(self):
        for m in self.matrices:
            if len(m) != 4:
                raise ConfigError("each matrix needs four entries a,b,c,d")
            if abs(m[0] * m[3] - m[1] * m[2] - 1.0) > 1e-9:
                raise ConfigError(f"matrix {m} is not determinant one")
        sk = self.skeleton
        if not 1 <= sk["n"] <= 64:
            raise ConfigError("skeleton.n out of range [1, 64]")
        if not 0 < sk["eps_H"] < 2:
            raise ConfigError("skeleton.eps_H out of range (0, 2)")
        if "eps_E" in sk and not 0 < sk["eps_E"] < 2:
            raise ConfigError("skeleton.eps_E out of range (0, 2)")
        if not 0 < sk.get("eps_E_frac", 0.4) < 1:
            raise ConfigError("skeleton.eps_E_frac must lie in (0, 1)")
        if any(m < 1 for m in self.cascade["m"]):
            raise ConfigError("cascade.m entries must be >= 1")
        if not 0 < self.measures["eps"] < 1:
            raise ConfigError("measures.eps must lie in (0, 1)")
        return self

    def family(self):
        return FiberFamily.projective(
            [MatrixSL2(*m) for m in self.matrices]
        )

    def sampler(self):
        if self.weights is not None:
            return MeasureSampler(weights=np.asarray(self.weights, float),
                                  seed=self.seed)
        return MeasureSampler(markov=np.asarray(self.markov, float),
                              seed=self.seed)

    def echo(self):
        return {
            "family": {"matrices": self.matrices},
            "measure": {"weights": self.weights, "markov": self.markov},
            "seed": self.seed,
            "blending": self.blending,
            "skeleton": self.skeleton,
            "cascade": self.cascade,
            "suspension": self.suspension,
            "measures": self.measures,
        }


def emit_report_stream(stages, fh):
    """Write {"schema": 1, "stages": {...}} one stage at a time.

    Stage blobs are canonicalized independently, so a report never needs
    the full serialization in memory at once.
    """
    fh.write('{\n"schema": 1,\n"stages": {\n')
    first = True
    for name, blob in stages:
        if not first:
            fh.write(",\n")
        first = False
        fh.write(json.dumps(str(name)))
        fh.write(": ")
        fh.write(canonical_json(blob))
    fh.write("\n}\n}\n")


def emit_report(report, path, fmt="json"):
    """Serialize a report: json (canonical) or csv (flat numeric rows)."""
    if fmt == "json":
        with open(path, "w") as fh:
            emit_report_stream(sorted(report.items()), fh)
        return [path]
    if fmt == "csv":
        files = []
        for name, blob in sorted(report.items()):
            rows = blob.get("rows") if isinstance(blob, dict) else None
            if not rows:
                continue
            out = f"{path}.{name}.csv"
            with open(out, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(rows[0].keys())
                for row in rows:
                    writer.writerow(row.values())
            files.append(out)
        return files
    raise ConfigError(f"unknown report format {fmt}")


# ------------------------------------------------------------- stages


def stage_blending(cfg, family):
    b = cfg.blending
    bl, table, certs = blending_mod.find_blending(
        family,
        centers=b["centers"],
        deltas=tuple(b["deltas"]),
        depth_cap=b["depth"],
        beam_width=b["beam"],
        shortlist=b["shortlist"],
    )
    blob = bl.to_json()
    blob["certificates"] = [c.to_json() for c in certs]
    blob["depth_cap"] = b["depth"]
    blob["grid"] = table.grid
    blob["label"] = f"empirical (depth cap {b['depth']}, grid {table.grid})"
    return blob, bl


def stage_stats(cfg, family, sampler):
    """Exponent and entropy of the base measure; a nonnegative exponent
    estimate stops the pipeline before any search is spent."""
    stats = estimate_measure_stats(family=family, sampler=sampler,
                                   seed=cfg.seed)
    if stats.alpha + 2 * stats.alpha_sem >= -1e-9:
        raise SkeletonTooSmall(
            f"fiber exponent estimate {stats.alpha:.4g} +- "
            f"{stats.alpha_sem:.2g} is not negative"
        )
    blob = {"alpha_hat": stats.alpha, "alpha_sem": stats.alpha_sem,
            "entropy": stats.entropy}
    return blob, stats


def stage_skeleton(cfg, family, sampler, stats):
    sk_cfg = cfg.skeleton
    eps_e = sk_cfg.get("eps_E") or abs(stats.alpha) * sk_cfg["eps_E_frac"]
    skel = extract_skeleton(
        sampler,
        family,
        n=sk_cfg["n"],
        eps_E=eps_e,
        eps_H=sk_cfg["eps_H"],
        alpha=stats.alpha,
        K0_cap=sk_cfg["K0_cap"],
        budget=sk_cfg["budget"],
        seed=cfg.seed,
    )
    blob = {
        "alpha_hat": stats.alpha,
        "alpha_sem": stats.alpha_sem,
        "entropy": stats.entropy,
        "eps_E": eps_e,
        "eps_H": sk_cfg["eps_H"],
        "n": sk_cfg["n"],
        "entries": skel.size,
        "K0": skel.K0,
        "L0": skel.L0,
        "rejection_rate": skel.rejection_rate,
    }
    return blob, skel


def stage_initial(cfg, family, skel, bl):
    code, cert, used, rep = build_initial_cifs(
        skel, family, bl, seed=cfg.seed,
        band_margin=cfg.skeleton["band_margin"],
    )
    blob = {
        "code": code.to_json(),
        "certificate": cert.to_json(),
        "blending_used": used.to_json(),
        "center": rep.center,
        "m_c": rep.m_c,
        "L1": rep.L1,
        "points_in_J": rep.points_in_J,
        "dropped_by_spectrum": rep.dropped_by_spectrum,
        "K_theory": rep.K_theory,
        "note": rep.note,
        "disjoint": is_disjoint(code),
    }
    return blob, (code, cert, used)


def stage_cascade(cfg, family, code, cert, used):
    c = cfg.cascade
    levels = cascade_mod.build_cascade(
        code, cert, used, family, m_schedule=c["m"], seed=cfg.seed,
        stat_samples=c["stat_samples"], verify_samples=c["verify_samples"],
    )
    roof = cascade_mod.roof_assumption_check(levels, seed=cfg.seed)
    blob = {
        "m": c["m"],
        "levels": [
            {
                "n": lvl.n,
                "log_M": lvl.log_M,
                "mean_roof": lvl.stats.mean_roof,
                "min_roof": lvl.stats.min_roof,
                "max_roof": lvl.stats.max_roof,
                "mean_tail": lvl.stats.mean_tail,
                "max_tail": lvl.stats.max_tail,
                "sampled": lvl.stats.sampled,
                "sample_size": lvl.stats.sample_size,
                "entropy": lvl.log_M / lvl.stats.mean_roof,
                "certificate": lvl.certificate.to_json(),
                "warnings": lvl.warnings,
                "margins": (
                    {
                        "containment": lvl.verify_report.containment_margin,
                        "contraction": lvl.verify_report.contraction_margin,
                        "spectrum": lvl.verify_report.spectrum_margin,
                        "spectrum_observed": list(
                            lvl.verify_report.spectrum_observed
                        ),
                        "note": lvl.verify_report.note,
                    }
                    if hasattr(lvl, "verify_report")
                    else None
                ),
            }
            for lvl in levels
        ],
        "roof_checks": {
            "K": roof["K"],
            "L2": roof["L2"],
            "ok": roof["ok"],
            "checks": [c.to_json() for c in roof["checks"]],
        },
    }
    return blob, (levels, roof)


def stage_suspension(cfg, levels, stats, roof):
    s = cfg.suspension
    h0 = stats.entropy
    eps_h = cfg.skeleton["eps_H"]
    entropy_checks = cascade_mod.entropy_lower_bound(levels, h0, eps_h)
    base_prof = suspension_mod.RoofProfile(
        tuple(len(w) for w in levels[0].code.words)
    )
    c_dev = base_prof.deviation_bound()
    n0 = suspension_mod.bernstein_horizon(max(c_dev, 1e-9), s["ld_eps"])
    frac = suspension_mod.large_dev_fraction(
        base_prof, lambda a, k: 1.0, m=n0, eps=s["ld_eps"],
        trials=s["trials"], seed=cfg.seed,
    )
    mean_roofs = [lvl.stats.mean_roof for lvl in levels]
    m_schedule = [lvl.m for lvl in levels[1:]]
    tail_masses = []
    if len(levels) > 1:
        for ell in range(len(levels) - 1):
            tm, bound = suspension_mod.tail_mass_estimate(
                mean_roofs, m_schedule, ell, L2=roof["L2"]
            )
            tail_masses.append({"ell": ell, "fraction": tm, "bound": bound,
                                "ok": tm <= bound})
    blob = {
        "per_level": [
            suspension_mod.SuspensionStats.from_level(lvl).to_json()
            for lvl in levels
        ],
        "entropy_checks": [c.to_json() for c in entropy_checks],
        "bernstein": {"C": c_dev, "eps": s["ld_eps"], "N0": n0,
                      "fraction_at_N0": frac, "trials": s["trials"]},
        "tail_masses": tail_masses,
    }
    ok = all(c.ok for c in entropy_checks) and all(t["ok"] for t in tail_masses)
    return blob, ok


def stage_measures(cfg, family, levels):
    m = cfg.measures
    spectra = []
    for lvl in levels:
        rep = measures_mod.exponent_of_level(
            family, lvl, trials=m["spectrum_trials"], seed=cfg.seed + lvl.n
        )
        spectra.append(rep.to_json())
    obs = measures_mod.battery()
    reports = measures_mod.birkhoff_concentration_battery(
        family, levels, n=m["n"], ell=m["ell"], observables=obs,
        eps=m["eps"], trials=m["trials"], seed=cfg.seed,
    )
    weak = measures_mod.weakstar_diagnostic(
        family, levels, observables=obs, seed=cfg.seed
    )
    blob = {
        "spectra": spectra,
        "concentration": [r.to_json() for r in reports],
        "concentration_rows": [
            {"observable": r.observable, "fraction": r.fraction_within}
            for r in reports
        ],
        "weakstar": weak.to_json(),
        "note": "desk-scale eps; the asymptotic regime is out of reach",
    }
    ok = (
        all(s["in_band"] for s in spectra)
        and all(r.ok for r in reports)
        and weak.decaying
    )
    return blob, ok


def run_pipeline(config, out_dir=None, log=None):
    """Execute all stages; emit partial reports on failure.

    Returns (exit_code, report dict).  Timing lives in the log only so
    reports stay byte-identical across runs and thread counts.
    """
    report = {"config": config.echo(), "versions": _versions()}
    log = log or (lambda *_: None)
    t_start = time.time()
    family = config.family()
    sampler = config.sampler()
    ok_all = True
    try:
        blob, stats = stage_stats(config, family, sampler)
        report["measure_stats"] = blob
        log(f"measure stats done ({time.time() - t_start:.1f}s)")
        blob, bl = stage_blending(config, family)
        report["blending"] = blob
        log(f"blending done ({time.time() - t_start:.1f}s)")
        blob, skel = stage_skeleton(config, family, sampler, stats)
        report["skeleton"] = blob
        log(f"skeleton done ({time.time() - t_start:.1f}s)")
        blob, (code, cert, used) = stage_initial(config, family, skel, bl)
        report["initial_system"] = blob
        log(f"initial system done ({time.time() - t_start:.1f}s)")
        blob, (levels, roof) = stage_cascade(config, family, code, cert, used)
        report["cascade"] = blob
        ok_all &= roof["ok"]
        log(f"cascade done ({time.time() - t_start:.1f}s)")
        blob, ok = stage_suspension(config, levels, stats, roof)
        report["suspension"] = blob
        ok_all &= ok
        log(f"suspension done ({time.time() - t_start:.1f}s)")
        blob, ok = stage_measures(config, family, levels)
        report["measures"] = blob
        ok_all &= ok
        log(f"measures done ({time.time() - t_start:.1f}s)")
    except NonhypError as err:
        report["error"] = {"stage": _stage_of(report), "type": type(err).__name__,
                           "message": str(err)}
        code = _exit_code_for(err)
        if out_dir:
            emit_report(report, f"{out_dir}/report.json")
        return code, report
    report["ok"] = bool(ok_all)
    if out_dir:
        emit_report(report, f"{out_dir}/report.json")
    return (0 if ok_all else FAIL_EXIT), report


def _stage_of(report):
    order = ["measures", "suspension", "cascade", "initial_system",
             "skeleton", "blending", "measure_stats"]
    done = [k for k in order if k in report]
    idx = order.index(done[0]) if done else len(order)
    return order[idx - 1] if idx > 0 else "measures"


def _exit_code_for(err):
    if isinstance(err, (SearchExhausted,)):
        return SEARCH_EXIT
    if isinstance(err, ConfigError):
        return CONFIG_EXIT
    if isinstance(
        err,
        (CertificateViolated, CifsRejected, CardinalityOutOfRange,
         TailTooLong, SkeletonTooSmall),
    ):
        return FAIL_EXIT
    return FAIL_EXIT


def _versions():
    return {"nonhyp": "0.1.0", "numpy": np.__version__,
            "python": ".".join(map(str, sys.version_info[:3]))}


# --------------------------------------------------------------- commands


def _cmd_codes(args):
    with open(args.file) as fh:
        code = CodeBook.from_json(json.load(fh))
    rng = np.random.default_rng(args.seed)
    out = {"disjoint": is_disjoint(code), "R": code.max_len,
           "size": code.size, "N": code.N, "samples": []}
    if out["disjoint"]:
        for _ in range(args.samples):
            pick = lambda k: sum(
                (code.words[int(i)] for i in rng.integers(0, code.size, k)), ()
            )
            stream = PeriodicStream(pick(2), pick(2), pick(2))
            out["samples"].append(
                {"left": list(stream.left), "center": list(stream.center),
                 "right": list(stream.right),
                 "decodings": count_decodings(code, stream, window=args.window)}
            )
    print(canonical_json(out))
    return 0


def _cmd_lyapunov(args):
    cfg = RunConfig.from_file(args.config)
    mats = [MatrixSL2(*m) for m in cfg.matrices]
    rng = np.random.default_rng(args.seed)
    symbols = rng.integers(1, len(mats) + 1, size=(args.trials, args.n))
    lams = lyapunov_upper_batch(mats, symbols)
    writer = csv.writer(sys.stdout if not args.out else open(args.out, "w",
                                                             newline=""))
    writer.writerow(["trial", "lambda1"])
    for i, lam in enumerate(lams):
        writer.writerow([i, repr(float(lam))])
    return 0


def _cmd_blending(args):
    cfg = RunConfig.from_file(args.config)
    if args.depth:
        cfg.blending["depth"] = args.depth
    family = cfg.family()
    blob, _ = stage_blending(cfg, family)
    text = canonical_json(blob)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_skeleton(args):
    cfg = RunConfig.from_file(args.config)
    for key, val in (("n", args.n), ("eps_E", args.epsE), ("eps_H", args.epsH)):
        if val is not None:
            cfg.skeleton[key] = val
    if args.seed is not None:
        cfg.seed = args.seed
    family = cfg.family()
    with open(args.blending) as fh:
        bl = blending_mod.BlendingInterval.from_json(json.load(fh))
    sampler = cfg.sampler()
    _, stats = stage_stats(cfg, family, sampler)
    blob, skel = stage_skeleton(cfg, family, sampler, stats)
    init_blob, _ = stage_initial(cfg, family, skel, bl)
    out = {"config": cfg.echo(), "skeleton": blob, "initial_system": init_blob}
    write_json(args.out, out)
    return 0


def _cmd_cascade(args):
    with open(args.w0) as fh:
        w0 = json.load(fh)
    cfg = RunConfig.from_dict(w0["config"])
    if args.m:
        cfg.cascade["m"] = [int(x) for x in args.m.split(",")]
    if args.seed is not None:
        cfg.seed = args.seed
    family = cfg.family()
    code = CodeBook.from_json(w0["initial_system"]["code"])
    cert = CifsCertificate.from_json(w0["initial_system"]["certificate"])
    used = blending_mod.BlendingInterval.from_json(
        w0["initial_system"]["blending_used"]
    )
    blob, (levels, roof) = stage_cascade(cfg, family, code, cert, used)
    out = {"config": cfg.echo(), "skeleton": w0["skeleton"],
           "initial_system": w0["initial_system"], "cascade": blob}
    write_json(args.out, out)
    return 0 if roof["ok"] else FAIL_EXIT


def _rebuild_levels(doc):
    """Deterministically rebuild cascade levels from a cascade report."""
    cfg = RunConfig.from_dict(doc["config"])
    family = cfg.family()
    code = CodeBook.from_json(doc["initial_system"]["code"])
    cert = CifsCertificate.from_json(doc["initial_system"]["certificate"])
    used = blending_mod.BlendingInterval.from_json(
        doc["initial_system"]["blending_used"]
    )
    levels = cascade_mod.build_cascade(
        code, cert, used, family, m_schedule=doc["cascade"]["m"],
        seed=cfg.seed, stat_samples=cfg.cascade["stat_samples"],
        verify_samples=0, verify=False,
    )
    return cfg, family, levels


def _cmd_suspension(args):
    with open(args.cascade) as fh:
        doc = json.load(fh)
    cfg, family, levels = _rebuild_levels(doc)
    if args.ld_eps:
        cfg.suspension["ld_eps"] = args.ld_eps
    if args.trials:
        cfg.suspension["trials"] = args.trials
    if args.seed is not None:
        cfg.seed = args.seed
    stats = estimate_measure_stats(cfg.sampler(), family, seed=cfg.seed)
    roof = cascade_mod.roof_assumption_check(levels, seed=cfg.seed)
    blob, ok = stage_suspension(cfg, levels, stats, roof)
    text = canonical_json(blob)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if ok else FAIL_EXIT


def _cmd_measures(args):
    with open(args.cascade) as fh:
        doc = json.load(fh)
    cfg, family, levels = _rebuild_levels(doc)
    for key, val in (("ell", args.ell), ("n", args.n), ("eps", args.eps),
                     ("trials", args.trials)):
        if val is not None:
            cfg.measures[key] = val
    if args.seed is not None:
        cfg.seed = args.seed
    if args.mode == "concentration":
        obs = measures_mod.battery()
        reports = measures_mod.birkhoff_concentration_battery(
            family, levels, n=cfg.measures["n"], ell=cfg.measures["ell"],
            observables=obs, eps=cfg.measures["eps"],
            trials=cfg.measures["trials"], seed=cfg.seed,
        )
        blob = {"concentration": [r.to_json() for r in reports]}
        ok = all(r.ok for r in reports)
        if args.out_csv:
            with open(args.out_csv, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["observable", "trial", "average"])
                for r in reports:
                    for i, v in enumerate(r.averages):
                        writer.writerow([r.observable, i, repr(float(v))])
    else:
        weak = measures_mod.weakstar_diagnostic(family, levels,
                                                seed=cfg.seed)
        blob = {"weakstar": weak.to_json()}
        ok = weak.decaying
    text = canonical_json(blob)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if ok else FAIL_EXIT


def _cmd_run(args):
    cfg = RunConfig.from_file(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.dry_run:
        print(canonical_json({"config": cfg.echo()}))
        return 0
    log = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
    code, report = run_pipeline(cfg, out_dir=args.out_dir, log=log)
    if not args.out_dir:
        print(canonical_json(report))
    return code


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nonhyp",
        description="Constructive pipeline for nonhyperbolic ergodic "
        "measures of circle-fiber step skew products",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codes", help="word-code checks")
    csub = p.add_subparsers(dest="codes_command", required=True)
    pc = csub.add_parser("check", help="disjointness and decoding counts")
    pc.add_argument("file")
    pc.add_argument("--window", type=int, default=4096)
    pc.add_argument("--samples", type=int, default=5)
    pc.add_argument("--seed", type=int, default=0)
    pc.set_defaults(fn=_cmd_codes)

    p = sub.add_parser("lyapunov", help="upper Lyapunov exponent trials")
    p.add_argument("--config", required=True)
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_lyapunov)

    p = sub.add_parser("blending", help="certify a blending interval")
    p.add_argument("--config", required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_blending)

    p = sub.add_parser("skeleton", help="skeleton and initial word system")
    p.add_argument("--config", required=True)
    p.add_argument("--blending", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--epsE", type=float)
    p.add_argument("--epsH", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_skeleton)

    p = sub.add_parser("cascade", help="repeat-and-tail cascade")
    p.add_argument("--w0", required=True)
    p.add_argument("--blending")
    p.add_argument("--m")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_cascade)

    p = sub.add_parser("suspension", help="suspension statistics")
    p.add_argument("--cascade", required=True)
    p.add_argument("--ld-eps", dest="ld_eps", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_suspension)

    p = sub.add_parser("measures", help="Birkhoff statistics")
    p.add_argument("--cascade", required=True)
    p.add_argument("--mode", choices=["concentration", "weakstar"],
                   default="concentration")
    p.add_argument("--ell", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--out-csv", dest="out_csv")
    p.set_defaults(fn=_cmd_measures)

    p = sub.add_parser("run", help="full pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--dry-run", action="store_true", dest="dry_run")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(fn=_cmd_run)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return CONFIG_EXIT
    except SearchExhausted as err:
        print(f"search exhausted: {err}", file=sys.stderr)
        return SEARCH_EXIT
    except NonhypError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return _exit_code_for(err)


if __name__ == "__main__":
    sys.exit(main())
