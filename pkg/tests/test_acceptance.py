"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line (also collected
into the terminal summary).  Run standalone with ``python3 tests/test_acceptance.py``.
"""
import math
import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from conftest import ACCEPTANCE_LINES, FIG1_R, FIG1_T, fig3_config  # noqa: E402
from mimo_outage.asymptotic import (  # noqa: E402
    asymptotic_outage,
    check_rate_convexity,
    estimate_diversity_slope,
)
from mimo_outage.channel import MimoConfig  # noqa: E402
from mimo_outage.cli import RunConfig, cmd_sweep  # noqa: E402
from mimo_outage.exact import exact_outage, mellin_phi  # noqa: E402
from mimo_outage.montecarlo import TrialPlan, estimate_mellin, estimate_outage  # noqa: E402
from mimo_outage.specfun import meijer_g_rate  # noqa: E402


def db(v):
    return 10 ** (v / 10)


def record(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def fig1_cfg():
    return MimoConfig.from_spectra(FIG1_T, FIG1_R)


def test_criterion_01_siso_closed_form():
    siso = MimoConfig.iid(1, 1)
    t0 = time.perf_counter()
    worst = 0.0
    for rdb in (0.0, 10.0, 20.0, 30.0):
        for R in (0.5, 1.0, 2.0):
            rho = db(rdb)
            ref = -math.expm1(-(2.0 ** R - 1) / rho)
            worst = max(worst, abs(exact_outage(R, siso, rho) / ref - 1))
    elapsed = time.perf_counter() - t0
    record(1, worst <= 1e-6 and elapsed < 1.0,
           f"SISO max rel err {worst:.2e} (<= 1e-6), {elapsed:.2f} s (< 1 s)")


def test_criterion_02_fig1_triangulation(fig1_cfg):
    t0 = time.perf_counter()
    plan = TrialPlan(1_000_000, seed=2024)
    bad = []
    for j, rdb in enumerate((0.0, 5.0, 10.0, 15.0, 20.0)):
        p = exact_outage(2.0, fig1_cfg, db(rdb))
        est = estimate_outage(fig1_cfg, db(rdb), 2.0, plan, confidence=0.997, point=j)
        if not est.ci_low <= p <= est.ci_high:
            bad.append((rdb, p, est.ci_low, est.ci_high))
    elapsed = time.perf_counter() - t0
    record(2, not bad and elapsed < 120.0,
           f"exact inside 99.7% MC CI at 0-20 dB: {'all' if not bad else bad}; {elapsed:.1f} s (< 120 s)")


def test_criterion_03_asymptotic_convergence(fig1_cfg):
    ratios = {}
    for rdb in (35.0, 40.0):
        rho = db(rdb)
        ratios[rdb] = asymptotic_outage(2.0, fig1_cfg, rho) / exact_outage(2.0, fig1_cfg, rho)
    ok = 0.9 <= ratios[35.0] <= 1.1 and abs(ratios[40.0] - 1) < abs(ratios[35.0] - 1)
    record(3, ok, f"asy/exact = {ratios[35.0]:.4f} at 35 dB, {ratios[40.0]:.4f} at 40 dB")


def test_criterion_04_mellin_identity(fig1_cfg):
    configs = {"siso": MimoConfig.iid(1, 1), "fig1": fig1_cfg,
               **{f"fig3-{k}": fig3_config(k) for k in ("t1", "t2", "t3")}}
    worst_one = max(abs(mellin_phi(1.0, c, rho) - 1) for c in configs.values() for rho in (1.0, 10.0, 1e3))
    plan = TrialPlan(1_000_000, seed=404)
    worst_z = 0.0
    for k, (name, rho) in enumerate((("siso", 1.0), ("fig1", 10.0), ("fig3-t3", 10.0))):
        for m, s in enumerate((0.5, -0.25 + 0.5j)):
            phi = mellin_phi(s, configs[name], rho)
            mean, se = estimate_mellin(configs[name], rho, s, plan, point=2 * k + m)
            for d, e in ((phi.real - mean.real, se.real), (phi.imag - mean.imag, se.imag)):
                z = 0.0 if abs(d) <= 1e-15 else abs(d) / e if e > 0 else math.inf
                worst_z = max(worst_z, z)
    record(4, worst_one <= 1e-8 and worst_z <= 3.0,
           f"|phi(1)-1| max {worst_one:.1e} (<= 1e-8); MC moments worst {worst_z:.2f} SE (<= 3)")


def test_criterion_05_diversity_slope(fig1_cfg):
    grid = np.arange(35.0, 45.01, 2.5)
    configs = {(2, 2): MimoConfig.from_spectra((1.5, 0.5), (1.2, 0.8)), (3, 2): fig1_cfg}
    parts, ok = [], True
    for (Nt, Nr), cfg in configs.items():
        slope = estimate_diversity_slope([(db(v), exact_outage(2.0, cfg, db(v))) for v in grid])
        ok &= abs(slope / (Nt * Nr) - 1) <= 0.05
        parts.append(f"({Nt},{Nr}) slope {slope:.4f} vs {Nt * Nr}")
    record(5, ok, "; ".join(parts) + " (within 5%)")


def test_criterion_06_fig3_ordering():
    cfgs = {k: fig3_config(k) for k in ("t1", "t2", "t3")}
    grid = np.arange(0.0, 20.01, 2.5)
    violations = []
    for v in grid:
        p = {k: exact_outage(2.0, c, db(v)) for k, c in cfgs.items()}
        if not p["t3"] > p["t2"] > p["t1"]:
            violations.append(v)
    slopes = [estimate_diversity_slope([(db(v), asymptotic_outage(2.0, c, db(v))) for v in grid])
              for c in cfgs.values()]
    spread = (max(slopes) - min(slopes)) / min(slopes)
    record(6, not violations and spread <= 0.01,
           f"p(t3)>p(t2)>p(t1) at {len(grid) - len(violations)}/{len(grid)} points; "
           f"asymptotic slopes {', '.join(f'{s:.6f}' for s in slopes)} (spread {spread:.1e} <= 1%)")


def test_criterion_07_meijer_cross_validation():
    worst = 0.0
    pairs = [(Nt, Nr) for Nr in range(1, 4) for Nt in range(Nr, 8 - Nr)]
    for Nt, Nr in pairs:
        for x in (1.5, 4.0, 16.0):
            q = meijer_g_rate(Nt, Nr, x, method="quadrature")
            r = meijer_g_rate(Nt, Nr, x, method="residue")
            worst = max(worst, abs(q - r) / abs(r))
    at_one = max(abs(meijer_g_rate(Nt, Nr, 1.0)) for Nt, Nr in pairs)
    siso = max(abs(meijer_g_rate(1, 1, x) - (x - 1)) / (x - 1) for x in (1.5, 4.0, 16.0, 1e3))
    record(7, worst <= 1e-8 and at_one <= 1e-10 and siso <= 4 * np.finfo(float).eps,
           f"{len(pairs)} pairs: quad vs residue max rel {worst:.1e} (<= 1e-8); "
           f"|g(1)| {at_one:.1e}; g(1,1,x)=x-1 rel {siso:.1e}")


def test_criterion_08_rate_convexity():
    grid = np.arange(0.25, 8.001, 0.25)
    reports = {p: check_rate_convexity(*p, grid) for p in ((1, 1), (2, 2), (3, 2), (3, 3))}
    ok = all(r["monotone"] and r["convex"] for r in reports.values())
    worst = max(r["worst_violation"] for r in reports.values())
    record(8, ok, f"g(2^R) increasing and convex on 0.25:0.25:8 for {len(reports)} pairs "
                  f"(worst violation {worst:.1e})")


def test_criterion_09_swap_symmetry(fig1_cfg):
    c23 = MimoConfig(2, 3, fig1_cfg.Rr, fig1_cfg.Rt)
    worst = 0.0
    for rdb in (0.0, 10.0, 20.0, 30.0):
        rho = db(rdb)
        for f in (exact_outage, asymptotic_outage):
            a, b = f(2.0, fig1_cfg, rho), f(2.0, c23, rho)
            worst = max(worst, abs(a - b) / abs(a))
    record(9, worst <= 1e-12, f"(2,3) vs swapped (3,2): max rel diff {worst:.1e} (<= 1e-12)")


def test_criterion_10_determinism(tmp_path, monkeypatch, fig1_cfg):
    blobs = {}
    for w in ("1", "4"):
        monkeypatch.setenv("MIMO_OUTAGE_WORKERS", w)
        path = tmp_path / f"w{w}.csv"
        run = RunConfig(fig1_cfg, snr_grid_db=[0.0, 5.0, 10.0], plan=TrialPlan(200_000, seed=99),
                        output_path=str(path))
        cmd_sweep(run)
        blobs[w] = path.read_bytes()
    record(10, blobs["1"] == blobs["4"],
           f"cmd_sweep CSV with 1 and 4 workers byte-identical ({len(blobs['1'])} bytes)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
