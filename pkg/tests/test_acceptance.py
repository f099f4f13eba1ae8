"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints one ``PASS``/``FAIL`` line (visible with or without ``-s``).
"""

import math
import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from wigwitness.channels import apply_loss, compose_loss, lossy_wigner
from wigwitness.exemplar_states import (
    PacParams,
    PssParams,
    family_envelope,
    fock_to_fock,
    fock_wigner_origin_lossy,
    pac_to_fock,
    pac_wigner,
    pss_to_fock,
    pss_wigner,
)
from wigwitness.fock_core import mean_photon, parity_expectation
from wigwitness.gaussian_states import default_dim, saturating_state, to_fock
from wigwitness.oracle import CHECKS, cross_validate_closed_forms, default_grids, run_hull_campaign, wigner_via_parity
from wigwitness.witness import (
    EPS_TOL,
    delta1,
    eps_max,
    optimize_displacement,
    pac_search_box,
    pss_optimal_squeezing,
    pss_squeezed_mean_photon,
)

from conftest import random_state

TWO_OVER_PI = 2 / math.pi


@pytest.fixture
def verdict(capsys):
    def emit(number: int, ok: bool, detail: str, elapsed: float, budget: float):
        in_time = elapsed < budget
        status = "PASS" if ok and in_time else "FAIL"
        with capsys.disabled():
            print(f"\n{status} criterion {number}: {detail} [{elapsed:.2f}s / {budget:g}s]")
        assert ok, detail
        assert in_time, f"runtime {elapsed:.2f}s exceeds {budget:g}s"
    return emit


def test_criterion_01_lossy_fock_origin(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for m in range(7):
        rho = fock_to_fock(m)
        for eps in np.round(np.arange(101) * 0.01, 2):
            pipeline = TWO_OVER_PI * parity_expectation(apply_loss(rho, eps))
            worst = max(worst, abs(pipeline - TWO_OVER_PI * (2 * eps - 1) ** m),
                        abs(pipeline - fock_wigner_origin_lossy(m, eps)))
    verdict(1, worst <= 1e-9, f"max |W0 pipeline - closed form| = {worst:.2e} (tol 1e-9)",
            time.perf_counter() - t0, 5)


def test_criterion_02_single_photon_detected(verdict):
    t0 = time.perf_counter()
    rho = fock_to_fock(1)
    grid = np.round(np.arange(1, 100) * 0.01, 2)
    deltas = np.array([delta1(apply_loss(rho, eps)).delta for eps in grid])
    verdict(2, bool(np.all(deltas < 0)), f"max delta1 over eps in [0.01, 0.99] = {deltas.max():.3e} (need < 0)",
            time.perf_counter() - t0, 1)


def test_criterion_03_eps_max_asymptote(verdict):
    t0 = time.perf_counter()
    values = [eps_max("fock", m, 1, eps_tol=1e-6).eps_max for m in range(1, 11)]
    decreasing = all(a > b for a, b in zip(values, values[1:]))
    ok = decreasing and 0.5 < values[-1] < 0.55
    verdict(3, ok, f"eps_max(m=1..10) = {[round(v, 6) for v in values]}; strictly decreasing={decreasing}",
            time.perf_counter() - t0, 10)


def test_criterion_04_bound_tightness(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for n in (0, 0.5, 1, 2, 3):
        p = saturating_state(n)
        worst = max(worst, abs(delta1(to_fock(p, max(120, default_dim(p)))).delta))
    verdict(4, worst <= 1e-8, f"max |delta1(saturating)| = {worst:.2e} (tol 1e-8)", time.perf_counter() - t0, 5)


def test_criterion_05_hull_soundness(verdict):
    t0 = time.perf_counter()
    rep = run_hull_campaign(10_000, 4.0, 10, seed=7, tol=1e-9)
    ok = rep.ok and rep.checks_run == 10_000 * 11
    verdict(5, ok, f"{rep.checks_run} checks, largest violation max(0, -delta) = {rep.max_abs_deviation:.2e} (tol 1e-9)",
            time.perf_counter() - t0, 120)


def test_criterion_06_closed_forms(verdict):
    t0 = time.perf_counter()
    grids = default_grids()
    rep = cross_validate_closed_forms(grids, tol=1e-7)
    sizes_ok = all(len(grids[name]) >= 50 for name in CHECKS)
    detail = ", ".join(f"{k}={v:.1e}" for k, v in rep.per_check.items())
    verdict(6, rep.ok and sizes_ok, f"{rep.checks_run} checks, max dev per formula: {detail} (tol 1e-7)",
            time.perf_counter() - t0, 60)


def test_criterion_07_analytic_squeezing(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for r in (0.1, 0.3, 0.5, 1.0):
        for eps in (0.55, 0.7, 0.85):
            res = minimize_scalar(lambda s: pss_squeezed_mean_photon(r, eps, s), bounds=(-3, 3),
                                  method="bounded", options={"xatol": 1e-10})
            worst = max(worst, abs(pss_optimal_squeezing(r, eps) - res.x))
    verdict(7, worst <= 1e-5, f"max |s_opt - numeric minimizer| = {worst:.2e} (tol 1e-5)",
            time.perf_counter() - t0, 10)


def test_criterion_08_pss_second_criterion(verdict):
    t0 = time.perf_counter()
    rs = np.round(np.arange(1, 31) * 0.05, 2)
    c1 = np.array([eps_max("pss", r, 1).eps_max for r in rs])
    c2 = np.array([eps_max("pss", r, 2).eps_max for r in rs])
    at_03 = int(np.argmin(np.abs(rs - 0.3)))
    dominates = bool(np.all(c2 >= c1))
    strict = c2[at_03] - c1[at_03] > EPS_TOL
    falling = bool(np.all(np.diff(c1) <= EPS_TOL) and np.all(np.diff(c2) <= EPS_TOL))
    near_half = abs(c1[-1] - 0.5) < 0.05 and abs(c2[-1] - 0.5) < 0.05
    ok = dominates and strict and falling and near_half
    verdict(8, ok, f"eps2 >= eps1 everywhere={dominates}; r=0.3: {c1[at_03]:.4f} -> {c2[at_03]:.4f}; "
                   f"r=1.5: {c1[-1]:.4f}, {c2[-1]:.4f}; non-increasing={falling}",
            time.perf_counter() - t0, 120)


def test_criterion_09_pac_displacement(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for alpha in (1.5, 2.0, 2.5):
        rho0 = pac_to_fock(PacParams(alpha))
        for eps in (0.8, 0.9):
            beta, _ = optimize_displacement(apply_loss(rho0, eps), pac_search_box(alpha))
            approx = -alpha * math.sqrt(1 - eps)
            worst = max(worst, abs(beta - approx) / abs(approx))
    verdict(9, worst <= 0.1, f"max relative distance of beta_opt from -alpha sqrt(1-eps) = {worst:.3f} (tol 0.1)",
            time.perf_counter() - t0, 30)


def test_criterion_10_channel_laws(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2025)
    energy, compose = 0.0, 0.0
    for _ in range(100):
        dim = int(rng.integers(4, 25))
        rho = random_state(rng, dim, support=int(rng.integers(1, dim + 1)), rank=int(rng.integers(1, 4)))
        e1, e2 = rng.uniform(size=2)
        energy = max(energy, abs(mean_photon(apply_loss(rho, e1)) - (1 - e1) * mean_photon(rho)))
        twice = apply_loss(apply_loss(rho, e1), e2)
        compose = max(compose, float(np.abs(twice.mat - apply_loss(rho, compose_loss(e1, e2)).mat).max()))
    ok = energy <= 1e-8 and compose <= 1e-10
    verdict(10, ok, f"energy law dev = {energy:.2e} (tol 1e-8), composition dev = {compose:.2e} (tol 1e-10)",
            time.perf_counter() - t0, 30)


def test_criterion_11_kernel_quadrature(verdict):
    t0 = time.perf_counter()
    cases = [("pac", 0.4, lambda z: pac_wigner(PacParams(0.4), z), pac_to_fock(PacParams(0.4))),
             ("pss", 0.3, lambda z: pss_wigner(PssParams(0.3), z), pss_to_fock(PssParams(0.3)))]
    worst = 0.0
    for family, param, w0, rho in cases:
        for eps in (0.3, 0.6, 0.9):
            quad = lossy_wigner(w0, eps, 0j, envelope=family_envelope(family, param))
            worst = max(worst, abs(quad - wigner_via_parity(apply_loss(rho, eps), 0)))
    verdict(11, worst <= 1e-6, f"max |kernel quadrature - Kraus+parity| = {worst:.2e} (tol 1e-6)",
            time.perf_counter() - t0, 60)
