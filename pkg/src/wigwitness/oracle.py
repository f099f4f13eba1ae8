"""Brute-force cross-checks for the closed forms and the hull bound.

Everything here goes the long way round: explicit displacement of a padded
density matrix followed by parity, Kraus evolution, and moment traces. The
fast paths elsewhere in the package are compared against these.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from ._parallel import parallel_map
from .channels import GaussianMapSpec, apply_gaussian_map, apply_loss, gaussian_map_moments, random_gaussian_map
from .errors import TruncationError
from .exemplar_states import (
    PacParams,
    PssParams,
    fock_to_fock,
    fock_wigner_origin_lossy,
    pac_to_fock,
    pac_wigner,
    pss_to_fock,
    pss_wigner,
)
from .fock_core import (
    FockOperator,
    displacement_matrix,
    mean_photon,
    parity_expectation,
    truncation_dim,
)
from .gaussian_states import (
    PureGaussianParams,
    gaussian_mean_photon,
    gaussian_wigner_origin,
    sample_hull_state,
    to_fock,
    wigner_origin_pure_gaussian,
)
from .witness import (
    DECISION_TOL,
    bound_min,
    delta1,
    delta1_lossy_fock,
    pac_displaced_mean_photon,
    pss_squeezed_mean_photon,
)

TWO_OVER_PI = 2.0 / math.pi
MAX_PAD = 1500


@dataclass
class OracleReport:
    checks_run: int = 0
    max_abs_deviation: float = 0.0
    failures: list = field(default_factory=list)
    tol: float = DECISION_TOL
    per_check: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, case_id: str, expected: float, got: float, group: Optional[str] = None,
               tol: Optional[float] = None) -> None:
        tol = self.tol if tol is None else tol
        dev = abs(float(got) - float(expected))
        self.checks_run += 1
        self.max_abs_deviation = max(self.max_abs_deviation, dev)
        if group is not None:
            self.per_check[group] = max(self.per_check.get(group, 0.0), dev)
        if not dev <= tol:
            self.failures.append((case_id, float(expected), float(got)))

    def to_dict(self) -> dict:
        return {
            "checks_run": self.checks_run,
            "max_abs_deviation": self.max_abs_deviation,
            "tol": self.tol,
            "per_check": dict(sorted(self.per_check.items())),
            "failures": [list(f) for f in sorted(self.failures)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def wigner_via_parity(rho: FockOperator, z: complex, tol: Optional[float] = None) -> float:
    """``(2/pi) * parity`` of ``D(-z) rho D(-z)^dag``, built in a padded basis.

    The basis is enlarged until the displaced state keeps its trace to
    within ``truncation_tol``; :class:`TruncationError` if that needs more
    than ``MAX_PAD`` levels.
    """
    rho.check_state()
    z = complex(z)
    tol = rho.tol.truncation_tol if tol is None else tol
    if z == 0:
        return TWO_OVER_PI * parity_expectation(rho)
    nbar = mean_photon(rho)
    dim = max(rho.dim, truncation_dim((math.sqrt(nbar) + abs(z)) ** 2))
    if dim > MAX_PAD:
        raise TruncationError(f"displacing by {z} needs about {dim} levels, more than {MAX_PAD}")
    while True:
        pad = rho.resized(dim).mat
        d = displacement_matrix(-z, dim).mat
        out = d @ pad @ d.conj().T
        lost = rho.trace - float(np.trace(out).real)
        if lost <= tol:
            return TWO_OVER_PI * float(np.sum(np.diag(out).real * np.where(np.arange(dim) % 2, -1.0, 1.0)))
        if dim >= MAX_PAD:
            raise TruncationError(f"displacing by {z} leaks {lost:.3e} even at dim={dim}")
        dim = min(MAX_PAD, int(dim * 1.5))


def _mixture_delta(weights, moments, g: GaussianMapSpec) -> float:
    w0 = nbar = 0.0
    for w, (mean, cov) in zip(weights, moments):
        m, c = gaussian_map_moments(mean, cov, g)
        w0 += w * gaussian_wigner_origin(m, c)
        nbar += w * gaussian_mean_photon(m, c)
    return w0 - bound_min(nbar)


def _fock_delta(mix, g: GaussianMapSpec) -> float:
    rho = to_fock(mix)
    return delta1(apply_gaussian_map(rho, g)).delta


def _hull_sample(args):
    idx, seq, max_energy, n_maps, route = args
    state_seq, map_seq = seq.spawn(2)
    n_comp = int(np.random.default_rng(state_seq.spawn(1)[0]).integers(1, 5))
    mix = sample_hull_state(state_seq, max_energy, n_comp)
    rng = np.random.default_rng(map_seq)
    maps = [GaussianMapSpec.identity()] + [random_gaussian_map(rng) for _ in range(n_maps)]
    out = []
    if route == "fock":
        for j, g in enumerate(maps):
            out.append((f"sample{idx}/map{j}:{g}", _fock_delta(mix, g)))
    else:
        moments = [p.moments() for p in mix.params]
        for j, g in enumerate(maps):
            out.append((f"sample{idx}/map{j}:{g}", _mixture_delta(mix.weights, moments, g)))
    return out


def hull_deltas(n_samples: int, max_energy: float, n_maps: int, seed,
                route: str = "moments") -> list[tuple[str, float]]:
    """``(case id, delta)`` for every sampled hull state and map, in sample order.

    Each sample is a mixture of one to four pure Gaussian states with
    energy at most ``max_energy``, checked unmapped and under ``n_maps``
    random Gaussian maps. ``route="moments"`` evaluates W(0) and the mean
    photon number from means and covariances; ``route="fock"`` goes
    through density matrices.
    """
    if n_samples < 0:
        raise ValueError("n_samples must be >= 0")
    if route not in ("moments", "fock"):
        raise ValueError(f"unknown route {route!r}")
    if n_samples == 0:
        return []
    children = np.random.SeedSequence(seed).spawn(n_samples)
    jobs = [(i, s, max_energy, n_maps, route) for i, s in enumerate(children)]
    return [row for rows in parallel_map(_hull_sample, jobs) for row in rows]


def run_hull_campaign(n_samples: int, max_energy: float, n_maps: int, seed, *,
                      tol: float = DECISION_TOL, route: str = "moments") -> OracleReport:
    """Check ``delta >= -tol`` over :func:`hull_deltas`.

    ``max_abs_deviation`` is the largest amount by which any delta fell
    below zero.
    """
    report = OracleReport(tol=tol)
    for case_id, delta in hull_deltas(n_samples, max_energy, n_maps, seed, route):
        violation = max(0.0, -delta)
        report.checks_run += 1
        report.max_abs_deviation = max(report.max_abs_deviation, violation)
        if violation > tol:
            report.failures.append((case_id, 0.0, delta))
    report.per_check["min_delta_violation"] = report.max_abs_deviation
    return report


def default_grids() -> dict:
    """Grids (at least 50 points each) used by :func:`cross_validate_closed_forms`."""
    rng = np.random.default_rng(2024)
    gauss = [(complex(*rng.uniform(-1.2, 1.2, 2)), complex(*rng.uniform(-0.7, 0.7, 2))) for _ in range(60)]
    fock = [(m, e) for m in range(0, 6) for e in np.linspace(0.0, 1.0, 11)]
    pac = [(a, complex(x, y)) for a in (0.2, 0.6, 1.0, 1.5, 2.0) for x, y in rng.uniform(-1.5, 1.5, (12, 2))]
    pss = [(r, complex(x, y)) for r in (0.1, 0.3, 0.5, 0.8, 1.0) for x, y in rng.uniform(-1.0, 1.0, (12, 2))]
    pac_nbar = [(a, e, b) for a in (0.3, 1.0, 1.8) for e in (0.0, 0.3, 0.6, 0.9)
                for b in (-1.5, -0.4, 0.0, 0.7, 1.2)]
    pss_nbar = [(r, e, s) for r in (0.2, 0.6, 1.0) for e in (0.0, 0.3, 0.6, 0.9)
                for s in (-0.8, -0.3, 0.0, 0.4, 0.9)]
    return {
        "gaussian_origin": gauss,
        "lossy_fock_origin": fock,
        "lossy_fock_delta": fock,
        "pac_wigner": pac,
        "pss_wigner": pss,
        "pac_displaced_nbar": pac_nbar,
        "pss_squeezed_nbar": pss_nbar,
    }


def _check_gaussian_origin(case):
    alpha, xi = case
    p = PureGaussianParams(alpha, xi)
    return wigner_origin_pure_gaussian(p), wigner_via_parity(to_fock(p), 0)


def _check_lossy_fock_origin(case):
    m, eps = case
    return fock_wigner_origin_lossy(m, eps), wigner_via_parity(apply_loss(fock_to_fock(m), eps), 0)


def _check_lossy_fock_delta(case):
    m, eps = case
    return delta1_lossy_fock(m, eps), delta1(apply_loss(fock_to_fock(m), eps)).delta


def _check_pac_wigner(case):
    alpha, z = case
    p = PacParams(alpha)
    return pac_wigner(p, z), wigner_via_parity(pac_to_fock(p), z)


def _check_pss_wigner(case):
    r, z = case
    p = PssParams(r)
    return pss_wigner(p, z), wigner_via_parity(pss_to_fock(p), z)


def _check_pac_nbar(case):
    alpha, eps, beta = case
    rho = apply_loss(pac_to_fock(PacParams(alpha)), eps)
    return (pac_displaced_mean_photon(alpha, eps, beta),
            mean_photon(apply_gaussian_map(rho, GaussianMapSpec.displacement(beta))))


def _check_pss_nbar(case):
    r, eps, s = case
    rho = apply_loss(pss_to_fock(PssParams(r)), eps)
    return (pss_squeezed_mean_photon(r, eps, s),
            mean_photon(apply_gaussian_map(rho, GaussianMapSpec.squeezing(s))))


CHECKS = {
    "gaussian_origin": _check_gaussian_origin,
    "lossy_fock_origin": _check_lossy_fock_origin,
    "lossy_fock_delta": _check_lossy_fock_delta,
    "pac_wigner": _check_pac_wigner,
    "pss_wigner": _check_pss_wigner,
    "pac_displaced_nbar": _check_pac_nbar,
    "pss_squeezed_nbar": _check_pss_nbar,
}


def cross_validate_closed_forms(grid_spec: Optional[dict] = None, tol: float = 1e-7) -> OracleReport:
    """Compare each closed form with its Fock-basis counterpart on a grid.

    ``grid_spec`` maps formula names (keys of ``CHECKS``) to iterables of
    parameter tuples; ``None`` selects :func:`default_grids`. The report's
    ``per_check`` holds the largest deviation per formula.
    """
    grids = default_grids() if grid_spec is None else grid_spec
    unknown = set(grids) - set(CHECKS)
    if unknown:
        raise ValueError(f"unknown closed forms: {sorted(unknown)}")
    report = OracleReport(tol=tol)
    for name in sorted(grids):
        cases = list(grids[name])
        results = parallel_map(CHECKS[name], cases)
        for case, (expected, got) in zip(cases, results):
            report.record(f"{name}{_case_label(case)}", expected, got, group=name)
    return report


def _case_label(case: Iterable) -> str:
    return "(" + ", ".join(f"{complex(v):.6g}" if isinstance(v, complex) else f"{v:.6g}" for v in case) + ")"
