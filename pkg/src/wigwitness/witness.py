"""Quantum non-Gaussianity indicators built on the Wigner function at the origin.

Every state in the Gaussian convex hull satisfies
``W(0) >= bound_min(nbar) = (2/pi) exp(-2 nbar (1 + nbar))``, also after
any Gaussian map. ``delta = W(0) - bound_min(nbar)`` below zero therefore
certifies that the state is not a mixture of Gaussian states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from ._parallel import parallel_map
from .channels import (
    GaussianMapSpec,
    apply_gaussian_map,
    apply_loss,
    lossy_parity,
)
from .errors import DomainError, OptimizationError, WitnessError
from .exemplar_states import (
    FAMILIES,
    family_state,
    pac_mean_field,
    pac_mean_photon,
    pss_mean_photon,
    pss_second_moment,
)
from .fock_core import (
    FockOperator,
    mean_photon,
    moment,
    parity_expectation,
    photon_distribution,
    wigner_at,
    wigner_many,
)

TWO_OVER_PI = 2.0 / math.pi
DECISION_TOL = 1e-9
EPS_GRID = 1e-3
EPS_TOL = 1e-6
OPT_TOL = 1e-7
TIE_TOL = 1e-15

QNG = "quantum-non-Gaussian"
INCONCLUSIVE = "inconclusive"

CSV_COLUMNS = ("param", "eps", "W0", "nbar", "bound", "delta", "verdict")


def bound_min(nbar: float) -> float:
    if nbar < 0:
        raise DomainError(f"mean photon number must be >= 0, got {nbar!r}")
    return TWO_OVER_PI * math.exp(-2.0 * nbar * (1.0 + nbar))


@dataclass(frozen=True)
class WitnessReport:
    wigner_at_origin: float
    mean_photon: float
    bound: float
    delta: float
    map_used: GaussianMapSpec = field(default_factory=GaussianMapSpec.identity)
    decision_tol: float = DECISION_TOL

    @classmethod
    def from_values(cls, w0: float, nbar: float, map_used: Optional[GaussianMapSpec] = None,
                    decision_tol: float = DECISION_TOL) -> "WitnessReport":
        w0, nbar = float(w0), float(nbar)
        nbar = max(nbar, 0.0) if nbar > -1e-12 else nbar
        b = bound_min(nbar)
        return cls(w0, nbar, b, w0 - b, map_used or GaussianMapSpec.identity(), decision_tol)

    @property
    def verdict(self) -> str:
        return QNG if self.delta < -self.decision_tol else INCONCLUSIVE

    @property
    def is_non_gaussian(self) -> bool:
        return self.verdict == QNG

    def to_dict(self) -> dict:
        return {
            "wigner_at_origin": float(self.wigner_at_origin),
            "mean_photon": float(self.mean_photon),
            "bound": float(self.bound),
            "delta": float(self.delta),
            "map_used": str(self.map_used),
            "verdict": self.verdict,
        }

    def csv_row(self, param: str, eps) -> list:
        values = (self.wigner_at_origin, self.mean_photon, self.bound, self.delta)
        return [param, "" if eps is None else repr(float(eps)), *(repr(float(v)) for v in values),
                self.verdict]


def delta1(rho: FockOperator) -> WitnessReport:
    """First criterion: W(0) from the parity identity against ``bound_min(nbar)``."""
    rho.check_state()
    return WitnessReport.from_values(TWO_OVER_PI * parity_expectation(rho), mean_photon(rho))


def delta2(rho: FockOperator, g: GaussianMapSpec, dim: int | None = None) -> WitnessReport:
    """Second criterion: the first one evaluated on the Gaussian-mapped state."""
    out = apply_gaussian_map(rho, g, dim)
    return WitnessReport.from_values(TWO_OVER_PI * parity_expectation(out), mean_photon(out), g)


def delta1_lossy_fock(m: int, eps: float) -> float:
    """Closed-form first-criterion indicator for ``|m>`` after loss ``eps``.

    For ``eps > 1/2`` both terms are evaluated as exponentials of
    ``delta = 1 - eps`` and differenced with ``expm1``, which keeps the sign
    right when the indicator is many orders of magnitude below either term.
    """
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"loss parameter must lie in [0, 1], got {eps!r}")
    if m < 0:
        raise DomainError("photon number must be >= 0")
    if m == 0:
        return 0.0
    d = 1.0 - eps
    log_b = -2.0 * d * m * (d * m + 1.0)
    if 2.0 * eps - 1.0 > 0.0:
        # log_w - log_b = m (log1p(-2d) + 2d + 2d^2) + 2 d^2 m (m - 1), without cancellation
        diff = m * _log1p_tail(2.0 * d) + 2.0 * d * d * m * (m - 1)
        return TWO_OVER_PI * math.exp(log_b) * math.expm1(diff)
    return TWO_OVER_PI * ((2.0 * eps - 1.0) ** m - math.exp(log_b))


def _log1p_tail(x: float) -> float:
    """``log1p(-x) + x + x^2 / 2`` for ``0 <= x < 1``, accurate as ``x -> 0``."""
    if x >= 0.1:
        return math.log1p(-x) + x + 0.5 * x * x
    total, term, k = 0.0, x * x, 3
    while True:
        term *= x
        step = term / k
        total -= step
        if step <= 1e-17 * abs(total):
            return total
        k += 1


def pac_displaced_mean_photon(alpha: float, eps: float, beta: complex) -> float:
    """Mean photon number of the lossy PAC state after displacement ``beta``."""
    if alpha < 0:
        raise DomainError("alpha must be >= 0")
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"loss parameter must lie in [0, 1], got {eps!r}")
    beta = complex(beta)
    mean_a = pac_mean_field(alpha)
    value = (1.0 - eps) * pac_mean_photon(alpha) + abs(beta) ** 2 \
        + math.sqrt(1.0 - eps) * 2.0 * beta.real * mean_a
    if value < -1e-12:
        raise WitnessError(f"negative mean photon number {value!r}: internal inconsistency")
    return max(value, 0.0)


def pss_squeezed_mean_photon(r: float, eps: float, s: float) -> float:
    """Mean photon number of the lossy PSS state after squeezing ``S(s)``, real ``s``."""
    if not r > 0:
        raise DomainError("r must be > 0")
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"loss parameter must lie in [0, 1], got {eps!r}")
    mu, nu = math.cosh(s), math.sinh(s)
    inner = pss_mean_photon(r) * (mu * mu + nu * nu) + mu * nu * 2.0 * pss_second_moment(r)
    return (1.0 - eps) * inner + nu * nu


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10,
                   max_iter: int = 500) -> float:
    """Minimizer of a unimodal ``f`` on ``[a, b]`` to within ``tol``."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = min(a, b), max(a, b)
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    else:
        raise OptimizationError("golden-section search hit max_iter", best=0.5 * (a + b))
    return 0.5 * (a + b)


def pss_optimal_squeezing_mu(r: float, eps: float) -> float:
    mu_r2 = math.cosh(r) ** 2
    num = 6.0 * (1.0 - eps) * mu_r2 + 4.0 * eps - 3.0
    den = math.sqrt((4.0 * eps - 3.0) ** 2 + 12.0 * (1.0 - eps) * eps * mu_r2)
    return math.sqrt(0.5 * (1.0 + num / den))


def pss_optimal_squeezing(r: float, eps: float) -> float:
    """Squeezing that minimizes the photon number of the lossy PSS state.

    Closed form ``s = -arccosh(mu_opt)``; if ``mu_opt`` falls below 1 by
    more than round-off, falls back to golden-section search on [-3, 3].
    """
    if not r > 0:
        raise DomainError("r must be > 0")
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"loss parameter must lie in [0, 1], got {eps!r}")
    mu = pss_optimal_squeezing_mu(r, eps)
    if mu >= 1.0 - 1e-12:
        return -math.acosh(max(mu, 1.0))
    return golden_section(lambda s: pss_squeezed_mean_photon(r, eps, s), -3.0, 3.0)


def optimal_squeezing(rho: FockOperator) -> complex:
    """Squeezing ``xi`` minimizing the photon number of ``S(xi) rho S(xi)^dag``.

    The mean photon number after squeezing depends only on ``<a^dag a>``
    and ``<a^2>``, which gives a closed-form optimum.
    """
    n = mean_photon(rho)
    m2 = moment(rho, 2)
    if abs(m2) == 0:
        return 0j
    r = 0.5 * math.atanh(min(abs(m2) / (n + 0.5), 1.0 - 1e-16))
    return complex(-r * m2 / abs(m2))


def min_squeezed_mean_photon(nbar: float, second_moment: complex) -> float:
    return math.sqrt(max((nbar + 0.5) ** 2 - abs(second_moment) ** 2, 0.25)) - 0.5


class _DisplacedDelta:
    """``delta`` of ``D(beta) rho D(beta)^dag`` without enlarging the basis."""

    def __init__(self, rho: FockOperator):
        rho.check_state()
        self.rho = rho
        self.n = mean_photon(rho)
        self.a = moment(rho, 1)

    def nbar(self, beta: complex) -> float:
        return max(self.n + abs(beta) ** 2 + 2.0 * (np.conj(beta) * self.a).real, 0.0)

    def report(self, beta: complex) -> WitnessReport:
        w = wigner_at(self.rho, -complex(beta))
        return WitnessReport.from_values(w, self.nbar(beta), GaussianMapSpec.displacement(beta))

    def __call__(self, beta: complex) -> float:
        return self.report(beta).delta

    def many(self, betas: np.ndarray) -> np.ndarray:
        betas = np.asarray(betas, dtype=complex)
        w = wigner_many(self.rho, -betas)
        nbar = np.maximum(self.n + np.abs(betas) ** 2 + 2.0 * (betas.conj() * self.a).real, 0.0)
        return w - TWO_OVER_PI * np.exp(-2.0 * nbar * (1.0 + nbar))


def optimize_displacement(rho: FockOperator, search_box=None, *, real_axis: bool = True,
                          scan_step: float = 0.01, opt_tol: float = OPT_TOL):
    """Displacement minimizing the second-criterion indicator.

    Scans the real interval ``search_box`` (default ``+-(|<a>| + 3)``) with
    spacing at most ``scan_step`` and refines the best bracket by golden-section
    search. With ``real_axis=False`` a Nelder-Mead search over the complex
    plane starts from the real optimum. The result is never worse than no
    displacement.

    Returns ``(beta_opt, report)``.
    """
    f = _DisplacedDelta(rho)
    if search_box is None:
        half = abs(f.a) + 3.0
        search_box = (-half, half)
    lo, hi = float(search_box[0]), float(search_box[1])
    n_scan = max(3, int(math.ceil((hi - lo) / scan_step)) + 1)
    xs = np.linspace(lo, hi, n_scan)
    vals = f.many(xs)
    i = int(np.argmin(vals))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, n_scan - 1)]
    best = golden_section(lambda x: f(x), a, b, tol=opt_tol)
    candidates = [(f(best), complex(best)), (vals[i], complex(xs[i])), (f(0.0), 0j)]
    if not real_axis:
        res = minimize(lambda v: f(complex(v[0], v[1])), [best.real, 0.0], method="Nelder-Mead",
                       options={"xatol": opt_tol, "fatol": 1e-14, "maxiter": 4000})
        if not res.success:
            raise OptimizationError(f"Nelder-Mead failed: {res.message}",
                                    best=min(candidates, key=lambda c: c[0])[1])
        candidates.append((float(res.fun), complex(res.x[0], res.x[1])))
    value, beta = min(candidates, key=lambda c: c[0])
    if candidates[2][0] <= value + TIE_TOL:
        beta = 0j  # no displacement unless it helps beyond round-off
    return beta, f.report(beta)


@dataclass(frozen=True)
class EpsMaxResult:
    eps_max: Optional[float]
    criterion: int
    map_at_max: GaussianMapSpec
    report: Optional[WitnessReport] = None

    @property
    def found(self) -> bool:
        return self.eps_max is not None

    def to_dict(self) -> dict:
        return {
            "eps_max": "none" if self.eps_max is None else float(self.eps_max),
            "criterion": self.criterion,
            "map_at_max": str(self.map_at_max),
            "report": None if self.report is None else self.report.to_dict(),
        }


DEFAULT_MAP_FAMILY = {"fock": "identity", "pac": "displacement", "pss": "squeezing"}


class LossyIndicator:
    """Indicator of a family state after loss, as a function of ``eps``.

    ``criterion=1`` uses the plain bound; ``criterion=2`` minimizes over
    the map family (``identity``, ``displacement`` or ``squeezing``).
    Fock states use the closed form; other families use the lossless
    photon-number distribution and moments computed once.
    """

    def __init__(self, family: str, param: float, criterion: int = 1,
                 map_family: Optional[str] = None, dim: int | None = None):
        if family not in FAMILIES:
            raise DomainError(f"unknown family {family!r}")
        if criterion not in (1, 2):
            raise DomainError("criterion must be 1 or 2")
        self.family, self.param, self.criterion = family, param, criterion
        self.map_family = "identity" if criterion == 1 else (map_family or DEFAULT_MAP_FAMILY[family])
        if self.map_family not in ("identity", "displacement", "squeezing"):
            raise DomainError(f"unknown map family {self.map_family!r}")
        self.rho0 = family_state(family, param, dim)
        self.probs = photon_distribution(self.rho0)
        self.n0 = mean_photon(self.rho0)
        self.m2 = moment(self.rho0, 2)

    def report(self, eps: float) -> WitnessReport:
        if self.map_family == "displacement":
            return optimize_displacement(apply_loss(self.rho0, eps), self._box())[1]
        if self.family == "fock":
            m = int(self.param)
            d = delta1_lossy_fock(m, eps)
            nbar = (1.0 - eps) * m
            return WitnessReport(d + bound_min(nbar), nbar, bound_min(nbar), d)
        w0 = TWO_OVER_PI * lossy_parity(self.probs, eps)
        nbar = (1.0 - eps) * self.n0
        if self.map_family == "identity":
            return WitnessReport.from_values(w0, nbar)
        if self.family == "pss":
            s = pss_optimal_squeezing(float(self.param), eps)
            return WitnessReport.from_values(
                w0, pss_squeezed_mean_photon(float(self.param), eps, s), GaussianMapSpec.squeezing(s))
        m2 = (1.0 - eps) * self.m2
        xi = 0j if m2 == 0 else complex(0.5 * math.atanh(min(abs(m2) / (nbar + 0.5), 1 - 1e-16))
                                       * np.exp(1j * (np.angle(m2) + math.pi)))
        return WitnessReport.from_values(w0, min_squeezed_mean_photon(nbar, m2),
                                         GaussianMapSpec.squeezing(xi))

    def __call__(self, eps: float) -> float:
        return self.report(eps).delta

    def _box(self):
        return pac_search_box(float(self.param)) if self.family == "pac" else None


def pac_search_box(alpha: float) -> tuple[float, float]:
    return (-(alpha + 3.0), alpha + 3.0)


def eps_max(state_family: str, params: float, criterion: int = 1, map_family: Optional[str] = None,
            *, eps_grid: float = EPS_GRID, eps_tol: float = EPS_TOL, dim: int | None = None) -> EpsMaxResult:
    """Largest loss at which the chosen criterion still flags the state.

    Scans ``eps`` on a grid over ``[0, 1)`` (at ``eps = 1`` every state is
    vacuum and the indicator is exactly zero), takes the last grid point
    with ``delta < 0`` and bisects the bracket above it to ``eps_tol``.
    The grid is walked downwards in parallel chunks, stopping at the first
    chunk that contains a hit. Returns ``eps_max=None`` when no grid point
    violates the bound; an indicator that is exactly zero (vacuum) is not a
    violation.
    """
    ind = LossyIndicator(state_family, params, criterion, map_family, dim)
    n = int(round(1.0 / eps_grid))
    grid = np.linspace(0.0, 1.0, n + 1)[:-1]
    i = None
    chunk = 64
    for top in range(len(grid), 0, -chunk):
        idx = list(range(max(top - chunk, 0), top))
        deltas = parallel_map(ind, grid[idx])
        hits = [j for j, d in zip(idx, deltas) if d < 0.0]
        if hits:
            i = hits[-1]
            break
    if i is None:
        return EpsMaxResult(None, criterion, GaussianMapSpec.identity())
    lo = float(grid[i])
    hi = float(grid[i + 1]) if i + 1 < len(grid) else 1.0
    while hi - lo > eps_tol:
        mid = 0.5 * (lo + hi)
        if ind(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    rep = ind.report(lo)
    return EpsMaxResult(lo, criterion, rep.map_used, rep)


def family_report(family: str, param: float, eps: float, g: Optional[GaussianMapSpec] = None,
                  dim: int | None = None) -> WitnessReport:
    """Indicator for a family state after loss and an optional explicit Gaussian map."""
    rho = apply_loss(family_state(family, param, dim), eps)
    if g is None or g.kind == "identity":
        return delta1(rho)
    if g.kind == "displacement":
        return _DisplacedDelta(rho).report(g.beta)
    return delta2(rho, g)
