"""Pure Gaussian states, finite Gaussian mixtures and their Wigner value at the origin.

Phase-space convention: ``lambda = x + i p`` with ``a = x + i p``, so the
vacuum has ``W(lambda) = (2/pi) exp(-2|lambda|^2)`` and quadrature variance
1/4. Squeezing follows ``S(xi) = exp(xi a^dag^2 / 2 - xi^* a^2 / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, TruncationError
from .fock_core import (
    DEFAULT_TOL,
    FockOperator,
    FockVector,
    Tolerances,
    _displacement_elements,
    truncation_dim,
)

TWO_OVER_PI = 2.0 / math.pi


@dataclass(frozen=True)
class PureGaussianParams:
    """``D(alpha) S(xi) |0>``."""

    alpha: complex = 0j
    xi: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "xi", complex(self.xi))

    @property
    def r(self) -> float:
        return abs(self.xi)

    @property
    def theta(self) -> float:
        return math.atan2(self.alpha.imag, self.alpha.real)

    @property
    def phi(self) -> float:
        return math.atan2(self.xi.imag, self.xi.real)

    @property
    def n_d(self) -> float:
        return abs(self.alpha) ** 2

    @property
    def n_s(self) -> float:
        return math.sinh(self.r) ** 2

    @property
    def n(self) -> float:
        return self.n_d + self.n_s

    def moments(self) -> tuple[np.ndarray, np.ndarray]:
        """Mean ``(<x>, <p>)`` and covariance matrix of the quadratures."""
        rot = _rotation(self.phi / 2.0)
        cov = 0.25 * rot @ np.diag([math.exp(2 * self.r), math.exp(-2 * self.r)]) @ rot.T
        return np.array([self.alpha.real, self.alpha.imag]), cov


def _rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class GaussianMixture:
    weights: tuple
    params: tuple

    def __init__(self, weights: Sequence[float], params: Sequence[PureGaussianParams],
                 tol: Tolerances = DEFAULT_TOL):
        weights = tuple(float(w) for w in weights)
        params = tuple(params)
        if len(weights) != len(params) or not weights:
            raise ValueError("weights and params must be non-empty and of equal length")
        if min(weights) < 0:
            raise DomainError("mixture weights must be non-negative")
        if abs(sum(weights) - 1.0) > tol.norm_tol:
            raise DomainError(f"mixture weights sum to {sum(weights)!r}, not 1")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "params", params)

    @classmethod
    def single(cls, params: PureGaussianParams) -> "GaussianMixture":
        return cls([1.0], [params])

    def __len__(self):
        return len(self.weights)

    def to_json_dict(self) -> dict:
        return {
            "weights": list(self.weights),
            "alphas": [[p.alpha.real, p.alpha.imag] for p in self.params],
            "xis": [[p.xi.real, p.xi.imag] for p in self.params],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "GaussianMixture":
        params = [
            PureGaussianParams(complex(a[0], a[1]), complex(x[0], x[1]))
            for a, x in zip(data["alphas"], data["xis"])
        ]
        return cls(data["weights"], params)


def wigner_origin_pure_gaussian(params: PureGaussianParams) -> float:
    """Closed-form W(0) of ``D(alpha) S(xi)|0>``.

    With ``S`` as defined above, the anti-squeezed axis sits at angle
    ``phi / 2``, so W(0) is smallest when ``2*theta - phi = pi``
    (displacement along the squeezed quadrature).
    """
    r = params.r
    shape = math.cosh(2 * r) - math.cos(2 * params.theta - params.phi) * math.sinh(2 * r)
    return TWO_OVER_PI * math.exp(-2.0 * params.n_d * shape)


def saturating_state(n: float) -> PureGaussianParams:
    """Pure Gaussian state of mean photon number ``n`` with the lowest W(0).

    Squeezing carries ``n^2 / (1 + 2n)`` photons and the displacement is
    placed along the squeezed quadrature (theta = pi/2 with real xi).
    """
    if n < 0:
        raise DomainError(f"mean photon number must be >= 0, got {n}")
    n_s = n * n / (1.0 + 2.0 * n)
    n_d = n - n_s
    r = math.asinh(math.sqrt(n_s))
    return PureGaussianParams(alpha=1j * math.sqrt(n_d), xi=r)


def mixture_wigner_origin(mix: GaussianMixture) -> float:
    return sum(w * wigner_origin_pure_gaussian(p) for w, p in zip(mix.weights, mix.params))


def mixture_mean_photon(mix: GaussianMixture) -> float:
    return sum(w * p.n for w, p in zip(mix.weights, mix.params))


def sample_hull_state(rng_seed, max_energy: float, n_components: int) -> GaussianMixture:
    """Draw a reproducible random finite mixture of pure Gaussian states.

    Displacement and squeezing photon numbers are exponential with mean
    ``max_energy / 4`` each, redrawn until their sum fits under
    ``max_energy``; phases are uniform and weights flat on the simplex.
    """
    if n_components < 1:
        raise ValueError("n_components must be >= 1")
    if max_energy < 0:
        raise DomainError("max_energy must be >= 0")
    rng = np.random.default_rng(rng_seed)
    scale = max_energy / 4.0
    params = []
    for _ in range(n_components):
        while True:
            n_d, n_s = rng.exponential(scale, size=2) if scale > 0 else (0.0, 0.0)
            if n_d + n_s <= max_energy:
                break
        theta, phi = rng.uniform(0.0, 2 * math.pi, size=2)
        r = math.asinh(math.sqrt(n_s))
        params.append(PureGaussianParams(math.sqrt(n_d) * np.exp(1j * theta), r * np.exp(1j * phi)))
    cuts = np.sort(rng.uniform(size=n_components - 1))
    weights = np.diff(np.concatenate(([0.0], cuts, [1.0])))
    return GaussianMixture(weights, params)


def squeezed_vacuum_amplitudes(xi: complex, dim: int) -> np.ndarray:
    """Number-basis amplitudes of ``S(xi)|0>`` (closed form, even indices only)."""
    xi = complex(xi)
    amps = np.zeros(dim, dtype=complex)
    r = abs(xi)
    if r == 0:
        amps[0] = 1.0
        return amps
    k = np.arange((dim + 1) // 2)
    phase = xi / r
    t = math.tanh(r)
    log_mag = 0.5 * gammaln(2 * k + 1) - gammaln(k + 1) - k * math.log(2.0) + k * math.log(t)
    amps[2 * k] = np.exp(log_mag - 0.5 * math.log(math.cosh(r))) * phase**k
    return amps


def pure_gaussian_vector(params: PureGaussianParams, dim: int,
                         tol: Tolerances = DEFAULT_TOL) -> FockVector:
    """``D(alpha) S(xi)|0>`` truncated to ``dim`` and renormalized."""
    work = max(dim, truncation_dim(params.n)) + 40
    sq = squeezed_vacuum_amplitudes(params.xi, work)
    while 1.0 - np.vdot(sq, sq).real > 1e-15 and work < 4000:
        work *= 2
        sq = squeezed_vacuum_amplitudes(params.xi, work)
    if params.alpha != 0:
        vec = _displacement_elements(params.alpha, work)[:dim] @ sq
    else:
        vec = sq[:dim]
    tail = 1.0 - float(np.vdot(vec, vec).real)
    if tail > tol.truncation_tol:
        raise TruncationError(
            f"dim={dim} drops {tail:.3e} of the state (mean photon {params.n:.3f}); "
            f"use dim >= {truncation_dim(params.n)}"
        )
    return FockVector(vec).normalized()


DIM_MARGIN = 20


def default_dim(obj) -> int:
    """Basis size for a Gaussian state or mixture.

    The smallest size with tail mass below 1e-14, plus ``DIM_MARGIN``
    levels: Wigner values away from the origin weight the tail amplitudes
    (not their squares) by growing Laguerre factors.
    """
    comps = obj.params if isinstance(obj, GaussianMixture) else (obj,)
    dim = max(truncation_dim(p.n) for p in comps)
    for p in comps:
        while True:
            try:
                pure_gaussian_vector(p, dim, Tolerances(truncation_tol=1e-14))
                break
            except TruncationError:
                dim = int(dim * 1.25) + 1
    return dim + DIM_MARGIN


def to_fock(obj: Union[PureGaussianParams, GaussianMixture], dim: int | None = None,
            tol: Tolerances = DEFAULT_TOL) -> FockOperator:
    """Density operator of a pure Gaussian state or a finite mixture."""
    if dim is None:
        dim = default_dim(obj)
    if isinstance(obj, PureGaussianParams):
        return FockOperator(pure_gaussian_vector(obj, dim, tol).to_operator().mat, True, tol)
    mat = np.zeros((dim, dim), dtype=complex)
    for w, p in zip(obj.weights, obj.params):
        v = pure_gaussian_vector(p, dim, tol).amps
        mat += w * np.outer(v, v.conj())
    return FockOperator(mat, True, tol)


def gaussian_wigner_origin(mean: np.ndarray, cov: np.ndarray) -> float:
    """Wigner value at the origin of a (possibly mixed) Gaussian state."""
    a, b, c, d = float(cov[0, 0]), float(cov[0, 1]), float(cov[1, 0]), float(cov[1, 1])
    x, y = float(mean[0]), float(mean[1])
    det = a * d - b * c
    quad = (d * x * x - (b + c) * x * y + a * y * y) / det
    return math.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))


def gaussian_mean_photon(mean: np.ndarray, cov: np.ndarray) -> float:
    return float(cov[0, 0] + cov[1, 1] + mean[0] ** 2 + mean[1] ** 2 - 0.5)
