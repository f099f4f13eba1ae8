"""Non-Gaussian test states: Fock, photon-added coherent (PAC) and photon-subtracted squeezed (PSS).

Amplitudes are generated in closed form, so the truncation tail is known
exactly. When ``dim`` is omitted the basis grows until the dropped mass is
below ``AUTO_TAIL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import eval_laguerre, gammaln

from .errors import DomainError, TruncationError
from .fock_core import DEFAULT_TOL, FockOperator, FockVector, Tolerances, fock_state, truncation_dim

TWO_OVER_PI = 2.0 / math.pi
AUTO_TAIL = 1e-14

PhasePoint = complex


@dataclass(frozen=True)
class PacParams:
    alpha: float

    def __post_init__(self):
        if not self.alpha >= 0:
            raise DomainError(f"PAC amplitude must be real and >= 0, got {self.alpha!r}")


@dataclass(frozen=True)
class PssParams:
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError(f"PSS squeezing must be > 0, got {self.r!r}")


def _pac_amplitudes(alpha: float, dim: int) -> np.ndarray:
    # a^dag |alpha> / sqrt(1 + alpha^2): amplitude sqrt(n) alpha^(n-1) e^{-alpha^2/2} / sqrt((n-1)!)
    amps = np.zeros(dim)
    if dim < 2:
        return amps
    n = np.arange(1, dim)
    if alpha == 0:
        amps[1] = 1.0
        return amps
    log_mag = (0.5 * np.log(n) + (n - 1) * math.log(alpha) - 0.5 * alpha**2
               - 0.5 * gammaln(n) - 0.5 * math.log1p(alpha**2))
    amps[1:] = np.exp(log_mag)
    return amps


def _pss_amplitudes(r: float, dim: int) -> np.ndarray:
    # a S(r)|0> / sinh r, populated on odd indices 2k-1 only
    amps = np.zeros(dim)
    k = np.arange(1, dim // 2 + 1)
    k = k[2 * k - 1 < dim]
    log_sq = (0.5 * gammaln(2 * k + 1) - gammaln(k + 1) - k * math.log(2.0)
              + k * math.log(math.tanh(r)) - 0.5 * math.log(math.cosh(r)))
    amps[2 * k - 1] = np.exp(log_sq + 0.5 * np.log(2 * k) - math.log(math.sinh(r)))
    return amps


def _build(amp_fn: Callable[[int], np.ndarray], nbar: float, dim: int | None,
           tol: Tolerances, label: str) -> FockVector:
    if dim is None:
        dim = truncation_dim(nbar)
        while True:
            amps = amp_fn(dim)
            if 1.0 - float(amps @ amps) <= AUTO_TAIL:
                break
            dim = int(dim * 1.25) + 1
    else:
        amps = amp_fn(dim)
    tail = 1.0 - float(amps @ amps)
    if tail > tol.truncation_tol:
        raise TruncationError(f"{label}: dim={dim} drops {tail:.3e} of the state")
    return FockVector(amps.astype(complex)).normalized()


def pac_mean_photon(alpha: float) -> float:
    a2 = alpha * alpha
    return (a2 * a2 + 3.0 * a2 + 1.0) / (1.0 + a2)


def pac_mean_field(alpha: float) -> float:
    """``<a>`` (equal to ``<a^dag>``) for the PAC state with real amplitude."""
    a2 = alpha * alpha
    return alpha * (2.0 + a2) / (1.0 + a2)


def pac_vector(p: PacParams, dim: int | None = None, tol: Tolerances = DEFAULT_TOL) -> FockVector:
    return _build(lambda d: _pac_amplitudes(p.alpha, d), pac_mean_photon(p.alpha), dim, tol,
                  f"pac(alpha={p.alpha})")


def pac_to_fock(p: PacParams, dim: int | None = None, tol: Tolerances = DEFAULT_TOL) -> FockOperator:
    return FockOperator(pac_vector(p, dim, tol).to_operator().mat, True, tol)


def pac_wigner(p: PacParams, z: PhasePoint):
    """Closed-form Wigner function of the PAC state at ``z`` (scalar or array)."""
    alpha = p.alpha
    z = np.asarray(z, dtype=complex)
    gauss = np.exp(-2.0 * np.abs(alpha - z) ** 2)
    poly = -1.0 + alpha**2 + 4.0 * np.abs(z) ** 2 - 4.0 * alpha * z.real
    return _scalar(TWO_OVER_PI * gauss * poly / (1.0 + alpha**2))


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def pss_mean_photon(r: float) -> float:
    return 3.0 * math.sinh(r) ** 2 + 1.0


def pss_second_moment(r: float) -> float:
    """``<a^2>`` (equal to ``<a^dag^2>``) for the PSS state."""
    return 3.0 * math.cosh(r) * math.sinh(r)


def pss_vector(p: PssParams, dim: int | None = None, tol: Tolerances = DEFAULT_TOL) -> FockVector:
    return _build(lambda d: _pss_amplitudes(p.r, d), pss_mean_photon(p.r), dim, tol,
                  f"pss(r={p.r})")


def pss_to_fock(p: PssParams, dim: int | None = None, tol: Tolerances = DEFAULT_TOL) -> FockOperator:
    return FockOperator(pss_vector(p, dim, tol).to_operator().mat, True, tol)


def pss_wigner(p: PssParams, z: PhasePoint):
    """Closed-form Wigner function of the PSS state at ``z`` (scalar or array)."""
    z = np.asarray(z, dtype=complex)
    c2, s2 = math.cosh(2 * p.r), math.sinh(2 * p.r)
    mod2 = np.abs(z) ** 2
    re_sq = 2.0 * (z * z).real  # lambda^2 + lambda*^2
    val = -TWO_OVER_PI * np.exp(-2.0 * mod2 * c2 + re_sq * s2) * (1.0 - 4.0 * mod2 * c2 + 2.0 * re_sq * s2)
    return _scalar(val)


def fock_wigner_origin_lossy(m: int, eps: float) -> float:
    """W(0) of the Fock state ``|m>`` after the loss channel."""
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"loss parameter must lie in [0, 1], got {eps!r}")
    return TWO_OVER_PI * (2.0 * eps - 1.0) ** m


def fock_wigner(m: int, z: PhasePoint):
    x = 4.0 * np.abs(np.asarray(z, dtype=complex)) ** 2
    return _scalar(TWO_OVER_PI * (-1) ** m * np.exp(-0.5 * x) * eval_laguerre(m, x))


def fock_to_fock(m: int, dim: int | None = None, tol: Tolerances = DEFAULT_TOL) -> FockOperator:
    if m < 0:
        raise DomainError("photon number must be >= 0")
    dim = m + 1 if dim is None else dim
    return FockOperator(fock_state(m, dim).to_operator().mat, True, tol)


FAMILIES = ("fock", "pac", "pss")


def family_state(family: str, param: float, dim: int | None = None,
                 tol: Tolerances = DEFAULT_TOL) -> FockOperator:
    """Initial (lossless) state of a named family."""
    if family == "fock":
        if float(param) != int(param):
            raise DomainError(f"Fock photon number must be an integer, got {param!r}")
        return fock_to_fock(int(param), dim, tol)
    if family == "pac":
        return pac_to_fock(PacParams(float(param)), dim, tol)
    if family == "pss":
        return pss_to_fock(PssParams(float(param)), dim, tol)
    raise DomainError(f"unknown state family {family!r}; expected one of {FAMILIES}")


def family_mean_photon(family: str, param: float) -> float:
    if family == "fock":
        return float(param)
    if family == "pac":
        return pac_mean_photon(float(param))
    if family == "pss":
        return pss_mean_photon(float(param))
    raise DomainError(f"unknown state family {family!r}")


def family_wigner(family: str, param: float) -> Callable[[complex], float]:
    """Closed-form Wigner function of a family member, as a callable of ``z``."""
    if family == "pac":
        p = PacParams(float(param))
        return lambda z: pac_wigner(p, z)
    if family == "pss":
        q = PssParams(float(param))
        return lambda z: pss_wigner(q, z)
    if family == "fock":
        m = int(param)
        return lambda z: fock_wigner(m, z)
    raise DomainError(f"no closed-form Wigner function for {family}:{param}")


def family_envelope(family: str, param: float):
    """Gaussian footprint of a family's Wigner function, for kernel quadrature."""
    from .channels import Envelope

    if family == "pac":
        return Envelope(complex(float(param)), 0.75, 0.75)
    if family == "pss":
        r = float(param)
        return Envelope(0j, 0.75 * math.exp(r), 0.75 * math.exp(-r))
    if family == "fock":
        w = 0.5 * math.sqrt(2.0 * int(param) + 1.0)
        return Envelope(0j, w, w)
    raise DomainError(f"unknown state family {family!r}")
