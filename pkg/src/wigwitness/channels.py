"""Pure-loss channel and single-mode Gaussian maps.

The loss channel with loss fraction ``eps`` (transmissivity ``1 - eps``)
is available in three equivalent forms:

* Kraus sum on a density matrix (:func:`apply_loss`),
* binomial thinning of a photon-number distribution
  (:func:`loss_photon_distribution`, :func:`lossy_parity`),
* Gaussian-kernel convolution of a Wigner function (:func:`lossy_wigner`).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln, roots_hermite

from .errors import DomainError, QuadratureError, SpecError, TruncationError
from .fock_core import (
    FockOperator,
    displacement_matrix,
    mean_photon,
    squeeze_vectors,
    truncation_dim,
)

MAX_DIM = 2000


@dataclass(frozen=True)
class LossParam:
    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise DomainError(f"loss parameter must lie in [0, 1], got {self.epsilon!r}")

    @property
    def efficiency(self) -> float:
        return 1.0 - self.epsilon

    @classmethod
    def from_gamma_t(cls, gamma_t: float) -> "LossParam":
        """Loss accumulated by the damping master equation after time ``t``."""
        if gamma_t < 0:
            raise DomainError("gamma*t must be >= 0")
        return cls(-math.expm1(-gamma_t))


def _eps(eps) -> float:
    return eps.epsilon if isinstance(eps, LossParam) else LossParam(float(eps)).epsilon


def compose_loss(eps1, eps2) -> LossParam:
    """Single loss equivalent to two losses in sequence (transmissivities multiply)."""
    t = (1.0 - _eps(eps1)) * (1.0 - _eps(eps2))
    return LossParam(min(max(1.0 - t, 0.0), 1.0))


def _kraus_coefficients(eps: float, dim: int, k: int) -> np.ndarray:
    # <n|A_k|n+k> = sqrt(C(n+k, k) (1-eps)^n eps^k), n = 0 .. dim-k-1
    n = np.arange(dim - k)
    if eps == 0.0:
        return np.ones(dim - k) if k == 0 else np.zeros(dim - k)
    if eps == 1.0:
        out = np.zeros(dim - k)
        out[0] = 1.0
        return out
    log_c = gammaln(n + k + 1) - gammaln(n + 1) - gammaln(k + 1)
    return np.exp(0.5 * (log_c + n * math.log1p(-eps) + k * math.log(eps)))


def loss_kraus_operators(eps, dim: int) -> list[np.ndarray]:
    e = _eps(eps)
    ops = []
    for k in range(dim):
        a = np.zeros((dim, dim))
        c = _kraus_coefficients(e, dim, k)
        a[np.arange(dim - k), np.arange(k, dim)] = c
        ops.append(a)
    return ops


def apply_loss(rho: FockOperator, eps) -> FockOperator:
    """``sum_k A_k rho A_k^dag`` for the pure-loss Kraus operators."""
    rho.check_state()
    e = _eps(eps)
    dim = rho.dim
    src = rho.mat
    out = np.zeros_like(src)
    for k in range(dim):
        c = _kraus_coefficients(e, dim, k)
        if not c.any():
            continue
        out[: dim - k, : dim - k] += np.outer(c, c) * src[k:, k:]
    return FockOperator(out, True, rho.tol)


def loss_photon_distribution(probs: Sequence[float], eps) -> np.ndarray:
    """Photon-number distribution after loss (binomial thinning)."""
    e = _eps(eps)
    p = np.asarray(probs, dtype=float)
    dim = p.size
    out = np.zeros(dim)
    for k in range(dim):
        c = _kraus_coefficients(e, dim, k)
        out[: dim - k] += c * c * p[k:]
    return out


def lossy_parity(probs: Sequence[float], eps) -> float:
    """Parity after loss: ``sum_n p_n (2 eps - 1)^n``."""
    e = _eps(eps)
    p = np.asarray(probs, dtype=float)
    return float(np.polynomial.polynomial.polyval(2.0 * e - 1.0, p))


def loss_kernel(eps, z: complex, zp: complex) -> float:
    e = _eps(eps)
    if not 0.0 < e < 1.0:
        raise DomainError("kernel is only defined for 0 < eps < 1")
    return 2.0 / (math.pi * e) * math.exp(-2.0 * abs(z - zp * math.sqrt(1.0 - e)) ** 2 / e)


@dataclass(frozen=True)
class Envelope:
    """Rough Gaussian footprint of a Wigner function: centre and per-quadrature std."""

    centre: complex
    sx: float
    sy: float


def _hermite_rule(n: int):
    y, w = roots_hermite(n)
    with np.errstate(divide="ignore"):
        scaled = np.exp(np.log(w) + y * y)  # weight times e^{y^2}; 0 where w underflows
    return y, scaled


def lossy_wigner(w0: Callable[[complex], float], eps, z: complex = 0j, *,
                 quad_tol: float = 1e-8, n_start: int = 40, max_nodes: int = 2560,
                 envelope: Envelope | None = None) -> float:
    """Wigner function at ``z`` after loss, by convolving ``w0`` with the loss kernel.

    Tensor-product Gauss-Hermite quadrature centred where the kernel peaks,
    ``z / sqrt(1 - eps)``, with the kernel's own width. If an ``envelope``
    for ``w0`` is given, the nodes instead follow the product of the two
    Gaussians, which matters when ``eps`` is close to 1 and the kernel is
    much wider than ``w0``. The node count doubles from ``n_start`` until
    two successive estimates agree within ``quad_tol``.
    """
    e = _eps(eps)
    z = complex(z)
    if e == 0.0:
        return float(w0(z))
    if e == 1.0:
        return 2.0 / math.pi * math.exp(-2.0 * abs(z) ** 2)
    t = 1.0 - e
    centre = z / math.sqrt(t)
    k_std = math.sqrt(e / (4.0 * t))  # kernel std along each quadrature of lambda'
    if envelope is None:
        cx, cy, sx, sy = centre.real, centre.imag, k_std, k_std
    else:
        cx, sx = _product_gaussian(centre.real, k_std, envelope.centre.real, envelope.sx)
        cy, sy = _product_gaussian(centre.imag, k_std, envelope.centre.imag, envelope.sy)
    hx, hy = math.sqrt(2.0) * sx, math.sqrt(2.0) * sy
    w_vec = _vectorized(w0)
    estimates, nodes_used = [], []
    n = n_start
    while n <= max_nodes:
        y, ws = _hermite_rule(n)
        grid = (cx + hx * y)[:, None] + 1j * (cy + hy * y)[None, :]
        kern = 2.0 / (math.pi * e) * np.exp(-2.0 * np.abs(z - grid * math.sqrt(t)) ** 2 / e)
        vals = kern * w_vec(grid)
        est = float(hx * hy * (ws @ vals @ ws))
        if estimates and abs(est - estimates[-1]) < quad_tol:
            return est
        estimates.append(est)
        nodes_used.append(n)
        n *= 2
    raise QuadratureError(
        f"kernel quadrature did not converge to {quad_tol:g} (eps={e}, z={z})",
        estimates=estimates, nodes=nodes_used,
    )


def _product_gaussian(m1, s1, m2, s2):
    p1, p2 = 1.0 / s1**2, 1.0 / s2**2
    return (m1 * p1 + m2 * p2) / (p1 + p2), math.sqrt(1.0 / (p1 + p2))


def _vectorized(fn):
    try:
        probe = np.asarray(fn(np.zeros((2, 2), dtype=complex)), dtype=float)
        if probe.shape == (2, 2):
            return lambda grid: np.asarray(fn(grid), dtype=float)
    except (TypeError, ValueError):
        pass
    return np.vectorize(lambda u: float(fn(u)), otypes=[float])


@dataclass(frozen=True)
class GaussianMapSpec:
    """A displacement, squeezing, loss, identity or left-to-right composition."""

    kind: str
    beta: complex = 0j
    s: complex = 0j
    eps: float = 0.0
    maps: tuple = field(default=())

    KINDS = ("identity", "displacement", "squeezing", "loss", "composition")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise SpecError(f"unknown map kind {self.kind!r}")
        if self.kind == "composition" and not self.maps:
            raise SpecError("composition needs at least one map")
        if self.kind == "loss":
            LossParam(self.eps)

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def displacement(cls, beta: complex):
        return cls("displacement", beta=complex(beta))

    @classmethod
    def squeezing(cls, s: complex):
        return cls("squeezing", s=complex(s))

    @classmethod
    def loss(cls, eps: float):
        return cls("loss", eps=float(eps))

    @classmethod
    def then(cls, *maps: "GaussianMapSpec"):
        return cls("composition", maps=tuple(maps))

    def __str__(self) -> str:
        if self.kind == "identity":
            return "id"
        if self.kind == "displacement":
            return f"disp:{_fmt(self.beta.real)},{_fmt(self.beta.imag)}"
        if self.kind == "squeezing":
            if self.s.imag == 0:
                return f"sq:{_fmt(self.s.real)}"
            return f"sq:{_fmt(self.s.real)},{_fmt(self.s.imag)}"
        if self.kind == "loss":
            return f"loss:{_fmt(self.eps)}"
        return "then(" + ";".join(str(m) for m in self.maps) + ")"


def _fmt(x: float) -> str:
    return repr(float(x))


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def parse_map(text: str) -> GaussianMapSpec:
    """Parse ``id | disp:re,im | sq:s[,im] | loss:eps | then(m1;m2;...)``."""
    text = text.strip()
    if text in ("id", "identity"):
        return GaussianMapSpec.identity()
    if text.startswith("then(") and text.endswith(")"):
        inner = text[5:-1]
        parts, depth, cur = [], 0, ""
        for ch in inner:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            if ch == ";" and depth == 0:
                parts.append(cur)
                cur = ""
            else:
                cur += ch
        parts.append(cur)
        if not any(p.strip() for p in parts):
            raise SpecError("then(...) needs at least one map")
        return GaussianMapSpec.then(*(parse_map(p) for p in parts))
    m = re.fullmatch(rf"disp:({_NUM})(?:,({_NUM}))?", text)
    if m:
        return GaussianMapSpec.displacement(complex(float(m.group(1)), float(m.group(2) or 0.0)))
    m = re.fullmatch(rf"sq:({_NUM})(?:,({_NUM}))?", text)
    if m:
        return GaussianMapSpec.squeezing(complex(float(m.group(1)), float(m.group(2) or 0.0)))
    m = re.fullmatch(rf"loss:({_NUM})", text)
    if m:
        try:
            return GaussianMapSpec.loss(float(m.group(1)))
        except DomainError as exc:
            raise SpecError(str(exc)) from exc
    raise SpecError(f"cannot parse Gaussian map {text!r}")


def _energy_bound(nbar: float, g: GaussianMapSpec) -> float:
    if g.kind == "displacement":
        return (math.sqrt(nbar) + abs(g.beta)) ** 2
    if g.kind == "squeezing":
        return (nbar + 0.5) * math.exp(2 * abs(g.s)) - 0.5
    if g.kind == "composition":
        for sub in g.maps:
            nbar = _energy_bound(nbar, sub)
        return nbar
    return nbar


AUTO_TAIL = 1e-13


def _displace_at(rho: FockOperator, beta: complex, dim: int, tol: float) -> FockOperator:
    work = rho.resized(dim) if dim > rho.dim else rho
    u = displacement_matrix(beta, work.dim).mat
    out = FockOperator(u @ work.mat @ u.conj().T, True, rho.tol)
    deficit = work.trace - out.trace
    if deficit > tol:
        raise TruncationError(f"disp:{beta} leaks {deficit:.3e} of the trace at dim={work.dim}; enlarge dim")
    return out


def _squeeze_state(rho: FockOperator, xi: complex, dim: int | None) -> FockOperator:
    lam, vecs = np.linalg.eigh(rho.mat)
    keep = lam > 1e-16 * max(lam.max(), 0.0)
    lam, vecs = lam[keep], vecs[:, keep]
    # squeeze only the rows the kept eigenvectors actually occupy
    support = np.nonzero(np.max(np.abs(vecs) ** 2, axis=1) > 1e-20)[0]
    rows = int(support[-1]) + 1 if support.size else 1
    cols = squeeze_vectors(xi, vecs[:rows])
    full = (cols * lam) @ cols.conj().T
    diag = np.diag(full).real
    tail = np.cumsum(diag[::-1])[::-1]  # tail[d] = population at index >= d
    if dim is None:
        ok = np.nonzero(tail <= AUTO_TAIL)[0]
        dim = max(rho.dim, int(ok[0]) if ok.size else full.shape[0])
    else:
        dim = max(dim, rho.dim)
        lost = float(tail[dim]) if dim < full.shape[0] else 0.0
        if lost > rho.tol.truncation_tol:
            raise TruncationError(f"sq:{xi} leaks {lost:.3e} of the trace at dim={dim}; enlarge dim")
    if dim > full.shape[0]:
        padded = np.zeros((dim, dim), dtype=complex)
        padded[: full.shape[0], : full.shape[0]] = full
        full = padded
    return FockOperator(full[:dim, :dim], True, rho.tol)


def apply_gaussian_map(rho: FockOperator, g: GaussianMapSpec, dim: int | None = None) -> FockOperator:
    """Apply a Gaussian map, enlarging the basis when the map adds energy.

    With ``dim`` given, the output lives in at least that basis and a
    :class:`TruncationError` is raised if population leaks past it.
    Without ``dim`` the basis is grown until less than ``AUTO_TAIL`` of
    the trace is dropped.
    """
    rho.check_state()
    if g.kind == "identity":
        return rho
    if g.kind == "loss":
        return apply_loss(rho, g.eps)
    if g.kind == "composition":
        out = rho
        for sub in g.maps:
            out = apply_gaussian_map(out, sub, dim)
        return out
    if g.kind == "squeezing":
        return _squeeze_state(rho, g.s, dim)
    if dim is not None:
        return _displace_at(rho, g.beta, max(dim, rho.dim), rho.tol.truncation_tol)
    target = max(rho.dim, truncation_dim(_energy_bound(mean_photon(rho), g)) + 20)
    while True:
        try:
            return _displace_at(rho, g.beta, target, AUTO_TAIL)
        except TruncationError:
            if target >= MAX_DIM:
                raise
            target = min(MAX_DIM, int(target * 1.5))


def gaussian_map_moments(mean: np.ndarray, cov: np.ndarray, g: GaussianMapSpec):
    """Action of a Gaussian map on the quadrature mean and covariance."""
    if g.kind == "identity":
        return mean, cov
    if g.kind == "displacement":
        return mean + np.array([g.beta.real, g.beta.imag]), cov
    if g.kind == "squeezing":
        r = abs(g.s)
        phi = math.atan2(g.s.imag, g.s.real)
        c, s = math.cos(phi / 2), math.sin(phi / 2)
        rot = np.array([[c, -s], [s, c]])
        sym = rot @ np.diag([math.exp(r), math.exp(-r)]) @ rot.T
        return sym @ mean, sym @ cov @ sym.T
    if g.kind == "loss":
        t = 1.0 - g.eps
        return math.sqrt(t) * mean, t * cov + 0.25 * g.eps * np.eye(2)
    for sub in g.maps:
        mean, cov = gaussian_map_moments(mean, cov, sub)
    return mean, cov


def random_gaussian_map(rng: np.random.Generator) -> GaussianMapSpec:
    """Random displacement (complex normal, sigma 1), squeezing (uniform in [-1, 1]),
    loss (uniform in [0, 1]) or a composition of two or three of these."""
    kind = rng.integers(4)
    if kind == 3:
        return GaussianMapSpec.then(*(_random_simple(rng) for _ in range(rng.integers(2, 4))))
    return _random_simple(rng, kind)


def _random_simple(rng, kind=None) -> GaussianMapSpec:
    if kind is None:
        kind = rng.integers(3)
    if kind == 0:
        re_, im_ = rng.normal(0.0, 1.0, size=2)
        return GaussianMapSpec.displacement(complex(re_, im_))
    if kind == 1:
        return GaussianMapSpec.squeezing(rng.uniform(-1.0, 1.0))
    return GaussianMapSpec.loss(rng.uniform(0.0, 1.0))
