"""Truncated Fock-space linear algebra for a single bosonic mode.

States and operators are dense complex arrays indexed by photon number
``0 .. dim-1``. Arrays are made read-only at construction so values can be
shared freely between threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply
from scipy.special import eval_genlaguerre, gammaln

from .errors import ContractError, DimensionError, TruncationError, TruncationWarning

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "FockVector",
    "FockOperator",
    "truncation_dim",
    "annihilation",
    "number_operator",
    "parity_diagonal",
    "fock_state",
    "displacement_matrix",
    "squeezing_matrix",
    "squeeze_vectors",
    "mean_photon",
    "moment",
    "parity_expectation",
    "photon_distribution",
    "apply_unitary",
    "wigner_at",
    "wigner_many",
    "trace_distance",
]


@dataclass(frozen=True)
class Tolerances:
    norm_tol: float = 1e-10
    herm_tol: float = 1e-10
    trace_tol: float = 1e-10
    psd_tol: float = 1e-9
    truncation_tol: float = 1e-8

    def __post_init__(self):
        for name in ("norm_tol", "herm_tol", "trace_tol", "psd_tol", "truncation_tol"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")


DEFAULT_TOL = Tolerances()


def truncation_dim(nbar: float) -> int:
    """Smallest basis size the package uses for a state of mean photon number ``nbar``."""
    nbar = max(float(nbar), 0.0)
    return int(math.ceil(4.0 * nbar + 8.0 * math.sqrt(nbar) + 20.0))


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FockVector:
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps)
        if amps.ndim != 1 or amps.size < 1:
            raise DimensionError("FockVector needs a non-empty 1-D amplitude array")
        object.__setattr__(self, "amps", _readonly(amps))

    @property
    def dim(self) -> int:
        return self.amps.size

    @property
    def norm_deficit(self) -> float:
        return abs(1.0 - float(np.vdot(self.amps, self.amps).real))

    def normalized(self) -> "FockVector":
        norm = np.linalg.norm(self.amps)
        if norm == 0:
            raise ContractError("cannot normalize the zero vector")
        return FockVector(self.amps / norm)

    def to_operator(self) -> "FockOperator":
        return FockOperator(np.outer(self.amps, self.amps.conj()), is_state=True)


@dataclass(frozen=True)
class FockOperator:
    """Dense operator in the number basis.

    ``is_state`` marks operators that are meant to be density operators;
    functions that need a state check the flag plus cheap Hermiticity and
    trace conditions. Use :meth:`density` to also check positivity.
    """

    mat: np.ndarray
    is_state: bool = False
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        mat = np.asarray(self.mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
            raise DimensionError(f"expected a non-empty square matrix, got shape {mat.shape}")
        object.__setattr__(self, "mat", _readonly(mat))

    @classmethod
    def density(cls, mat, tol: Tolerances = DEFAULT_TOL) -> "FockOperator":
        """Build a density operator, checking Hermiticity, trace and positivity."""
        op = cls(mat, is_state=True, tol=tol)
        op.check_state(full=True)
        return op

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def check_state(self, full: bool = False) -> None:
        tol = self.tol
        if not self.is_state:
            raise ContractError("operator is not flagged as a density operator")
        herm = np.abs(self.mat - self.mat.conj().T).max()
        if herm > tol.herm_tol:
            raise ContractError(f"not Hermitian: max |rho - rho^dag| = {herm:.3e}")
        if abs(self.trace - 1.0) > max(tol.trace_tol, tol.truncation_tol):
            raise ContractError(f"trace {self.trace!r} differs from 1")
        if full:
            lam_min = np.linalg.eigvalsh(self.mat).min()
            if lam_min < -tol.psd_tol:
                raise ContractError(f"negative eigenvalue {lam_min:.3e}")

    def resized(self, dim: int) -> "FockOperator":
        """Zero-pad or crop to ``dim``. Cropping raises if it drops population."""
        if dim < 1:
            raise DimensionError("dim must be >= 1")
        if dim >= self.dim:
            out = np.zeros((dim, dim), dtype=complex)
            out[: self.dim, : self.dim] = self.mat
            return FockOperator(out, self.is_state, self.tol)
        lost = float(np.diag(self.mat)[dim:].real.sum())
        if self.is_state and lost > self.tol.truncation_tol:
            raise TruncationError(f"cropping to dim={dim} drops population {lost:.3e}")
        return FockOperator(self.mat[:dim, :dim], self.is_state, self.tol)

    def to_json_dict(self) -> dict:
        flat = self.mat.reshape(-1)
        return {"dim": self.dim, "mat": [[float(z.real), float(z.imag)] for z in flat]}

    @classmethod
    def from_json_dict(cls, data: dict, tol: Tolerances = DEFAULT_TOL) -> "FockOperator":
        dim = int(data["dim"])
        pairs = np.asarray(data["mat"], dtype=float)
        if pairs.shape != (dim * dim, 2):
            raise DimensionError(f"expected {dim * dim} (re, im) pairs, got shape {pairs.shape}")
        mat = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(dim, dim)
        return cls.density(mat, tol)


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def number_operator(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def parity_diagonal(dim: int) -> np.ndarray:
    return np.where(np.arange(dim) % 2 == 0, 1.0, -1.0)


def fock_state(m: int, dim: int) -> FockVector:
    if m < 0 or m >= dim:
        raise DimensionError(f"photon number {m} outside basis of size {dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[m] = 1.0
    return FockVector(amps)


def _displacement_elements(beta: complex, dim: int) -> np.ndarray:
    # <m|D(beta)|n> = sqrt(n!/m!) beta^(m-n) e^{-|beta|^2/2} L_n^(m-n)(|beta|^2), m >= n;
    # the m < n half uses (-beta*) in place of beta.
    beta = complex(beta)
    if beta == 0:
        return np.eye(dim, dtype=complex)
    x = abs(beta) ** 2
    idx = np.arange(dim)
    m, n = np.meshgrid(idx, idx, indexing="ij")
    lo = np.minimum(m, n)
    gap = np.abs(m - n)
    log_mag = 0.5 * (gammaln(lo + 1) - gammaln(lo + gap + 1)) - 0.5 * x + gap * math.log(abs(beta))
    lag = eval_genlaguerre(lo, gap, x)
    unit = beta / abs(beta)
    phase = np.where(m >= n, unit**gap, (-unit.conjugate()) ** gap)
    return np.exp(log_mag) * lag * phase


def _laguerre_table(x: np.ndarray, dim: int) -> np.ndarray:
    # table[..., n, k] = L_n^(k)(x) by the three-term recurrence in n.
    x = np.asarray(x, dtype=float)[..., None]
    k = np.arange(dim, dtype=float)
    table = np.empty(x.shape[:-1] + (dim, dim))
    prev = np.ones(x.shape[:-1] + (dim,))
    table[..., 0, :] = prev
    if dim > 1:
        cur = 1.0 + k - x
        table[..., 1, :] = cur
        for n in range(1, dim - 1):
            prev, cur = cur, ((2 * n + 1 + k - x) * cur - (n + k) * prev) / (n + 1)
            table[..., n + 1, :] = cur
    return table


def displacement_matrix(beta: complex, dim: int) -> FockOperator:
    """Matrix of ``D(beta) = exp(beta a^dag - beta^* a)`` truncated to ``dim``.

    Elements come from the associated-Laguerre closed form, so each entry is
    exact; only products of truncated matrices suffer truncation error.
    """
    if dim < 1:
        raise DimensionError("dim must be >= 1")
    return FockOperator(_displacement_elements(beta, dim))


SQUEEZE_TAIL = 1e-15
MAX_SQUEEZE_PAD = 20000


def _squeeze_generator(xi: complex, pad: int) -> sparse.csr_matrix:
    # xi (a^dag)^2 / 2 - xi^* a^2 / 2 as a banded sparse matrix
    n = np.arange(pad - 2)
    amp = 0.5 * np.sqrt((n + 1.0) * (n + 2.0))
    return sparse.diags([xi * amp, -np.conj(xi) * amp], [-2, 2], shape=(pad, pad), format="csr")


def squeeze_vectors(xi: complex, vecs: np.ndarray) -> np.ndarray:
    """``S(xi)`` applied to the columns of ``vecs`` (shape ``(d, k)``).

    The generator is exponentiated against the vectors in a padded basis
    (Krylov-type ``expm_multiply``), so no truncated ``S`` matrix is ever
    formed. The basis grows until each column keeps less than
    ``SQUEEZE_TAIL`` of its norm in the top tenth of the padding. The
    returned array has as many rows as the final padded basis.
    """
    xi = complex(xi)
    vecs = np.asarray(vecs, dtype=complex)
    if vecs.ndim == 1:
        vecs = vecs[:, None]
    d = vecs.shape[0]
    if xi == 0:
        return vecs.copy()
    r = abs(xi)
    pad = int(math.ceil(math.exp(2 * r) * (d + 1) + 8 * math.exp(r) * math.sqrt(d + 1) + 40))
    norms = np.maximum(np.sum(np.abs(vecs) ** 2, axis=0), 1e-300)
    while True:
        start = np.zeros((pad, vecs.shape[1]), dtype=complex)
        start[:d] = vecs
        out = expm_multiply(_squeeze_generator(xi, pad), start)
        edge = pad - max(20, pad // 10)
        tail = np.sum(np.abs(out[edge:]) ** 2, axis=0) / norms
        if tail.max() <= SQUEEZE_TAIL:
            return out
        if pad >= MAX_SQUEEZE_PAD:
            raise TruncationError(f"squeezing by {xi} needs more than {MAX_SQUEEZE_PAD} levels")
        pad = min(MAX_SQUEEZE_PAD, int(pad * 1.5))


def squeezing_matrix(xi: complex, dim: int) -> FockOperator:
    """Matrix of ``S(xi) = exp(xi (a^dag)^2 / 2 - xi^* a^2 / 2)`` truncated to ``dim``.

    Columns are ``S(xi)|n>`` computed in a padded basis, so the returned
    elements are those of the untruncated operator.
    """
    if dim < 1:
        raise DimensionError("dim must be >= 1")
    cols = squeeze_vectors(xi, np.eye(dim, dtype=complex))
    return FockOperator(cols[:dim])


def _require_state(rho: FockOperator) -> None:
    if not isinstance(rho, FockOperator):
        raise ContractError(f"expected FockOperator, got {type(rho).__name__}")
    rho.check_state()


def mean_photon(rho: FockOperator) -> float:
    _require_state(rho)
    return float(np.dot(np.arange(rho.dim), np.diag(rho.mat).real))


def moment(rho: FockOperator, power: int) -> complex:
    """``Tr[rho a^power]``."""
    _require_state(rho)
    if power < 0:
        raise ValueError("power must be >= 0")
    if power == 0:
        return complex(np.trace(rho.mat))
    n = np.arange(power, rho.dim)
    coeff = np.exp(0.5 * (gammaln(n + 1) - gammaln(n - power + 1)))
    # <n-p| rho |n> weighted by sqrt(n!/(n-p)!)
    return complex(np.sum(coeff * rho.mat[n, n - power]))


def parity_expectation(rho: FockOperator) -> float:
    return float(np.dot(parity_diagonal(rho.dim), np.diag(rho.mat).real))


def photon_distribution(rho: FockOperator) -> np.ndarray:
    return np.clip(np.diag(rho.mat).real, 0.0, None)


def apply_unitary(u: FockOperator, rho: FockOperator) -> FockOperator:
    """``U rho U^dag``; warns with :class:`TruncationWarning` if trace leaks."""
    if u.dim != rho.dim:
        raise DimensionError(f"dimension mismatch: U is {u.dim}, rho is {rho.dim}")
    out = u.mat @ rho.mat @ u.mat.conj().T
    result = FockOperator(out, rho.is_state, rho.tol)
    deficit = abs(np.trace(rho.mat).real - np.trace(out).real)
    if deficit > rho.tol.truncation_tol:
        warnings.warn(
            f"trace deficit {deficit:.3e} after unitary exceeds truncation_tol; enlarge dim",
            TruncationWarning,
            stacklevel=2,
        )
    return result


def wigner_at(rho: FockOperator, z: complex) -> float:
    """Wigner function of ``rho`` at phase-space point ``z``.

    Uses ``W(z) = (2/pi) Tr[rho Pi D(-2z)]``, which only needs the matrix
    elements of ``D`` inside the basis of ``rho`` and is therefore exact for
    a truncated state.
    """
    d = _displacement_elements(-2.0 * complex(z), rho.dim)
    signed = parity_diagonal(rho.dim)[:, None] * d
    return float((2.0 / math.pi) * np.sum(rho.mat.T * signed).real)


def wigner_many(rho: FockOperator, zs, chunk: int = 128) -> np.ndarray:
    """:func:`wigner_at` evaluated at every point of the 1-D array ``zs``.

    The trace is regrouped by ``(lo, gap) = (min(m, n), |m - n|)`` so that
    only real magnitudes are formed per point and the phase is applied once
    per gap.
    """
    zs = np.asarray(zs, dtype=complex).reshape(-1)
    dim = rho.dim
    signed = rho.mat.T * parity_diagonal(dim)[:, None]  # S[m, n] = Pi_m rho[n, m]
    lo, gap = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    valid = lo + gap < dim
    hi = np.where(valid, lo + gap, 0)
    s_up = np.where(valid, signed[hi, lo], 0.0)
    s_dn = np.where(valid & (gap > 0), signed[lo, hi], 0.0)
    log_c = np.where(valid, 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)), -np.inf)
    out = np.empty(zs.size)
    for start in range(0, zs.size, chunk):
        b = -2.0 * zs[start:start + chunk]
        x = np.abs(b) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            log_b = np.log(np.abs(b))
            log_pow = np.where(gap[None, 0, :] == 0, 0.0, gap[None, 0, :] * log_b[:, None])
        mag = np.exp(log_c[None] + log_pow[:, None, :] - 0.5 * x[:, None, None]) * _laguerre_table(x, dim)
        t_up = np.einsum("klg,lg->kg", mag, s_up)
        t_dn = np.einsum("klg,lg->kg", mag, s_dn)
        unit = np.where(b == 0, 1.0, b / np.where(b == 0, 1.0, np.abs(b)))
        ph = unit[:, None] ** np.arange(dim)
        ph_dn = (-unit.conj())[:, None] ** np.arange(dim)
        out[start:start + chunk] = (2.0 / math.pi) * np.sum(t_up * ph + t_dn * ph_dn, axis=1).real
    return out


def trace_distance(a: FockOperator, b: FockOperator) -> float:
    if a.dim != b.dim:
        raise DimensionError("dimension mismatch")
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a.mat - b.mat)).sum())
