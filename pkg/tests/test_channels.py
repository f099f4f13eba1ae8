import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import dblquad
from scipy.stats import binom

from wigwitness.channels import (
    Envelope,
    GaussianMapSpec,
    LossParam,
    apply_gaussian_map,
    apply_loss,
    compose_loss,
    gaussian_map_moments,
    loss_kernel,
    loss_kraus_operators,
    loss_photon_distribution,
    lossy_parity,
    lossy_wigner,
    parse_map,
)
from wigwitness.errors import DomainError, SpecError
from wigwitness.exemplar_states import PacParams, PssParams, fock_to_fock, pac_to_fock, pac_wigner, pss_to_fock, pss_wigner
from wigwitness.fock_core import mean_photon, parity_expectation, photon_distribution
from wigwitness.gaussian_states import PureGaussianParams, gaussian_mean_photon, gaussian_wigner_origin, to_fock
from wigwitness.oracle import wigner_via_parity

from conftest import random_state

TWO_OVER_PI = 2 / math.pi
finite = dict(allow_nan=False, allow_infinity=False)
unit = st.floats(0.0, 1.0)


def test_loss_param_domain():
    with pytest.raises(DomainError):
        LossParam(1.2)
    assert LossParam.from_gamma_t(0).epsilon == 0
    assert LossParam.from_gamma_t(math.log(2)).epsilon == pytest.approx(0.5)


def test_compose_loss_examples():
    assert compose_loss(0, 0.37).epsilon == pytest.approx(0.37)
    assert compose_loss(0.5, 0.5).epsilon == pytest.approx(0.75)


@given(st.integers(0, 10_000), unit, unit)
def test_loss_composition_is_operational(seed, e1, e2):
    rho = random_state(np.random.default_rng(seed), 12, support=8)
    twice = apply_loss(apply_loss(rho, e1), e2)
    once = apply_loss(rho, compose_loss(e1, e2))
    assert np.abs(twice.mat - once.mat).max() <= 1e-10


@given(st.integers(0, 10_000), unit)
def test_energy_scales_with_transmissivity(seed, eps):
    rho = random_state(np.random.default_rng(seed), 12)
    assert mean_photon(apply_loss(rho, eps)) == pytest.approx((1 - eps) * mean_photon(rho), abs=1e-10)


@given(unit, st.integers(1, 12))
def test_kraus_completeness(eps, dim):
    total = sum(a.T @ a for a in loss_kraus_operators(eps, dim))
    assert np.allclose(total, np.eye(dim), atol=1e-12)


def test_loss_endpoints(rng):
    rho = random_state(rng, 6)
    assert np.allclose(apply_loss(rho, 0.0).mat, rho.mat)
    vac = apply_loss(rho, 1.0).mat
    assert vac[0, 0] == pytest.approx(1) and np.abs(vac).sum() == pytest.approx(1)


@given(st.integers(0, 8), unit)
def test_fock_loss_is_binomial(m, eps):
    out = apply_loss(fock_to_fock(m), eps)
    assert np.allclose(out.mat, np.diag(np.diag(out.mat)), atol=0)
    assert np.allclose(photon_distribution(out), binom.pmf(np.arange(m + 1), m, 1 - eps), atol=1e-12)
    assert np.allclose(loss_photon_distribution(np.eye(m + 1)[m], eps), photon_distribution(out), atol=1e-14)


@given(st.integers(0, 10_000), unit)
def test_lossy_parity_matches_kraus(seed, eps):
    rho = random_state(np.random.default_rng(seed), 10)
    assert lossy_parity(photon_distribution(rho), eps) == pytest.approx(
        parity_expectation(apply_loss(rho, eps)), abs=1e-12)


@given(st.floats(0.05, 0.95), st.complex_numbers(max_magnitude=1.0, **finite))
def test_kernel_is_normalized(eps, zp):
    total, _ = dblquad(lambda y, x: loss_kernel(eps, complex(x, y), zp), -8, 8, -8, 8, epsabs=1e-11)
    assert total == pytest.approx(1.0, abs=1e-7)


def test_kernel_domain():
    with pytest.raises(DomainError):
        loss_kernel(0.0, 0j, 0j)


def test_lossy_wigner_near_zero_loss():
    p = PssParams(0.3)
    z = 0.2 + 0.1j
    assert lossy_wigner(lambda u: pss_wigner(p, u), 1e-10, z) == pytest.approx(pss_wigner(p, z), abs=1e-8)


@pytest.mark.parametrize("eps", [0.1, 0.5, 0.8, 0.99])
def test_lossy_wigner_single_photon(eps):
    w = lossy_wigner(lambda u: pac_wigner(PacParams(0), u), eps)
    assert w == pytest.approx(TWO_OVER_PI * (2 * eps - 1), abs=1e-8)


def test_lossy_wigner_matches_oracle():
    p = PssParams(0.3)
    env = Envelope(0j, 0.75 * math.exp(0.3), 0.75 * math.exp(-0.3))
    got = lossy_wigner(lambda u: pss_wigner(p, u), 0.7, envelope=env)
    assert got == pytest.approx(wigner_via_parity(apply_loss(pss_to_fock(p), 0.7), 0), abs=1e-6)


def test_lossy_wigner_off_origin():
    p = PacParams(0.6)
    z = 0.3 - 0.2j
    got = lossy_wigner(lambda u: pac_wigner(p, u), 0.4, z)
    assert got == pytest.approx(wigner_via_parity(apply_loss(pac_to_fock(p), 0.4), z), abs=1e-6)


def test_lossy_wigner_endpoints():
    assert lossy_wigner(lambda u: 0.123, 0.0, 0.5) == 0.123
    assert lossy_wigner(lambda u: 0.0, 1.0, 0.5) == pytest.approx(TWO_OVER_PI * math.exp(-0.5))


def test_map_examples():
    rho = to_fock(PureGaussianParams(0.4, 0.2))
    assert np.allclose(apply_gaussian_map(rho, GaussianMapSpec.displacement(0)).mat, rho.mat)
    assert apply_gaussian_map(rho, GaussianMapSpec.identity()) is rho
    vac = fock_to_fock(0)
    assert mean_photon(apply_gaussian_map(vac, GaussianMapSpec.displacement(1.1 - 0.4j))) == pytest.approx(
        abs(1.1 - 0.4j) ** 2, abs=1e-10)


@given(st.integers(0, 10_000), st.complex_numbers(max_magnitude=1.0, **finite))
def test_squeezing_preserves_origin_value(seed, s):
    rho = random_state(np.random.default_rng(seed), 10, support=5)
    out = apply_gaussian_map(rho, GaussianMapSpec.squeezing(s))
    assert parity_expectation(out) == pytest.approx(parity_expectation(rho), abs=1e-9)


@given(st.complex_numbers(max_magnitude=1.0, **finite), st.floats(-0.8, 0.8), unit)
def test_map_moments_match_fock_route(beta, s, eps):
    p = PureGaussianParams(0.3 - 0.5j, 0.2 + 0.3j)
    g = GaussianMapSpec.then(GaussianMapSpec.displacement(beta), GaussianMapSpec.squeezing(s),
                             GaussianMapSpec.loss(eps))
    out = apply_gaussian_map(to_fock(p), g)
    mean, cov = gaussian_map_moments(*p.moments(), g)
    assert gaussian_mean_photon(mean, cov) == pytest.approx(mean_photon(out), abs=1e-9)
    assert gaussian_wigner_origin(mean, cov) == pytest.approx(TWO_OVER_PI * parity_expectation(out), abs=1e-9)


simple_maps = st.one_of(
    st.just(GaussianMapSpec.identity()),
    st.complex_numbers(max_magnitude=3, **finite).map(GaussianMapSpec.displacement),
    st.complex_numbers(max_magnitude=2, **finite).map(GaussianMapSpec.squeezing),
    unit.map(GaussianMapSpec.loss),
)
maps = st.recursive(simple_maps, lambda inner: st.lists(inner, min_size=1, max_size=3).map(
    lambda ms: GaussianMapSpec.then(*ms)), max_leaves=6)


@given(maps)
def test_map_grammar_round_trip(g):
    assert parse_map(str(g)) == g


@pytest.mark.parametrize("text", ["", "disp:", "sq:a", "loss:1.5", "then()", "rot:1", "then(id"])
def test_map_grammar_rejects(text):
    with pytest.raises(SpecError):
        parse_map(text)
