import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from usc_sec import bogoliubov as bg
from usc_sec import fock, models
from usc_sec import sec_rates as sr
from usc_sec.errors import (
    DephasingWarning,
    DomainError,
    IndependentTransitionWarning,
    OrderingError,
    VariantError,
)
from usc_sec.models import ModelParams, Variant

# Rates in units of kappa0 at g = 0.1, frozen from dense numpy diagonalization
# of the two circuit Hamiltonians at 30 x 30 photons (tests/oracles.py), using
# (w/wz)|<G|i(a-a†)|j>|² for A and the B-circuit operator with the
# (1 + 4g² wx/wz), 2g wx/wz weights.
FROZEN = {
    (1.0, "A"): (0.45024814048949, 0.54975185951050),
    (1.0, "B"): (0.30201072757020, 0.81958927242980),
    (0.8, "A"): (0.42899793266174, 0.08300206733825),
    (0.8, "B"): (0.36869388574915, 0.23578611425085),
}


def modes(wz, g, variant="A"):
    return bg.hopfield_diagonalize(ModelParams(wz, g, Variant(variant)))


@pytest.mark.parametrize("key", sorted(FROZEN))
def test_closed_forms_match_frozen_oracle(key):
    wz, variant = key
    m = modes(wz, 0.1, variant)
    if variant == "A":
        r = sr.rates_circuit_a(m, kappa0=wz ** 3)
    else:
        r = sr.rates_circuit_b(m, kappa0=wz ** 3)
    assert np.allclose(r.kappa, FROZEN[key], rtol=1e-10)
    assert np.allclose(sr.rates_general(m, kappa0=wz ** 3).kappa, FROZEN[key], rtol=1e-10)


@given(st.floats(0.5, 1.5), st.floats(1e-3, 0.3))
def test_transformed_b_forms_agree(wz, g):
    ma, mb = modes(wz, g, "A"), modes(wz, g, "B")
    ref = sr.rates_circuit_b(mb).kappa
    assert np.allclose(sr.rates_circuit_b(ma, use_transformed=True).kappa, ref, rtol=1e-8)
    assert np.allclose(sr.rates_general(ma, variant=Variant.CIRCUIT_B).kappa, ref, rtol=1e-8)


def test_weak_coupling_half_rates():
    g = 0.01
    ma, mb = modes(1.0, g, "A"), modes(1.0, g, "B")
    for r in (sr.rates_circuit_a(ma), sr.rates_general(ma), sr.rates_standard(ma),
              sr.rates_standard(mb)):
        assert np.allclose(r.kappa / 1e-3, 0.5, rtol=0.011)
    # circuit B keeps a first-order matter admixture: 0.5 (1 -+ g)(1 -+ 2g)²
    kb = sr.rates_circuit_b(mb).kappa / 1e-3
    first_order = 0.5 * np.array([(1 - g) * (1 - 2 * g) ** 2, (1 + g) * (1 + 2 * g) ** 2])
    assert np.allclose(kb, first_order, rtol=1e-3)


def test_standard_rate_is_photon_weight():
    m = modes(1.0, 0.1)
    assert np.allclose(sr.rates_standard(m, 1.0).kappa, np.abs(m.w) ** 2)


def test_variant_checks():
    with pytest.raises(VariantError):
        sr.rates_circuit_a(modes(1.0, 0.1, "B"))
    with pytest.raises(VariantError):
        sr.rates_circuit_b(modes(1.0, 0.1, "A"))
    with pytest.raises(VariantError):
        sr.rates_general(modes(1.0, 0.1, "B"), variant=Variant.CIRCUIT_A)


def test_near_degenerate_warns():
    m = modes(1.0, 0.0)
    with pytest.warns(IndependentTransitionWarning):
        sr.rates_general(m)


@pytest.mark.parametrize("wz", [0.7, 1.0, 1.3])
def test_eigensystem_rates_match_closed_forms(wz):
    p = ModelParams(wz, 0.1)
    es = fock.eig_hermitian(models.build_hamiltonian(p, (25, 25)), 6)
    f = sr.make_flavor(sr.CouplingKind.CIRCUIT_A, p)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DephasingWarning)
        r = sr.eigensystem_rates(f, es, from_ground_only=True)
    ref = sr.rates_circuit_a(bg.hopfield_diagonalize(p))
    got = [r.rate(0, 1), r.rate(0, 2)]
    assert np.allclose(got, ref.kappa, rtol=1e-8)


def test_two_quadrature_forms_agree_on_eigenstates():
    # circuit A: (w/wz)^3 |<a+a†>|² == (w/wz) |<i(a-a†)>|² for every transition
    p = ModelParams(0.9, 0.1)
    es = fock.eig_hermitian(models.build_hamiltonian(p, (30, 30)), 10)
    plus = sr.eigensystem_rates(sr.make_flavor(sr.CouplingKind.XPLUS, p), es)
    minus = sr.eigensystem_rates(sr.make_flavor(sr.CouplingKind.XMINUS, p), es)
    big = plus.kappa > 1e-12
    assert np.allclose(plus.kappa[big], minus.kappa[big], rtol=1e-6)


def test_circuit_b_flavor_on_fock_states():
    p = ModelParams(1.0, 0.1, Variant.CIRCUIT_B)
    es = fock.eig_hermitian(models.build_hamiltonian(p, (25, 25)), 3)
    f = sr.make_flavor(sr.CouplingKind.CIRCUIT_B, p)
    r = [sr.transition_rate(f, es, 0, k) for k in (1, 2)]
    assert np.allclose(np.array(r) / p.kappa_lc0, FROZEN[(1.0, "B")], rtol=1e-8)


def test_transition_rate_ordering():
    p = ModelParams(1.0, 0.1)
    es = fock.eig_hermitian(models.build_hamiltonian(p, (6, 6)), 3)
    f = sr.make_flavor(sr.CouplingKind.XPLUS, p)
    with pytest.raises(OrderingError):
        sr.transition_rate(f, es, 2, 1)
    with pytest.raises(OrderingError):
        sr.standard_sec_rate(es, 1, 1, 1.0)


def test_bare_rate_domain_and_zeta():
    p = ModelParams(1.0, 0.1)
    f = sr.make_flavor(sr.CouplingKind.CIRCUIT_A, p, zeta_scale=0.5)
    assert f.bare_rate(2.0) == pytest.approx(p.kappa_lc0 * 2.0 / 2.0)
    with pytest.raises(DomainError):
        f.bare_rate(0.0)


def test_fabry_perot_profile_exponent():
    p = ModelParams(1.0, 0.0)
    f = sr.make_flavor(sr.CouplingKind.FABRY_PEROT, p)
    assert f.bare_rate(2.0) == pytest.approx(p.kappa_lc0 / 8)


def test_dephasing_warning_for_diagonal_elements():
    # a+a† plus a constant offset has diagonal matrix elements
    p = ModelParams(1.0, 0.1)
    es = fock.eig_hermitian(models.build_hamiltonian(p, (6, 6)), 4)
    a, _ = fock.two_mode_ops((6, 6))
    X = a + a.dag + fock.two_mode_identity((6, 6))
    with pytest.warns(DephasingWarning):
        sr.lowering_part(X, es)


def test_independent_transition_check():
    tight = sr.TransitionRates([0, 0], [1, 2], [1.0, 1.001], [0.01, 0.01])
    with pytest.warns(IndependentTransitionWarning):
        assert not sr.check_independent_transitions(tight)
    loose = sr.TransitionRates([0, 0], [1, 2], [1.0, 1.2], [0.001, 0.001])
    assert sr.check_independent_transitions(loose)
    ladder = sr.TransitionRates([0, 1], [1, 2], [1.0, 1.0], [0.01, 0.02])
    assert sr.check_independent_transitions(ladder)


def test_transition_rates_validation():
    with pytest.raises(ValueError):
        sr.TransitionRates([0], [1], [1.0], [-1.0])
    with pytest.raises(OrderingError):
        sr.TransitionRates([1], [0], [1.0], [1.0])
