import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from usc_sec import fock, kernels, lindblad as lb, models
from usc_sec import sec_rates as sr
from usc_sec.errors import (
    DomainError,
    IntegrationError,
    InvalidRateError,
    NonUniqueSteadyStateError,
    ShapeError,
)
from usc_sec.models import ModelParams, Variant

from oracles import balance_solve, birth_death_populations

K0 = 1e-3


def eigensystem(g=0.1, wz=1.0, variant="A", levels=10, dims=(20, 20)):
    p = ModelParams(wz, g, Variant(variant), kappa0_ref=K0)
    return p, fock.eig_hermitian(models.build_hamiltonian(p, dims), levels)


def secular(g=0.1, temperature=0.0, levels=10, variant="A"):
    p, es = eigensystem(g, levels=levels, variant=variant)
    rates = sr.eigensystem_rates(sr.make_flavor(sr.CouplingKind.XPLUS, p), es)
    return p, es, rates, lb.build_generator(es, rates, temperature)


@pytest.mark.parametrize("w,T,expected", [(1.0, 0.0, 0.0), (1.0, 1.0, 1 / (np.e - 1)),
                                          (2.0, 0.5, 1 / (np.exp(4) - 1))])
def test_thermal_occupation(w, T, expected):
    assert lb.thermal_occupation(w, T) == pytest.approx(expected, rel=1e-14)


def test_thermal_occupation_domain():
    with pytest.raises(DomainError):
        lb.thermal_occupation(1.0, -1.0)
    with pytest.raises(DomainError):
        lb.thermal_occupation(0.0, 1.0)


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        lb.DensityMatrix(np.diag([0.5, 0.4]))
    with pytest.raises(ValueError):
        lb.DensityMatrix(np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        lb.DensityMatrix(np.diag([1.2, -0.2]))
    rho = lb.DensityMatrix.pure([1, 1j])
    assert rho.dim == 2 and rho.fidelity_pure(np.array([1, 1j]) / np.sqrt(2)) == pytest.approx(1)


def test_zero_temperature_has_no_up_channels():
    _, _, _, gen = secular()
    assert np.all(gen.up == 0)
    assert np.all(gen.down >= 0)


@pytest.mark.parametrize("T", [0.2, 1.0])
def test_detailed_balance_per_channel(T):
    _, _, _, gen = secular(temperature=T)
    live = gen.down > 0
    assert np.allclose(gen.up[live] / gen.down[live], np.exp(-gen.omega[live] / T), rtol=1e-12)


def test_negative_rate_rejected():
    with pytest.raises(InvalidRateError):
        lb.LindbladGenerator([0.0, 1.0], [0], [1], [1.0], [-1.0], [0.0])


def test_rates_from_other_eigensystem_rejected():
    _, es, rates, _ = secular()
    _, other = eigensystem(g=0.05)
    with pytest.raises(ShapeError):
        lb.build_generator(other, rates)


def test_rhs_matches_superoperator():
    _, _, _, gen = secular(temperature=0.3, levels=6)
    rng = np.random.default_rng(1)
    M = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = M @ M.conj().T
    rho /= np.trace(rho)
    assert np.allclose(gen.rhs(rho).ravel(), gen.superoperator() @ rho.ravel(), atol=1e-15)


def test_single_transition_pretrace_equals_secular():
    # two-level truncation: one transition, no cross terms
    p, es = eigensystem(levels=2)
    f = sr.make_flavor(sr.CouplingKind.XPLUS, p)
    for T in (0.0, 0.4):
        sec = lb.build_generator(es, sr.eigensystem_rates(f, es), T).superoperator()
        pre = lb.build_generator_pretrace(es, f.coupling_operator(es.dims), f.bare_rate, T)
        assert np.allclose(pre.matrix, sec, atol=1e-15)


@pytest.mark.parametrize("T", [0.0, 0.3])
def test_pretrace_and_secular_steady_states_agree(T):
    p, es = eigensystem(levels=8)
    f = sr.make_flavor(sr.CouplingKind.XPLUS, p)
    sec = lb.steady_state(lb.build_generator(es, sr.eigensystem_rates(f, es), T))
    pre = lb.steady_state(lb.build_generator_pretrace(es, f.coupling_operator(es.dims),
                                                      f.bare_rate, T))
    assert lb.trace_distance(sec, pre) < 1e-4


def test_pretrace_is_trace_preserving_and_hermitian():
    p, es = eigensystem(levels=6)
    f = sr.make_flavor(sr.CouplingKind.XPLUS, p)
    S = lb.build_generator_pretrace(es, f.coupling_operator(es.dims), f.bare_rate, 0.5).matrix
    tr = np.eye(6).ravel()
    assert np.allclose(tr @ S, 0, atol=1e-15)
    rng = np.random.default_rng(3)
    M = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = M + M.conj().T
    out = (S @ rho.ravel()).reshape(6, 6)
    assert np.allclose(out, out.conj().T, atol=1e-15)


@pytest.mark.parametrize("variant", ["A", "B"])
def test_zero_temperature_steady_state_is_ground(variant):
    p, es = eigensystem(variant=variant)
    kind = sr.CouplingKind.CIRCUIT_A if variant == "A" else sr.CouplingKind.CIRCUIT_B
    rates = sr.eigensystem_rates(sr.make_flavor(kind, p), es)
    ss = lb.steady_state(lb.build_generator(es, rates, 0.0))
    assert ss.fidelity_pure(np.eye(len(es))[0]) > 1 - 1e-6


def test_standard_coupling_excites_ground_state():
    p, es = eigensystem()
    ss = lb.steady_state(lb.build_generator_standard(es, p.kappa_lc0, p.omega_z))
    assert 1 - ss.fidelity_pure(np.eye(len(es))[0]) > 1e-3


def test_secular_superoperator_matches_channel_sum():
    _, _, _, gen = secular(temperature=0.3, levels=5)
    S = lb._hamiltonian_super(gen.frequencies).astype(complex)
    for m, v, _, down, up in gen.channels:
        sig = np.zeros((5, 5))
        sig[m, v] = 1.0
        S += lb._lindblad_super(sig, down) + lb._lindblad_super(sig.T, up)
    assert np.allclose(gen.superoperator(), S, atol=1e-16)


def test_bare_cavity_thermal_state():
    T = 0.5
    gen = lb.bare_cavity_generator(1.0, K0, n_levels=30, temperature=T)
    ss = lb.steady_state(gen)
    n = np.diag(np.arange(30))
    assert ss.expectation(n).real == pytest.approx(lb.thermal_occupation(1.0, T), abs=1e-8)


def test_bare_cavity_chain_against_birth_death():
    T = 0.5
    gen = lb.bare_cavity_generator(1.0, K0, n_levels=8, temperature=T)
    nth = lb.thermal_occupation(1.0, T)
    k = np.arange(1, 8)
    ref = birth_death_populations(K0 * k * (nth + 1), K0 * k * nth)
    assert np.allclose(lb.steady_state(gen).populations(), ref, atol=1e-12)


def test_interacting_thermal_state_against_balance_oracle():
    _, _, rates, gen = secular(temperature=0.4, levels=8)
    nth = lb.thermal_occupation(rates.omega, 0.4)
    trans = []
    for (mu, nu, _, k), n in zip(rates, nth):
        trans.append((nu, mu, k * (n + 1)))
        trans.append((mu, nu, k * n))
    ref = balance_solve(8, trans)
    ss = lb.steady_state(gen)
    assert np.allclose(ss.populations(), ref, atol=1e-9)
    off = ss.data - np.diag(np.diag(ss.data))
    assert np.max(np.abs(off)) < 1e-12


def test_disconnected_graph_non_unique():
    gen = lb.LindbladGenerator([0.0, 1.0, 2.5], [0], [1], [1.0], [0.1], [0.0])
    with pytest.raises(NonUniqueSteadyStateError) as info:
        lb.steady_state(gen)
    assert len(info.value.basis) == 2


def test_steady_state_dimension_cap():
    _, _, _, gen = secular(levels=10)
    with pytest.raises(DomainError):
        lb.steady_state(gen, max_dim=5)


@pytest.mark.parametrize("backend", ["numba", "numpy"])
def test_bare_cavity_decay(backend):
    kernels.set_backend(backend)
    try:
        gen = lb.bare_cavity_generator(1.0, K0, n_levels=6)
        traj = lb.evolve(gen, lb.DensityMatrix.basis(6, 1), 5 / K0, 2.0, stride=50)
        n = np.diag(np.arange(6))
        assert np.allclose(traj.expectation(n).real, np.exp(-K0 * traj.times), atol=1e-9)
    finally:
        kernels.set_backend("numba")


def test_upper_polariton_decay_rate_from_table():
    _, es, rates, gen = secular(levels=6)
    k_u = rates.rate(0, 2)
    traj = lb.evolve(gen, lb.DensityMatrix.basis(6, 2), 3 / k_u, 0.05 / gen.max_rate(), stride=20)
    p = traj.populations()[:, 2]
    fit = np.polyfit(traj.times, np.log(p), 1)
    assert abs(-fit[0] - k_u) / k_u < 1e-3


def test_free_rotation_without_channels():
    gen = lb.LindbladGenerator([0.0, 0.7], [], [], [], [], [])
    rho0 = lb.DensityMatrix(np.array([[0.5, 0.5], [0.5, 0.5]]))
    traj = lb.evolve(gen, rho0, 10.0, 0.01)
    assert np.allclose(traj.populations(), 0.5)
    assert traj.states[-1][0, 1] == pytest.approx(0.5 * np.exp(0.7j * 10.0), abs=1e-12)


def test_stability_gate():
    gen = lb.bare_cavity_generator(1.0, 0.01, n_levels=5)
    with pytest.raises(DomainError):
        lb.evolve(gen, lb.DensityMatrix.basis(5, 1), 10.0, 5.0)


def test_trace_drift_reported():
    # transfer without matching outflow breaks trace preservation
    class Leaky(lb.LindbladGenerator):
        def decay_rates(self):
            return np.zeros(self.dim)

    gen = Leaky([0.0, 1.0], [0], [1], [1.0], [0.01], [0.0])
    with pytest.raises(IntegrationError):
        lb.evolve(gen, lb.DensityMatrix.basis(2, 1), 100.0, 0.5)


def test_dense_generator_evolution_matches_expm():
    from scipy.linalg import expm

    p, es = eigensystem(levels=4)
    gen = lb.build_generator_standard(es, p.kappa_lc0, p.omega_z, 0.2)
    rho0 = lb.DensityMatrix.basis(4, 1)
    traj = lb.evolve(gen, rho0, 20.0, 0.02)
    ref = (expm(gen.matrix * 20.0) @ rho0.data.ravel()).reshape(4, 4)
    assert np.allclose(traj.states[-1], ref, atol=1e-9)


@given(st.floats(0.0, 2.0), st.integers(0, 5))
def test_evolution_keeps_trace_and_positivity(T, start):
    _, _, _, gen = secular(temperature=T, levels=6)
    traj = lb.evolve(gen, lb.DensityMatrix.basis(6, start), 500.0, 1.0, stride=100)
    for rho in traj.states:
        assert abs(np.trace(rho) - 1) < 1e-8
        assert np.linalg.eigvalsh(rho).min() > -1e-8
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-10


def test_trajectory_csv():
    gen = lb.bare_cavity_generator(1.0, K0, n_levels=3)
    traj = lb.evolve(gen, lb.DensityMatrix.basis(3, 1), 10.0, 1.0, stride=5)
    text = traj.to_csv({"n": np.diag([0.0, 1.0, 2.0])})
    lines = text.splitlines()
    assert lines[0] == "t,p0,p1,p2,n"
    assert len(lines) == 1 + 3
