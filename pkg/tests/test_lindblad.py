import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import invariants as inv
from conftest import dims, random_density, random_model, random_operator, seeds
from nvbath.exceptions import DegenerateSteadyState, SingularResolvent
from nvbath.lindblad import (LindbladModel, anticommutator_super, apply_resolvent,
                             build_liouvillian, build_liouvillian_total, commutator_super,
                             dissipator_super, propagate, steady_state, unvec, vec)

# omega is either exactly 0 (projected inverse) or bounded away from the
# stationary pole; the near-singular band is covered by the raise test
omegas = st.one_of(st.just(0.0),
                   st.floats(min_value=0.05, max_value=5.0).flatmap(lambda w: st.sampled_from([w, -w])))
times = st.floats(min_value=0.01, max_value=20.0)


def test_vec_is_column_stacking():
    x = np.arange(4.0).reshape(2, 2)
    np.testing.assert_array_equal(vec(x), [0.0, 2.0, 1.0, 3.0])
    np.testing.assert_array_equal(unvec(vec(x), 2), x)


def test_superoperators_match_matrix_products():
    rng = np.random.default_rng(1)
    a, x = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    np.testing.assert_allclose(commutator_super(a) @ vec(x), vec(-1j * (a @ x - x @ a)))
    np.testing.assert_allclose(anticommutator_super(a) @ vec(x), vec(a @ x + x @ a))
    d = dissipator_super(a, 0.7) @ vec(x)
    expected = 0.7 * (a @ x @ a.conj().T - 0.5 * (a.conj().T @ a @ x + x @ a.conj().T @ a))
    np.testing.assert_allclose(d, vec(expected))


def test_model_validation():
    with pytest.raises(ValueError):
        LindbladModel(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        LindbladModel(np.eye(2), jumps=[(0, 2, 1.0)])
    with pytest.raises(ValueError):
        LindbladModel(np.eye(2), jumps=[(0, 1, -1.0)])
    with pytest.raises(ValueError):
        LindbladModel(np.eye(2), pure_dephasing=[-1.0, 0.0])


def test_driven_two_level_steady_state():
    # resonant drive, decay gamma: rho_ee = (Omega^2/4) / (Delta^2 + gamma^2/4 + Omega^2/2)
    omega, gamma = 1.3, 0.8
    m = LindbladModel(np.array([[0, omega / 2], [omega / 2, 0]]), jumps=[(1, 0, gamma)])
    P = steady_state(build_liouvillian(m))
    expected = (omega ** 2 / 4) / (gamma ** 2 / 4 + omega ** 2 / 2)
    assert P[1, 1].real == pytest.approx(expected, rel=1e-12)
    assert np.trace(P) == pytest.approx(1.0)


def test_degenerate_steady_state():
    m = LindbladModel(np.diag([0.0, 1.0, 2.0]), jumps=[(1, 0, 1.0)])
    with pytest.raises(DegenerateSteadyState):
        steady_state(build_liouvillian(m))


def test_resolvent_rejects_stationary_overlap():
    m = random_model(3, 3)
    L = build_liouvillian(m)
    with pytest.raises(SingularResolvent):
        apply_resolvent(L, 0.0, np.eye(3))


def test_resolvent_decay_of_coherence():
    # |e><g| decays at gamma/2: (L) Y = X gives Y = -X / (gamma/2 + i delta)
    gamma, delta = 2.0, 0.5
    m = LindbladModel(np.diag([0.0, delta]), jumps=[(1, 0, gamma)])
    x = np.array([[0, 0], [1, 0]], dtype=complex)
    y = apply_resolvent(build_liouvillian(m), 0.0, x)
    assert y[1, 0] == pytest.approx(-1.0 / (gamma / 2 + 1j * delta))


def test_total_liouvillian_adds_anticommutator():
    m = random_model(5, 3)
    dk = np.diag([0.1, -0.2, 0.3])
    diff = build_liouvillian_total(m, dk).matrix - build_liouvillian(m).matrix
    np.testing.assert_allclose(diff, -0.5j * anticommutator_super(dk))


def test_propagate_reaches_steady_state():
    m = random_model(11, 3)
    L = build_liouvillian(m)
    rho = propagate(L, random_density(2, 3), 200.0)
    np.testing.assert_allclose(rho, steady_state(L), atol=1e-9)
    with pytest.raises(ValueError):
        propagate(L, rho, -1.0)


# --- randomized engine invariants (well over 200 cases in total) ------------

@settings(max_examples=60)
@given(seeds, dims, times)
def test_trace_preservation(seed, dim, t):
    model = random_model(seed, dim)
    assert inv.trace_error(model, random_density(seed, dim), t) <= inv.TRACE_TOL


@settings(max_examples=50)
@given(seeds, dims, times)
def test_positivity_preserved(seed, dim, t):
    model = random_model(seed, dim)
    assert inv.min_eigenvalue_after(model, random_density(seed, dim), t) >= -1e-10


@settings(max_examples=50)
@given(seeds, dims)
def test_dissipativity(seed, dim):
    assert inv.max_real_eigenvalue(random_model(seed, dim)) <= 1e-10


@settings(max_examples=60)
@given(seeds, dims)
def test_steady_state_residual_and_positivity(seed, dim):
    model = random_model(seed, dim)
    assert inv.steady_residual(model) <= inv.STEADY_TOL
    P = steady_state(build_liouvillian(model))
    np.testing.assert_allclose(P, P.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(P).min() >= -1e-12


@settings(max_examples=60)
@given(seeds, dims, omegas)
def test_resolvent_residual(seed, dim, omega):
    model = random_model(seed, dim)
    assert inv.resolvent_residual(model, omega, random_operator(seed, dim)) <= inv.RESOLVENT_TOL


@settings(max_examples=40)
@given(seeds, dims, omegas)
def test_integral_matches_algebraic_resolvent(seed, dim, omega):
    model = random_model(seed, dim)
    assert inv.integral_vs_algebraic(model, omega, random_operator(seed, dim)) <= inv.INTEGRAL_TOL
