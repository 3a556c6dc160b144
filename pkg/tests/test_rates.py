import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings

from conftest import dims, random_model, random_operator, seeds
from nvbath.exceptions import NegativeRate
from nvbath.lindblad import LindbladModel, build_liouvillian, steady_state, unvec, vec
from nvbath.rates import (MismatchTable, TransitionChannel, coherence_decay, dephasing_rate,
                          knight_field_average, mean_field_correction, rate_coherent, rate_golden,
                          transition_rate_exact, transition_rate_full)


def _diagonal_model(seed, dim):
    rng = np.random.default_rng(seed)
    jumps = [(i, f, rng.uniform(0.2, 1.5)) for i in range(dim) for f in range(dim)
             if i != f and rng.random() < 0.5]
    jumps += [(i, (i + 1) % dim, 0.5) for i in range(dim)]
    return LindbladModel(np.diag(rng.normal(size=dim) * 2), jumps=jumps,
                         pure_dephasing=rng.uniform(0, 0.5, size=dim))


def _offdiagonal(seed, dim):
    v = random_operator(seed, dim)
    np.fill_diagonal(v, 0.0)
    return v


def _correlation_integral(L, P, A, B, omega):
    """``int_0^T e^{i w t} Tr A e^{Lt}(B P) dt`` by the augmented exponential."""
    n = L.dim ** 2
    ev = L.eigvals()
    decaying = ev.real[ev.real < -1e-9 * np.abs(ev).max()]
    t_end = 30.0 / np.min(-decaying)
    aug = np.zeros((n + 1, n + 1), dtype=complex)
    aug[:n, :n] = L.matrix + 1j * omega * np.eye(n)
    aug[:n, n] = vec(B @ P)
    y = unvec(scipy.linalg.expm(aug * t_end)[:n, n], L.dim)
    return np.trace(A @ y)


@settings(max_examples=30)
@given(seeds, dims)
def test_golden_rule_is_exact_without_coherent_pathways(seed, dim):
    model = _diagonal_model(seed, dim)
    L = build_liouvillian(model)
    P = steady_state(L)
    V = _offdiagonal(seed, dim)
    omega = float(np.random.default_rng(seed).normal())
    exact = transition_rate_exact(TransitionChannel(V, omega, L, P))
    golden = rate_golden(V, MismatchTable.from_model(model), omega, P)
    assert golden == pytest.approx(exact, rel=1e-9, abs=1e-12)
    assert rate_coherent(V, np.zeros((dim, dim)), MismatchTable.from_model(model), omega, P) == 0.0


@settings(max_examples=20)
@given(seeds, dims)
def test_transition_rate_matches_time_integral(seed, dim):
    model = random_model(seed, dim)
    L = build_liouvillian(model)
    P = steady_state(L)
    F = random_operator(seed, dim)
    F = F - np.trace(F @ P) * np.eye(dim)  # keep the integrand decaying at any omega
    omega = 0.9
    exact = transition_rate_exact(TransitionChannel(F, omega, L, P))
    integral = 2 * _correlation_integral(L, P, F.conj().T, F, omega).real
    assert exact == pytest.approx(integral, rel=1e-7)


@settings(max_examples=20)
@given(seeds, dims)
def test_dephasing_rate_matches_time_integral(seed, dim):
    model = random_model(seed, dim)
    L = build_liouvillian(model)
    P = steady_state(L)
    rng = np.random.default_rng(seed)
    dk = np.diag(rng.normal(size=dim))
    centred = dk - np.trace(dk @ P) * np.eye(dim)
    integral = _correlation_integral(L, P, centred, centred, 0.0).real
    assert dephasing_rate(dk, L, P) == pytest.approx(integral, rel=1e-7)
    assert dephasing_rate(dk, L, P) >= 0


def test_dephasing_rate_vanishes_for_identity():
    model = random_model(2, 3)
    L = build_liouvillian(model)
    assert dephasing_rate(0.4 * np.eye(3), L, steady_state(L)) == 0.0


def test_dephasing_of_two_level_lorentzian():
    # undriven coherence: excited population zero, so no dephasing
    m = LindbladModel(np.diag([0.0, 1.0]), jumps=[(1, 0, 1.0)])
    L = build_liouvillian(m)
    assert dephasing_rate(np.diag([0.0, 1.0]), L, steady_state(L)) == 0.0


def test_mean_field_correction_accounts_for_subtraction():
    model = random_model(4, 3)
    P = steady_state(build_liouvillian(model))
    L_pm = build_liouvillian(model, np.diag([0.3, -0.1, 0.2]))
    P_pm = steady_state(L_pm)
    F = random_operator(2, 3)
    for omega in (0.7, -1.3):
        ch = TransitionChannel(F, omega, L_pm, P)
        diff = transition_rate_full(ch, P_pm) - transition_rate_exact(ch)
        assert diff == pytest.approx(mean_field_correction(ch, P_pm), rel=1e-9)


def test_coherence_decay_sums_half_rates():
    model = random_model(8, 3)
    L = build_liouvillian(model)
    P = steady_state(L)
    chans = [TransitionChannel(random_operator(k, 3), 0.5 * k + 0.3, L, P) for k in range(3)]
    rates = [transition_rate_exact(c) for c in chans]
    assert coherence_decay(chans, 0.2) == pytest.approx(0.2 + 0.5 * sum(rates))
    with pytest.raises(ValueError):
        coherence_decay(chans, -1.0)


def test_negative_rate_is_reported():
    model = random_model(6, 3)
    L = build_liouvillian(model)
    P = steady_state(L)
    with pytest.raises(NegativeRate):
        transition_rate_exact(TransitionChannel(random_operator(1, 3), 0.4, L, -P))


def test_mismatch_matrix_entries():
    table = MismatchTable([0.0, 2.0], [1.0, 0.0], [0.25, 0.0])
    z = table.z(0.5)
    assert z[1, 0] == pytest.approx(2.0 - 0.5 - 0.5j)
    assert z[0, 0] == pytest.approx(-0.5 - 1j + 0.25j)


def test_offdiagonal_inputs_required():
    model = _diagonal_model(0, 3)
    P = steady_state(build_liouvillian(model))
    with pytest.raises(ValueError):
        rate_golden(np.eye(3), MismatchTable.from_model(model), 0.0, P)


def test_knight_field_average():
    P = np.diag([0.75, 0.25])
    comps = [(np.diag([1.0, 0.0]), [0.0, 0.0, 1.0]), (np.diag([0.0, 1.0]), [1.0, 0.0, 0.0])]
    np.testing.assert_allclose(knight_field_average(comps, P, (0.0, 0.1, 0.0)), [0.25, -0.1, 0.75])
