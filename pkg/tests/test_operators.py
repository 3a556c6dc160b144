import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nvbath.operators import (C13, N14, HyperfineTensor, SpinSpecies, as_operator, is_hermitian,
                              kron, local_frame, mhz, projector, spin_ops, spin_vector, to_mhz,
                              transition)


def test_mhz_round_trip():
    assert mhz(1.0) == pytest.approx(2 * np.pi)
    assert to_mhz(mhz(2.2)) == pytest.approx(2.2, rel=1e-15)
    np.testing.assert_allclose(to_mhz(mhz([0.5, 40.0])), [0.5, 40.0], rtol=1e-15)


def test_as_operator_rejects_non_square():
    with pytest.raises(ValueError):
        as_operator(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        as_operator(np.eye(2), dim=3)


def test_kron_order_and_dimension():
    a = transition(2, 0, 1)
    b = projector(3, 2)
    k = kron(a, b)
    assert k.shape == (6, 6)
    assert k[0 * 3 + 2, 1 * 3 + 2] == 1.0
    assert np.count_nonzero(k) == 1


@pytest.mark.parametrize("species", [C13, N14])
def test_spin_algebra(species):
    ix, iy, iz = spin_vector(species)
    s = species.spin
    np.testing.assert_allclose(ix @ iy - iy @ ix, 1j * iz, atol=1e-14)
    casimir = ix @ ix + iy @ iy + iz @ iz
    np.testing.assert_allclose(casimir, s * (s + 1) * np.eye(species.dim), atol=1e-14)
    for op in (ix, iy, iz):
        assert is_hermitian(op)


def test_spin_one_raising_elements():
    _, ip, im = spin_ops(N14)
    np.testing.assert_allclose(np.diag(ip, 1), [np.sqrt(2), np.sqrt(2)])
    np.testing.assert_allclose(im, ip.T)


def test_unsupported_spin():
    with pytest.raises(ValueError):
        SpinSpecies(1.5)


vectors = st.tuples(*[st.floats(-10, 10, allow_nan=False) for _ in range(3)]).filter(
    lambda v: np.linalg.norm(v) > 1e-6)


@given(vectors)
def test_local_frame_is_right_handed(b):
    frame = local_frame(b)
    np.testing.assert_allclose(frame @ frame.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(frame) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(frame[2], np.asarray(b) / np.linalg.norm(b), atol=1e-12)


def test_local_frame_pole_and_zero():
    frame = local_frame([0.0, 0.0, -2.0])
    np.testing.assert_allclose(frame[2], [0, 0, -1])
    assert np.linalg.det(frame) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        local_frame([0.0, 0.0, 0.0])


def test_hyperfine_components_diagonal_tensor():
    t = HyperfineTensor(np.diag([1.0, 1.0, 3.0]))
    assert t.longitudinal == pytest.approx(3.0)
    # isotropic transverse part: A_{-,-} vanishes, A_{+,-} = 2 a_perp
    assert abs(t.component("-", "-")) < 1e-14
    assert t.component("+", "-") == pytest.approx(2.0)
    assert t.component("Z", "Z") == pytest.approx(3.0)


def test_hyperfine_rejects_bad_frame():
    with pytest.raises(ValueError):
        HyperfineTensor(np.eye(3), frame=np.diag([1.0, 1.0, -1.0]))
