"""Nuclear transition and dephasing rates induced by a driven electron.

Every rate here is a second-order quantity obtained from one resolvent
application of an electron Liouvillian:

* ``transition_rate_exact``  -- ``-2 Re Tr F^+ (L + i w)^{-1} F P``
* ``dephasing_rate``         -- ``-Re Tr dK~ L^{-1} dK~ P`` (stationary mode projected out)
* ``rate_golden`` / ``rate_coherent`` -- first two orders of the expansion
  of the resolvent around its diagonal part.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import NegativeRate
from .lindblad import LindbladModel, Superoperator, apply_resolvent
from .operators import as_operator

RATE_CLAMP = 1e-10
ZERO_TOL = 1e-12


def _clamp(value: float, scale: float, what: str) -> float:
    """Zero out round-off negatives; anything larger is a set-up error."""
    if value >= 0.0:
        return float(value)
    if value >= -RATE_CLAMP * max(1.0, scale):
        return 0.0
    raise NegativeRate(f"{what} = {value:.3e} is negative beyond round-off (scale {scale:.3e})")


@dataclass(frozen=True)
class TransitionChannel:
    """One frequency component ``<p|V(t)|m> = F exp(-i w t)`` of a nuclear flip.

    ``liouvillian`` is the electron generator of the ``(p, m)`` block and
    ``steady`` the normalised electron steady state of the source block.
    """

    flip: np.ndarray
    omega: float
    liouvillian: Superoperator
    steady: np.ndarray

    def __post_init__(self):
        d = self.liouvillian.dim
        object.__setattr__(self, "flip", as_operator(self.flip, d))
        object.__setattr__(self, "steady", as_operator(self.steady, d))
        object.__setattr__(self, "omega", float(self.omega))


def _resolvent_contraction(ch: TransitionChannel, operand) -> tuple[complex, float]:
    y = apply_resolvent(ch.liouvillian, ch.omega, operand)
    terms = ch.flip.conj() * y
    return complex(terms.sum()), float(np.abs(terms).sum())


def transition_rate_exact(ch: TransitionChannel) -> float:
    """Transition rate ``W_{p<-m} = 2 Re int_0^inf e^{iwt} Tr F^+ e^{Lt} F P dt``."""
    if not np.any(ch.flip):
        return 0.0
    value, scale = _resolvent_contraction(ch, ch.flip @ ch.steady)
    return _clamp(-2.0 * value.real, scale, "transition rate")


def transition_rate_full(ch: TransitionChannel, block_state) -> float:
    """Transition rate with the mean-field subtraction kept.

    ``block_state`` is the steady state ``P_{p,m}`` of ``ch.liouvillian``.
    The two pieces ``F P`` and ``<F> P_{p,m}`` are resolved separately, so a
    stationary overlap at ``w = 0`` raises :class:`SingularResolvent` just
    as the individual terms do.
    """
    block_state = as_operator(block_state, ch.liouvillian.dim)
    mean = np.trace(ch.flip @ ch.steady)
    direct, scale = _resolvent_contraction(ch, ch.flip @ ch.steady)
    if mean == 0:
        return _clamp(-2.0 * direct.real, scale, "transition rate")
    sub, _ = _resolvent_contraction(ch, mean * block_state)
    return float(-2.0 * (direct - sub).real)


def mean_field_correction(ch: TransitionChannel, block_state) -> float:
    """Closed form ``(2/w) Im <F^+>_{p,m} <F>_{m,m}`` of the subtracted term."""
    block_state = as_operator(block_state, ch.liouvillian.dim)
    mean = np.trace(ch.flip @ ch.steady)
    back = np.trace(ch.flip.conj().T @ block_state)
    return float(2.0 / ch.omega * (back * mean).imag)


def dephasing_rate(delta_k, L: Superoperator, P) -> float:
    """Pure dephasing ``Gamma^phi = Re int_0^inf Tr dK~ e^{Lt} dK~ P dt``.

    ``dK~ = dK - Tr(dK P)`` is centred on the steady state, so the operand
    has no stationary component and the projected ``w = 0`` resolvent is
    used.
    """
    d = L.dim
    dk = as_operator(delta_k, d)
    P = as_operator(P, d)
    centred = dk - np.trace(dk @ P) * np.eye(d)
    # centring a multiple of the identity leaves only round-off
    if np.max(np.abs(centred)) <= ZERO_TOL * np.max(np.abs(dk)):
        return 0.0
    y = apply_resolvent(L, 0.0, centred @ P)
    terms = centred.T * y
    value = -terms.sum().real
    return _clamp(value, float(np.abs(terms).sum()), "dephasing rate")


def coherence_decay(channels: Iterable[TransitionChannel], gamma_phi: float) -> float:
    """Decay rate of a nuclear coherence: ``Gamma^phi + (1/2) sum W``."""
    if gamma_phi < 0:
        raise ValueError("gamma_phi must be non-negative")
    return float(gamma_phi + 0.5 * sum(transition_rate_exact(ch) for ch in channels))


@dataclass(frozen=True)
class MismatchTable:
    """Level energies and decay rates entering the complex mismatch ``z_{k,j}``."""

    energies: np.ndarray
    total_decay: np.ndarray
    self_rates: np.ndarray

    def __post_init__(self):
        for name in ("energies", "total_decay", "self_rates"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if np.any(self.total_decay < 0):
            raise ValueError("total decay rates must be non-negative")

    @classmethod
    def from_model(cls, model: LindbladModel) -> "MismatchTable":
        if model.operators:
            raise ValueError("mismatch table needs level-to-level channels only")
        return cls(np.real(np.diag(model.hamiltonian)), model.total_decay(), model.self_rates())

    def z(self, omega: float) -> np.ndarray:
        """Matrix ``z[k, j] = e_k - e_j - w - i (G_k + G_j - 2 g_kk d_kj) / 2``."""
        e, g = self.energies, self.total_decay
        z = e[:, None] - e[None, :] - omega - 0.5j * (g[:, None] + g[None, :])
        z[np.diag_indices_from(z)] += 1j * self.self_rates
        return z


def _strictly_offdiagonal(op, name):
    if np.any(np.abs(np.diag(op)) > 0):
        raise ValueError(f"{name} must be strictly off-diagonal")


def rate_golden(V, table: MismatchTable, omega: float, P) -> float:
    """Golden-rule part ``2 sum Im[V*_{f,i'} V_{f,i} P_{i,i'} / z_{f,i'}]``."""
    V = as_operator(V)
    P = as_operator(P, V.shape[0])
    _strictly_offdiagonal(V, "V")
    z = table.z(omega)
    return float(2.0 * np.sum(V.conj() / z * (V @ P)).imag)


def rate_coherent(V, H_nd, table: MismatchTable, omega: float, P) -> float:
    """Coherent part: first-order correction from the off-diagonal Hamiltonian."""
    V = as_operator(V)
    d = V.shape[0]
    H_nd = as_operator(H_nd, d)
    P = as_operator(P, d)
    _strictly_offdiagonal(V, "V")
    _strictly_offdiagonal(H_nd, "H_nd")
    z = table.z(omega)
    b = (V @ P) / z
    c = V.conj() / z
    return float(2.0 * (np.sum(c * (b @ H_nd)) - np.sum(c * (H_nd @ b))).imag)


def knight_field_average(components: Sequence, P, gamma_n_b=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Average Knight field ``Tr(F P) - gamma_N B`` for ``F = sum_k O_k a_k``."""
    P = as_operator(P)
    field = -np.asarray(gamma_n_b, dtype=float)
    for op, vector in components:
        field = field + np.real(np.trace(as_operator(op) @ P)) * np.asarray(vector, dtype=float)
    return field
