"""Cyclic two-level optical transition |g> <-> |e> coupled to one nucleus.

The electron Knight field is ``F = |g><g| a_g + |e><e| a_e``; the nuclear
Zeeman term is folded in as ``-gamma_N B`` times the electron identity.
Nuclear rates are evaluated in the frame whose ``e_z`` is the averaged
field ``Tr(F P) - gamma_N B``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..lindblad import (LindbladModel, build_liouvillian, build_liouvillian_total,
                        steady_state)
from ..operators import C13, SpinSpecies, kron, local_frame, spin_vector
from ..rates import (TransitionChannel, dephasing_rate, knight_field_average,
                     transition_rate_exact)

G, E = 0, 1

#: Dimensionless prefactor of the closed-form dephasing/relaxation rates,
#: frozen from :func:`calibrate_c0` at its default reference point.
C0 = 1.0


def lorentzian(x, width):
    """``delta^(width)(x) = (width / pi) / (x^2 + width^2)``."""
    return (width / np.pi) / (np.asarray(x) ** 2 + width ** 2)


@dataclass(frozen=True)
class TwoLevelCycleModel:
    """Driven cyclic transition with state-dependent Knight fields (all rad/us)."""

    rabi: float
    detuning: float
    gamma1: float
    gamma_phi: float = 0.0
    a_g: tuple = (0.0, 0.0, 0.0)
    a_e: tuple = (0.0, 0.0, 0.0)
    gamma_n_b: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.gamma1 < 0 or self.gamma_phi < 0:
            raise ValueError("rates must be non-negative")
        for name in ("a_g", "a_e", "gamma_n_b"):
            vec3 = np.asarray(getattr(self, name), dtype=float)
            if vec3.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")
            object.__setattr__(self, name, vec3)

    def electron_hamiltonian(self) -> np.ndarray:
        return np.array([[0.0, self.rabi / 2], [self.rabi / 2, self.detuning]], dtype=complex)

    def electron_model(self) -> LindbladModel:
        return LindbladModel(self.electron_hamiltonian(), jumps=[(E, G, self.gamma1)],
                             pure_dephasing={E: self.gamma_phi}, labels=("g", "e"))

    def pumping_rate(self) -> float:
        """``W = 2 pi (Omega/2)^2 delta^((gamma1 + gamma_phi)/2)(Delta)``."""
        width = 0.5 * (self.gamma1 + self.gamma_phi)
        return float(2 * np.pi * (self.rabi / 2) ** 2 * lorentzian(self.detuning, width))

    def excited_population(self) -> float:
        w = self.pumping_rate()
        return w / (self.gamma1 + 2 * w)

    def knight_components(self):
        return [(np.diag([1.0, 0.0]), self.a_g), (np.diag([0.0, 1.0]), self.a_e)]

    def knight_operator(self, direction) -> np.ndarray:
        """Electron operator ``(F - gamma_N B) . u`` for a (possibly complex) direction ``u``."""
        u = np.asarray(direction)
        op = np.diag([self.a_g @ u, self.a_e @ u]).astype(complex) - (self.gamma_n_b @ u) * np.eye(2)
        scale = max(np.abs(self.a_g).max(), np.abs(self.a_e).max(), np.abs(self.gamma_n_b).max())
        # cancellations between the Knight and Zeeman terms leave round-off only
        op[np.abs(op) <= 1e-12 * scale] = 0.0
        return op


def build_two_level(model: TwoLevelCycleModel, nucleus: SpinSpecies = C13) -> LindbladModel:
    """Electron (x) nucleus model with hyperfine coupling ``F . I``."""
    dn = nucleus.dim
    ix, iy, iz = spin_vector(nucleus)
    h = kron(model.electron_hamiltonian(), np.eye(dn))
    for axis, op in enumerate((ix, iy, iz)):
        unit = np.zeros(3)
        unit[axis] = 1.0
        h = h + kron(model.knight_operator(unit), op)
    lower = np.zeros((2, 2), dtype=complex)
    lower[G, E] = 1.0
    ops = [(kron(lower, np.eye(dn)), model.gamma1)]
    if model.gamma_phi > 0:
        ops.append((kron(np.diag([0.0, 1.0]), np.eye(dn)), model.gamma_phi))
    return LindbladModel(h, operators=ops)


def averaged_field(model: TwoLevelCycleModel) -> np.ndarray:
    """``F_bar = Tr(F P) - gamma_N B`` with ``P`` the bare electron steady state."""
    P = steady_state(build_liouvillian(model.electron_model()))
    return knight_field_average(model.knight_components(), P, model.gamma_n_b)


def with_averaged_field(model: TwoLevelCycleModel, target) -> TwoLevelCycleModel:
    """Same model with ``gamma_N B`` chosen so that ``F_bar`` equals ``target``."""
    raw = averaged_field(replace(model, gamma_n_b=(0.0, 0.0, 0.0)))
    return replace(model, gamma_n_b=raw - np.asarray(target, dtype=float))


@dataclass(frozen=True)
class TwoLevelRates:
    gamma_phi: float
    gamma_1: float
    gamma_phi_analytic: float
    gamma_1_analytic: float
    axis: np.ndarray
    w_up: float
    w_down: float

    @property
    def t1(self) -> float:
        return np.inf if self.gamma_1 == 0 else 1.0 / (2 * self.gamma_1)

    @property
    def t2(self) -> float:
        total = self.gamma_phi + self.gamma_1
        return np.inf if total == 0 else 1.0 / total


def analytic_rates(model: TwoLevelCycleModel, axis, c0: float = C0):
    """Closed-form ``(Gamma_phi, Gamma_1)`` valid for ``|a_g|, |a_e| << gamma1``."""
    w = model.pumping_rate()
    pe = model.excited_population()
    diff = model.a_g - model.a_e
    along = diff @ axis
    perp2 = diff @ diff - along ** 2
    prefactor = c0 * pe / (model.gamma1 + 2 * w)
    return prefactor * along ** 2, 0.5 * prefactor * max(perp2, 0.0)


def two_level_rates(model: TwoLevelCycleModel, c0: float = C0) -> TwoLevelRates:
    """Nuclear (spin-1/2) dephasing and relaxation rates, numeric and closed form.

    The numeric values come from the resolvent of the electron generator in
    each nuclear block; ``K_m = m F_z`` with ``F_z`` the Knight field along
    the quantisation axis, and the flip blocks include the ``dK``
    anticommutator so that the nuclear Larmor precession is kept.
    """
    base = model.electron_model()
    fbar = averaged_field(model)
    frame = local_frame(fbar)
    ex, ey, ez = frame
    fz = model.knight_operator(ez)
    f_minus = model.knight_operator(ex - 1j * ey)
    f_plus = model.knight_operator(ex + 1j * ey)

    def block_steady(m):
        return steady_state(build_liouvillian(base, m * fz))

    # coherence |up><down|: (K_up + K_down)/2 = 0, dK = F_z
    L_coh = build_liouvillian(base)
    gamma_phi = dephasing_rate(fz, L_coh, steady_state(L_coh))
    up = TransitionChannel(0.5 * f_minus, 0.0, build_liouvillian_total(base, fz), block_steady(-0.5))
    down = TransitionChannel(0.5 * f_plus, 0.0, build_liouvillian_total(base, -fz), block_steady(0.5))
    w_up = transition_rate_exact(up)
    w_down = transition_rate_exact(down)
    g_phi_an, g1_an = analytic_rates(model, ez, c0)
    return TwoLevelRates(gamma_phi, 0.5 * (w_up + w_down), g_phi_an, g1_an, ez, w_up, w_down)


def calibrate_c0(rabi: float = 1.0, detuning: float = 0.0, gamma1: float = 1.0,
                 gamma_phi: float = 0.0, coupling: float = 1e-4) -> float:
    """Extract ``c0`` by matching the numeric dephasing rate at one reference point."""
    model = TwoLevelCycleModel(rabi, detuning, gamma1, gamma_phi,
                               a_g=(0.0, 0.0, coupling), a_e=(0.0, 0.0, -coupling),
                               gamma_n_b=(0.0, 0.0, -coupling))
    rates = two_level_rates(model, c0=1.0)
    return rates.gamma_phi / rates.gamma_phi_analytic
