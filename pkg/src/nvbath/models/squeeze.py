"""Microwave-driven |0> <-> |+1> transition used to squeeze a nuclear ensemble.

The Overhauser field ``h`` shifts the ``|+1>`` level, so the steady
population ``P11(h) = W(h) / (gamma1 + 2 W(h))`` responds linearly to ``h``
near ``h = 0`` when the drive is detuned.  That slope sets the squeezing
time ``t_S = [P11'(0) N a^2]^-1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import DivergentSqueezingTime
from ..lindblad import LindbladModel, build_liouvillian, steady_state
from ..rates import dephasing_rate
from .two_level import C0, lorentzian


@dataclass(frozen=True)
class SqueezeModel:
    """Parameters in rad/us; ``gamma1`` is the effective ``|+1> -> |0>`` rate."""

    rabi: float
    detuning: float
    gamma1: float
    coupling: float
    n_nuclei: int = 1

    def __post_init__(self):
        if not self.gamma1 > 0:
            raise ValueError("gamma1 must be positive")
        if self.n_nuclei < 1:
            raise ValueError("n_nuclei must be at least 1")
        if not (np.isfinite(self.rabi) and np.isfinite(self.detuning)):
            raise ValueError("rabi and detuning must be finite")

    def electron_model(self, h: float = 0.0) -> LindbladModel:
        ham = np.array([[0.0, self.rabi / 2], [self.rabi / 2, self.detuning + h]], dtype=complex)
        return LindbladModel(ham, jumps=[(1, 0, self.gamma1)], labels=("0", "+1"))

    def pumping_rate(self, h=0.0):
        return 2 * np.pi * (self.rabi / 2) ** 2 * lorentzian(self.detuning + np.asarray(h), self.gamma1 / 2)

    def population(self, h=0.0):
        w = self.pumping_rate(h)
        return w / (self.gamma1 + 2 * w)

    def population_slope(self) -> float:
        """``dP11/dh`` at ``h = 0``, differentiated analytically."""
        w = self.pumping_rate(0.0)
        x = self.detuning
        dw = -2.0 * x / (x ** 2 + self.gamma1 ** 2 / 4) * w
        return float(self.gamma1 / (self.gamma1 + 2 * w) ** 2 * dw)


@dataclass(frozen=True)
class SqueezeCoefficients:
    p11: float
    p11_slope: float
    squeezing_time: float
    gamma_phi: float
    gamma_phi_analytic: float

    def dephasing_product(self, n_nuclei: int) -> float:
        """``N^2 Gamma_phi t_S`` with the numerically exact single-nucleus ``Gamma_phi``."""
        return n_nuclei ** 2 * self.gamma_phi * self.squeezing_time

    def dephasing_product_analytic(self, n_nuclei: int) -> float:
        return n_nuclei ** 2 * self.gamma_phi_analytic * self.squeezing_time


def squeeze_coefficients(model: SqueezeModel, c0: float = C0) -> SqueezeCoefficients:
    """Population, its slope, the squeezing time and the induced dephasing.

    Raises
    ------
    DivergentSqueezingTime
        If ``P11'(0) = 0`` (resonant drive) or the coupling vanishes.
    """
    slope = model.population_slope()
    if model.coupling == 0:
        raise DivergentSqueezingTime("coupling a = 0: no squeezing")
    if slope == 0:
        raise DivergentSqueezingTime("P11'(0) = 0 (symmetric point): no squeezing")
    t_s = 1.0 / (abs(slope) * model.n_nuclei * model.coupling ** 2)
    L = build_liouvillian(model.electron_model())
    P = steady_state(L)
    dk = np.diag([0.0, model.coupling])
    g_num = dephasing_rate(dk, L, P)
    p11 = float(model.population())
    w = float(model.pumping_rate())
    g_an = c0 * p11 / (model.gamma1 + 2 * w) * model.coupling ** 2
    return SqueezeCoefficients(p11, slope, t_s, g_num, g_an)
