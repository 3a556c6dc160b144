"""End-to-end CPT pipelines: 14N cooling and 13C noise suppression.

The 14N spin (``m0 = +1, 0, -1``) shifts the two-photon detuning by
``A_g m0``; the 13C ensemble adds ``h = a sum_n m_n``.  Flip rates follow
the Ey population of the numerically exact NV steady state at that shift.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .models.cpt import (C13Ensemble, CPTModel, c13_flip_factor, ey_population,
                         fluorescence_from_populations, n14_flip_factor)
from .nuclear import (binomial_weights, evolve_populations, moments, sector_generator,
                      sector_shifts, spin1_generator, steady_populations)

N14_START = np.full(3, 1.0 / 3.0)


class RateCache:
    """Memoised ``h -> factor * <Ey|P(h)|Ey> + offset`` for one NV model."""

    def __init__(self, model: CPTModel, factor: float, offset: float = 0.0):
        self.model = model
        self.factor = factor
        self.offset = offset
        self._pops = {}

    def population(self, h: float) -> float:
        h = float(h)
        if h not in self._pops:
            self._pops[h] = ey_population(self.model, h)
        return self._pops[h]

    def __call__(self, h: float) -> float:
        return self.factor * self.population(h) + self.offset


def n14_generator(model: CPTModel) -> np.ndarray:
    """Rate generator on ``m0 = +1, 0, -1``."""
    rate = RateCache(model, n14_flip_factor(model))
    return spin1_generator(model.a_g * np.array([1.0, 0.0, -1.0]), rate)


def n14_steady_p0(model: CPTModel) -> float:
    return float(steady_populations(n14_generator(model)).probabilities[1])


def n14_trace(model: CPTModel, times) -> np.ndarray:
    gen = n14_generator(model)
    return np.array([evolve_populations(gen, N14_START, t).probabilities[1] for t in times])


def n14_cooling_time(model: CPTModel) -> float:
    """Time for ``p(m0 = 0)`` to cover ``1 - 1/e`` of its way from 1/3 to the asymptote."""
    gen = n14_generator(model)
    p_inf = float(steady_populations(gen).probabilities[1])
    target = N14_START[1] + (1 - np.exp(-1)) * (p_inf - N14_START[1])
    if abs(p_inf - N14_START[1]) < 1e-12:
        return 0.0
    sign = np.sign(p_inf - N14_START[1])

    def f(t):
        return sign * (evolve_populations(gen, N14_START, t).probabilities[1] - target)

    rates = -np.linalg.eigvals(gen).real
    slowest = np.min(rates[rates > 1e-12 * rates.max()])
    hi = 1.0 / slowest
    while f(hi) < 0:
        hi *= 2
    return float(brentq(f, 0.0, hi, xtol=1e-10 * hi))


def c13_rates(model: CPTModel, ensemble: C13Ensemble, gamma_c: float) -> RateCache:
    """Single-spin flip rate (either direction) including ``gamma_c / 2`` depolarisation."""
    return RateCache(model, c13_flip_factor(model, ensemble.tensor), gamma_c / 2)


def c13_steady_weights(model: CPTModel, ensemble: C13Ensemble, gamma_c: float):
    """Exact stationary sector weights and the corresponding Overhauser shifts."""
    rate = c13_rates(model, ensemble, gamma_c)
    gen = sector_generator(ensemble.n, ensemble.a, rate, rate)
    return steady_populations(gen).probabilities, sector_shifts(ensemble.n, ensemble.a)


@dataclass(frozen=True)
class Suppression:
    variance: float
    sigma_th2: float
    mean: float

    @property
    def ratio(self) -> float:
        return self.variance / self.sigma_th2


def noise_suppression(model: CPTModel, ensemble: C13Ensemble, gamma_c: float) -> Suppression:
    weights, shifts = c13_steady_weights(model, ensemble, gamma_c)
    mean, var = moments(weights, shifts)
    return Suppression(var, ensemble.a ** 2 * ensemble.n / 4, mean)


@dataclass(frozen=True)
class FluorescenceCurves:
    omega_re: np.ndarray
    thermal: np.ndarray
    prepared: np.ndarray
    post_selected: np.ndarray
    conditioned: np.ndarray


def conditioned_weights(conditioning: CPTModel, weights, shifts, efficiency: float,
                        t_cond: float) -> np.ndarray:
    """Sector weights after keeping only runs with no photon in the conditioning window.

    Each configuration survives with probability
    ``exp(-efficiency * gamma * t_cond * <Ey|P|Ey>)`` evaluated with the
    conditioning model (the preparation field).
    """
    shifts = np.asarray(shifts, dtype=float)
    pops = np.array([ey_population(conditioning, h) for h in shifts])
    q = np.asarray(weights, dtype=float) * np.exp(-efficiency * conditioning.gamma * t_cond * pops)
    return q / q.sum()


def fluorescence_curves(readout: CPTModel, weights, shifts, omega_re, efficiency: float,
                        t_cond: float, plateau: float = None,
                        conditioned: np.ndarray = None) -> FluorescenceCurves:
    """Thermal, prepared and post-selected readout curves normalised to the plateau.

    ``readout`` carries the readout Rabi frequency; its Zeeman term is
    replaced by each ``omega_re``.  The plateau is evaluated at
    ``plateau`` (default ten times the largest ``|omega_re|``).
    ``post_selected`` applies the photon-count weight at the readout field
    itself; ``conditioned`` is the unconditional curve of the
    ``conditioned`` weights (see :func:`conditioned_weights`), or NaN when
    those are not given.
    """
    omega_re = np.asarray(omega_re, dtype=float)
    shifts = np.asarray(shifts, dtype=float)
    thermal_w = binomial_weights(shifts.size - 1)
    if plateau is None:
        plateau = 10 * np.max(np.abs(omega_re))

    def curves_at(field):
        m = readout.replace(zeeman=field)
        pops = np.array([ey_population(m, h) for h in shifts])
        th = fluorescence_from_populations(thermal_w, pops, readout.gamma, efficiency, t_cond)
        pr = fluorescence_from_populations(weights, pops, readout.gamma, efficiency, t_cond)
        co = np.nan if conditioned is None else float(np.asarray(conditioned) @ pops)
        return th.unconditional, pr.unconditional, pr.post_selected, co

    ref = np.array(curves_at(plateau))
    values = np.array([curves_at(w) for w in omega_re]) / ref
    return FluorescenceCurves(omega_re, *values.T)


def dip_width(omega, normalised) -> float:
    """Equivalent width ``int (1 - F) d omega / max(1 - F)`` of a normalised dip.

    Only meaningful for a curve that stays at or below its plateau.
    """
    depth = 1.0 - np.asarray(normalised, dtype=float)
    peak = depth.max()
    if peak <= 0:
        return 0.0
    return float(np.trapezoid(depth, omega) / peak)
