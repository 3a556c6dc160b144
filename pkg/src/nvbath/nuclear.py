"""Nuclear population dynamics and the steady Overhauser-field distribution.

Populations evolve under a classical master equation whose generator
``G[p, m] = W_{p<-m}`` has zero column sums.  For uniformly coupled
spin-1/2 nuclei the flip rates depend on a configuration only through the
Overhauser shift ``h``, so the dynamics lump exactly onto collective
sectors labelled by the number of up spins.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import brentq
from scipy.special import comb

from .exceptions import DegenerateSteadyState, FactorNonpositive, NoFixedPoint

KERNEL_GAP = 1e-10


@dataclass(frozen=True)
class PopulationState:
    probabilities: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1:
            raise ValueError("probabilities must be a vector")
        object.__setattr__(self, "probabilities", p)

    @property
    def total(self) -> float:
        return float(self.probabilities.sum())


def build_rate_matrix(n_states: int, rates: Mapping) -> np.ndarray:
    """Generator from a map ``{(m, p): W_{p<-m}}``.

    Raises
    ------
    ValueError
        On a negative rate or an index outside ``0..n_states-1``.
    """
    gen = np.zeros((n_states, n_states))
    for (m, p), w in rates.items():
        if w < 0:
            raise ValueError(f"negative rate W[{p}<-{m}] = {w}")
        if not (0 <= m < n_states and 0 <= p < n_states):
            raise ValueError(f"rate ({m} -> {p}) references a state outside 0..{n_states - 1}")
        if m == p:
            continue
        gen[p, m] += w
    gen[np.diag_indices(n_states)] = -gen.sum(axis=0)
    return gen


def chain_generator(up: Sequence[float], down: Sequence[float]) -> np.ndarray:
    """Birth-death generator: ``up[k]`` is the rate ``k -> k+1``, ``down[k]`` is ``k -> k-1``."""
    up = np.asarray(up, dtype=float)
    down = np.asarray(down, dtype=float)
    n = up.size
    if down.size != n:
        raise ValueError("up and down must have the same length")
    rates = {}
    for k in range(n):
        if k + 1 < n:
            rates[(k, k + 1)] = up[k]
        if k > 0:
            rates[(k, k - 1)] = down[k]
    return build_rate_matrix(n, rates)


def sector_shifts(n: int, a: float) -> np.ndarray:
    """Overhauser shift ``h_k = a (k - n/2)`` of the sector with ``k`` up spins."""
    return a * (np.arange(n + 1) - n / 2)


def sector_generator(n: int, a: float, w_up: Callable, w_down: Callable,
                     gamma_c: float = 0.0) -> np.ndarray:
    """Collective-sector generator for ``n`` uniformly coupled spin-1/2 nuclei.

    ``w_up(h)``/``w_down(h)`` are single-spin flip rates; ``gamma_c`` adds
    symmetric depolarisation at ``gamma_c / 2`` in each direction.
    """
    if n < 1:
        raise ValueError("need at least one nucleus")
    if gamma_c < 0:
        raise ValueError("gamma_c must be non-negative")
    h = sector_shifts(n, a)
    k = np.arange(n + 1)
    up = (n - k) * (np.array([w_up(x) for x in h]) + gamma_c / 2)
    down = k * (np.array([w_down(x) for x in h]) + gamma_c / 2)
    return chain_generator(up, down)


def product_configurations(n: int) -> np.ndarray:
    """All ``2^n`` configurations as rows of ``m_n = +-1/2`` (``+1/2`` first)."""
    return np.array(list(product((0.5, -0.5), repeat=n)))


def product_generator(couplings: Sequence[float], w_up: Callable, w_down: Callable,
                      gamma_c: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Full product-basis generator for spin-1/2 nuclei with couplings ``a_n``.

    Returns ``(generator, shifts)`` with ``shifts[c] = sum_n a_n m_n``.
    """
    a = np.asarray(couplings, dtype=float)
    n = a.size
    if n > 12:
        raise ValueError("product basis is limited to 12 nuclei")
    configs = product_configurations(n)
    shifts = configs @ a
    index = {tuple(c): i for i, c in enumerate(configs)}
    rates = {}
    for i, c in enumerate(configs):
        up_rate = w_up(shifts[i]) + gamma_c / 2
        down_rate = w_down(shifts[i]) + gamma_c / 2
        for spin in range(n):
            flipped = c.copy()
            flipped[spin] = -c[spin]
            rates[(i, index[tuple(flipped)])] = up_rate if c[spin] < 0 else down_rate
    return build_rate_matrix(len(configs), rates), shifts


def spin1_generator(shifts: Sequence[float], rate: Callable) -> np.ndarray:
    """Spin-1 chain ``m = +1, 0, -1`` with ``W_{m+-1<-m} = rate(h_m)`` in both directions."""
    w = np.array([rate(x) for x in shifts])
    # index 0 is m=+1, so "up" in index means m -> m-1
    return chain_generator(up=w, down=w)


def evolve_populations(gen, p0, t: float) -> PopulationState:
    """``exp(G t) p0`` by scaling-and-squaring Pade(13)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    p0 = np.asarray(getattr(p0, "probabilities", p0), dtype=float)
    if abs(p0.sum() - 1) > 1e-10:
        raise ValueError("initial populations must sum to 1")
    if t == 0:
        return PopulationState(p0.copy(), 0.0)
    return PopulationState(scipy.linalg.expm(np.asarray(gen) * t) @ p0, float(t))


def steady_populations(gen) -> PopulationState:
    """Normalised stationary vector of ``gen``.

    Raises
    ------
    DegenerateSteadyState
        If the kernel of the generator is not one-dimensional.
    """
    gen = np.asarray(gen, dtype=float)
    n = gen.shape[0]
    if n == 1:
        return PopulationState(np.ones(1))
    _, s, vh = np.linalg.svd(gen)
    if s[0] == 0.0 or s[-2] < KERNEL_GAP * s[0]:
        raise DegenerateSteadyState(
            f"rate generator kernel is not one-dimensional ({s[-2]:.3e} vs {s[0]:.3e})")
    v = vh[-1]
    v = v / v.sum()
    v[np.abs(v) < 1e-15] = 0.0
    return PopulationState(np.clip(v, 0.0, None) / np.clip(v, 0.0, None).sum())


def coherence_trace(gamma_total: float, p0, t):
    """``p_mn(t) = p_mn(0) exp(-Gamma t)``."""
    if gamma_total < 0:
        raise ValueError("gamma_total must be non-negative")
    return p0 * np.exp(-gamma_total * np.asarray(t))


def moments(weights, values) -> tuple[float, float]:
    """Mean and variance of a discrete distribution."""
    w = np.asarray(weights, dtype=float)
    x = np.asarray(values, dtype=float)
    w = w / w.sum()
    mean = float(w @ x)
    return mean, float(w @ (x - mean) ** 2)


def total_variation(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return 0.5 * float(np.abs(p / p.sum() - q / q.sum()).sum())


@dataclass(frozen=True)
class NoiseDistribution:
    h: np.ndarray
    density: np.ndarray
    h_star: float
    roots: tuple
    sigma2: float
    sigma_th2: float
    h_max: float
    feedback_slope: float

    @property
    def variance(self) -> float:
        mean = np.trapezoid(self.h * self.density, self.h)
        return float(np.trapezoid((self.h - mean) ** 2 * self.density, self.h))

    @property
    def mean(self) -> float:
        return float(np.trapezoid(self.h * self.density, self.h))


class _FeedbackModel:
    """Evaluates the ingredients of the steady distribution with memoisation."""

    def __init__(self, w_up, w_down, n, a):
        self.w_up, self.w_down = w_up, w_down
        self.n, self.a = n, a
        self.h_max = a * n / 2
        self._cache = {}

    def rates(self, h):
        h = float(h)
        if h not in self._cache:
            up, down = float(self.w_up(h)), float(self.w_down(h))
            if up < 0 or down < 0 or up + down <= 0:
                raise ValueError(f"flip rates must be non-negative with positive sum (h = {h})")
            self._cache[h] = (up, down)
        return self._cache[h]

    def total(self, h):
        up, down = self.rates(h)
        return up + down

    def target(self, h):
        """``H(h) = N a (1/2)(W_up - W_down)/(W_up + W_down)``."""
        up, down = self.rates(h)
        return self.n * self.a * 0.5 * (up - down) / (up + down)

    def slope(self, h, step):
        lo = max(h - step, -self.h_max)
        hi = min(h + step, self.h_max)
        return (self.target(hi) - self.target(lo)) / (hi - lo)


def _refine_grid(h: np.ndarray, total: np.ndarray, factor: int) -> np.ndarray:
    """Insert ``factor - 1`` points per interval around sharp minima of ``total``."""
    if factor <= 1 or h.size < 3:
        return h
    logw = np.log(total)
    curv = np.zeros_like(logw)
    curv[1:-1] = logw[2:] - 2 * logw[1:-1] + logw[:-2]
    spread = np.ptp(logw)
    dips = [i for i in range(1, h.size - 1)
            if logw[i] <= logw[i - 1] and logw[i] <= logw[i + 1] and curv[i] > 0.05 * max(spread, 1e-300)]
    extra = []
    for i in dips:
        lo, hi = max(i - 4, 0), min(i + 4, h.size - 1)
        for j in range(lo, hi):
            extra.append(np.linspace(h[j], h[j + 1], factor + 1)[1:-1])
    if not extra:
        return h
    return np.unique(np.concatenate([h, *extra]))


def noise_distribution(w_up: Callable, w_down: Callable, n: int, a: float,
                       points: int = 512, refine: int = 4) -> NoiseDistribution:
    """Steady distribution of the Overhauser field under NV-induced feedback.

    ``p(h) ~ exp(-(h - h*)^2 / 2 sigma^2) / ([W_up + W_down][1 - h H(h)/h_max^2])``
    on ``[-h_max, h_max]``, with ``H(h*) = h*`` and
    ``sigma^2 = sigma_th^2 (1 - h*^2/h_max^2) / (1 - H'(h*))``.

    Raises
    ------
    NoFixedPoint
        If ``H(h) - h`` has no root in range.
    FactorNonpositive
        If ``1 - h H(h)/h_max^2 <= 0`` at an interior grid point.
    """
    if n < 1 or a <= 0:
        raise ValueError("need n >= 1 and a > 0")
    fb = _FeedbackModel(w_up, w_down, n, a)
    h_max = fb.h_max
    h = np.linspace(-h_max, h_max, points)
    total = np.array([fb.total(x) for x in h])
    h = _refine_grid(h, total, refine)
    total = np.array([fb.total(x) for x in h])
    target = np.array([fb.target(x) for x in h])

    g = target - h
    roots = []
    for i in range(h.size - 1):
        if g[i] == 0:
            roots.append(float(h[i]))
        elif g[i] * g[i + 1] < 0:
            roots.append(brentq(lambda x: fb.target(x) - x, h[i], h[i + 1], xtol=1e-14 * h_max))
    if g[-1] == 0:
        roots.append(float(h[-1]))
    if not roots:
        raise NoFixedPoint("H(h) = h has no solution in [-h_max, h_max]")
    step = 1e-3 * (h[1] - h[0]) if h.size > 1 else 1e-6 * h_max
    slopes = [fb.slope(r, step) for r in roots]
    stable = [(abs(r), r, s) for r, s in zip(roots, slopes) if s < 1]
    if not stable:
        raise NoFixedPoint("no stable fixed point (all have H'(h*) >= 1)")
    _, h_star, slope = min(stable)

    sigma_th2 = a ** 2 * n / 4
    sigma2 = sigma_th2 * (1 - h_star ** 2 / h_max ** 2) / (1 - slope)
    factor = 1 - h * target / h_max ** 2
    interior = slice(1, -1)
    if np.any(factor[interior] <= 0):
        bad = h[interior][factor[interior] <= 0][0]
        raise FactorNonpositive(f"1 - h H(h)/h_max^2 <= 0 at h = {bad:.6g}")
    with np.errstate(divide="ignore"):
        gauss = np.exp(-(h - h_star) ** 2 / (2 * sigma2)) if sigma2 > 0 else (h == h_star).astype(float)
        dens = np.where(factor > 0, gauss / (total * np.where(factor > 0, factor, 1.0)), 0.0)
    dens = dens / np.trapezoid(dens, h)
    return NoiseDistribution(h, dens, float(h_star), tuple(roots), float(sigma2),
                             float(sigma_th2), float(h_max), float(slope))


def noise_density_at(dist: NoiseDistribution, w_up: Callable, w_down: Callable, h) -> np.ndarray:
    """Unnormalised closed-form density evaluated at arbitrary ``h`` (e.g. the sector lattice)."""
    h = np.atleast_1d(np.asarray(h, dtype=float))
    up = np.array([w_up(x) for x in h])
    down = np.array([w_down(x) for x in h])
    total = up + down
    n_a = 2 * dist.h_max
    target = n_a * 0.5 * (up - down) / total
    factor = 1 - h * target / dist.h_max ** 2
    gauss = np.exp(-(h - dist.h_star) ** 2 / (2 * dist.sigma2))
    return np.where(factor > 0, gauss / (total * np.where(factor > 0, factor, 1.0)), 0.0)


@dataclass(frozen=True)
class OracleComparison:
    h: np.ndarray
    analytic: np.ndarray
    brute_force: np.ndarray
    tv: float


def compare_with_brute_force(w_up: Callable, w_down: Callable, n: int, a: float,
                             dist: NoiseDistribution = None) -> OracleComparison:
    """Closed-form ``p(h)`` on the sector lattice vs the exact stationary sector weights.

    ``w_up``/``w_down`` are total single-spin rates (depolarisation included).
    """
    if dist is None:
        dist = noise_distribution(w_up, w_down, n, a)
    h = sector_shifts(n, a)
    brute = steady_populations(sector_generator(n, a, w_up, w_down)).probabilities
    analytic = noise_density_at(dist, w_up, w_down, h)
    analytic = analytic / analytic.sum()
    return OracleComparison(h, analytic, brute, total_variation(analytic, brute))


def binomial_weights(n: int) -> np.ndarray:
    """Infinite-temperature sector weights ``C(n, k) / 2^n``."""
    return comb(n, np.arange(n + 1)) / 2.0 ** n
