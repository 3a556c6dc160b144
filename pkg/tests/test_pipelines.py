import numpy as np
import pytest

from nvbath.models.cpt import C13Ensemble, togan2011
from nvbath.nuclear import binomial_weights, sector_shifts
from nvbath.operators import mhz
from nvbath.pipelines import (RateCache, c13_steady_weights, conditioned_weights, dip_width,
                              fluorescence_curves, n14_cooling_time, n14_steady_p0, n14_trace,
                              noise_suppression)

PRESET = togan2011()
N14_MODEL = PRESET.model.replace(zeeman=mhz(0.01))


def test_rate_cache_memoises():
    cache = RateCache(PRESET.model, 2.0, 0.5)
    v = cache(0.3)
    assert cache(0.3) == v
    assert v == pytest.approx(2.0 * cache.population(0.3) + 0.5)
    assert len(cache._pops) == 1


def test_n14_cooling_time_regression():
    tau = n14_cooling_time(N14_MODEL)
    assert tau == pytest.approx(189.50418427353569, rel=1e-6)
    p_inf = n14_steady_p0(N14_MODEL)
    trace = n14_trace(N14_MODEL, [0.0, tau, 50 * tau])
    assert trace[0] == pytest.approx(1 / 3)
    assert trace[1] == pytest.approx(1 / 3 + (1 - np.exp(-1)) * (p_inf - 1 / 3), rel=1e-8)
    assert trace[2] == pytest.approx(p_inf, rel=1e-8)


def test_a2_channel_limits_n14_polarisation():
    strong = N14_MODEL.replace(omega_a=mhz(32.0))
    assert n14_steady_p0(strong) < n14_steady_p0(strong.replace(include_a2=False))


def test_small_ensemble_suppression():
    ens = C13Ensemble(4, PRESET.zeeman_prep / 2, mhz(0.5), PRESET.ensemble.gamma_c)
    prep = PRESET.model.replace(zeeman=PRESET.zeeman_prep)
    supp = noise_suppression(prep, ens, ens.gamma_c)
    assert supp.ratio < 1.0
    weights, shifts = c13_steady_weights(prep, ens, ens.gamma_c)
    # the dark configuration h = -omega_e collects most of the weight
    assert shifts[np.argmax(weights)] == pytest.approx(-PRESET.zeeman_prep)


def test_conditioned_weights_favour_dark_configurations():
    prep = PRESET.model.replace(zeeman=PRESET.zeeman_prep)
    shifts = sector_shifts(4, PRESET.zeeman_prep / 2)
    w = binomial_weights(4)
    q = conditioned_weights(prep, w, shifts, PRESET.efficiency, PRESET.t_cond)
    assert q.sum() == pytest.approx(1.0)
    dark = np.argmin(np.abs(shifts + PRESET.zeeman_prep))
    assert q[dark] > w[dark]
    np.testing.assert_allclose(conditioned_weights(prep, w, shifts, 0.0, PRESET.t_cond), w)


def test_fluorescence_curves_normalised_at_plateau():
    shifts = sector_shifts(2, mhz(0.09))
    w = binomial_weights(2)
    grid = np.array([-1.0, 0.0, 1.0])
    readout = PRESET.model.replace(omega_a=PRESET.readout_rabi[0])
    c = fluorescence_curves(readout, w, shifts, grid, PRESET.efficiency, PRESET.t_cond,
                            plateau=1e3)
    far = fluorescence_curves(readout, w, shifts, np.array([1e3]), PRESET.efficiency,
                              PRESET.t_cond, plateau=1e3)
    assert far.thermal[0] == pytest.approx(1.0)
    assert far.post_selected[0] == pytest.approx(1.0)
    assert np.all(np.isnan(c.conditioned))
    np.testing.assert_allclose(c.thermal, c.prepared)


def test_dip_width_of_lorentzian():
    x = np.linspace(-400, 400, 200001)
    curve = 1 - 0.5 / (1 + x ** 2)
    # equivalent width of a unit-half-width Lorentzian is pi
    assert dip_width(x, curve) == pytest.approx(np.pi, rel=1e-2)
    assert dip_width(x, np.ones_like(x)) == 0.0
