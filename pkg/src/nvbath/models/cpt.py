"""Ten-level NV model of the coherent-population-trapping (CPT) experiment.

Levels, in index order::

    0   |0>     ground m_s = 0
    1   |b>     bright combination (|+1> - |-1>)/sqrt(2)
    2   |d>     dark combination   (|+1> + |-1>)/sqrt(2)
    3   |Ey>    4 |Ex>    5 |E1>    6 |E2>    7 |A1>    8 |A2>
    9   |S>     metastable singlet

The laser phase only rotates the bright/dark pair and drops out of every
observable, so it is fixed to zero.  ``Ex``, ``E1`` and ``E2`` are not
driven; they are carried with decay channels so that the level diagram
stays complete and the steady state unique.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..exceptions import NumericalError
from ..lindblad import LindbladModel, build_liouvillian, steady_state
from ..operators import HyperfineTensor, mhz

LEVELS = ("0", "b", "d", "Ey", "Ex", "E1", "E2", "A1", "A2", "S")
G0, B, D, EY, EX, E1, E2, A1, A2, S = range(10)
EXCITED = (EY, EX, E1, E2, A1, A2)

GAMMA_RADIATIVE = 1.0 / 0.012  # 1/(12 ns) in 1/us
POPULATION_ROUNDOFF = 1e-12


@dataclass(frozen=True)
class CPTModel:
    """Parameters of the CPT level scheme (rad/us for energies, 1/us for rates).

    Parameters
    ----------
    omega_a, omega_e : float
        Rabi frequencies of the ``|+-1> -> A1`` and ``|0> -> Ey`` lasers.
    delta_a2 : float
        ``eps_A2 - eps_A1``; detuning of the off-resonant ``A2`` excitation.
    zeeman : float
        Ground-state Zeeman splitting ``omega_e``.
    gamma, gamma_s1, gamma_s2, gamma_s, gamma_ce, gamma_phi : float
        Radiative rate, ``A1 -> S``, ``A2 -> S``, ``S -> 0``, ``Ey -> +-1``,
        and pure dephasing of each excited triplet level.
    a_g, a_e : float
        14N contact hyperfine constants in the ground and excited states.
    d_gs : float
        Ground-state zero-field splitting.
    e_a1, e_e12 : float
        Lab-frame energies of ``A1`` and of ``E1``/``E2`` relative to ``Ey``.
    gamma_e12 : float, optional
        Total decay of ``E1``/``E2``; defaults to ``gamma + gamma_s1``.
    include_a2 : bool
        Switch the ``A2`` drive off to isolate its contribution.
    """

    omega_a: float
    omega_e: float
    delta_a2: float
    zeeman: float
    gamma: float
    gamma_s1: float
    gamma_s2: float
    gamma_s: float
    gamma_ce: float
    gamma_phi: float = 0.0
    a_g: float = 0.0
    a_e: float = 0.0
    d_gs: float = mhz(2870.0)
    e_a1: float = mhz(5200.0)
    e_e12: float = mhz(-3910.0)
    gamma_e12: float = None
    include_a2: bool = True

    def __post_init__(self):
        rates = ("gamma", "gamma_s1", "gamma_s2", "gamma_s", "gamma_ce", "gamma_phi")
        for name in rates:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.gamma_e12 is None:
            object.__setattr__(self, "gamma_e12", self.gamma + self.gamma_s1)
        elif self.gamma_e12 < 0:
            raise ValueError("gamma_e12 must be non-negative")

    def replace(self, **changes) -> "CPTModel":
        return replace(self, **changes)

    def total_decay(self, level: int) -> float:
        """``Gamma_f`` excluding pure dephasing."""
        return {A1: self.gamma + self.gamma_s1, A2: self.gamma + self.gamma_s2,
                E1: self.gamma_e12, E2: self.gamma_e12,
                EY: self.gamma + 2 * self.gamma_ce, EX: self.gamma + 2 * self.gamma_ce}[level]

    def lab_energy(self, level: int) -> float:
        """Excited-state energy relative to ``Ey`` in the laboratory frame."""
        return {EY: 0.0, EX: 0.0, E1: self.e_e12, E2: self.e_e12,
                A1: self.e_a1, A2: self.e_a1 + self.delta_a2}[level]


def ground_sz() -> np.ndarray:
    """``S_z`` of the ground triplet in the ``{0, b, d}`` sub-basis."""
    sz = np.zeros((10, 10), dtype=complex)
    sz[B, D] = sz[D, B] = 1.0
    return sz


def cpt_hamiltonian(model: CPTModel, h: float = 0.0) -> np.ndarray:
    """Rotating-frame Hamiltonian with two-photon detuning ``omega_e + h``."""
    # lower triangle plus diagonal; the upper triangle follows by Hermiticity
    low = np.zeros((10, 10), dtype=complex)
    low[D, B] = model.zeeman + h
    c = model.omega_a / np.sqrt(2)
    low[A1, B] = c
    if model.include_a2:
        low[A2, D] = 1j * c
    low[EY, G0] = model.omega_e / 2
    ham = low + low.conj().T
    ham[A2, A2] = model.delta_a2
    return ham


def build_cpt(model: CPTModel, h: float = 0.0) -> LindbladModel:
    """Ten-level Lindblad model at Overhauser shift ``h``."""
    g, gce = model.gamma, model.gamma_ce
    jumps = [
        (A1, B, g / 2), (A1, D, g / 2), (A2, B, g / 2), (A2, D, g / 2),
        (EY, G0, g), (EY, B, gce), (EY, D, gce),
        (EX, G0, g), (EX, B, gce), (EX, D, gce),
        (A1, S, model.gamma_s1), (A2, S, model.gamma_s2), (S, G0, model.gamma_s),
    ]
    # E1/E2 share the A1 branching: half radiative to the +-1 pair, rest via S
    g12 = model.gamma_e12
    rad = min(g, g12)
    for lvl in (E1, E2):
        jumps += [(lvl, B, rad / 2), (lvl, D, rad / 2), (lvl, S, g12 - rad)]
    deph = {lvl: model.gamma_phi for lvl in EXCITED}
    return LindbladModel(cpt_hamiltonian(model, h), jumps=jumps, pure_dephasing=deph, labels=LEVELS)


def steady_cpt(model: CPTModel, h: float = 0.0) -> np.ndarray:
    return steady_state(build_liouvillian(build_cpt(model, h)))


def ey_population(model: CPTModel, h: float = 0.0) -> float:
    """Numerically exact ``<Ey|P(h)|Ey>``; round-off below zero is clipped."""
    value = float(steady_cpt(model, h)[EY, EY].real)
    if value < 0:
        if value < -POPULATION_ROUNDOFF:
            raise NumericalError(f"negative Ey population {value:.3e}")
        value = 0.0
    return value


@dataclass(frozen=True)
class CPTDerived:
    """Closed-form rates and steady-state parameters of the CPT scheme."""

    w_e: float
    w_a: float
    w_a2: float
    eta1: float
    eta2: float
    d0: float
    delta0_sq: float
    gamma: float
    gamma_s1: float
    gamma_ce: float
    chi_g: float
    chi: dict = field(default_factory=dict)

    @property
    def floor(self) -> float:
        """Second-order population at exact two-photon resonance."""
        return self.w_a2 / (2 * self.eta1 * (self.gamma + self.gamma_s1))


def cpt_derived(model: CPTModel) -> CPTDerived:
    g, gce, gs1, gphi = model.gamma, model.gamma_ce, model.gamma_s1, model.gamma_phi
    if gce <= 0 or gs1 <= 0 or model.gamma_s <= 0:
        raise ValueError("closed forms need positive gamma_ce, gamma_s1 and gamma_s")
    w_e = model.omega_e ** 2 / (2 * gce + g + gphi)
    w_a = model.omega_a ** 2 / (g + gs1 + gphi)
    w_a2 = 0.0
    if model.include_a2:
        w_a2 = 0.5 * model.omega_a ** 2 * (g + model.gamma_s2 + gphi) / model.delta_a2 ** 2
    eta1 = gce / gs1
    eta2 = model.gamma_s / (model.gamma_s + gce)
    ge = g + 2 * gce
    d0 = 1.0 / (2 / eta2 + 2 * eta1 * (g + gs1) / w_a + ge / w_e)
    delta0_sq = 0.25 * eta1 * eta2 * w_a ** 2 / (
        eta1 * eta2 + w_a / (g + gs1) * (1 + 0.5 * eta2 * ge / w_e))
    chi_g = ge / model.d_gs ** 2
    chi = {lvl: 0.25 * (model.total_decay(lvl) + gphi) / model.lab_energy(lvl) ** 2
           for lvl in (A1, A2, E1, E2)}
    return CPTDerived(w_e, w_a, w_a2, eta1, eta2, d0, delta0_sq, g, gs1, gce, chi_g, chi)


def cpt_population_perturbative(derived: CPTDerived, delta):
    """``<Ey|P|Ey>`` to zeroth order in the CPT dip plus the ``A2`` correction.

    Valid near two-photon resonance; terms of order ``delta^4`` are dropped.
    """
    delta = np.asarray(delta, dtype=float)
    p0 = derived.d0 * delta ** 2 / (delta ** 2 + derived.delta0_sq)
    p2 = derived.floor * (1 - 2 * p0)
    out = p0 + p2
    return float(out) if out.ndim == 0 else out


def n14_flip_factor(model: CPTModel) -> float:
    """``A_g^2 chi_g + A_e^2 sum_f chi_f``; multiply by the ``Ey`` population."""
    d = cpt_derived(model)
    return model.a_g ** 2 * d.chi_g + model.a_e ** 2 * sum(d.chi.values())


def n14_flip_rate(model: CPTModel, h: float = 0.0, p_ey: float = None) -> float:
    """14N flip rate ``W_{m0+-1 <- m0}`` at Overhauser shift ``h``."""
    if p_ey is None:
        p_ey = ey_population(model, h)
    return n14_flip_factor(model) * p_ey


def c13_flip_factor(model: CPTModel, tensor: HyperfineTensor) -> float:
    d = cpt_derived(model)
    amm = abs(tensor.component("-", "-")) ** 2
    apm = abs(tensor.component("+", "-")) ** 2
    aym = abs(tensor.component("Y", "-")) ** 2
    axm = abs(tensor.component("X", "-")) ** 2
    return (d.chi_g * (amm + apm) / 8
            + aym * (d.chi[A1] + d.chi[E1]) / 2
            + axm * (d.chi[A2] + d.chi[E2]) / 2)


def c13_flip_rate(model: CPTModel, h: float, tensor: HyperfineTensor, p_ey: float = None):
    """``(W_up, W_down)`` for one 13C nucleus; the two directions coincide."""
    if p_ey is None:
        p_ey = ey_population(model, h)
    w = c13_flip_factor(model, tensor) * p_ey
    return w, w


def c13_ground_flip(tensor: HyperfineTensor) -> np.ndarray:
    """Electron operator of the ``|0> -> |+-1>`` part of ``<up|V|down>`` for one 13C.

    With ``S . A . I`` and ``<up|I_+|down> = 1`` the flip operator is
    ``(1/2) S . (A . e_-)``; its ``|+-1><0|`` entries are
    ``(sqrt(2)/4) A_{-+,-}`` (local frame, ``e_Z`` along the N-V axis).
    In the rotating frame this channel oscillates at ``omega = -D_gs``.
    """
    c_plus = np.sqrt(2) / 4 * tensor.component("-", "-")
    c_minus = np.sqrt(2) / 4 * tensor.component("+", "-")
    flip = np.zeros((10, 10), dtype=complex)
    # |+1> = (b + d)/sqrt(2), |-1> = (d - b)/sqrt(2)
    flip[B, G0] = (c_plus - c_minus) / np.sqrt(2)
    flip[D, G0] = (c_plus + c_minus) / np.sqrt(2)
    return flip


@dataclass(frozen=True)
class Fluorescence:
    unconditional: float
    post_selected: float


def fluorescence(weights, shifts, model: CPTModel, omega_re: float,
                 efficiency: float, t_cond: float) -> Fluorescence:
    """Unconditional and post-selected ``Ey`` population at readout field ``omega_re``.

    ``weights[k]`` is the probability of nuclear configuration ``k`` and
    ``shifts[k]`` its Overhauser shift.  The readout model has its Zeeman
    term replaced by ``omega_re``.
    """
    weights = np.asarray(weights, dtype=float)
    shifts = np.asarray(shifts, dtype=float)
    if weights.shape != shifts.shape:
        raise ValueError("weights and shifts must have the same shape")
    readout = model.replace(zeeman=omega_re)
    pops = np.array([ey_population(readout, h) for h in shifts])
    return fluorescence_from_populations(weights, pops, model.gamma, efficiency, t_cond)


def fluorescence_from_populations(weights, pops, gamma, efficiency, t_cond) -> Fluorescence:
    weights = np.asarray(weights, dtype=float)
    pops = np.asarray(pops, dtype=float)
    uncond = float(weights @ pops)
    post = float(weights @ (pops * np.exp(-efficiency * gamma * t_cond * pops)))
    return Fluorescence(uncond, post)


@dataclass(frozen=True)
class C13Ensemble:
    """Uniformly coupled 13C nuclei with tensor ``diag(a_perp, a_perp, a)``."""

    n: int
    a: float
    a_perp: float
    gamma_c: float

    @property
    def tensor(self) -> HyperfineTensor:
        return HyperfineTensor(np.diag([self.a_perp, self.a_perp, self.a]))


@dataclass(frozen=True)
class Preset:
    name: str
    model: CPTModel
    efficiency: float
    t_cond: float
    readout_rabi: tuple
    zeeman_prep: float
    ensemble: C13Ensemble
    description: str = ""


def togan2011() -> Preset:
    """Parameter set of the published CPT experiment.

    Rates and couplings quoted in the experiment's parameter table; the
    laser ``Ey`` Rabi frequency, excited-state energies, zero-field
    splitting and the 13C ensemble are not part of that table and use
    representative values (see ``README``).
    """
    g = GAMMA_RADIATIVE
    zeeman_prep = mhz(0.18)
    model = CPTModel(
        omega_a=mhz(2.0), omega_e=mhz(40.0), delta_a2=mhz(3100.0), zeeman=0.0,
        gamma=g, gamma_s1=g, gamma_s2=g / 120, gamma_s=g / 33, gamma_ce=g / 800,
        gamma_phi=0.0, a_g=mhz(2.2), a_e=mhz(40.0))
    ensemble = C13Ensemble(n=8, a=zeeman_prep / 2, a_perp=mhz(0.5), gamma_c=2.5e-2 * 1e-6)
    return Preset("togan2011", model, efficiency=5e-4, t_cond=288.0,
                  readout_rabi=(mhz(3.2), mhz(10.0), mhz(8.0)), zeeman_prep=zeeman_prep,
                  ensemble=ensemble,
                  description="NV CPT experiment: 14N cooling and 13C noise suppression")


PRESETS = {"togan2011": togan2011}
