"""Scenario orchestration: configuration in, result tables and summary scalars out.

All values in tables and summaries are in internal units (rad/us for
frequencies, 1/us for rates, us for times); each column declares its unit.
Nothing here is random, so a given configuration always yields identical
results.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig, field_kind
from .exceptions import NumericalError
from .models.cpt import (C13Ensemble, cpt_derived, cpt_population_perturbative, ey_population)
from .models.squeeze import SqueezeModel, squeeze_coefficients
from .models.two_level import TwoLevelCycleModel, two_level_rates
from .nuclear import compare_with_brute_force, noise_distribution
from .pipelines import (c13_rates, c13_steady_weights, conditioned_weights, dip_width,
                        fluorescence_curves, n14_cooling_time, n14_steady_p0, n14_trace,
                        noise_suppression)

log = logging.getLogger(__name__)

FREQ, RATE, TIME, ONE = "rad_per_us", "per_us", "us", "dimensionless"


@dataclass
class ResultTable:
    """Rectangular table with one unit per column."""

    name: str
    columns: list
    units: list
    rows: np.ndarray

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if self.rows.size == 0:
            self.rows = self.rows.reshape(0, len(self.columns))
        if len(self.columns) != len(self.units) or self.rows.shape[1] != len(self.columns):
            raise ValueError(f"table {self.name!r} is not rectangular")

    @property
    def header(self) -> str:
        return ",".join(f"{c}:{u}" for c, u in zip(self.columns, self.units))

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]


@dataclass
class RunResult:
    tables: list
    summary: dict = field(default_factory=dict)

    def table(self, name: str) -> ResultTable:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)


# --- single-point evaluators -------------------------------------------------

def _two_level_model(cfg: ScenarioConfig) -> TwoLevelCycleModel:
    m = cfg.sections["model"]
    direction = np.asarray(m["zeeman_direction"], dtype=float)
    norm = np.linalg.norm(direction)
    if norm == 0:
        raise ValueError("model.zeeman_direction must be nonzero")
    return TwoLevelCycleModel(m["rabi"], m["detuning"], m["gamma1"], m["gamma_phi"],
                              m["a_g"], m["a_e"], m["zeeman"] * direction / norm)


TWO_LEVEL_COLUMNS = [("zeeman", FREQ), ("gamma_phi_analytic", RATE), ("gamma_phi_numeric", RATE),
                     ("gamma_1_analytic", RATE), ("gamma_1_numeric", RATE), ("T1", TIME),
                     ("T2", TIME), ("w_up", RATE), ("w_down", RATE)]


def _two_level_row(cfg: ScenarioConfig) -> list:
    r = two_level_rates(_two_level_model(cfg))
    return [cfg.get("model.zeeman"), r.gamma_phi_analytic, r.gamma_phi, r.gamma_1_analytic,
            r.gamma_1, r.t1, r.t2, r.w_up, r.w_down]


SQUEEZE_COLUMNS = [("rabi", FREQ), ("detuning", FREQ), ("p11", ONE), ("p11_slope", "per_rad_per_us"),
                   ("squeezing_time", TIME), ("gamma_phi", RATE), ("gamma_phi_analytic", RATE),
                   ("dephasing_product", ONE), ("dephasing_product_analytic", ONE)]


def _squeeze_row(cfg: ScenarioConfig) -> list:
    m = cfg.sections["model"]
    model = SqueezeModel(m["rabi"], m["detuning"], m["gamma1"], m["coupling"], m["n_nuclei"])
    c = squeeze_coefficients(model)
    n = model.n_nuclei
    return [model.rabi, model.detuning, c.p11, c.p11_slope, c.squeezing_time, c.gamma_phi,
            c.gamma_phi_analytic, c.dephasing_product(n), c.dephasing_product_analytic(n)]


def _ensemble(cfg: ScenarioConfig) -> C13Ensemble:
    e = cfg.sections["ensemble"]
    return C13Ensemble(e["n"], e["a"], e["a_perp"], cfg.get("experiment.gamma_c"))


def _cpt_point(cfg: ScenarioConfig) -> RunResult:
    model = cfg.cpt_model()
    exp = cfg.sections["experiment"]
    grids = cfg.sections["grids"]
    tables, summary = [], {}

    derived = cpt_derived(model)
    delta0 = float(np.sqrt(derived.delta0_sq))
    deltas = np.asarray(grids.get("detuning", np.linspace(-10 * delta0, 10 * delta0, 201)))
    log.info("cpt: Ey population on %d detunings", deltas.size)
    exact = [ey_population(model, d - model.zeeman) for d in deltas]
    approx = cpt_population_perturbative(derived, deltas)
    tables.append(ResultTable("ey_population", ["delta", "Ey_population", "Ey_perturbative"],
                              [FREQ, ONE, ONE], np.column_stack([deltas, exact, approx])))
    summary["cpt"] = {"d0": derived.d0, "delta0": delta0, "floor": derived.floor,
                      "w_e": derived.w_e, "w_a": derived.w_a, "w_a2": derived.w_a2,
                      "floor_numeric": ey_population(model, -model.zeeman)}

    n14_model = model.replace(zeeman=exp["n14_zeeman"])
    rabis = np.asarray(grids.get("rabi", 2 * np.pi * np.geomspace(0.25, 32.0, 8)))
    log.info("cpt: 14N steady state on %d Rabi frequencies", rabis.size)
    rows = []
    for rabi in rabis:
        m = n14_model.replace(omega_a=rabi)
        rows.append([rabi, n14_steady_p0(m), n14_steady_p0(m.replace(include_a2=False)),
                     n14_cooling_time(m)])
    tables.append(ResultTable("n14_rabi", ["omega_a", "p0", "p0_without_a2", "cooling_time"],
                              [FREQ, ONE, ONE, TIME], rows))
    times = np.asarray(grids["time"])
    tables.append(ResultTable("n14_trace", ["time", "p0"], [TIME, ONE],
                              np.column_stack([times, n14_trace(n14_model, times)])))
    summary["n14"] = {"cooling_time": n14_cooling_time(n14_model),
                      "p0_steady": n14_steady_p0(n14_model)}

    ens = _ensemble(cfg)
    prep = model.replace(zeeman=exp["zeeman_prep"])
    log.info("cpt: 13C steady weights (N = %d)", ens.n)
    weights, shifts = c13_steady_weights(prep, ens, ens.gamma_c)
    supp = noise_suppression(prep, ens, ens.gamma_c)
    cond = conditioned_weights(prep, weights, shifts, exp["efficiency"], exp["t_cond"])
    tables.append(ResultTable("c13_weights", ["h", "prepared", "conditioned"], [FREQ, ONE, ONE],
                              np.column_stack([shifts, weights, cond])))
    summary["c13"] = {"variance": supp.variance, "sigma_th2": supp.sigma_th2,
                      "variance_ratio": supp.ratio, "mean": supp.mean}

    h_max = ens.a * ens.n / 2
    readout = np.asarray(grids.get("readout", np.linspace(-3 * h_max, 3 * h_max, 121)))
    rows, widths = [], []
    for rabi in np.atleast_1d(exp["readout_rabi"]):
        log.info("cpt: fluorescence at readout Rabi %.6g rad/us", rabi)
        c = fluorescence_curves(model.replace(omega_a=rabi), weights, shifts, readout,
                                exp["efficiency"], exp["t_cond"], conditioned=cond)
        rows.extend(np.column_stack([np.full(readout.size, rabi), readout, c.thermal, c.prepared,
                                     c.post_selected, c.conditioned]))
        widths.append({"readout_rabi": float(rabi),
                       "thermal": dip_width(readout, c.thermal),
                       "prepared": dip_width(readout, c.prepared),
                       "conditioned": dip_width(readout, c.conditioned)})
    tables.append(ResultTable("fluorescence",
                              ["readout_rabi", "omega_re", "thermal", "prepared", "post_selected",
                               "conditioned"], [FREQ, FREQ, ONE, ONE, ONE, ONE], rows))
    summary["dip_width"] = widths
    return RunResult(tables, summary)


def _noise_point(cfg: ScenarioConfig) -> RunResult:
    model = cfg.cpt_model()
    ens = _ensemble(cfg)
    prep = model.replace(zeeman=cfg.get("experiment.zeeman_prep"))
    rate = c13_rates(prep, ens, ens.gamma_c)
    log.info("noise: feedback distribution (N = %d)", ens.n)
    dist = noise_distribution(rate, rate, ens.n, ens.a)
    oracle = compare_with_brute_force(rate, rate, ens.n, ens.a, dist)
    tables = [
        ResultTable("lattice", ["h", "p_analytic", "p_bruteforce"], [FREQ, ONE, ONE],
                    np.column_stack([oracle.h, oracle.analytic, oracle.brute_force])),
        ResultTable("density", ["h", "density"], [FREQ, "per_rad_per_us"],
                    np.column_stack([dist.h, dist.density])),
    ]
    brute_mean = float(oracle.h @ oracle.brute_force)
    brute_var = float(((oracle.h - brute_mean) ** 2) @ oracle.brute_force)
    summary = {"h_star": dist.h_star, "roots": list(dist.roots), "sigma2": dist.sigma2,
               "sigma_th2": dist.sigma_th2, "sigma_ratio": float(np.sqrt(dist.sigma2 / dist.sigma_th2)),
               "feedback_slope": dist.feedback_slope, "h_max": dist.h_max,
               "tv_distance": oracle.tv,
               "bruteforce_sigma_ratio": float(np.sqrt(brute_var / dist.sigma_th2))}
    return RunResult(tables, {"noise": summary})


ROW_SCENARIOS = {"two-level": ("rates", TWO_LEVEL_COLUMNS, _two_level_row),
                 "squeeze": ("coefficients", SQUEEZE_COLUMNS, _squeeze_row)}
POINT_SCENARIOS = {"cpt": _cpt_point, "noise": _noise_point}


# --- sweep driver --------------------------------------------------------------

def _evaluate(args):
    scenario, cfg, index = args
    try:
        if scenario in ROW_SCENARIOS:
            return ROW_SCENARIOS[scenario][2](cfg)
        return POINT_SCENARIOS[scenario](cfg)
    except NumericalError as exc:
        where = f" at sweep point {index}" if index is not None else ""
        raise type(exc)(f"{scenario} scenario{where}: {exc}") from exc


def _map(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [_evaluate(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        # map preserves submission order, i.e. grid index order
        return list(pool.map(_evaluate, tasks))


def run_scenario(cfg: ScenarioConfig, workers: int = 1) -> RunResult:
    """Evaluate a scenario, optionally over a sweep, in grid-index order.

    Raises
    ------
    NumericalError
        Propagated from the models, with the scenario and sweep index prepended.
    """
    if cfg.sweep is None:
        points = [(cfg.scenario, cfg, None)]
    else:
        points = [(cfg.scenario, cfg.with_value(cfg.sweep.path, v), i)
                  for i, v in enumerate(cfg.sweep.values)]
    log.info("%s: %d point(s), %d worker(s)", cfg.scenario, len(points), workers)
    results = _map(points, workers)

    if cfg.scenario in ROW_SCENARIOS:
        name, cols, _ = ROW_SCENARIOS[cfg.scenario]
        table = ResultTable(name, [c for c, _ in cols], [u for _, u in cols], results)
        if cfg.sweep is not None:
            table = _prepend_sweep(table, cfg)
        return RunResult([table], {})

    if cfg.sweep is None:
        return results[0]
    tables, summaries = [], []
    for i, (value, res) in enumerate(zip(cfg.sweep.values, results)):
        for t in res.tables:
            tables.append(ResultTable(f"{t.name}_{i:03d}", t.columns, t.units, t.rows))
        summaries.append({"index": i, cfg.sweep.path: value, **res.summary})
    return RunResult(tables, {"sweep": summaries})


def _prepend_sweep(table: ResultTable, cfg: ScenarioConfig) -> ResultTable:
    name = cfg.sweep.path.split(".", 1)[1]
    if name in table.columns:
        return table
    kind = field_kind(cfg.scenario, cfg.sweep.path)
    unit = {"frequency": FREQ, "rate": RATE, "time": TIME}.get(kind, ONE)
    rows = np.column_stack([np.asarray(cfg.sweep.values, dtype=float), table.rows])
    return ResultTable(table.name, [name] + table.columns, [unit] + table.units, rows)
